#pragma once

#include <stdexcept>
#include <string>

namespace hwqsvm {

/// Base of every error raised by the library. The CLI maps the category to
/// an exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Config, Data, Runtime };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

#define HWQSVM_DEFINE_ERROR(Name, Cat)                                  \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(Category::Cat, what) {} \
  }

HWQSVM_DEFINE_ERROR(InvalidParameterError, Runtime);
HWQSVM_DEFINE_ERROR(TopologyError, Runtime);
HWQSVM_DEFINE_ERROR(RepresentationError, Runtime);
HWQSVM_DEFINE_ERROR(BindingError, Runtime);
HWQSVM_DEFINE_ERROR(NormalizationError, Runtime);
HWQSVM_DEFINE_ERROR(DegenerateInputError, Runtime);
HWQSVM_DEFINE_ERROR(ShapeError, Runtime);
HWQSVM_DEFINE_ERROR(ParseError, Data);
HWQSVM_DEFINE_ERROR(DataError, Data);
HWQSVM_DEFINE_ERROR(ConfigError, Config);

#undef HWQSVM_DEFINE_ERROR

}  // namespace hwqsvm
