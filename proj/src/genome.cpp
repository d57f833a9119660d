#include "hwqsvm/genome.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

int Genome::two_qubit_count() const {
  return static_cast<int>(std::count_if(tokens.begin(), tokens.end(), [](const GateToken& t) { return t.arity() == 2; }));
}

int Genome::qubit_span() const {
  int top = -1;
  for (const auto& t : tokens)
    for (int i = 0; i < t.arity(); ++i) top = std::max(top, t.qubits[static_cast<std::size_t>(i)]);
  return top + 1;
}

std::string format_token(const GateToken& token) {
  std::string out(gate_name(token.kind));
  out += ' ';
  out += std::to_string(token.qubits[0]);
  if (token.arity() == 2) {
    out += ',';
    out += std::to_string(token.qubits[1]);
  }
  if (token.feature) out += " f=" + std::to_string(*token.feature);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) parts.push_back(s.substr(i, j - i));
    i = j;
  }
  return parts;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

}  // namespace

GateToken parse_token(std::string_view text) {
  const auto parts = split_ws(trim(text));
  const std::string quoted = "'" + std::string(trim(text)) + "'";
  if (parts.size() < 2 || parts.size() > 3) throw ParseError("expected `KIND q0[,q1] [f=<feature>]`, got " + quoted);
  GateToken token;
  auto kind = parse_gate_kind(parts[0]);
  if (!kind) throw ParseError("unknown gate kind '" + std::string(parts[0]) + "' in " + quoted);
  token.kind = *kind;

  const auto comma = parts[1].find(',');
  const int given = comma == std::string_view::npos ? 1 : 2;
  if (given != token.arity())
    throw ParseError(std::string(gate_name(token.kind)) + " takes " + std::to_string(token.arity()) +
                     " qubit(s) in " + quoted);
  auto q0 = parse_int(parts[1].substr(0, comma));
  if (!q0) throw ParseError("bad qubit index in " + quoted);
  token.qubits = {*q0, -1};
  if (given == 2) {
    auto q1 = parse_int(parts[1].substr(comma + 1));
    if (!q1) throw ParseError("bad qubit index in " + quoted);
    if (*q1 == *q0) throw ParseError("two-qubit gate on a repeated qubit in " + quoted);
    token.qubits[1] = *q1;
  }
  if (parts.size() == 3) {
    if (!is_parametric(token.kind))
      throw ParseError("feature binding on non-parametric gate in " + quoted);
    if (parts[2].substr(0, 2) != "f=") throw ParseError("expected f=<feature> in " + quoted);
    auto f = parse_int(parts[2].substr(2));
    if (!f) throw ParseError("bad feature index in " + quoted);
    token.feature = *f;
  }
  return token;
}

std::string format_genome(const Genome& genome) {
  std::string out;
  for (const auto& t : genome.tokens) {
    out += format_token(t);
    out += '\n';
  }
  return out;
}

GenomeFile parse_genome_text(std::string_view text) {
  GenomeFile file;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        const auto key = trim(body.substr(0, eq));
        const auto value = parse_int(trim(body.substr(eq + 1)));
        if (key == "qubits" || key == "fixed_rz") {
          if (!value) throw ParseError("line " + std::to_string(line_no) + ": bad value for " + std::string(key));
          if (key == "qubits") file.qubits = *value;
          else file.fixed_rz = *value != 0;
        }
      }
      continue;
    }
    try {
      file.genome.tokens.push_back(parse_token(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + " (token " + std::to_string(file.genome.size()) +
                       "): " + e.what());
    }
    if (end == text.size()) break;
  }
  return file;
}

GenomeFile load_genome_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open genome file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_genome_text(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_genome_file(const GenomeFile& file) {
  std::string out;
  if (file.qubits) out += "# qubits=" + std::to_string(*file.qubits) + "\n";
  if (file.fixed_rz) out += "# fixed_rz=" + std::string(*file.fixed_rz ? "1" : "0") + "\n";
  return out + format_genome(file.genome);
}

}  // namespace hwqsvm
