#include "molpack/xyz.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "molpack/elements.hpp"
#include "molpack/error.hpp"

namespace molpack {
namespace {

// Splits on '\n'; a trailing newline does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_blank(std::string_view line) { return split_fields(line).empty(); }

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError("xyz: line " + std::to_string(line_no + 1) + ": " + what);
}

double parse_double_field(std::string_view field, std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail(line_no, std::string("cannot parse ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

long parse_count_field(std::string_view field, std::size_t line_no) {
  long value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0) {
    fail(line_no, "expected a non-negative atom count, got '" + std::string(field) + "'");
  }
  return value;
}

// A comment token "E=<float>" carries the molecule label.  Tokens that merely
// start with "E=" but do not parse as a float are treated as free-form text.
std::optional<double> extract_label(std::string_view comment) {
  for (std::string_view field : split_fields(comment)) {
    if (field.size() <= 2 || field.substr(0, 2) != "E=") continue;
    std::string_view payload = field.substr(2);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(payload.data(), payload.data() + payload.size(), value);
    if (ec == std::errc() && ptr == payload.data() + payload.size()) return value;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Molecule> parse_xyz(std::string_view text, std::string_view id_prefix) {
  const auto lines = split_lines(text);
  std::vector<Molecule> molecules;
  std::size_t ln = 0;
  while (ln < lines.size()) {
    if (is_blank(lines[ln])) {  // stray blank lines between frames are tolerated
      ++ln;
      continue;
    }
    const auto count_fields = split_fields(lines[ln]);
    if (count_fields.size() != 1) {
      fail(ln, "expected a lone atom count starting a frame");
    }
    const long n_atoms = parse_count_field(count_fields[0], ln);
    if (ln + 1 >= lines.size()) fail(ln, "frame truncated before its comment line");

    Molecule mol;
    mol.id = std::string(id_prefix) + std::to_string(molecules.size());
    mol.label = extract_label(lines[ln + 1]);
    mol.atomic_numbers.reserve(static_cast<std::size_t>(n_atoms));
    mol.positions.reserve(static_cast<std::size_t>(n_atoms));

    std::size_t atom_ln = ln + 2;
    for (long a = 0; a < n_atoms; ++a, ++atom_ln) {
      if (atom_ln >= lines.size()) {
        fail(ln, "frame declares " + std::to_string(n_atoms) + " atoms but input ends after " +
                     std::to_string(a));
      }
      const auto fields = split_fields(lines[atom_ln]);
      if (fields.size() != 4) {
        fail(atom_ln, "expected '<symbol> <x> <y> <z>', got " +
                          std::to_string(fields.size()) + " fields");
      }
      const auto z = element_number(fields[0]);
      if (!z) fail(atom_ln, "unknown element symbol '" + std::string(fields[0]) + "'");
      mol.atomic_numbers.push_back(static_cast<std::int32_t>(*z));
      mol.positions.push_back({parse_double_field(fields[1], atom_ln, "x coordinate"),
                               parse_double_field(fields[2], atom_ln, "y coordinate"),
                               parse_double_field(fields[3], atom_ln, "z coordinate")});
    }
    molecules.push_back(std::move(mol));
    ln = atom_ln;
  }
  return molecules;
}

std::string format_xyz(std::span<const Molecule> molecules) {
  std::string out;
  char buf[256];
  for (const Molecule& mol : molecules) {
    mol.validate();
    out += std::to_string(mol.size());
    out += '\n';
    if (mol.label) {
      std::snprintf(buf, sizeof(buf), "E=%.17g", *mol.label);
      out += buf;
    }
    out += '\n';
    for (std::size_t a = 0; a < mol.size(); ++a) {
      std::string_view sym = element_symbol(mol.atomic_numbers[a]);
      std::snprintf(buf, sizeof(buf), "%.*s %.17g %.17g %.17g", static_cast<int>(sym.size()),
                    sym.data(), mol.positions[a][0], mol.positions[a][1], mol.positions[a][2]);
      out += buf;
      out += '\n';
    }
  }
  return out;
}

}  // namespace molpack
