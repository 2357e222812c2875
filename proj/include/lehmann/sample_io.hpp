#pragma once

// Sample CSV format:
//
//   # seed=<uint64>
//   # source=<extended descriptor>
//   # generator=<bit generator name>
//   value
//   <v_1>
//   ...
//
// Values are written in shortest round-trip form, so reading a file back
// gives bit-identical doubles.

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lehmann/errors.hpp"
#include "lehmann/extended.hpp"
#include "lehmann/numeric.hpp"

namespace lehmann {

inline void write_sample_csv(std::ostream& os, const Sample& s) {
  os << "# seed=" << s.seed << '\n';
  os << "# source=" << s.source << '\n';
  os << "# generator=" << s.generator << '\n';
  os << "value\n";
  for (double v : s.values) os << format_double(v) << '\n';
}

inline std::string sample_to_csv(const Sample& s) {
  std::ostringstream os;
  write_sample_csv(os, s);
  return os.str();
}

inline Sample read_sample_csv(std::istream& is) {
  Sample s;
  s.generator.clear();
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "seed") {
        std::from_chars(value.data(), value.data() + value.size(), s.seed);
      } else if (key == "source") {
        s.source = value;
      } else if (key == "generator") {
        s.generator = value;
      }
      continue;
    }
    if (!header) {
      if (line != "value") {
        throw DomainError("sample csv: line " + std::to_string(lineno) +
                          ": expected header 'value'");
      }
      header = true;
      continue;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw DomainError("sample csv: line " + std::to_string(lineno) +
                        ": not a number: '" + line + "'");
    }
    s.values.push_back(v);
  }
  if (!header) throw DomainError("sample csv: missing header 'value'");
  return s;
}

}  // namespace lehmann
