#pragma once
// CSV and JSON writers for the command-line tool. Numbers go out with 17
// significant digits, fields in a fixed order, LF line endings.

#include "dirac/identities.hpp"
#include "dirac/oracle.hpp"
#include "dirac/recurrence.hpp"
#include "dirac/states.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dirac::io {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no inf/nan; they are written as null.
inline std::string json_number(double x) { return std::isfinite(x) ? format_number(x) : "null"; }

inline std::string state_key(const QuantumState &s) {
  return std::to_string(s.n) + "," + std::to_string(s.two_j) + "," + std::to_string(s.eps);
}

inline std::string pair_key(const QuantumState &s1, const QuantumState &s2) {
  return state_key(s1) + ":" + state_key(s2);
}

/// "n,two_j,eps"; validity of the quantum numbers is left to make_state.
inline std::optional<std::array<int, 3>> parse_triple(std::string_view text) {
  std::array<int, 3> v{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto end = i < 2 ? text.find(',', pos) : text.size();
    if (end == std::string_view::npos) return std::nullopt;
    const std::string field(text.substr(pos, end - pos));
    if (field.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
      v[i] = std::stoi(field, &used);
    } catch (const std::exception &) {
      return std::nullopt;
    }
    if (used != field.size()) return std::nullopt;
    pos = end + 1;
  }
  return v;
}

inline std::optional<std::array<std::array<int, 3>, 2>> parse_pair(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto a = parse_triple(text.substr(0, colon));
  auto b = parse_triple(text.substr(colon + 1));
  if (!a || !b) return std::nullopt;
  return std::array<std::array<int, 3>, 2>{*a, *b};
}

// ---------------------------------------------------------------------------

inline void write_energy_header(std::ostream &os) { os << "n,two_j,eps,E_over_m\n"; }

inline void write_energy_row(std::ostream &os, const QuantumState &s, double e_over_m) {
  os << s.n << ',' << s.two_j << ',' << s.eps << ',' << format_number(e_over_m) << '\n';
}

inline void write_element_header(std::ostream &os) {
  os << "pair,op,lambda,method,value,err_est,delta_from_analytic\n";
}

inline void write_element_row(std::ostream &os, const QuantumState &s1, const QuantumState &s2,
                              const MatrixElement &e, std::optional<double> delta) {
  os << pair_key(s1, s2) << ',' << to_string(e.op) << ',' << format_number(e.lambda) << ','
     << to_string(e.method) << ',' << format_number(e.value) << ',' << format_number(e.err_est)
     << ',' << (delta ? format_number(*delta) : std::string()) << '\n';
}

/// `with_pair` prefixes every row with the pair, used when several ladders
/// share one file.
inline void write_ladder_header(std::ostream &os, bool with_pair) {
  if (with_pair) os << "pair,";
  os << "lambda,plain,beta,provenance,err_est\n";
}

inline void write_ladder_rows(std::ostream &os, const LadderTable &t, int lambda_min,
                              int lambda_max, bool with_seeds, bool with_pair) {
  for (const auto &[l, e] : t.entries) {
    if (!with_seeds && (l < lambda_min || l > lambda_max)) continue;
    if (with_pair) os << pair_key(t.s1, t.s2) << ',';
    os << l << ',' << format_number(e.plain) << ',' << format_number(e.beta) << ','
       << to_string(e.provenance) << ',' << format_number(e.err_est) << '\n';
  }
}

/// A JSON array of report records, one per line.
inline void write_audit_json(std::ostream &os, const std::vector<AuditRecord> &records) {
  os << "[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i].report;
    os << (i ? ",\n  " : "\n  ");
    os << "{\"relation_id\": \"" << to_string(r.relation_id) << "\", \"pair\": {\"n1\": " << r.s1.n
       << ", \"two_j1\": " << r.s1.two_j << ", \"eps1\": " << r.s1.eps << ", \"n2\": " << r.s2.n
       << ", \"two_j2\": " << r.s2.two_j << ", \"eps2\": " << r.s2.eps
       << "}, \"lambda\": " << r.lambda << ", \"lhs\": " << json_number(r.lhs)
       << ", \"rhs\": " << json_number(r.rhs)
       << ", \"rel_residual\": " << json_number(r.rel_residual) << ", \"verdict\": \""
       << to_string(r.verdict) << "\"}";
  }
  os << (records.empty() ? "]\n" : "\n]\n");
}

struct Failure {
  std::string task;
  std::string kind;
  std::string message;
};

inline void write_manifest(std::ostream &os, const std::vector<Failure> &failures) {
  nlohmann::ordered_json doc;
  doc["errors"] = nlohmann::ordered_json::array();
  for (const auto &f : failures)
    doc["errors"].push_back({{"task", f.task}, {"kind", f.kind}, {"message", f.message}});
  os << doc.dump(2) << '\n';
}

} // namespace dirac::io
