#pragma once

// File formats:
//   candidate CSV   header row; numeric regressor columns, plus optional
//                   label columns whose names start with "s_"
//   design JSON     {"weights": [...], "active": [...]} aligned by index
//   trace CSV       k,phi,eps,n_active,C,pruned
//   bound JSON      {t, eps, beta, alpha, gamma, omega1, B, C, h_p, t_star_known, argmax}
// Floating-point text output uses 17 significant digits.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "optdes/bound.hpp"
#include "optdes/designspace.hpp"
#include "optdes/errors.hpp"
#include "optdes/solver.hpp"

namespace optdes {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t line_no, std::size_t col) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": cannot parse '" + std::string(field) + "' as a finite number");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f.precision(17);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open '" + path + "'");
  return f;
}

}  // namespace detail

inline CandidateSet read_candidates_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    for (auto f : detail::split_csv(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw InputError("candidate CSV: missing header row");

  std::vector<std::size_t> feature_cols;
  std::vector<std::size_t> label_cols;
  std::vector<std::string> label_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty())
      throw InputError("line " + std::to_string(line_no) + ": empty column name in header");
    if (header[c].rfind("s_", 0) == 0) {
      label_cols.push_back(c);
      label_names.push_back(header[c]);
    } else {
      feature_cols.push_back(c);
    }
  }
  if (feature_cols.empty()) throw InputError("candidate CSV: header has no regressor columns");

  std::vector<double> coords;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != header.size())
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    for (auto c : feature_cols) coords.push_back(detail::parse_number(fields[c], line_no, c));
    for (auto c : label_cols) labels.push_back(detail::parse_number(fields[c], line_no, c));
  }
  if (coords.empty()) throw InputError("candidate CSV: no data rows");
  return CandidateSet(feature_cols.size(), std::move(coords), std::move(label_names), std::move(labels));
}

inline CandidateSet read_candidates_csv(const std::string& path) {
  auto f = detail::open_in(path);
  return read_candidates_csv(f);
}

inline void write_candidates_csv(std::ostream& out, const CandidateSet& cands) {
  for (std::size_t j = 0; j < cands.dim(); ++j) out << (j ? "," : "") << "x" << j;
  for (const auto& n : cands.label_names()) out << "," << n;
  out << "\n";
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto x = cands.point(i);
    for (std::size_t j = 0; j < x.size(); ++j) out << (j ? "," : "") << format_double(x[j]);
    for (double s : cands.labels(i)) out << "," << format_double(s);
    out << "\n";
  }
}

struct DesignFile {
  DesignMeasure design;
  std::vector<bool> active;
};

inline nlohmann::json design_to_json(const DesignMeasure& xi, const std::vector<bool>& active) {
  nlohmann::json j;
  j["weights"] = xi.weights;
  j["active"] = active;
  return j;
}

inline void write_design_json(std::ostream& out, const DesignMeasure& xi, const std::vector<bool>& active) {
  out << design_to_json(xi, active).dump(1) << "\n";
}

// Weights off by more than 1e-12 (but at most 1e-6) from unit mass are
// rescaled; larger deviations are rejected.
inline DesignFile read_design_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("design JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("weights") || !j["weights"].is_array())
    throw InputError("design JSON: expected an object with a \"weights\" array");
  DesignFile f;
  for (std::size_t i = 0; i < j["weights"].size(); ++i) {
    const auto& w = j["weights"][i];
    if (!w.is_number()) throw InputError("design JSON: weights[" + std::to_string(i) + "] is not a number");
    f.design.weights.push_back(w.get<double>());
  }
  if (j.contains("active")) {
    const auto& a = j["active"];
    if (!a.is_array() || a.size() != f.design.size())
      throw InputError("design JSON: \"active\" must be a boolean array aligned with \"weights\"");
    for (const auto& b : a) {
      if (!b.is_boolean()) throw InputError("design JSON: \"active\" entries must be booleans");
      f.active.push_back(b.get<bool>());
    }
  } else {
    f.active.assign(f.design.size(), true);
  }
  const double total = f.design.total();
  if (std::abs(total - 1.0) > 1e-6)
    throw InputError("design JSON: weights sum to " + format_double(total) + ", expected 1");
  if (std::abs(total - 1.0) > kNormalizationTol)
    for (double& w : f.design.weights) w /= total;
  return f;
}

inline DesignFile read_design_json(const std::string& path) {
  auto f = detail::open_in(path);
  return read_design_json(f);
}

inline nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"t", r.t},         {"eps", r.eps}, {"beta", r.beta}, {"alpha", r.alpha},
                        {"gamma", r.gamma}, {"omega1", r.omega1}, {"B", r.B}, {"C", r.C},
                        {"h_p", r.h_p},     {"t_star_known", r.t_star_known}, {"argmax", r.argmax}};
}

inline void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << "k,phi,eps,n_active,C,pruned\n";
  for (const auto& r : trace.rows) {
    out << r.k << "," << format_double(r.phi) << "," << format_double(r.eps) << "," << r.n_active << ","
        << (r.C ? format_double(*r.C) : std::string()) << "," << r.pruned << "\n";
  }
}

}  // namespace optdes
