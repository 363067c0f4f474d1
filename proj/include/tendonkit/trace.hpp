// Copyright 2026 The tendonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Simulation traces: fixed column layout, CSV round trip and run summaries.
// Layout is documented in docs/trace-format.md.

#ifndef TENDONKIT_TRACE_HPP_
#define TENDONKIT_TRACE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tendonkit/errors.hpp"
#include "tendonkit/model.hpp"

namespace tendonkit {

inline constexpr const char* kTraceSchema = "# tendonkit-trace v1";

struct Trace {
  std::string scenario;
  double sample_rate = 0.0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
  std::vector<int> columns_with_prefix(const std::string& prefix) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

inline Trace make_trace_layout(const RobotModel& model, const std::string& scenario, double sample_rate) {
  Trace t;
  t.scenario = scenario;
  t.sample_rate = sample_rate;
  auto& c = t.columns;
  c.push_back("t");
  for (const auto& j : model.joints) c.push_back("q." + j.name);
  for (const auto& j : model.joints) c.push_back("qd." + j.name);
  for (const auto& j : model.joints) c.push_back("qref." + j.name);
  for (const auto& r : model.routes) c.push_back("f." + r.name);
  for (const auto& r : model.routes) c.push_back("fref." + r.name);
  for (const char* s : {"ee.x", "ee.y", "ee.z", "ee.vx", "ee.vy", "ee.vz", "ref.x", "ref.y", "ref.z",
                        "contact.force", "contact.vn", "contact.vt", "event_count", "qp.kkt", "energy"}) {
    c.emplace_back(s);
  }
  return t;
}

inline std::string format_g9(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string write_trace_csv(const Trace& t) {
  std::ostringstream os;
  os << kTraceSchema << " scenario=" << t.scenario << " sample_rate=" << format_g9(t.sample_rate) << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_g9(row[i]);
    os << "\n";
  }
  return os.str();
}

namespace detail {

inline bool known_trace_column(const std::string& c) {
  static const char* fixed[] = {"t", "ee.x", "ee.y", "ee.z", "ee.vx", "ee.vy", "ee.vz", "ref.x", "ref.y",
                                "ref.z", "contact.force", "contact.vn", "contact.vt", "event_count",
                                "qp.kkt", "energy"};
  for (const char* f : fixed) {
    if (c == f) return true;
  }
  for (const char* p : {"q.", "qd.", "qref.", "f.", "fref."}) {
    if (c.rfind(p, 0) == 0 && c.size() > std::string(p).size()) return true;
  }
  return false;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline Trace read_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kTraceSchema, 0) != 0) {
    throw SchemaError("trace does not start with '" + std::string(kTraceSchema) + "'");
  }
  Trace t;
  std::istringstream meta(line.substr(std::string(kTraceSchema).size()));
  std::string kv;
  while (meta >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    if (kv.substr(0, eq) == "scenario") t.scenario = kv.substr(eq + 1);
    if (kv.substr(0, eq) == "sample_rate") t.sample_rate = std::strtod(kv.c_str() + eq + 1, nullptr);
  }
  if (!std::getline(in, line)) throw SchemaError("trace has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = detail::split_csv(line);
  if (t.columns.empty() || t.columns[0] != "t") throw SchemaError("first trace column must be 't'");
  for (const auto& c : t.columns) {
    if (!detail::known_trace_column(c)) throw SchemaError("unknown trace column '" + c + "'");
  }
  for (const char* req : {"ee.x", "ee.y", "ee.z", "ref.x", "ref.y", "ref.z", "event_count"}) {
    if (t.column(req) < 0) throw SchemaError(std::string("trace lacks required column '") + req + "'");
  }
  const auto nq = t.columns_with_prefix("q.").size();
  if (t.columns_with_prefix("qd.").size() != nq || t.columns_with_prefix("qref.").size() != nq) {
    throw SchemaError("trace joint column groups differ in size");
  }
  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() != t.columns.size()) {
      throw SchemaError("trace row at line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(t.columns.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size()) {
        throw SchemaError("non-numeric cell '" + c + "' at line " + std::to_string(lineno));
      }
      row.push_back(v);
    }
    if (!t.rows.empty() && !(row[0] > t.rows.back()[0])) {
      throw SchemaError("trace time is not strictly increasing at line " + std::to_string(lineno));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Ordered key/value metrics.
struct Summary {
  std::vector<std::pair<std::string, double>> metrics;

  void set(const std::string& key, double value) {
    for (auto& [k, v] : metrics) {
      if (k == key) {
        v = value;
        return;
      }
    }
    metrics.emplace_back(key, value);
  }
  bool has(const std::string& key) const {
    return std::any_of(metrics.begin(), metrics.end(), [&](const auto& kv) { return kv.first == key; });
  }
  double get(const std::string& key) const {
    for (const auto& [k, v] : metrics) {
      if (k == key) return v;
    }
    throw InvalidArgument("summary has no metric '" + key + "'");
  }
};

struct SummaryOptions {
  double slide_min_speed = 0.05;  // m/s, tangential speed counted as sliding
  double slide_ratio = 10.0;      // vt > ratio * |vn|: the approach has been arrested
};

inline Summary summarize(const Trace& t, const SummaryOptions& opt = {}) {
  Summary s;
  const auto n = t.rows.size();
  s.set("rows", static_cast<double>(n));
  if (n == 0) return s;
  s.set("duration", t.rows.back()[0] - t.rows.front()[0]);

  const int ex = t.column("ee.x"), rx = t.column("ref.x");
  double err_max = 0.0, err_sq = 0.0;
  for (const auto& r : t.rows) {
    double e2 = 0.0;
    for (int k = 0; k < 3; ++k) e2 += (r[ex + k] - r[rx + k]) * (r[ex + k] - r[rx + k]);
    err_max = std::max(err_max, std::sqrt(e2));
    err_sq += e2;
  }
  s.set("error.max", err_max);
  s.set("error.rms", std::sqrt(err_sq / static_cast<double>(n)));

  const auto fcols = t.columns_with_prefix("f.");
  if (!fcols.empty()) {
    double peak = 0.0, low = std::numeric_limits<double>::infinity();
    for (int c : fcols) {
      double p = 0.0;
      for (const auto& r : t.rows) {
        p = std::max(p, r[c]);
        low = std::min(low, r[c]);
      }
      s.set("tension.peak." + t.columns[static_cast<std::size_t>(c)].substr(2), p);
      peak = std::max(peak, p);
    }
    s.set("tension.peak", peak);
    s.set("tension.min", low);
  }
  // Output of the tension stage, before wire-velocity feedback.
  const auto rcols = t.columns_with_prefix("fref.");
  if (!rcols.empty()) {
    double peak = 0.0, low = std::numeric_limits<double>::infinity();
    for (int c : rcols) {
      for (const auto& r : t.rows) {
        peak = std::max(peak, r[c]);
        low = std::min(low, r[c]);
      }
    }
    s.set("tension.ref_peak", peak);
    s.set("tension.ref_min", low);
  }

  const int vx = t.column("ee.vx");
  if (vx >= 0) {
    double vmax = 0.0;
    for (const auto& r : t.rows) vmax = std::max(vmax, std::sqrt(r[vx] * r[vx] + r[vx + 1] * r[vx + 1] + r[vx + 2] * r[vx + 2]));
    s.set("ee.peak_speed", vmax);
  }

  // Deflection after the first event that happens after the first row.
  const int ec = t.column("event_count");
  std::size_t e_row = n;
  for (std::size_t i = 1; i < n; ++i) {
    if (t.rows[i][ec] > t.rows[0][ec]) {
      e_row = i;
      break;
    }
  }
  if (e_row < n) {
    // The state at the last row before the event is the undisturbed pose.
    const auto& base = t.rows[e_row - 1];
    const double te = base[0];
    s.set("event.time", te);
    for (int c : t.columns_with_prefix("q.")) {
      double peak = 0.0, signed_peak = 0.0, t_peak = 0.0;
      for (std::size_t i = e_row; i < n; ++i) {
        const double d = t.rows[i][c] - base[c];
        if (std::abs(d) > peak) {
          peak = std::abs(d);
          signed_peak = d;
          t_peak = t.rows[i][0] - te;
        }
      }
      const std::string name = t.columns[static_cast<std::size_t>(c)].substr(2);
      s.set("deflection.peak." + name, signed_peak);
      s.set("deflection.time_to_peak." + name, t_peak);
    }
  }

  const int cf = t.column("contact.force"), cvn = t.column("contact.vn"), cvt = t.column("contact.vt");
  if (cf >= 0 && cvn >= 0 && cvt >= 0) {
    std::size_t first = n;
    double fpeak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      fpeak = std::max(fpeak, t.rows[i][cf]);
      if (first == n && t.rows[i][cf] > 0.0) first = i;
    }
    s.set("contact.peak_force", fpeak);
    if (first < n) {
      s.set("contact.first_time", t.rows[first][0]);
      for (std::size_t i = first; i < n; ++i) {
        const double vt = t.rows[i][cvt], vn = t.rows[i][cvn];
        if (vt > opt.slide_min_speed && vt > opt.slide_ratio * std::abs(vn)) {
          s.set("contact.slide_onset_time", t.rows[i][0]);
          s.set("contact.slide_delay", t.rows[i][0] - t.rows[first][0]);
          break;
        }
      }
    }
  }

  const int kkt = t.column("qp.kkt");
  if (kkt >= 0) {
    double m = 0.0;
    for (const auto& r : t.rows) m = std::max(m, r[kkt]);
    s.set("qp.kkt_max", m);
  }
  const int en = t.column("energy");
  if (en >= 0) {
    const double e0 = t.rows[0][en];
    double drift = 0.0;
    for (const auto& r : t.rows) drift = std::max(drift, std::abs(r[en] - e0));
    s.set("energy.initial", e0);
    s.set("energy.max_abs_drift", drift);
    if (e0 != 0.0) s.set("energy.relative_drift", drift / std::abs(e0));
  }
  return s;
}

inline std::string summary_text(const Summary& s) {
  std::ostringstream os;
  for (const auto& [k, v] : s.metrics) os << k << " = " << format_g9(v) << "\n";
  return os.str();
}

}  // namespace tendonkit

#endif  // TENDONKIT_TRACE_HPP_
