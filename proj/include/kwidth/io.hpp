#pragma once

// Tabular output with fixed schemas. CSV numbers are printed with 17
// significant digits; JSON mirrors the rows under a provenance block.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kwidth/bounds.hpp"
#include "kwidth/experiment.hpp"
#include "kwidth/spectrum.hpp"

namespace kwidth::io {

using json = nlohmann::json;

struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw DomainError("table '" + schema + "': row width mismatch");
    rows.push_back(std::move(row));
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const json& cell) {
  if (cell.is_string()) {
    const auto s = cell.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_number_float()) return format_double(cell.get<double>());
  if (cell.is_null()) return "";
  return cell.dump();
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

/// Keys are emitted sorted; non-finite numbers become null.
inline json to_json(const Table& t, const json& provenance) {
  json out;
  out["schema"] = t.schema;
  out["columns"] = t.columns;
  out["provenance"] = provenance;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& c = row[i];
      obj[t.columns[i]] = c.is_number_float() && !std::isfinite(c.get<double>()) ? json() : c;
    }
    rows.push_back(std::move(obj));
  }
  out["rows"] = std::move(rows);
  return out;
}

inline void write_json(std::ostream& os, const Table& t, const json& provenance) {
  os << to_json(t, provenance).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

inline std::vector<json> spec_cells(int d, const ActivationSpec& s) {
  return {d, std::string(kind_name(s.kind)), s.alpha, s.gamma, s.bias};
}

inline Table spectrum_table(const KernelSpectrum& ks) {
  Table t{"spectrum", {"d", "kind", "alpha", "gamma", "bias", "k", "mult", "mu", "cum_count", "cum_energy"}, {}};
  std::uint64_t count = 0;
  CompensatedSum<double> energy;
  for (int k = 0; k <= ks.max_degree(); ++k) {
    count += ks.mult[k];
    energy.add(static_cast<double>(ks.mult[k]) * ks.mu[k]);
    auto row = spec_cells(ks.dimension, ks.spec);
    row.insert(row.end(), {k, ks.mult[k], ks.mu[k], count, energy.value()});
    t.add(std::move(row));
  }
  return t;
}

/// Reference curve matching the activation: the ReLU^alpha lower rate for
/// nonsmooth kinds, the arctan rate with r = gamma + |b|, d/m otherwise.
inline BoundCurve overlay_for(const ActivationSpec& s, int d, const std::vector<std::uint64_t>& ms) {
  if (is_nonsmooth(s.kind) && d >= 3) return relu_alpha_lower(d, s.kind == Kind::step ? 0 : s.alpha, ms);
  if (s.kind == Kind::arctan) return arctan_upper(d, s.gamma + std::abs(s.bias), ms);
  return smooth_upper(d, ms);
}

inline Table decay_table(const TraceDecay& td, const BoundCurve* overlay = nullptr) {
  Table t{"decay", {"d", "kind", "alpha", "gamma", "bias", "m", "Lambda"}, {}};
  if (overlay) t.columns.insert(t.columns.end(), {"bound_label", "bound", "bound_direction"});
  for (std::size_t i = 0; i < td.m_values.size(); ++i) {
    auto row = spec_cells(td.dimension, td.spec);
    row.insert(row.end(), {td.m_values[i], td.lambda_values[i]});
    if (overlay) {
      row.insert(row.end(), {overlay->label, overlay->values.at(i), direction_name(overlay->direction)});
    }
    t.add(std::move(row));
  }
  return t;
}

inline Table bounds_table(const std::vector<BoundCurve>& curves) {
  Table t{"bounds", {"label", "d", "alpha_or_r", "m", "value", "direction", "validity"}, {}};
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
      t.add({c.label, c.dimension, c.alpha_or_r, c.m_values[i], c.values[i],
             direction_name(c.direction), c.validity});
    }
  }
  return t;
}

inline Table separation_table(const std::vector<SeparationReport>& reports) {
  Table t{"separation",
          {"d", "kind", "alpha", "m", "n", "ridge", "trials", "mean_err", "stderr", "lambda_m", "seed"},
          {}};
  for (const auto& r : reports) {
    const auto& c = r.config;
    t.add({c.dimension, std::string(kind_name(c.target.kind)), c.target.alpha, c.feature_count,
           c.train_count(), c.ridge, c.trials, r.mean_error, r.std_error, r.lambda_m, c.seed});
  }
  return t;
}

inline Table supdecay_table(const SupTraceDecay& s) {
  Table t{"supdecay",
          {"d", "kind", "alpha", "r", "grid", "m", "Lambda_r", "argmax_gamma", "argmax_bias", "argmax_is_r0"},
          {}};
  for (std::size_t i = 0; i < s.m_values.size(); ++i) {
    const auto& p = s.grid[s.argmax[i]];
    t.add({s.dimension, std::string(kind_name(s.kind)), s.alpha, s.r, s.grid_size, s.m_values[i],
           s.sup_curve[i], p.gamma, p.bias, s.argmax_is_r0(i)});
  }
  return t;
}

inline Table rtrend_table(const RTrendStudy& st) {
  Table t{"rtrend", {"kind", "d", "r", "m", "Lambda_r", "slope"}, {}};
  for (const auto& row : st.rows) {
    for (std::size_t i = 0; i < row.sup.m_values.size(); ++i) {
      t.add({std::string(kind_name(st.kind)), st.dimension, row.r, row.sup.m_values[i],
             row.sup.sup_curve[i], row.slope});
    }
  }
  return t;
}

}  // namespace kwidth::io
