#pragma once

// Parameter sweeps behind the command-line tool: JSON configuration with
// field-level diagnostics, a deterministic task runner, and CSV/JSON writers.

#include "corr.hpp"
#include "fid.hpp"
#include "model.hpp"
#include "qinfo.hpp"
#include "spectrum.hpp"
#include "tlimit.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ringcut::sweep {

using json = nlohmann::json;

enum class Observable {
  BondProfileXX,
  BondProfileZZ,
  CorrelatorsVsJ,
  QdCcVsJ,
  ConcurrenceProfile,
  FidelityVsJ,
  SpectrumScan
};
enum class Engine { Finite, TLimit };
enum class Format { Csv, Json };

inline const std::vector<std::pair<Observable, std::string>>& observable_names() {
  static const std::vector<std::pair<Observable, std::string>> names{
      {Observable::BondProfileXX, "bond_profile_xx"},
      {Observable::BondProfileZZ, "bond_profile_zz"},
      {Observable::CorrelatorsVsJ, "correlators_vs_j"},
      {Observable::QdCcVsJ, "qd_cc_vs_j"},
      {Observable::ConcurrenceProfile, "concurrence_profile"},
      {Observable::FidelityVsJ, "fidelity_vs_j"},
      {Observable::SpectrumScan, "spectrum_scan"}};
  return names;
}

inline std::string to_string(Observable o) {
  for (const auto& [k, v] : observable_names())
    if (k == o) return v;
  return "?";
}

inline std::string to_string(Engine e) { return e == Engine::Finite ? "finite" : "tlimit"; }

struct SweepConfig {
  std::string name;
  Observable observable = Observable::BondProfileXX;
  Engine engine = Engine::Finite;
  Boundary boundary = Boundary::RingParityExact;
  std::vector<int> M;
  std::vector<double> j, h;
  int bond_lo = 0, bond_hi = 0;
  std::vector<std::pair<Site, Site>> pairs;
  bool normalize = false;
  std::string output;
  Format format = Format::Csv;
};

struct RunConfig {
  std::vector<SweepConfig> sweeps;
};

struct Diagnostic {
  enum class Level { Error, Warning };
  Level level;
  std::string field;
  std::string message;

  std::string str() const {
    return std::string(level == Level::Error ? "error" : "warning") + ": " + (field.empty() ? "" : field + ": ") +
           message;
  }
};

struct LoadResult {
  RunConfig config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.level == Diagnostic::Level::Error) return false;
    return true;
  }
};

namespace detail {

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line, col = 1;
    else ++col;
  }
  return {line, col};
}

class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& d) : diags_(d) {}

  void error(const std::string& field, const std::string& msg) {
    diags_.push_back({Diagnostic::Level::Error, field, msg});
  }
  void warning(const std::string& field, const std::string& msg) {
    diags_.push_back({Diagnostic::Level::Warning, field, msg});
  }

  // A grid is a number, a list, or {"from", "to", "count", "spacing"}; lists
  // may mix numbers and range objects.
  std::vector<double> grid(const json& v, const std::string& field) {
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto part = grid(v[i], field + "[" + std::to_string(i) + "]");
        out.insert(out.end(), part.begin(), part.end());
      }
    } else if (v.is_object()) {
      for (const auto& [key, _] : v.items())
        if (key != "from" && key != "to" && key != "count" && key != "spacing")
          error(field + "." + key, "unknown field in range");
      if (!v.contains("from") || !v.contains("to") || !v.contains("count")) {
        error(field, "range needs 'from', 'to' and 'count'");
        return out;
      }
      if (!v["from"].is_number() || !v["to"].is_number() || !v["count"].is_number_integer()) {
        error(field, "range 'from'/'to' must be numbers and 'count' an integer");
        return out;
      }
      const double a = v["from"].get<double>(), b = v["to"].get<double>();
      const long n = v["count"].get<long>();
      const std::string spacing = v.value("spacing", std::string("linear"));
      if (n < 1) {
        error(field + ".count", "must be >= 1");
        return out;
      }
      if (spacing != "linear" && spacing != "log") {
        error(field + ".spacing", "must be 'linear' or 'log'");
        return out;
      }
      if (spacing == "log" && (a <= 0 || b <= 0)) {
        error(field, "log spacing needs positive endpoints");
        return out;
      }
      for (long i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out.push_back(spacing == "log" ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
      }
      out[out.size() - n] = a;
      if (n > 1) out.back() = b;
    } else {
      error(field, "expected a number, a list or a range object");
    }
    for (double x : out)
      if (!std::isfinite(x)) error(field, "grid values must be finite");
    return out;
  }

  std::optional<Site> site(const json& v, const std::string& field) {
    if (!v.is_number()) {
      error(field, "site must be a half-integer number");
      return std::nullopt;
    }
    try {
      return Site::from_value(v.get<double>());
    } catch (const std::exception&) {
      error(field, "site " + v.dump() + " is not a half-integer");
      return std::nullopt;
    }
  }

 private:
  std::vector<Diagnostic>& diags_;
};

inline bool needs_bonds(Observable o) {
  return o == Observable::BondProfileXX || o == Observable::BondProfileZZ || o == Observable::ConcurrenceProfile;
}
inline bool needs_sites(Observable o) { return o == Observable::CorrelatorsVsJ || o == Observable::QdCcVsJ; }

inline SweepConfig read_sweep(const json& v, const std::string& path, int index, Reader& r) {
  SweepConfig c;
  const std::string pre = path.empty() ? "" : path + ".";
  c.name = "sweep" + std::to_string(index);
  if (!v.is_object()) {
    r.error(path, "sweep must be an object");
    return c;
  }
  static const std::vector<std::string> known{"name",  "observable", "engine", "boundary", "M",      "j",
                                              "h",     "bonds",      "sites",  "normalize", "output", "format"};
  for (const auto& [key, _] : v.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) r.error(pre + key, "unknown field");

  if (v.contains("name")) {
    if (v["name"].is_string()) c.name = v["name"].get<std::string>();
    else r.error(pre + "name", "must be a string");
  }
  if (!v.contains("observable")) {
    r.error(pre + "observable", "missing (one of bond_profile_xx, bond_profile_zz, correlators_vs_j, qd_cc_vs_j, "
                                  "concurrence_profile, fidelity_vs_j, spectrum_scan)");
  } else {
    bool found = false;
    if (v["observable"].is_string())
      for (const auto& [k, name] : observable_names())
        if (name == v["observable"].get<std::string>()) c.observable = k, found = true;
    if (!found) r.error(pre + "observable", "unknown observable " + v["observable"].dump());
  }
  if (v.contains("engine")) {
    const auto& e = v["engine"];
    if (e == "finite") c.engine = Engine::Finite;
    else if (e == "tlimit") c.engine = Engine::TLimit;
    else r.error(pre + "engine", "must be 'finite' or 'tlimit'");
  }
  c.boundary = c.observable == Observable::FidelityVsJ ? Boundary::RingNaive : Boundary::RingParityExact;
  if (v.contains("boundary")) {
    try {
      c.boundary = boundary_from_string(v["boundary"].is_string() ? v["boundary"].get<std::string>() : "");
    } catch (const std::exception&) {
      r.error(pre + "boundary", "must be ring_naive, ring_parity_exact or open_segment");
    }
  }

  for (const char* key : {"j", "h"}) {
    const std::string f = pre + key;
    if (!v.contains(key)) {
      r.error(f, "missing grid");
      continue;
    }
    auto g = r.grid(v[key], f);
    if (g.empty()) r.error(f, "grid must be non-empty");
    (std::string(key) == "j" ? c.j : c.h) = std::move(g);
  }
  for (double x : c.j)
    if (x < 0) r.error(pre + "j", "defect strength must be >= 0");

  if (v.contains("M")) {
    if (c.engine == Engine::TLimit) {
      r.error(pre + "M", "the tlimit engine has no system size; remove the M grid");
    } else {
      const auto g = r.grid(v["M"], pre + "M");
      for (double x : g) {
        if (x != std::floor(x) || x < 2 || x > 1e6) r.error(pre + "M", "M must be an integer >= 2");
        else c.M.push_back(static_cast<int>(x));
      }
      if (g.empty()) r.error(pre + "M", "grid must be non-empty");
    }
  } else if (c.engine == Engine::Finite) {
    r.error(pre + "M", "missing grid (required by the finite engine)");
  }

  if (needs_bonds(c.observable)) {
    const std::string f = pre + "bonds";
    if (!v.contains("bonds")) {
      r.error(f, "missing bond range {\"from\": b0, \"to\": b1}");
    } else {
      const auto& b = v["bonds"];
      if (!b.is_object() || !b.contains("from") || !b.contains("to") || !b["from"].is_number_integer() ||
          !b["to"].is_number_integer()) {
        r.error(f, "bond range must be {\"from\": int, \"to\": int}");
      } else {
        c.bond_lo = b["from"].get<int>();
        c.bond_hi = b["to"].get<int>();
        if (c.bond_lo > c.bond_hi) r.error(f, "'from' must not exceed 'to'");
        for (int M : c.M)
          if (c.bond_lo < -M + 1 || c.bond_hi > M - 1)
            r.error(f, "bond range exceeds [-M+1, M-1] for M = " + std::to_string(M));
      }
    }
  } else if (v.contains("bonds")) {
    r.error(pre + "bonds", "not used by " + to_string(c.observable));
  }

  if (needs_sites(c.observable)) {
    const std::string f = pre + "sites";
    if (!v.contains("sites") || !v["sites"].is_array() || v["sites"].empty()) {
      r.error(f, "missing list of site pairs [[n, m], ...]");
    } else {
      for (std::size_t i = 0; i < v["sites"].size(); ++i) {
        const auto& p = v["sites"][i];
        const std::string fi = f + "[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 2) {
          r.error(fi, "site pair must be [n, m]");
          continue;
        }
        auto a = r.site(p[0], fi + "[0]"), b = r.site(p[1], fi + "[1]");
        if (!a || !b) continue;
        if (*a == *b) {
          r.error(fi, "sites must differ");
          continue;
        }
        for (int M : c.M)
          if (a->abs_value() > M - 0.5 || b->abs_value() > M - 0.5)
            r.error(fi, "site outside the ring for M = " + std::to_string(M));
        c.pairs.emplace_back(std::min(*a, *b), std::max(*a, *b));
      }
    }
  } else if (v.contains("sites")) {
    r.error(pre + "sites", "not used by " + to_string(c.observable));
  }

  if (v.contains("normalize")) {
    if (!v["normalize"].is_boolean()) r.error(pre + "normalize", "must be true or false");
    else if (c.observable != Observable::QdCcVsJ) r.error(pre + "normalize", "only qd_cc_vs_j can be normalized");
    else c.normalize = v["normalize"].get<bool>();
  }

  c.output = c.name + ".csv";
  if (v.contains("output")) {
    if (v["output"].is_string() && !v["output"].get<std::string>().empty()) c.output = v["output"].get<std::string>();
    else r.error(pre + "output", "must be a non-empty file name");
  }
  c.format = c.output.size() >= 5 && c.output.substr(c.output.size() - 5) == ".json" ? Format::Json : Format::Csv;
  if (v.contains("format")) {
    if (v["format"] == "csv") c.format = Format::Csv;
    else if (v["format"] == "json") c.format = Format::Json;
    else r.error(pre + "format", "must be 'csv' or 'json'");
  }

  // physics sanity
  if (c.observable == Observable::FidelityVsJ && c.engine == Engine::TLimit)
    r.error(pre + "engine", "fidelity_vs_j needs finite rings (engine 'finite')");
  if (c.observable == Observable::FidelityVsJ && c.boundary == Boundary::OpenSegment)
    r.error(pre + "boundary", "ring-cut fidelity needs a ring boundary");
  if (c.engine == Engine::TLimit && v.contains("boundary"))
    r.warning(pre + "boundary", "ignored by the tlimit engine");
  if (c.engine == Engine::Finite && c.boundary == Boundary::RingNaive) {
    bool zero_h = false, even_M = false;
    for (double x : c.h) zero_h = zero_h || x == 0.0;
    for (int M : c.M) even_M = even_M || M % 2 == 0;
    if (zero_h && even_M)
      r.warning(pre + "h", "h = 0 with even M on a ring_naive ring puts single-particle levels at the Fermi "
                             "energy; affected rows carry the zero_mode flag");
  }
  if (c.engine == Engine::TLimit)
    for (double x : c.h)
      if (std::abs(std::abs(x) - 1.0) < 1e-12)
        r.warning(pre + "h", "|h| = 1 puts the Fermi level at a band edge");
  for (int M : c.M)
    if (M > 3000) r.warning(pre + "M", "M = " + std::to_string(M) + " needs O(M^3) work per point");
  return c;
}

}  // namespace detail

/// Parses a configuration: either one sweep object or {"sweeps": [...]}.
inline LoadResult load_config(const std::string& text) {
  LoadResult res;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    if (const auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    res.diagnostics.push_back({Diagnostic::Level::Error, "line " + std::to_string(line) + ", column " +
                                                             std::to_string(col), msg});
    return res;
  }
  detail::Reader r(res.diagnostics);
  if (doc.is_object() && doc.contains("sweeps")) {
    for (const auto& [key, _] : doc.items())
      if (key != "sweeps") r.error(key, "unknown top-level field");
    if (!doc["sweeps"].is_array() || doc["sweeps"].empty()) {
      r.error("sweeps", "must be a non-empty list");
      return res;
    }
    for (std::size_t i = 0; i < doc["sweeps"].size(); ++i)
      res.config.sweeps.push_back(
          detail::read_sweep(doc["sweeps"][i], "sweeps[" + std::to_string(i) + "]", static_cast<int>(i), r));
  } else {
    res.config.sweeps.push_back(detail::read_sweep(doc, "", 0, r));
  }
  std::map<std::string, int> outputs;
  for (const auto& s : res.config.sweeps)
    if (++outputs[s.output] == 2) r.error("output", "two sweeps write to " + s.output);
  return res;
}

struct Row {
  std::string observable;
  Engine engine = Engine::Finite;
  int M = 0;  // 0 for the tlimit engine
  double j = 0.0, h = 0.0;
  std::string a, b;
  double value = 0.0;
  std::string flag = "ok";
  double err_est = 0.0;
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"observable",     "engine",         "M",     "j",    "h",
                                             "site_or_bond_a", "site_or_bond_b", "value", "flag", "err_est"};
  return cols;
}

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_site(Site s) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.1f", s.value());
  return buf;
}

namespace detail {

inline std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  return s;
}

struct Point {
  int M = 0;
  double j = 0.0;
  std::vector<double> hs;  // fields handled by this task, in grid order
};

inline Row base_row(const SweepConfig& c, int M, double j, double h, const std::string& obs) {
  Row r;
  r.observable = obs;
  r.engine = c.engine;
  r.M = c.engine == Engine::Finite ? M : 0;
  r.j = j;
  r.h = h;
  return r;
}

inline std::string flag_of(bool zero_mode) { return zero_mode ? "zero_mode" : "ok"; }

// Correlation data for a site window at one parameter point.
struct Window {
  CorrelationMatrix C;
  double err = 0.0;
};

inline Window window(const SweepConfig& c, int M, double j, double h, Site lo, Site hi) {
  Window w;
  if (c.engine == Engine::TLimit) {
    w.C = tl::correlation_window(lo, hi, j, h, &w.err);
  } else {
    const SlaterState st = ground_state(ModelParams{M, j, h, c.boundary});
    w.C = correlation_window(st, M, lo, hi);
  }
  return w;
}

inline void bond_rows(const SweepConfig& c, int M, double j, double h, std::vector<Row>& out) {
  const std::string obs = to_string(c.observable);
  if (c.observable == Observable::ConcurrenceProfile) {
    const Window w = window(c, M, j, h, bond_left(c.bond_lo), bond_right(c.bond_hi));
    for (int b = c.bond_lo; b <= c.bond_hi; ++b) {
      const Site l = bond_left(b), r = bond_right(b);
      Row row = base_row(c, M, j, h, obs);
      row.a = std::to_string(b);
      row.value = concurrence_paper(w.C, l, r);
      row.flag = flag_of(w.C.zero_mode);
      row.err_est = w.err;
      out.push_back(row);
      row.observable = obs + ".wootters";
      row.value = concurrence_wootters(two_qubit_rdm(w.C, l, r));
      out.push_back(row);
    }
    return;
  }
  const Axis axis = c.observable == Observable::BondProfileXX ? Axis::X : Axis::Z;
  if (c.engine == Engine::TLimit) {
    for (const auto& e : tl::bond_profile(axis, j, h, c.bond_lo, c.bond_hi)) {
      Row row = base_row(c, M, j, h, obs);
      row.a = std::to_string(e.bond);
      row.value = e.value;
      row.flag = flag_of(e.zero_mode);
      row.err_est = e.error;
      out.push_back(row);
    }
    return;
  }
  bool zero_mode = false;
  for (const auto& e : bond_profile(ModelParams{M, j, h, c.boundary}, axis, c.bond_lo, c.bond_hi, &zero_mode)) {
    Row row = base_row(c, M, j, h, obs);
    row.a = std::to_string(e.bond);
    row.value = e.value;
    row.flag = flag_of(zero_mode);
    out.push_back(row);
  }
}

inline std::pair<Site, Site> pair_span(const SweepConfig& c) {
  Site lo = c.pairs.front().first, hi = c.pairs.front().second;
  for (const auto& [a, b] : c.pairs) lo = std::min(lo, a), hi = std::max(hi, b);
  return {lo, hi};
}

inline void pair_rows(const SweepConfig& c, int M, double j, double h, std::vector<Row>& out) {
  const std::string obs = to_string(c.observable);
  auto [lo, hi] = pair_span(c);
  const Window w = window(c, M, j, h, lo, hi);
  std::optional<Window> ref;
  if (c.normalize) ref = window(c, M, 1.0, h, lo, hi);
  for (const auto& [a, b] : c.pairs) {
    auto emit = [&](const std::string& q, double v) {
      Row row = base_row(c, M, j, h, obs + "." + q);
      row.a = format_site(a);
      row.b = format_site(b);
      row.value = v;
      row.flag = flag_of(w.C.zero_mode || (ref && ref->C.zero_mode));
      row.err_est = w.err + (ref ? ref->err : 0.0);
      out.push_back(row);
    };
    if (c.observable == Observable::CorrelatorsVsJ) {
      const SpinCorrelators s = spin_correlators(w.C, a, b);
      emit("xx", s.sx_sx);
      emit("yy", s.sy_sy);
      emit("zz", s.sz_sz);
      emit("z_a", s.mz_n);
      emit("z_b", s.mz_m);
      continue;
    }
    const CorrelationMeasures m = correlation_measures(two_qubit_rdm(w.C, a, b));
    emit("cc", m.classical_correlations);
    emit("qd", m.quantum_discord);
    emit("mi", m.mutual_information);
    emit("concurrence", m.concurrence);
    if (m.classical_correlations > 0) emit("log10_cc", std::log10(m.classical_correlations));
    if (m.quantum_discord > 0) emit("log10_qd", std::log10(m.quantum_discord));
    if (ref) {
      const CorrelationMeasures r = correlation_measures(two_qubit_rdm(ref->C, a, b));
      emit("cc_norm", m.classical_correlations / r.classical_correlations);
      emit("qd_norm", m.quantum_discord / r.quantum_discord);
    }
  }
}

inline void spectrum_rows(const SweepConfig& c, int M, double j, double h, std::vector<Row>& out) {
  const std::string obs = to_string(c.observable);
  std::vector<BoundState> states;
  if (c.engine == Engine::TLimit) {
    states = tl::bound_state_poles(j, h);
  } else {
    const ModelSpectra ms = solve(ModelParams{M, j, h, c.boundary});
    states = bound_state_energies(with_field(ms.candidates.front(), h));
  }
  Row count = base_row(c, M, j, h, obs + ".bound_count");
  count.value = static_cast<double>(states.size());
  out.push_back(count);
  for (const auto& s : states) {
    Row row = base_row(c, M, j, h, obs + (s.side == BandSide::Below ? ".below" : ".above"));
    row.value = s.energy;
    if (c.engine == Engine::TLimit) row.err_est = 1e-10;
    out.push_back(row);
  }
}

inline void fidelity_rows(const SweepConfig& c, int M, double j, const std::vector<double>& hs,
                          std::vector<Row>& out) {
  const Seam seam = c.boundary == Boundary::RingParityExact ? Seam::Defect : Seam::Wrap;
  const ModelSpectra ring = solve(ModelParams{M, j, 0.0, c.boundary}, seam);
  const Spectrum seg = segment_spectrum(M, 0.0);
  for (double h : hs) {
    std::vector<Row> rows;
    try {
      const FidelityReport f =
          ring_cut_fidelity(mode_matrix(ground_state(ring, h)), embed_segment(with_field(seg, h), M), M);
      const std::string flag = flag_of(f.zero_mode);
      for (auto [name, v] : {std::pair{"", f.total}, std::pair{".term_00", f.term_00}, std::pair{".term_m", f.term_m},
                             std::pair{".term_p", f.term_p}, std::pair{".term_mp", f.term_mp}}) {
        Row row = base_row(c, M, j, h, "fidelity_vs_j" + std::string(name));
        row.value = v;
        row.flag = flag;
        rows.push_back(row);
      }
    } catch (const std::exception& e) {
      Row row = base_row(c, M, j, h, "fidelity_vs_j");
      row.value = std::nan("");
      row.flag = "error:" + sanitize(e.what());
      rows = {row};
    }
    out.insert(out.end(), rows.begin(), rows.end());
  }
}

inline std::vector<Point> points(const SweepConfig& c) {
  std::vector<Point> pts;
  const std::vector<int> Ms = c.engine == Engine::Finite ? c.M : std::vector<int>{0};
  for (int M : Ms)
    for (double j : c.j) {
      if (c.observable == Observable::FidelityVsJ) {
        pts.push_back({M, j, c.h});
        continue;
      }
      for (double h : c.h) pts.push_back({M, j, {h}});
    }
  return pts;
}

inline std::vector<Row> run_point(const SweepConfig& c, const Point& p) {
  std::vector<Row> out;
  if (c.observable == Observable::FidelityVsJ) {
    try {
      fidelity_rows(c, p.M, p.j, p.hs, out);
    } catch (const std::exception& e) {
      for (double h : p.hs) {
        Row row = base_row(c, p.M, p.j, h, "fidelity_vs_j");
        row.value = std::nan("");
        row.flag = "error:" + sanitize(e.what());
        out.push_back(row);
      }
    }
    return out;
  }
  const double h = p.hs.front();
  try {
    switch (c.observable) {
      case Observable::BondProfileXX:
      case Observable::BondProfileZZ:
      case Observable::ConcurrenceProfile: bond_rows(c, p.M, p.j, h, out); break;
      case Observable::CorrelatorsVsJ:
      case Observable::QdCcVsJ: pair_rows(c, p.M, p.j, h, out); break;
      case Observable::SpectrumScan: spectrum_rows(c, p.M, p.j, h, out); break;
      case Observable::FidelityVsJ: break;
    }
  } catch (const std::exception& e) {
    Row row = base_row(c, p.M, p.j, h, to_string(c.observable));
    row.value = std::nan("");
    row.flag = "error:" + sanitize(e.what());
    out = {row};
  }
  return out;
}

}  // namespace detail

struct SweepResult {
  std::vector<Row> rows;
  int failures = 0;
};

/// Runs every grid point of a sweep on up to `threads` workers. Rows come out
/// in grid order (M, j, h, then bond or site pair) whatever the scheduling.
inline SweepResult run_sweep(const SweepConfig& c, int threads = 1) {
  const auto pts = detail::points(c);
  std::vector<std::vector<Row>> results(pts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) results[i] = detail::run_point(c, pts[i]);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(pts.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  SweepResult res;
  for (auto& r : results)
    for (auto& row : r) {
      if (row.flag.rfind("error", 0) == 0) ++res.failures;
      res.rows.push_back(std::move(row));
    }
  return res;
}

inline std::string to_csv(const std::vector<Row>& rows) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << r.observable << ',' << to_string(r.engine) << ',' << (r.engine == Engine::Finite ? std::to_string(r.M) : "")
       << ',' << format_double(r.j) << ',' << format_double(r.h) << ',' << r.a << ',' << r.b << ','
       << format_double(r.value) << ',' << r.flag << ',' << format_double(r.err_est) << '\n';
  }
  return os.str();
}

inline std::string to_json(const std::vector<Row>& rows) {
  json doc;
  doc["columns"] = csv_columns();
  json data = json::array();
  for (const auto& r : rows) {
    json row = json::array();
    row.push_back(r.observable);
    row.push_back(to_string(r.engine));
    if (r.engine == Engine::Finite) row.push_back(r.M);
    else row.push_back(nullptr);
    row.push_back(r.j);
    row.push_back(r.h);
    row.push_back(r.a);
    row.push_back(r.b);
    if (std::isfinite(r.value)) row.push_back(r.value);
    else row.push_back(nullptr);
    row.push_back(r.flag);
    row.push_back(r.err_est);
    data.push_back(row);
  }
  doc["rows"] = data;
  return doc.dump(1) + "\n";
}

inline std::string render(const SweepConfig& c, const std::vector<Row>& rows) {
  return c.format == Format::Json ? to_json(rows) : to_csv(rows);
}

}  // namespace ringcut::sweep
