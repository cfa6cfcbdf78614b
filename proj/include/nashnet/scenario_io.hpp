#ifndef NASHNET_SCENARIO_IO_HPP
#define NASHNET_SCENARIO_IO_HPP

// Scenario documents (YAML) and the CSV trace, metrics, plot and oracle
// report formats. Reading goes through yaml-cpp; writing is done by hand so
// the layout stays stable and diffable.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "nashnet/engine.hpp"
#include "nashnet/error.hpp"
#include "nashnet/expr.hpp"
#include "nashnet/metrics.hpp"
#include "nashnet/saddle.hpp"
#include "nashnet/scenario.hpp"
#include "nashnet/stepsize.hpp"

namespace nashnet {

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// 17 significant digits, as used by every CSV writer.
inline std::string sig17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

// ---------------------------------------------------------------------------
// Loading

namespace io_detail {

[[noreturn]] inline void fail(const YAML::Node& at, const std::string& what) {
  const auto m = at.Mark();
  if (m.is_null()) throw ParseError(what, 0, 0);
  throw ParseError(what, static_cast<std::size_t>(m.line) + 1, static_cast<std::size_t>(m.column) + 1);
}

inline YAML::Node need(const YAML::Node& parent, const std::string& key, const std::string& where) {
  if (!parent.IsMap()) fail(parent, where + " must be a mapping");
  YAML::Node n = parent[key];
  if (!n) fail(parent, where + ": missing key '" + key + "'");
  return n;
}

template <typename T>
T as(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, what + ": expected " + (std::is_same_v<T, std::string> ? "a string" : "a number"));
  }
}

inline double real(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a number");
  const std::string t = n.Scalar();
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) fail(n, what + ": '" + t + "' is not a number");
  return v;
}

inline std::size_t count(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a non-negative integer");
  const std::string t = n.Scalar();
  unsigned long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    fail(n, what + ": '" + t + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline bool boolean(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected true or false");
  const std::string t = n.Scalar();
  if (t == "true") return true;
  if (t == "false") return false;
  fail(n, what + ": expected true or false, got '" + t + "'");
}

inline Vec vec(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + ": expected a list of numbers");
  Vec out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(real(n[i], what));
  return out;
}

inline std::vector<Vec> rows(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + ": expected a list of lists");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(vec(n[i], what));
  return out;
}

inline StochasticMatrix matrix(const YAML::Node& n, const std::string& what) {
  const auto r = rows(n, what);
  for (const auto& row : r)
    if (row.size() != r.size()) fail(n, what + ": matrix must be square");
  if (r.empty()) fail(n, what + ": empty matrix");
  return StochasticMatrix::from_rows(r);
}

struct NodeRef {
  Subnet subnet;
  std::size_t index;
};

inline NodeRef node_ref(const YAML::Node& n, const std::string& what) {
  const std::string t = as<std::string>(n, what);
  if (t.size() < 2 || (t[0] != 'x' && t[0] != 'y')) fail(n, what + ": node names look like x0 or y1, got '" + t + "'");
  std::size_t idx = 0;
  const auto res = std::from_chars(t.data() + 1, t.data() + t.size(), idx);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) fail(n, what + ": bad node name '" + t + "'");
  return {t[0] == 'x' ? Subnet::one : Subnet::two, idx};
}

inline GammaSchedule schedule(const YAML::Node& n) {
  const std::string fam = as<std::string>(need(n, "family", "stepsize.schedule"), "stepsize.schedule.family");
  try {
    if (fam == "power-law")
      return GammaSchedule::power_law(real(need(n, "c", "stepsize.schedule"), "c"),
                                      real(need(n, "b", "stepsize.schedule"), "b"),
                                      real(need(n, "eps", "stepsize.schedule"), "eps"));
    if (fam == "table") return GammaSchedule::table(vec(need(n, "values", "stepsize.schedule"), "values"));
  } catch (const DomainError& e) {
    throw ValidationError({std::string("stepsize: ") + e.what()});
  }
  fail(n, "stepsize.schedule.family must be power-law or table, got '" + fam + "'");
}

inline std::vector<AgentObjective> agents(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + ": expected a list of agents");
  std::vector<AgentObjective> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node a = n[i];
    const YAML::Node obj = need(a, "objective", what);
    const std::string text = as<std::string>(obj, what + ".objective");
    Expr e;
    try {
      e = parse_expr(text);
    } catch (const ParseError& pe) {
      const auto m = obj.Mark();
      throw ParseError(what + "[" + std::to_string(i) + "].objective: " + pe.what(),
                       static_cast<std::size_t>(m.line) + 1, static_cast<std::size_t>(m.column) + 1);
    }
    Vec kinks;
    if (a["kinks"]) kinks = vec(a["kinks"], what + ".kinks");
    try {
      out.push_back({e, SubgradientSelection(kinks)});
    } catch (const DomainError& de) {
      fail(a["kinks"], what + ".kinks: " + de.what());
    }
  }
  return out;
}

inline Scenario scenario(const YAML::Node& root, bool infer_missing_eta) {
  if (!root.IsMap()) fail(root, "scenario document must be a mapping");
  Scenario s;
  const YAML::Node meta = need(root, "meta", "document");
  s.name = as<std::string>(need(meta, "name", "meta"), "meta.name");
  if (meta["description"]) s.description = as<std::string>(meta["description"], "meta.description");

  const YAML::Node dims = need(root, "dimensions", "document");
  s.m1 = count(need(dims, "m1", "dimensions"), "dimensions.m1");
  s.m2 = count(need(dims, "m2", "dimensions"), "dimensions.m2");

  const YAML::Node boxes = need(root, "boxes", "document");
  auto box = [&](const std::string& key) {
    const YAML::Node b = need(boxes, key, "boxes");
    try {
      return BoxSet(vec(need(b, "lower", "boxes." + key), "lower"), vec(need(b, "upper", "boxes." + key), "upper"));
    } catch (const std::logic_error& e) {
      fail(b, "boxes." + key + ": " + e.what());
    }
  };
  s.box_x = box("x");
  s.box_y = box("y");

  const YAML::Node ag = need(root, "agents", "document");
  s.agents1 = agents(need(ag, "subnet1", "agents"), "agents.subnet1");
  s.agents2 = agents(need(ag, "subnet2", "agents"), "agents.subnet2");

  const YAML::Node g = need(root, "graph", "document");
  s.graph.n1 = s.agents1.size();
  s.graph.n2 = s.agents2.size();
  if (!g["eta"] && !infer_missing_eta) fail(g, "graph: missing key 'eta' (or request inference from the smallest weight)");
  s.graph.eta = g["eta"] ? real(g["eta"], "graph.eta") : -1.0;
  const YAML::Node win = need(g, "windows", "graph");
  s.graph.window_t1 = count(need(win, "t1", "graph.windows"), "graph.windows.t1");
  s.graph.window_t2 = count(need(win, "t2", "graph.windows"), "graph.windows.t2");
  s.graph.window_cross = count(need(win, "cross", "graph.windows"), "graph.windows.cross");
  const YAML::Node phases = need(g, "phases", "graph");
  if (!phases.IsSequence() || phases.size() == 0) fail(phases, "graph.phases: expected a nonempty list");
  if (g["period"] && count(g["period"], "graph.period") != phases.size())
    fail(g["period"], "graph.period differs from the number of phases");
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const std::string where = "graph.phases[" + std::to_string(p) + "]";
    const YAML::Node ph = phases[p];
    GraphPhase phase{matrix(need(ph, "a1", where), where + ".a1"), matrix(need(ph, "a2", where), where + ".a2"), {}};
    if (ph["cross"]) {
      const YAML::Node cr = ph["cross"];
      if (!cr.IsSequence()) fail(cr, where + ".cross: expected a list of [source, target, weight]");
      for (std::size_t e = 0; e < cr.size(); ++e) {
        const YAML::Node edge = cr[e];
        if (!edge.IsSequence() || edge.size() != 3) fail(edge, where + ".cross: entries are [source, target, weight]");
        const auto src = node_ref(edge[0], where + ".cross");
        const auto dst = node_ref(edge[1], where + ".cross");
        if (src.subnet == dst.subnet) fail(edge, where + ".cross: an edge must join the two subnetworks");
        phase.cross.push_back({dst.subnet, src.index, dst.index, real(edge[2], where + ".cross weight")});
      }
    }
    s.graph.phases.push_back(std::move(phase));
  }
  if (s.graph.eta < 0.0) s.graph.eta = infer_eta(s.graph);

  const YAML::Node st = need(root, "stepsize", "document");
  const std::string kind = as<std::string>(need(st, "rule", "stepsize"), "stepsize.rule");
  GammaSchedule sched = schedule(need(st, "schedule", "stepsize"));
  if (kind == "homogeneous") {
    s.rule = rule::Homogeneous{sched};
  } else if (kind == "oracle") {
    const YAML::Node lim = need(st, "limits", "stepsize");
    s.rule = rule::OracleHeterogeneous{sched, rows(need(lim, "subnet1", "stepsize.limits"), "subnet1"),
                                       rows(need(lim, "subnet2", "stepsize.limits"), "subnet2")};
  } else if (kind == "adaptive-common") {
    s.rule = rule::AdaptiveCommonEigvec{sched};
  } else if (kind == "adaptive-periodic") {
    const YAML::Node per = need(st, "periods", "stepsize");
    s.rule = rule::AdaptivePeriodic{sched, count(need(per, "p1", "stepsize.periods"), "p1"),
                                    count(need(per, "p2", "stepsize.periods"), "p2")};
  } else {
    fail(st["rule"], "stepsize.rule must be homogeneous, oracle, adaptive-common or adaptive-periodic");
  }

  const YAML::Node init = need(root, "initial", "document");
  s.x0 = rows(need(init, "x", "initial"), "initial.x");
  s.y0 = rows(need(init, "y", "initial"), "initial.y");

  const YAML::Node run = need(root, "run", "document");
  s.iterations = count(need(run, "iterations", "run"), "run.iterations");
  if (run["note"]) s.run_note = as<std::string>(run["note"], "run.note");
  if (run["metrics"]) {
    const YAML::Node m = run["metrics"];
    if (m["disagreement"]) s.metrics.disagreement = boolean(m["disagreement"], "run.metrics.disagreement");
    if (m["nash_error"]) s.metrics.nash_error = boolean(m["nash_error"], "run.metrics.nash_error");
    if (m["saddle_residual"]) s.metrics.saddle_residual = boolean(m["saddle_residual"], "run.metrics.saddle_residual");
  }
  if (run["reference"]) {
    const YAML::Node r = run["reference"];
    OracleReference ref{vec(need(r, "x", "run.reference"), "run.reference.x"),
                        vec(need(r, "y", "run.reference"), "run.reference.y"), {}};
    if (r["note"]) ref.note = as<std::string>(r["note"], "run.reference.note");
    s.reference = std::move(ref);
  }
  return s;
}

} // namespace io_detail

/// Parses a scenario document without validating it. With `infer_eta`, a
/// missing graph.eta is replaced by the smallest positive weight.
inline Scenario parse_scenario(const std::string& text, bool infer_eta = false) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line) + 1, static_cast<std::size_t>(e.mark.column) + 1);
  }
  return io_detail::scenario(root, infer_eta);
}

struct LoadedScenario {
  Scenario scenario;
  std::vector<std::string> warnings;
};

/// Reads, parses and validates. Unreadable files raise ParseError at line 0.
inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read scenario file '" + path + "'", 0, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline LoadedScenario load_scenario(const std::string& path, bool infer_eta = false,
                                    std::size_t convexity_trials = 1000) {
  Scenario s = parse_scenario(read_file(path), infer_eta);
  auto report = validate_scenario(s, convexity_trials);
  return {std::move(s), std::move(report.warnings)};
}

// ---------------------------------------------------------------------------
// Saving

namespace io_detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline std::string list(std::span<const double> v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + shortest(v[i]);
  return out + "]";
}

inline std::string list_of_lists(const std::vector<Vec>& rows) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) out += (i ? ", " : "") + list(rows[i]);
  return out + "]";
}

inline std::string node_name(Subnet s, std::size_t i) { return (s == Subnet::one ? "x" : "y") + std::to_string(i); }

inline void write_schedule(std::ostream& os, const GammaSchedule& g) {
  if (const auto* p = std::get_if<GammaSchedule::PowerLaw>(&g.family())) {
    os << "  schedule: {family: power-law, c: " << shortest(p->c) << ", b: " << shortest(p->b)
       << ", eps: " << shortest(p->eps) << "}\n";
  } else {
    os << "  schedule:\n    family: table\n    values: " << list(std::get<GammaSchedule::Table>(g.family()).values)
       << "\n";
  }
}

} // namespace io_detail

inline std::string format_scenario(const Scenario& s) {
  using namespace io_detail;
  std::ostringstream os;
  os << "meta:\n  name: " << quote(s.name) << "\n";
  if (!s.description.empty()) os << "  description: " << quote(s.description) << "\n";
  os << "  determinism: \"no random state; repeated runs are bit-identical\"\n";
  os << "dimensions: {m1: " << s.m1 << ", m2: " << s.m2 << "}\n";
  os << "boxes:\n";
  os << "  x: {lower: " << list(s.box_x.lower) << ", upper: " << list(s.box_x.upper) << "}\n";
  os << "  y: {lower: " << list(s.box_y.lower) << ", upper: " << list(s.box_y.upper) << "}\n";
  os << "agents:\n";
  for (Subnet sub : {Subnet::one, Subnet::two}) {
    os << "  subnet" << index_of(sub) << ":\n";
    for (const auto& a : s.agents(sub)) {
      os << "    - objective: " << quote(to_prefix(a.expr)) << "\n";
      const std::size_t k = a.expr.abs_count();
      if (k > 0) {
        Vec sel(k);
        for (std::size_t i = 0; i < k; ++i) sel[i] = a.selection.at(i);
        os << "      kinks: " << list(sel) << "\n";
      }
    }
  }
  os << "graph:\n  period: " << s.graph.period() << "\n  eta: " << shortest(s.graph.eta) << "\n";
  os << "  windows: {t1: " << s.graph.window_t1 << ", t2: " << s.graph.window_t2
     << ", cross: " << s.graph.window_cross << "}\n";
  os << "  phases:\n";
  for (const auto& ph : s.graph.phases) {
    os << "    - a1: " << list_of_lists(ph.a1.rows()) << "\n";
    os << "      a2: " << list_of_lists(ph.a2.rows()) << "\n";
    os << "      cross: [";
    for (std::size_t e = 0; e < ph.cross.size(); ++e) {
      const auto& c = ph.cross[e];
      os << (e ? ", " : "") << "[" << node_name(other(c.target), c.from) << ", " << node_name(c.target, c.to) << ", "
         << shortest(c.weight) << "]";
    }
    os << "]\n";
  }
  os << "stepsize:\n  rule: " << rule_name(s.rule) << "\n";
  write_schedule(os, schedule_of(s.rule));
  if (const auto* o = std::get_if<rule::OracleHeterogeneous>(&s.rule)) {
    os << "  limits:\n    subnet1: " << list_of_lists(o->phi1) << "\n    subnet2: " << list_of_lists(o->phi2)
       << "\n";
  }
  if (const auto* p = std::get_if<rule::AdaptivePeriodic>(&s.rule))
    os << "  periods: {p1: " << p->p1 << ", p2: " << p->p2 << "}\n";
  os << "initial:\n  x: " << list_of_lists(s.x0) << "\n  y: " << list_of_lists(s.y0) << "\n";
  os << "run:\n  iterations: " << s.iterations << "\n";
  if (!s.run_note.empty()) os << "  note: " << quote(s.run_note) << "\n";
  os << "  metrics: {disagreement: " << (s.metrics.disagreement ? "true" : "false")
     << ", nash_error: " << (s.metrics.nash_error ? "true" : "false")
     << ", saddle_residual: " << (s.metrics.saddle_residual ? "true" : "false") << "}\n";
  if (s.reference) {
    os << "  reference:\n    x: " << list(s.reference->x) << "\n    y: " << list(s.reference->y) << "\n";
    if (!s.reference->note.empty()) os << "    note: " << quote(s.reference->note) << "\n";
  }
  return os.str();
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write '" + path + "'");
  out << format_scenario(s);
}

// ---------------------------------------------------------------------------
// CSV outputs

/// k,agent,subnet,s0..s{m-1},stepsize with m = max(m1, m2); unused state
/// columns and the stepsize of the final row are nan.
inline void write_trace_csv(std::ostream& os, const Trace& t) {
  const std::size_t m = std::max(t.m1(), t.m2());
  os << "k,agent,subnet";
  for (std::size_t d = 0; d < m; ++d) os << ",s" << d;
  os << ",stepsize\n";
  const std::size_t len = t.length();
  for (std::size_t k = 0; k < len; ++k)
    for (Subnet sub : {Subnet::one, Subnet::two}) {
      const std::size_t n = sub == Subnet::one ? t.n1() : t.n2();
      for (std::size_t i = 0; i < n; ++i) {
        os << k << ',' << i << ',' << index_of(sub);
        const auto v = t.state(k, sub, i);
        for (std::size_t d = 0; d < m; ++d) os << ',' << (d < v.size() ? sig17(v[d]) : "nan");
        os << ',' << (k + 1 < len ? sig17(t.stepsize(k, sub, i)) : "nan") << '\n';
      }
    }
}

inline void write_metrics_csv(std::ostream& os, const MetricsSeries& m) {
  os << "k,h1,h2,nash_error,saddle_residual\n";
  for (std::size_t k = 0; k < m.size(); ++k)
    os << k << ',' << sig17(m.h1[k]) << ',' << sig17(m.h2[k]) << ',' << sig17(m.nash_error[k]) << ','
       << sig17(m.saddle_residual[k]) << '\n';
}

/// Long format k,series,value: every agent state component and nash_error,
/// at every `stride`-th k plus the final one.
inline void write_plot_csv(std::ostream& os, const Trace& t, const MetricsSeries& m, std::size_t stride = 10) {
  if (stride == 0) throw ContractError("plot stride must be positive");
  os << "k,series,value\n";
  const std::size_t len = t.length();
  for (std::size_t k = 0; k < len; ++k) {
    if (k % stride != 0 && k + 1 != len) continue;
    for (Subnet sub : {Subnet::one, Subnet::two}) {
      const std::size_t n = sub == Subnet::one ? t.n1() : t.n2();
      const char* name = sub == Subnet::one ? "x" : "y";
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = t.state(k, sub, i);
        for (std::size_t d = 0; d < v.size(); ++d) {
          os << k << ',' << name << i;
          if (v.size() > 1) os << '_' << d;
          os << ',' << sig17(v[d]) << '\n';
        }
      }
    }
    if (k < m.size()) os << k << ",nash_error," << sig17(m.nash_error[k]) << '\n';
  }
}

/// One-row CSV: x0..,y0..,value,minimax_gap,grid_resolution,violation.
inline void write_saddle_csv(std::ostream& os, const SaddleReport& r, double violation) {
  for (std::size_t d = 0; d < r.x_star.size(); ++d) os << 'x' << d << ',';
  for (std::size_t d = 0; d < r.y_star.size(); ++d) os << 'y' << d << ',';
  os << "value,minimax_gap,grid_resolution,violation\n";
  for (double v : r.x_star) os << sig17(v) << ',';
  for (double v : r.y_star) os << sig17(v) << ',';
  os << sig17(r.value) << ',' << sig17(r.minimax_gap) << ',' << r.grid_resolution << ',' << sig17(violation) << '\n';
}

} // namespace nashnet

#endif // NASHNET_SCENARIO_IO_HPP
