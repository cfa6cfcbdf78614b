#ifndef NASHNET_DIGRAPH_HPP
#define NASHNET_DIGRAPH_HPP

// Stochastic matrices, periodic switching digraph sequences and the
// limit theory of their backward products.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nashnet/error.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kLimitTol = 1e-9;

enum class Subnet { one = 1, two = 2 };

inline Subnet other(Subnet s) { return s == Subnet::one ? Subnet::two : Subnet::one; }
inline int index_of(Subnet s) { return s == Subnet::one ? 1 : 2; }

/// Dense square matrix whose entry (i, j) is the weight a_ij node i puts on
/// neighbour j. Stochasticity is checked by the validators, not enforced on
/// construction, so that malformed inputs can be reported as data.
class StochasticMatrix {
public:
  StochasticMatrix() = default;

  explicit StochasticMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  StochasticMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    a_.reserve(n_ * n_);
    for (const auto& r : rows) {
      if (r.size() != n_) throw ContractError("StochasticMatrix: rows must have length n");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static StochasticMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    StochasticMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw ContractError("StochasticMatrix: rows must have length n");
      std::copy(rows[i].begin(), rows[i].end(), m.a_.begin() + static_cast<std::ptrdiff_t>(i * m.n_));
    }
    return m;
  }

  static StochasticMatrix identity(std::size_t n) {
    StochasticMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (double v : row(i)) s += v;
    return s;
  }

  double column_sum(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, j);
    return s;
  }

  bool is_stochastic(double tol = kStochasticTol) const {
    for (double v : a_)
      if (!(v >= 0.0)) return false;
    for (std::size_t i = 0; i < n_; ++i)
      if (std::abs(row_sum(i) - 1.0) > tol) return false;
    return true;
  }

  /// this * rhs
  StochasticMatrix operator*(const StochasticMatrix& rhs) const {
    if (rhs.n_ != n_) throw ContractError("StochasticMatrix: size mismatch in product");
    StochasticMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        const double aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < n_; ++j) out(i, j) += aik * rhs(k, j);
      }
    return out;
  }

  /// Row vector times matrix: (v' A)'.
  Vec left_multiply(std::span<const double> v) const {
    if (v.size() != n_) throw ContractError("StochasticMatrix: size mismatch in v'A");
    Vec out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[j] += v[i] * (*this)(i, j);
    return out;
  }

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Arc of the bipartite cross layer: node `from` of the other subnet feeds
/// node `to` of subnet `target` with weight `weight`.
struct CrossEdge {
  Subnet target = Subnet::one;
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 1.0;

  friend bool operator==(const CrossEdge&, const CrossEdge&) = default;
};

struct GraphPhase {
  StochasticMatrix a1;
  StochasticMatrix a2;
  std::vector<CrossEdge> cross;

  friend bool operator==(const GraphPhase&, const GraphPhase&) = default;
};

/// Periodic three-layer graph sequence: A_l(k) = phases[k mod period].a_l.
struct GraphSequenceSpec {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<GraphPhase> phases;
  double eta = 0.1;
  std::size_t window_t1 = 1;
  std::size_t window_t2 = 1;
  std::size_t window_cross = 1;

  std::size_t period() const noexcept { return phases.size(); }
  std::size_t size(Subnet s) const noexcept { return s == Subnet::one ? n1 : n2; }
  std::size_t window(Subnet s) const noexcept { return s == Subnet::one ? window_t1 : window_t2; }

  const GraphPhase& phase_at(std::size_t k) const { return phases[k % phases.size()]; }

  const StochasticMatrix& matrix(Subnet s, std::size_t k) const {
    const auto& ph = phase_at(k);
    return s == Subnet::one ? ph.a1 : ph.a2;
  }

  /// Throws ContractError unless dimensions and indices are consistent.
  void check_well_formed() const {
    if (phases.empty()) throw ContractError("graph: period must be positive");
    if (n1 == 0 || n2 == 0) throw ContractError("graph: subnetworks must be nonempty");
    for (std::size_t p = 0; p < phases.size(); ++p) {
      const auto& ph = phases[p];
      if (ph.a1.size() != n1 || ph.a2.size() != n2)
        throw ContractError("graph: phase " + std::to_string(p) + " matrix size mismatch");
      for (const auto& e : ph.cross) {
        const std::size_t n_to = size(e.target);
        const std::size_t n_from = size(other(e.target));
        if (e.to >= n_to || e.from >= n_from)
          throw ContractError("graph: phase " + std::to_string(p) + " cross edge index out of range");
      }
    }
    if (window_t1 == 0 || window_t2 == 0 || window_cross == 0)
      throw ContractError("graph: windows must be positive");
  }

  friend bool operator==(const GraphSequenceSpec&, const GraphSequenceSpec&) = default;
};

// ---------------------------------------------------------------------------
// Weight rule

enum class WeightClause {
  lower_bound,  // A3 (i): positive weights at least eta
  row_sum,      // A3 (ii): in-subnet weights sum to one
  cross_sum,    // A3 (iii): cross weights sum to one
  self_loop,    // (i,i) in E
  negative,     // weights must be nonnegative
};

inline const char* clause_name(WeightClause c) {
  switch (c) {
    case WeightClause::lower_bound: return "A3(i)";
    case WeightClause::row_sum: return "A3(ii)";
    case WeightClause::cross_sum: return "A3(iii)";
    case WeightClause::self_loop: return "self-loop";
    case WeightClause::negative: return "nonnegative";
  }
  return "?";
}

struct WeightViolation {
  WeightClause clause;
  std::size_t phase;
  Subnet subnet;
  std::size_t node;
  std::string detail;

  std::string describe() const {
    std::ostringstream os;
    os << clause_name(clause) << " phase " << phase << " subnet " << index_of(subnet) << " node "
       << node << ": " << detail;
    return os.str();
  }
};

inline std::vector<WeightViolation> validate_weight_rule(const GraphSequenceSpec& spec, double eta,
                                                         double tol = kStochasticTol) {
  spec.check_well_formed();
  std::vector<WeightViolation> out;
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };

  for (std::size_t p = 0; p < spec.period(); ++p) {
    const auto& ph = spec.phases[p];
    for (Subnet s : {Subnet::one, Subnet::two}) {
      const auto& a = s == Subnet::one ? ph.a1 : ph.a2;
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
          const double v = a(i, j);
          if (v < 0.0)
            out.push_back({WeightClause::negative, p, s, i, "a[" + std::to_string(j) + "]=" + fmt(v)});
          else if (v > 0.0 && v < eta)
            out.push_back({WeightClause::lower_bound, p, s, i,
                           "a[" + std::to_string(j) + "]=" + fmt(v) + " < eta=" + fmt(eta)});
        }
        if (!(a(i, i) > 0.0)) out.push_back({WeightClause::self_loop, p, s, i, "zero diagonal"});
        const double rs = a.row_sum(i);
        if (std::abs(rs - 1.0) > tol) out.push_back({WeightClause::row_sum, p, s, i, "row sum " + fmt(rs)});
      }
    }

    for (Subnet s : {Subnet::one, Subnet::two}) {
      std::vector<double> sums(spec.size(s), 0.0);
      std::vector<bool> any(spec.size(s), false);
      for (const auto& e : ph.cross) {
        if (e.target != s) continue;
        any[e.to] = true;
        sums[e.to] += e.weight;
        if (!(e.weight > 0.0))
          out.push_back({WeightClause::negative, p, s, e.to, "cross weight " + fmt(e.weight)});
        else if (e.weight < eta)
          out.push_back({WeightClause::lower_bound, p, s, e.to,
                         "cross weight " + fmt(e.weight) + " < eta=" + fmt(eta)});
      }
      for (std::size_t i = 0; i < sums.size(); ++i)
        if (any[i] && std::abs(sums[i] - 1.0) > tol)
          out.push_back({WeightClause::cross_sum, p, s, i, "cross weights sum " + fmt(sums[i])});
    }
  }
  return out;
}

inline bool is_weight_balanced(const StochasticMatrix& a, double tol = kStochasticTol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.row_sum(i) - a.column_sum(i)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Connectivity

namespace detail {

// reach[i][j]: j reachable from i along arcs i -> j
inline bool strongly_connected(std::vector<std::vector<char>> reach) {
  const std::size_t n = reach.size();
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  for (const auto& r : reach)
    for (char c : r)
      if (!c) return false;
  return true;
}

// a_ij > 0 means an arc j -> i
inline void add_arcs(std::vector<std::vector<char>>& reach, const StochasticMatrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a(i, j) > 0.0) reach[j][i] = 1;
}

} // namespace detail

inline bool is_strongly_connected(const StochasticMatrix& a) {
  std::vector<std::vector<char>> reach(a.size(), std::vector<char>(a.size(), 0));
  detail::add_arcs(reach, a);
  return detail::strongly_connected(std::move(reach));
}

/// Every window [k, k+T) of subnet `s` has a strongly connected union graph.
inline bool check_ujsc(const GraphSequenceSpec& spec, Subnet s, std::size_t window) {
  if (window == 0) throw ContractError("check_ujsc: window must be >= 1");
  spec.check_well_formed();
  const std::size_t n = spec.size(s);
  for (std::size_t k = 0; k < spec.period(); ++k) {
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t t = 0; t < std::min(window, spec.period()); ++t)
      detail::add_arcs(reach, spec.matrix(s, k + t));
    if (!detail::strongly_connected(std::move(reach))) return false;
  }
  return true;
}

/// Every window [k, k+T) of the cross layer gives each node of both subnets
/// at least one in-neighbour from the other subnet.
inline bool check_jointly_bipartite(const GraphSequenceSpec& spec, std::size_t window) {
  if (window == 0) throw ContractError("check_jointly_bipartite: window must be >= 1");
  spec.check_well_formed();
  for (std::size_t k = 0; k < spec.period(); ++k) {
    std::vector<char> hit1(spec.n1, 0), hit2(spec.n2, 0);
    for (std::size_t t = 0; t < std::min(window, spec.period()); ++t)
      for (const auto& e : spec.phase_at(k + t).cross)
        if (e.weight > 0.0) (e.target == Subnet::one ? hit1 : hit2)[e.to] = 1;
    if (std::find(hit1.begin(), hit1.end(), 0) != hit1.end()) return false;
    if (std::find(hit2.begin(), hit2.end(), 0) != hit2.end()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Transition products and their limits

/// Phi(k, s) = A(k) A(k-1) ... A(s).
inline StochasticMatrix transition_product(const GraphSequenceSpec& spec, Subnet s, std::size_t k,
                                           std::size_t start) {
  if (k < start) throw ContractError("transition_product: requires k >= s");
  spec.check_well_formed();
  StochasticMatrix p = spec.matrix(s, start);
  for (std::size_t t = start + 1; t <= k; ++t) p = spec.matrix(s, t) * p;
  return p;
}

struct LimitVector {
  Vec phi;
  std::size_t start_index = 0;
  double achieved_spread = 0.0;
};

/// Constants of the geometric envelope |Phi(k,s)_ij - phi_j(s)| <= C rho^(k-s).
struct GeometricRateBound {
  double c;
  double rho;
  std::size_t m;

  static GeometricRateBound from(double eta, std::size_t n, std::size_t window) {
    const std::size_t m = std::max<std::size_t>(1, (n - 1) * window);
    const double em = std::pow(eta, static_cast<double>(m));
    return {2.0 * (1.0 + 1.0 / em) / (1.0 - em), std::pow(1.0 - em, 1.0 / static_cast<double>(m)), m};
  }
};

inline double column_spread(const StochasticMatrix& p) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < p.size(); ++i) {
      lo = std::min(lo, p(i, j));
      hi = std::max(hi, p(i, j));
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

/// Default iteration cap 10 M log(1/tol) / log(1/rho), saturated to a sane range.
inline std::size_t default_limit_cap(double eta, std::size_t n, std::size_t window, double spread_tol) {
  const auto bound = GeometricRateBound::from(eta, n, window);
  const double log_inv_rho = -std::log(bound.rho);
  const double cap = 10.0 * static_cast<double>(bound.m) * std::log(1.0 / spread_tol) /
                     std::max(log_inv_rho, 1e-300);
  if (!std::isfinite(cap) || cap > 1e8) return 100'000'000;
  return std::max<std::size_t>(16, static_cast<std::size_t>(cap));
}

/// Extends Phi(k, s) until its column spread is at most `spread_tol`; the row
/// average is the limit vector. `matrix_at(t)` yields A(t).
template <typename MatrixAt>
LimitVector limit_of_products(MatrixAt&& matrix_at, std::size_t start, double spread_tol,
                              std::size_t cap, const std::string& name) {
  StochasticMatrix p = matrix_at(start);
  double spread = column_spread(p);
  std::size_t t = start;
  while (spread > spread_tol) {
    if (t - start >= cap) {
      std::ostringstream os;
      os << "limit of " << name << " from s=" << start << " did not reach spread " << spread_tol
         << " within " << cap << " factors (spread " << spread << ")";
      throw NonConvergenceError(os.str());
    }
    ++t;
    p = matrix_at(t) * p;
    spread = column_spread(p);
  }
  const std::size_t n = p.size();
  Vec phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) phi[j] += p(i, j);
  double total = 0.0;
  for (double& v : phi) {
    v /= static_cast<double>(n);
    total += v;
  }
  for (double& v : phi) v /= total;
  return {std::move(phi), start, spread};
}

inline LimitVector limiting_stochastic_vector(const GraphSequenceSpec& spec, Subnet s, std::size_t start,
                                              double spread_tol = kLimitTol) {
  spec.check_well_formed();
  if (!check_ujsc(spec, s, spec.window(s)))
    throw DomainError("limiting_stochastic_vector: subnet " + std::to_string(index_of(s)) +
                      " is not UJSC with its declared window");
  const std::size_t cap = default_limit_cap(spec.eta, spec.size(s), spec.window(s), spread_tol);
  return limit_of_products([&](std::size_t t) -> const StochasticMatrix& { return spec.matrix(s, t); },
                           start, spread_tol, cap,
                           "subnet " + std::to_string(index_of(s)) + " sequence");
}

inline double min_positive_entry(const StochasticMatrix& a) {
  double m = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double v : a.row(i))
      if (v > 0.0) m = std::min(m, v);
  return m;
}

/// Positive stochastic left eigenvector of an irreducible stochastic matrix.
inline LimitVector perron_vector(const StochasticMatrix& a, double tol = kLimitTol) {
  if (!a.is_stochastic()) throw ContractError("perron_vector: matrix is not stochastic");
  if (!is_strongly_connected(a)) throw DomainError("perron_vector: graph is not strongly connected");
  const std::size_t cap = default_limit_cap(min_positive_entry(a), a.size(), 1, tol);
  auto lv = limit_of_products([&](std::size_t) -> const StochasticMatrix& { return a; }, 0, tol, cap,
                              "constant matrix");
  return lv;
}

/// 1 - min over row pairs of sum_i min(A_{j1 i}, A_{j2 i}).
inline double ergodicity_coefficient(const StochasticMatrix& a) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  if (n <= 1) return 0.0;
  for (std::size_t j1 = 0; j1 < n; ++j1)
    for (std::size_t j2 = j1 + 1; j2 < n; ++j2) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::min(a(j1, i), a(j2, i));
      best = std::min(best, s);
    }
  return std::clamp(1.0 - best, 0.0, 1.0);
}

/// Stochastic matrix on the directed cycle (with self-loops) having `mu` as
/// its Perron vector. The smallest component (lowest index on ties) gets
/// diagonal `b_min`; every other diagonal is 1 - (1 - b_min) mu_min / mu_r,
/// and row r sends its remaining mass to r+1 (mod n).
inline StochasticMatrix build_cycle_matrix(std::span<const double> mu, double b_min) {
  if (mu.empty()) throw DomainError("build_cycle_matrix: empty vector");
  if (!(b_min > 0.0 && b_min < 1.0)) throw DomainError("build_cycle_matrix: b11 must lie in (0,1)");
  double total = 0.0;
  for (double v : mu) {
    if (!(v > 0.0)) throw DomainError("build_cycle_matrix: mu must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > kStochasticTol) throw DomainError("build_cycle_matrix: mu must sum to 1");

  const std::size_t n = mu.size();
  if (n == 1) return StochasticMatrix::identity(1);
  const auto min_it = std::min_element(mu.begin(), mu.end());
  const double mu_min = *min_it;

  StochasticMatrix b(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double diag = 1.0 - (1.0 - b_min) * mu_min / mu[r];
    b(r, r) = diag;
    b(r, (r + 1) % n) = 1.0 - diag;
  }
  return b;
}

/// Largest pairwise Euclidean distance.
inline double disagreement_span(std::span<const Vec> points) {
  if (points.empty()) throw ContractError("disagreement_span: empty point set");
  const std::size_t d = points.front().size();
  for (const auto& p : points)
    if (p.size() != d) throw ContractError("disagreement_span: dimension mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::max(best, distance(points[i], points[j]));
  return best;
}

/// Smallest positive weight across every layer and phase.
inline double infer_eta(const GraphSequenceSpec& spec) {
  double m = 1.0;
  for (const auto& ph : spec.phases) {
    m = std::min({m, min_positive_entry(ph.a1), min_positive_entry(ph.a2)});
    for (const auto& e : ph.cross)
      if (e.weight > 0.0) m = std::min(m, e.weight);
  }
  return m;
}

} // namespace nashnet

#endif // NASHNET_DIGRAPH_HPP
