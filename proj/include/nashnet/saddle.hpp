#ifndef NASHNET_SADDLE_HPP
#define NASHNET_SADDLE_HPP

// Ground-truth saddle points of weighted objective sums, computed
// independently of the distributed engine: brute-force grid min-max with
// local refinement, a centralized projected subgradient iteration, and a
// sampled saddle-inequality check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nashnet/convex.hpp"
#include "nashnet/error.hpp"
#include "nashnet/expr.hpp"
#include "nashnet/schedule.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

struct WeightedTerm {
  double weight;
  Expr expr;
  SubgradientSelection selection;
};

/// sum_i mu_i f_i
class WeightedObjective {
public:
  WeightedObjective() = default;
  explicit WeightedObjective(std::vector<WeightedTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_)
      if (!(t.weight > 0.0)) throw DomainError("WeightedObjective: weights must be positive");
  }

  const std::vector<WeightedTerm>& terms() const noexcept { return terms_; }

  double total_weight() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.weight;
    return s;
  }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.weight * evaluate(t.expr, x, y);
    return s;
  }

  Vec grad_x(std::span<const double> x, std::span<const double> y) const {
    Vec g(x.size(), 0.0);
    for (const auto& t : terms_) {
      const Vec q = subgradient_x(t.expr, x, y, t.selection);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += t.weight * q[d];
    }
    return g;
  }

  Vec grad_y(std::span<const double> x, std::span<const double> y) const {
    Vec g(y.size(), 0.0);
    for (const auto& t : terms_) {
      const Vec q = subgradient_y(t.expr, x, y, t.selection);
      for (std::size_t d = 0; d < g.size(); ++d) g[d] += t.weight * q[d];
    }
    return g;
  }

private:
  std::vector<WeightedTerm> terms_;
};

struct SaddleReport {
  Vec x_star;
  Vec y_star;
  double value = 0.0;
  double minimax_gap = 0.0;        // inf-sup minus sup-inf on the coarse grid
  std::size_t grid_resolution = 0;  // coarse points per dimension
  Vec cell;                         // final (refined) cell width per x then y dimension
  std::vector<Vec> x_ties;          // coarse-grid minimisers of max_y, in index order
  std::vector<Vec> y_ties;          // coarse-grid maximisers of min_x, in index order
};

struct GridOptions {
  std::size_t budget = 4'000'000;  // grid cells, (resolution - 1)^(m1 + m2)
  std::size_t refine_levels = 3;
  std::size_t refine_resolution = 21;
  std::size_t max_ties = 64;
};

/// Budget from NASHNET_BUDGET when set and parseable, otherwise `fallback`.
inline std::size_t grid_budget_from_env(std::size_t fallback = GridOptions{}.budget) {
  if (const char* v = std::getenv("NASHNET_BUDGET")) {
    char* end = nullptr;
    const unsigned long long b = std::strtoull(v, &end, 10);
    if (end != v && *end == '\0' && b > 0) return static_cast<std::size_t>(b);
  }
  return fallback;
}

namespace detail {

inline std::vector<Vec> grid_points(const BoxSet& box, std::size_t per_dim) {
  std::vector<Vec> pts;
  for_each_grid_point(box, per_dim, [&](const Vec& p) { pts.push_back(p); });
  return pts;
}

inline bool near_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }

struct GridPass {
  Vec x, y;
  double gap;
  std::vector<Vec> x_ties, y_ties;
};

inline GridPass grid_pass(const WeightedObjective& w, const BoxSet& bx, const BoxSet& by, std::size_t res,
                          std::size_t max_ties) {
  const auto xs = grid_points(bx, res);
  const auto ys = grid_points(by, res);
  std::vector<double> row_max(xs.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> col_min(ys.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double v = w(xs[i], ys[j]);
      row_max[i] = std::max(row_max[i], v);
      col_min[j] = std::min(col_min[j], v);
    }
  const double inf_sup = *std::min_element(row_max.begin(), row_max.end());
  const double sup_inf = *std::max_element(col_min.begin(), col_min.end());

  GridPass out{{}, {}, inf_sup - sup_inf, {}, {}};
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (near_equal(row_max[i], inf_sup)) {
      if (out.x.empty()) out.x = xs[i];
      if (out.x_ties.size() < max_ties) out.x_ties.push_back(xs[i]);
    }
  for (std::size_t j = 0; j < ys.size(); ++j)
    if (near_equal(col_min[j], sup_inf)) {
      if (out.y.empty()) out.y = ys[j];
      if (out.y_ties.size() < max_ties) out.y_ties.push_back(ys[j]);
    }
  return out;
}

inline BoxSet shrink_around(const BoxSet& outer, const Vec& c, const Vec& half) {
  Vec lo(c.size()), hi(c.size());
  for (std::size_t d = 0; d < c.size(); ++d) {
    lo[d] = std::max(outer.lower[d], c[d] - half[d]);
    hi[d] = std::min(outer.upper[d], c[d] + half[d]);
  }
  return {lo, hi};
}

inline Vec cell_width(const BoxSet& box, std::size_t res) {
  Vec h(box.dim());
  for (std::size_t d = 0; d < box.dim(); ++d)
    h[d] = res > 1 ? (box.upper[d] - box.lower[d]) / static_cast<double>(res - 1) : 0.0;
  return h;
}

} // namespace detail

/// Grid argmin over x of max over y, and argmax over y of min over x, then a
/// few levels of local refinement around the winner. Ties resolve to the
/// lexicographically smallest grid index.
inline SaddleReport grid_minimax(const WeightedObjective& w, const BoxSet& bx, const BoxSet& by,
                                 std::size_t resolution, const GridOptions& opt = {}) {
  if (resolution < 3) throw ContractError("grid_minimax: resolution must be >= 3");
  const std::size_t dims = bx.dim() + by.dim();
  if (bx.dim() > 2 || by.dim() > 2) {
    throw ResourceError("grid_minimax: dimensions (" + std::to_string(bx.dim()) + ", " +
                        std::to_string(by.dim()) +
                        ") exceed the grid oracle limit of 2 per player; use centralized_saddle");
  }
  const double cells = std::pow(static_cast<double>(resolution - 1), static_cast<double>(dims));
  if (cells > static_cast<double>(opt.budget)) {
    const auto max_res =
        static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(opt.budget), 1.0 / dims))) + 1;
    std::ostringstream os;
    os << "grid_minimax: resolution " << resolution << " needs " << cells << " cells, budget is " << opt.budget
       << "; reduce resolution to at most " << max_res << " or raise NASHNET_BUDGET";
    throw ResourceError(os.str());
  }

  auto pass = detail::grid_pass(w, bx, by, resolution, opt.max_ties);
  SaddleReport r;
  r.minimax_gap = pass.gap;
  r.grid_resolution = resolution;
  r.x_ties = pass.x_ties;
  r.y_ties = pass.y_ties;

  Vec hx = detail::cell_width(bx, resolution), hy = detail::cell_width(by, resolution);
  Vec x = pass.x, y = pass.y;
  for (std::size_t level = 0; level < opt.refine_levels; ++level) {
    Vec half_x(hx), half_y(hy);
    for (double& v : half_x) v *= 2.0;
    for (double& v : half_y) v *= 2.0;
    const BoxSet sx = detail::shrink_around(bx, x, half_x);
    const BoxSet sy = detail::shrink_around(by, y, half_y);
    auto local = detail::grid_pass(w, sx, sy, opt.refine_resolution, 1);
    x = local.x;
    y = local.y;
    hx = detail::cell_width(sx, opt.refine_resolution);
    hy = detail::cell_width(sy, opt.refine_resolution);
  }
  r.x_star = x;
  r.y_star = y;
  r.value = w(x, y);
  r.cell = hx;
  r.cell.insert(r.cell.end(), hy.begin(), hy.end());
  return r;
}

/// Max over sampled x of [phi(x*,y*) - phi(x,y*)] and over sampled y of
/// [phi(x*,y) - phi(x*,y*)]. Non-positive means no sampled deviation helps.
inline double verify_saddle(const WeightedObjective& w, std::span<const double> xs, std::span<const double> ys,
                            const BoxSet& bx, const BoxSet& by, std::size_t samples = 10000) {
  if (!bx.contains(xs) || !by.contains(ys)) throw ContractError("verify_saddle: candidate outside the boxes");
  const double v = w(xs, ys);
  double worst = -std::numeric_limits<double>::infinity();
  auto sweep = [&](const BoxSet& box, auto&& violation) {
    if (box.dim() == 1) {
      for (std::size_t i = 0; i < samples; ++i) {
        const double t = samples > 1 ? static_cast<double>(i) / static_cast<double>(samples - 1) : 0.5;
        const Vec p{box.lower[0] + t * (box.upper[0] - box.lower[0])};
        worst = std::max(worst, violation(p));
      }
    } else {
      std::mt19937_64 rng(0xC0FFEEULL);
      for (std::size_t i = 0; i < samples; ++i) worst = std::max(worst, violation(uniform_in(box, rng)));
    }
  };
  sweep(bx, [&](const Vec& x) { return v - w(x, ys); });
  sweep(by, [&](const Vec& y) { return w(xs, y) - v; });
  return worst;
}

namespace detail {

// Dense solve with partial pivoting; returns false when singular.
inline bool solve_linear(std::vector<Vec> a, Vec b, Vec& out) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * out[k];
    out[i] = s / a[i][i];
  }
  return true;
}

} // namespace detail

/// Newton iteration on the stationarity system grad phi = 0 for the
/// coordinates of a grid answer that sit strictly inside the box, started
/// from `report`. Accepted only if it stays within two refined cells of the
/// grid answer and does not increase the sampled saddle violation; otherwise
/// the report is returned unchanged. Sharpens smooth interior saddles to
/// machine precision for residual metrics.
inline SaddleReport polish_saddle(const WeightedObjective& w, const BoxSet& bx, const BoxSet& by,
                                  SaddleReport report, std::size_t samples = 2001) {
  const std::size_t m1 = bx.dim(), m2 = by.dim(), n = m1 + m2;
  auto join = [&](const Vec& x, const Vec& y) {
    Vec z(x);
    z.insert(z.end(), y.begin(), y.end());
    return z;
  };
  auto split = [&](const Vec& z) {
    return std::pair<Vec, Vec>{Vec(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m1)),
                               Vec(z.begin() + static_cast<std::ptrdiff_t>(m1), z.end())};
  };
  auto field = [&](const Vec& z) {
    const auto [x, y] = split(z);
    return join(w.grad_x(x, y), w.grad_y(x, y));
  };

  const Vec z0 = join(report.x_star, report.y_star);
  const BoxSet full{join(bx.lower, by.lower), join(bx.upper, by.upper)};
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < n; ++d) {
    const double h = report.cell.size() == n ? report.cell[d] : 0.0;
    if (z0[d] - full.lower[d] > 2.0 * h && full.upper[d] - z0[d] > 2.0 * h) free.push_back(d);
  }
  if (free.empty()) return report;

  Vec z = z0;
  for (int it = 0; it < 50; ++it) {
    const Vec g = field(z);
    std::vector<Vec> jac(free.size(), Vec(free.size(), 0.0));
    for (std::size_t c = 0; c < free.size(); ++c) {
      const double step = 1e-6 * (1.0 + std::abs(z[free[c]]));
      Vec zp = z, zm = z;
      zp[free[c]] += step;
      zm[free[c]] -= step;
      const Vec gp = field(zp), gm = field(zm);
      for (std::size_t r = 0; r < free.size(); ++r) jac[r][c] = (gp[free[r]] - gm[free[r]]) / (2.0 * step);
    }
    Vec rhs(free.size());
    for (std::size_t r = 0; r < free.size(); ++r) rhs[r] = -g[free[r]];
    Vec delta;
    if (!detail::solve_linear(jac, rhs, delta)) return report;
    double move = 0.0;
    for (std::size_t r = 0; r < free.size(); ++r) {
      z[free[r]] += delta[r];
      move = std::max(move, std::abs(delta[r]));
    }
    if (move < 1e-15) break;
  }
  for (std::size_t d = 0; d < n; ++d) {
    const double h = report.cell.size() == n ? report.cell[d] : 0.0;
    if (!std::isfinite(z[d]) || std::abs(z[d] - z0[d]) > 2.0 * h + 1e-12) return report;
  }
  const auto [x, y] = split(z);
  if (!bx.contains(x) || !by.contains(y)) return report;
  const double before = verify_saddle(w, report.x_star, report.y_star, bx, by, samples);
  const double after = verify_saddle(w, x, y, bx, by, samples);
  if (after > std::max(before, 0.0)) return report;
  report.x_star = x;
  report.y_star = y;
  report.value = w(x, y);
  return report;
}

/// x(k+1) = P_X(x(k) - gamma_k q1), y(k+1) = P_Y(y(k) + gamma_k q2) from the box centre.
inline SaddleReport centralized_saddle(const WeightedObjective& w, const BoxSet& bx, const BoxSet& by,
                                       const GammaSchedule& schedule, std::size_t iters,
                                       std::optional<std::pair<Vec, Vec>> start = std::nullopt) {
  if (iters < 1) throw ContractError("centralized_saddle: iters must be >= 1");
  Vec x = start ? start->first : bx.center();
  Vec y = start ? start->second : by.center();
  for (std::size_t k = 0; k < iters; ++k) {
    const double g = schedule(k);
    const Vec qx = w.grad_x(x, y);
    const Vec qy = w.grad_y(x, y);
    Vec nx(x), ny(y);
    for (std::size_t d = 0; d < nx.size(); ++d) nx[d] -= g * qx[d];
    for (std::size_t d = 0; d < ny.size(); ++d) ny[d] += g * qy[d];
    x = project(nx, bx);
    y = project(ny, by);
  }
  SaddleReport r;
  r.x_star = x;
  r.y_star = y;
  r.value = w(x, y);
  return r;
}

/// A saddle candidate that passed verify_saddle within `tolerance`.
class CertifiedSaddle {
public:
  static CertifiedSaddle certify(const WeightedObjective& w, Vec x, Vec y, const BoxSet& bx, const BoxSet& by,
                                 double tolerance = 1e-6, std::size_t samples = 10000) {
    const double viol = verify_saddle(w, x, y, bx, by, samples);
    if (viol > tolerance) {
      std::ostringstream os;
      os << "saddle reference violates the saddle inequality by " << viol << " (tolerance " << tolerance << ")";
      throw ValidationError({os.str()});
    }
    return CertifiedSaddle(std::move(x), std::move(y), viol);
  }

  const Vec& x() const noexcept { return x_; }
  const Vec& y() const noexcept { return y_; }
  double violation() const noexcept { return violation_; }

private:
  CertifiedSaddle(Vec x, Vec y, double v) : x_(std::move(x)), y_(std::move(y)), violation_(v) {}

  Vec x_;
  Vec y_;
  double violation_;
};

} // namespace nashnet

#endif // NASHNET_SADDLE_HPP
