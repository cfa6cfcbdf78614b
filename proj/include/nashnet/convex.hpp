#ifndef NASHNET_CONVEX_HPP
#define NASHNET_CONVEX_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nashnet/error.hpp"
#include "nashnet/expr.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

/// Axis-aligned box [lower, upper].
struct BoxSet {
  Vec lower;
  Vec upper;

  BoxSet() = default;
  BoxSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw ContractError("BoxSet: bounds differ in dimension");
    for (std::size_t d = 0; d < lower.size(); ++d)
      if (!(lower[d] <= upper[d])) throw DomainError("BoxSet: lower > upper in dimension " + std::to_string(d));
  }

  static BoxSet cube(std::size_t dim, double lo, double hi) { return {Vec(dim, lo), Vec(dim, hi)}; }

  std::size_t dim() const noexcept { return lower.size(); }

  Vec center() const {
    Vec c(dim());
    for (std::size_t d = 0; d < dim(); ++d) c[d] = 0.5 * (lower[d] + upper[d]);
    return c;
  }

  bool contains(std::span<const double> p) const {
    if (p.size() != dim()) return false;
    for (std::size_t d = 0; d < dim(); ++d)
      if (p[d] < lower[d] || p[d] > upper[d]) return false;
    return true;
  }

  friend bool operator==(const BoxSet&, const BoxSet&) = default;
};

/// Euclidean projection onto the box: componentwise clamp.
inline Vec project(std::span<const double> p, const BoxSet& box) {
  if (p.size() != box.dim()) throw ContractError("project: dimension mismatch");
  Vec out(p.begin(), p.end());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = std::clamp(out[d], box.lower[d], box.upper[d]);
  return out;
}

/// Calls fn(point) for every node of a tensor grid with `per_dim` points per
/// dimension, in lexicographic order of the grid index (last dimension fastest).
template <typename Fn>
void for_each_grid_point(const BoxSet& box, std::size_t per_dim, Fn&& fn) {
  const std::size_t dim = box.dim();
  std::vector<std::size_t> idx(dim, 0);
  Vec p(dim);
  auto coord = [&](std::size_t d, std::size_t i) {
    if (per_dim == 1) return 0.5 * (box.lower[d] + box.upper[d]);
    const double t = static_cast<double>(i) / static_cast<double>(per_dim - 1);
    return i + 1 == per_dim ? box.upper[d] : box.lower[d] + t * (box.upper[d] - box.lower[d]);
  };
  for (;;) {
    for (std::size_t d = 0; d < dim; ++d) p[d] = coord(d, idx[d]);
    fn(std::as_const(p));
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++idx[d] < per_dim) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (dim == 0) return;
  }
}

/// Sampled estimate of the subgradient bound L: max over a tensor grid of
/// |d_x e| and |d_y e|.
inline double lipschitz_bound(const Expr& e, const BoxSet& bx, const BoxSet& by, std::size_t grid,
                              const SubgradientSelection& sel = {}) {
  if (grid < 2) throw ContractError("lipschitz_bound: grid must be >= 2");
  double best = 0.0;
  for_each_grid_point(bx, grid, [&](const Vec& x) {
    for_each_grid_point(by, grid, [&](const Vec& y) {
      best = std::max(best, norm(subgradient_x(e, x, y, sel)));
      best = std::max(best, norm(subgradient_y(e, x, y, sel)));
    });
  });
  return best;
}

inline Vec uniform_in(const BoxSet& box, std::mt19937_64& rng) {
  Vec p(box.dim());
  for (std::size_t d = 0; d < box.dim(); ++d)
    p[d] = std::uniform_real_distribution<double>(box.lower[d], box.upper[d])(rng);
  return p;
}

struct ConvexityReport {
  std::size_t trials = 0;
  std::size_t convex_x_failures = 0;
  std::size_t concave_y_failures = 0;

  bool ok() const noexcept { return convex_x_failures == 0 && concave_y_failures == 0; }
};

/// Midpoint test of the declared convex-concave shape on random segments.
/// A pass is evidence, not proof.
inline ConvexityReport sample_convex_concave(const Expr& e, const BoxSet& bx, const BoxSet& by,
                                             std::size_t trials = 1000, std::uint64_t seed = 0x5eedULL,
                                             double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  ConvexityReport r;
  r.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec y = uniform_in(by, rng);
    const Vec x0 = uniform_in(bx, rng), x1 = uniform_in(bx, rng);
    Vec xm(x0.size());
    for (std::size_t d = 0; d < xm.size(); ++d) xm[d] = 0.5 * (x0[d] + x1[d]);
    const double fx = evaluate(e, xm, y);
    const double rx = 0.5 * (evaluate(e, x0, y) + evaluate(e, x1, y));
    if (fx > rx + tol * (1.0 + std::abs(rx))) ++r.convex_x_failures;

    const Vec x = uniform_in(bx, rng);
    const Vec y0 = uniform_in(by, rng), y1 = uniform_in(by, rng);
    Vec ym(y0.size());
    for (std::size_t d = 0; d < ym.size(); ++d) ym[d] = 0.5 * (y0[d] + y1[d]);
    const double fy = evaluate(e, x, ym);
    const double ry = 0.5 * (evaluate(e, x, y0) + evaluate(e, x, y1));
    if (fy < ry - tol * (1.0 + std::abs(ry))) ++r.concave_y_failures;
  }
  return r;
}

} // namespace nashnet

#endif // NASHNET_CONVEX_HPP
