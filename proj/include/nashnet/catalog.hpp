#ifndef NASHNET_CATALOG_HPP
#define NASHNET_CATALOG_HPP

// The five objectives of the two-subnetwork benchmark game on [-5,5]^2,
// with the kink choices used by the reference experiments:
//   f1 = x^2 - (20 - x^2)(y - 1)^2
//   f2 = |x - 1| - |y|                 d/dx at x = 1 taken as  1
//   f3 = (x - 1)^4 - 2 y^2
//   g1 = (x - 1)^4 - |y| - 5/4 y^2 - 1/2 (20 - x^2)(y - 1)^2
//                                      d/dy of -|y| at y = 0 taken as -1
//   g2 = x^2 + |x - 1| - 3/4 y^2 - 1/2 (20 - x^2)(y - 1)^2
// f1 + f2 + f3 == g1 + g2.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nashnet/expr.hpp"

namespace nashnet {

struct CatalogEntry {
  std::string name;
  Expr expr;
  SubgradientSelection selection;
};

namespace detail {
inline constexpr std::string_view kF1 = "(sub (pow x0 2) (mul (sub 20 (pow x0 2)) (pow (sub y0 1) 2)))";
inline constexpr std::string_view kF2 = "(sub (abs (sub x0 1)) (abs y0))";
inline constexpr std::string_view kF3 = "(sub (pow (sub x0 1) 4) (scale 2 (pow y0 2)))";
inline constexpr std::string_view kG1 =
    "(sub (pow (sub x0 1) 4) (abs y0) (scale 1.25 (pow y0 2)) "
    "(scale 0.5 (mul (sub 20 (pow x0 2)) (pow (sub y0 1) 2))))";
inline constexpr std::string_view kG2 =
    "(sub (add (pow x0 2) (abs (sub x0 1))) (scale 0.75 (pow y0 2)) "
    "(scale 0.5 (mul (sub 20 (pow x0 2)) (pow (sub y0 1) 2))))";
} // namespace detail

inline const std::vector<CatalogEntry>& objective_catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"f1", parse_expr(detail::kF1), {}},
      {"f2", parse_expr(detail::kF2), SubgradientSelection({1.0, 0.0})},
      {"f3", parse_expr(detail::kF3), {}},
      {"g1", parse_expr(detail::kG1), SubgradientSelection({1.0})},
      {"g2", parse_expr(detail::kG2), {}},
  };
  return entries;
}

inline const CatalogEntry& catalog_entry(std::string_view name) {
  for (const auto& e : objective_catalog())
    if (e.name == name) return e;
  throw std::out_of_range("no catalog entry named " + std::string(name));
}

} // namespace nashnet

#endif // NASHNET_CATALOG_HPP
