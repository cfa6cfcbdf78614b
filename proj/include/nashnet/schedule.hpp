#ifndef NASHNET_SCHEDULE_HPP
#define NASHNET_SCHEDULE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "nashnet/error.hpp"

namespace nashnet {

/// Diminishing base stepsize gamma_k: either c / (k + b)^(1/2 + eps) or an
/// explicit table.
class GammaSchedule {
public:
  struct PowerLaw {
    double c;
    double b;
    double eps;
    friend bool operator==(const PowerLaw&, const PowerLaw&) = default;
  };
  struct Table {
    std::vector<double> values;
    friend bool operator==(const Table&, const Table&) = default;
  };

  GammaSchedule() : GammaSchedule(power_law(1.0, 50.0, 0.5)) {}

  /// Requires c > 0, b > 0 and 0 < eps <= 1/2.
  static GammaSchedule power_law(double c, double b, double eps) {
    if (!(c > 0.0)) throw DomainError("power-law schedule: c must be positive");
    if (!(b > 0.0)) throw DomainError("power-law schedule: b must be positive");
    if (!(eps > 0.0 && eps <= 0.5)) throw DomainError("power-law schedule: eps must lie in (0, 1/2]");
    return GammaSchedule(PowerLaw{c, b, eps});
  }

  /// Tables skip the family check; run validate_schedule on them.
  static GammaSchedule table(std::vector<double> values) {
    if (values.empty()) throw DomainError("table schedule: empty");
    return GammaSchedule(Table{std::move(values)});
  }

  double operator()(std::size_t k) const {
    if (const auto* p = std::get_if<PowerLaw>(&family_)) {
      const double base = static_cast<double>(k) + p->b;
      // exact for the common eps = 1/2 case
      if (p->eps == 0.5) return p->c / base;
      return p->c / std::pow(base, 0.5 + p->eps);
    }
    const auto& t = std::get<Table>(family_).values;
    if (k >= t.size())
      throw ContractError("table schedule: index " + std::to_string(k) + " beyond table length " +
                          std::to_string(t.size()));
    return t[k];
  }

  const std::variant<PowerLaw, Table>& family() const noexcept { return family_; }

  friend bool operator==(const GammaSchedule&, const GammaSchedule&) = default;

private:
  explicit GammaSchedule(std::variant<PowerLaw, Table> f) : family_(std::move(f)) {}

  std::variant<PowerLaw, Table> family_;
};

inline double gamma(const GammaSchedule& s, std::size_t k) { return s(k); }

struct ScheduleCheck {
  std::string name;
  bool passed;
  std::string detail;
  bool heuristic = true;
};

/// Numeric evidence (not proof) over 0..H that the schedule is
/// non-increasing, that gamma_k * sum_{s<k} gamma_s keeps shrinking, and
/// that the squares are summable.
inline std::vector<ScheduleCheck> validate_schedule(const GammaSchedule& s, std::size_t horizon) {
  if (horizon < 100) throw ContractError("validate_schedule: horizon must be >= 100");
  std::vector<double> g(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) g[k] = s(k);

  std::vector<ScheduleCheck> out;

  bool positive = true, monotone = true;
  for (std::size_t k = 0; k <= horizon; ++k) {
    if (!(g[k] > 0.0)) positive = false;
    if (k > 0 && g[k] > g[k - 1]) monotone = false;
  }
  out.push_back({"positive", positive, "gamma_k > 0 on [0, H]", false});
  out.push_back({"non-increasing", monotone, "gamma_{k+1} <= gamma_k on [0, H]", false});

  // gamma_k * S_k with S_k = sum_{s<k} gamma_s, over the last H/2 indices
  double partial = 0.0;
  std::vector<double> prod(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) {
    prod[k] = g[k] * partial;
    partial += g[k];
  }
  bool shrinking = true;
  for (std::size_t k = horizon / 2 + 1; k <= horizon; ++k)
    if (prod[k] > prod[k - 1]) shrinking = false;
  out.push_back({"gamma_k*sum_gamma -> 0", shrinking,
                 "decreasing over the last H/2 indices; last value " + std::to_string(prod[horizon])});

  double total_sq = 0.0, tail_sq = 0.0;
  for (std::size_t k = 0; k <= horizon; ++k) {
    total_sq += g[k] * g[k];
    if (4 * k >= 3 * horizon) tail_sq += g[k] * g[k];
  }
  const double ratio = tail_sq / total_sq;
  out.push_back({"summable squares", ratio < 0.01,
                 "last-quarter share of sum gamma^2 = " + std::to_string(ratio) + " (needs < 0.01)"});
  return out;
}

inline bool all_passed(const std::vector<ScheduleCheck>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

} // namespace nashnet

#endif // NASHNET_SCHEDULE_HPP
