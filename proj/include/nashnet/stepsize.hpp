#ifndef NASHNET_STEPSIZE_HPP
#define NASHNET_STEPSIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nashnet/digraph.hpp"
#include "nashnet/error.hpp"
#include "nashnet/schedule.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

namespace rule {

struct Homogeneous {
  GammaSchedule schedule;
  friend bool operator==(const Homogeneous&, const Homogeneous&) = default;
};

/// phi1[nu] / phi2[nu] are the limit vectors of the products started at phase nu.
struct OracleHeterogeneous {
  GammaSchedule schedule;
  std::vector<Vec> phi1;
  std::vector<Vec> phi2;
  friend bool operator==(const OracleHeterogeneous&, const OracleHeterogeneous&) = default;
};

struct AdaptiveCommonEigvec {
  GammaSchedule schedule;
  friend bool operator==(const AdaptiveCommonEigvec&, const AdaptiveCommonEigvec&) = default;
};

struct AdaptivePeriodic {
  GammaSchedule schedule;
  std::size_t p1 = 1;
  std::size_t p2 = 1;
  friend bool operator==(const AdaptivePeriodic&, const AdaptivePeriodic&) = default;
};

} // namespace rule

using StepsizeRule =
    std::variant<rule::Homogeneous, rule::OracleHeterogeneous, rule::AdaptiveCommonEigvec, rule::AdaptivePeriodic>;

inline const GammaSchedule& schedule_of(const StepsizeRule& r) {
  return std::visit([](const auto& v) -> const GammaSchedule& { return v.schedule; }, r);
}

inline bool is_adaptive(const StepsizeRule& r) {
  return std::holds_alternative<rule::AdaptiveCommonEigvec>(r) || std::holds_alternative<rule::AdaptivePeriodic>(r);
}

inline std::string rule_name(const StepsizeRule& r) {
  switch (r.index()) {
    case 0: return "homogeneous";
    case 1: return "oracle";
    case 2: return "adaptive-common";
    default: return "adaptive-periodic";
  }
}

inline void check_oracle_vectors(const rule::OracleHeterogeneous& r, std::size_t period, std::size_t n1,
                                 std::size_t n2) {
  auto check = [&](const std::vector<Vec>& phis, std::size_t n, int subnet) {
    if (phis.size() != period)
      throw ContractError("oracle stepsizes: subnet " + std::to_string(subnet) + " needs one vector per phase");
    for (const auto& phi : phis) {
      if (phi.size() != n) throw ContractError("oracle stepsizes: vector length mismatch");
      double s = 0.0;
      for (double v : phi) {
        if (!(v > 0.0)) throw DomainError("oracle stepsizes: limit vectors must be positive");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-6) throw DomainError("oracle stepsizes: limit vectors must sum to 1");
    }
  };
  check(r.phi1, n1, 1);
  check(r.phi2, n2, 2);
}

/// Limit vectors phi^l(nu) for every phase nu of a periodic UJSC spec.
inline rule::OracleHeterogeneous oracle_heterogeneous_build(const GraphSequenceSpec& spec, GammaSchedule schedule,
                                                            double tol = kLimitTol) {
  rule::OracleHeterogeneous r{std::move(schedule), {}, {}};
  for (std::size_t nu = 0; nu < spec.period(); ++nu) {
    r.phi1.push_back(limiting_stochastic_vector(spec, Subnet::one, nu, tol).phi);
    r.phi2.push_back(limiting_stochastic_vector(spec, Subnet::two, nu, tol).phi);
  }
  return r;
}

/// True when A_l(k + p) = A_l(k) for every k.
inline bool subnet_has_period(const GraphSequenceSpec& spec, Subnet s, std::size_t p) {
  if (p == 0) return false;
  for (std::size_t k = 0; k < spec.period() * p; ++k)
    if (!(spec.matrix(s, k) == spec.matrix(s, k + p))) return false;
  return true;
}

/// Auxiliary consensus state of one subnet. Row i of a bank is agent i's
/// vector; in the common case there is a single bank active from k = 0.
struct LearnerState {
  std::size_t n = 0;
  std::size_t period = 1;
  bool periodic = false;
  std::size_t k = 0;  // time index of the stored vectors
  std::vector<std::optional<StochasticMatrix>> banks;

  double readout(std::size_t agent, std::size_t at) const {
    if (at != k) throw ContractError("learner readout requested at k=" + std::to_string(at) +
                                     " but state is at k=" + std::to_string(k));
    const auto& bank = banks[periodic ? at % period : 0];
    if (!bank) return 1.0;
    return (*bank)(agent, agent);
  }
};

inline LearnerState learner_init_common(std::size_t n) {
  if (n < 1) throw ContractError("learner_init_common: n must be >= 1");
  LearnerState s;
  s.n = n;
  s.banks.emplace_back(StochasticMatrix::identity(n));
  return s;
}

/// Banks are created empty and switched on at time nu + 1.
inline LearnerState learner_init_periodic(std::size_t n, std::size_t p) {
  if (n < 1) throw ContractError("learner_init_periodic: n must be >= 1");
  if (p < 1) throw ContractError("learner_init_periodic: p must be >= 1");
  LearnerState s;
  s.n = n;
  s.period = p;
  s.periodic = true;
  s.banks.resize(p);
  return s;
}

/// alpha^i(k+1) = sum_j a_ij(k) alpha^j(k)
inline void learner_step_common(LearnerState& s, const StochasticMatrix& a) {
  if (a.size() != s.n) throw ContractError("learner_step_common: matrix size mismatch");
  s.banks[0] = a * *s.banks[0];
  ++s.k;
}

inline void learner_step_periodic(LearnerState& s, const StochasticMatrix& a) {
  if (a.size() != s.n) throw ContractError("learner_step_periodic: matrix size mismatch");
  for (auto& b : s.banks)
    if (b) b = a * *b;
  ++s.k;
  if (s.k <= s.period) s.banks[s.k - 1] = StochasticMatrix::identity(s.n);
}

/// Learners for both subnets, advanced together.
struct Learners {
  LearnerState l1;
  LearnerState l2;
};

inline std::optional<Learners> make_learners(const StepsizeRule& r, const GraphSequenceSpec& spec) {
  if (std::holds_alternative<rule::AdaptiveCommonEigvec>(r))
    return Learners{learner_init_common(spec.n1), learner_init_common(spec.n2)};
  if (const auto* p = std::get_if<rule::AdaptivePeriodic>(&r)) {
    if (!subnet_has_period(spec, Subnet::one, p->p1))
      throw ContractError("adaptive-periodic: subnet 1 matrices are not " + std::to_string(p->p1) + "-periodic");
    if (!subnet_has_period(spec, Subnet::two, p->p2))
      throw ContractError("adaptive-periodic: subnet 2 matrices are not " + std::to_string(p->p2) + "-periodic");
    return Learners{learner_init_periodic(spec.n1, p->p1), learner_init_periodic(spec.n2, p->p2)};
  }
  return std::nullopt;
}

inline void advance_learners(Learners& l, const GraphSequenceSpec& spec, std::size_t k) {
  auto one = [&](LearnerState& s, Subnet sub) {
    if (s.periodic)
      learner_step_periodic(s, spec.matrix(sub, k));
    else
      learner_step_common(s, spec.matrix(sub, k));
  };
  one(l.l1, Subnet::one);
  one(l.l2, Subnet::two);
}

/// alpha_{i,k} (subnet one) or beta_{i,k} (subnet two).
inline double stepsize_for(const StepsizeRule& r, std::size_t agent, Subnet subnet, std::size_t k,
                           const Learners* learners = nullptr) {
  const double g = schedule_of(r)(k);
  if (std::holds_alternative<rule::Homogeneous>(r)) return g;
  if (const auto* o = std::get_if<rule::OracleHeterogeneous>(&r)) {
    const auto& phis = subnet == Subnet::one ? o->phi1 : o->phi2;
    return g / phis[(k + 1) % phis.size()].at(agent);
  }
  if (learners == nullptr) throw ContractError("stepsize_for: adaptive rule needs learner state");
  const LearnerState& s = subnet == Subnet::one ? learners->l1 : learners->l2;
  const double hat = s.readout(agent, k);
  if (!(hat > 0.0))
    throw InvariantError("adaptive readout " + std::to_string(hat) + " for agent " + std::to_string(agent) +
                         " of subnet " + std::to_string(index_of(subnet)) + " at k=" + std::to_string(k));
  return g / hat;
}

/// Largest |hat alpha^i_k - phi^l_i(k+1)| over both subnets and k in
/// [k_from, k_to], running the learners of an adaptive rule from k = 0.
inline double learner_readout_gap(const StepsizeRule& r, const GraphSequenceSpec& spec, std::size_t k_from,
                                  std::size_t k_to) {
  if (!is_adaptive(r)) throw ContractError("learner_readout_gap: rule is not adaptive");
  const auto oracle = oracle_heterogeneous_build(spec, schedule_of(r));
  auto learners = make_learners(r, spec);
  double gap = 0.0;
  for (std::size_t k = 0; k <= k_to; ++k) {
    if (k >= k_from) {
      const std::size_t phase = (k + 1) % spec.period();
      for (std::size_t i = 0; i < spec.n1; ++i)
        gap = std::max(gap, std::abs(learners->l1.readout(i, k) - oracle.phi1[phase][i]));
      for (std::size_t i = 0; i < spec.n2; ++i)
        gap = std::max(gap, std::abs(learners->l2.readout(i, k) - oracle.phi2[phase][i]));
    }
    advance_learners(*learners, spec, k);
  }
  return gap;
}

} // namespace nashnet

#endif // NASHNET_STEPSIZE_HPP
