#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "apf/benchmark.hpp"
#include "apf/ensemble.hpp"
#include "apf/errors.hpp"

namespace apf {

/// Post-update probability mass beyond the pre-update p-quantile boundary,
/// for the lower and the upper tail.
struct EdgeMass {
  double lo = 0.0;
  double hi = 0.0;
};

/// Fraction of weights that are exactly zero. Linear-domain ensembles only.
template <typename Scalar>
double zero_weight_proportion(const ParticleEnsemble<Scalar>& ens) {
  if (ens.log_domain) throw NotApplicableError("zero_weight_proportion: undefined for log-domain weights");
  if (ens.size() == 0) return 0.0;
  return static_cast<double>((ens.weights == Scalar(0)).count()) / static_cast<double>(ens.size());
}

/// Edge mass over shared particle locations.
///
/// Upper tail: walking down from the largest location (ties ordered by
/// particle index), the boundary is the lowest order statistic whose
/// pre-update suffix mass is still <= p; the result is the post-update mass
/// of that suffix. The lower tail mirrors this with prefixes. A tail with no
/// admissible boundary reports 0.
template <typename DerivedPoints, typename DerivedPre, typename DerivedPost>
EdgeMass edge_mass(const Eigen::DenseBase<DerivedPoints>& points, const Eigen::DenseBase<DerivedPre>& pre,
                   const Eigen::DenseBase<DerivedPost>& post, double p) {
  const Eigen::Index n = points.size();
  if (n == 0) throw std::invalid_argument("edge_mass: empty sample");
  if (pre.size() != n || post.size() != n) throw std::invalid_argument("edge_mass: samples must share locations");
  if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("edge_mass: p must lie in (0, 0.5)");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return points[a] < points[b] || (points[a] == points[b] && a < b);
  });

  EdgeMass result;
  double tail_pre = 0.0;
  double tail_post = 0.0;
  for (auto k = order.rbegin(); k != order.rend(); ++k) {
    tail_pre += static_cast<double>(pre[*k]);
    if (tail_pre > p) break;
    tail_post += static_cast<double>(post[*k]);
  }
  result.hi = std::clamp(tail_post, 0.0, 1.0);

  tail_pre = 0.0;
  tail_post = 0.0;
  for (auto k = order.begin(); k != order.end(); ++k) {
    tail_pre += static_cast<double>(pre[*k]);
    if (tail_pre > p) break;
    tail_post += static_cast<double>(post[*k]);
  }
  result.lo = std::clamp(tail_post, 0.0, 1.0);
  return result;
}

inline EdgeMass edge_mass(const WeightedSample& pre_update, const WeightedSample& post_update, double p) {
  if (pre_update.points.size() != post_update.points.size() || pre_update.points != post_update.points) {
    throw std::invalid_argument("edge_mass: samples must share locations");
  }
  return edge_mass(pre_update.points, pre_update.weights, post_update.weights, p);
}

/// Sum of |delta sigma| over the current (post-selection) ensemble.
template <typename Scalar>
double realized_dispersion_total(const ParticleEnsemble<Scalar>& ens) {
  return static_cast<double>(ens.dispersion.sum());
}

/// Mean per-particle kernel noise. Throws NotApplicableError without phis.
template <typename Scalar>
double average_phi(const ParticleEnsemble<Scalar>& ens) {
  if (!ens.has_phi()) throw NotApplicableError("average_phi: ensemble carries no noise parameter");
  return static_cast<double>(ens.phis.mean());
}

}  // namespace apf
