#ifndef GRIDSLAM_KL_HPP
#define GRIDSLAM_KL_HPP

#include "gridslam/grid.hpp"

namespace gridslam {

/// Map cells are compared as class distributions: each L-vector is
/// epsilon-smoothed and renormalized, (v + eps) / (sum(v) + L*eps), which
/// keeps empty cells well-defined (they become uniform).
inline constexpr double kDefaultEpsilonSmooth = 1e-4;

/// Sum over cells of D_KL(truth || est) between smoothed per-cell
/// distributions.
double klLoss(const Grid3d& truth, const Grid3d& est, double eps = kDefaultEpsilonSmooth);

/// klLoss plus its gradient with respect to the raw `est` entries.
double klLossGrad(const Grid3d& truth, const Grid3d& est, double eps, Grid3d& dEst);

/// Mean squared error between the smoothed per-cell distributions of `est`
/// and `truth`, averaged over all L*H*W entries. This is the map-quality
/// metric: it lives in the same representation space the KL training loss
/// is defined on.
double mapMse(const Grid3d& truth, const Grid3d& est, double eps = kDefaultEpsilonSmooth);

/// Mean squared error between raw entries, no smoothing.
double rawMse(const Grid3d& truth, const Grid3d& est);

}  // namespace gridslam

#endif  // GRIDSLAM_KL_HPP
