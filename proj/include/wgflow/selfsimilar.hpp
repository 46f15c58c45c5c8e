// Change of variables between the original-frame dynamics (no confinement,
// spreading) and the rescaled frame (unit confinement, relaxing to a
// stationary profile): y = x / sqrt(1+2t), tau = (1/2) log(1+2t). On
// quantile arrays the transform is a plain dilation, so it is exact.
#pragma once

#include <utility>

#include "wgflow/jko.hpp"
#include "wgflow/measure.hpp"

namespace wgflow {

enum class Frame { Original, Rescaled };

struct FrameTag {
  Frame frame = Frame::Original;
  double time = 0.0;  // t in Original, tau in Rescaled
};

/// Original (x, t) -> rescaled (y, tau): quantiles scaled by (1+2t)^(-1/2),
/// tau = (1/2)log(1+2t). Requires t >= 0.
std::pair<QuantileMeasure, double> to_selfsimilar(const QuantileMeasure& q,
                                                  double t);

/// Inverse transform: quantiles scaled by e^tau, t = (e^{2 tau} - 1)/2.
/// Requires tau >= 0.
std::pair<QuantileMeasure, double> from_selfsimilar(const QuantileMeasure& q,
                                                    double tau);

/// Original-frame flow of E_{kappa,0} computed by running the rescaled flow
/// with alpha = 1 (same kappa and kernel) and mapping every state back.
/// Requires p_base.alpha == 0. The returned trajectory is stamped with
/// original-frame times t_k = (e^{2 k tau} - 1)/2 and original-frame
/// energies/distances recomputed from the mapped states.
FlowTrajectory original_frame_flow(const QuantileMeasure& initial,
                                   double t_final, const JkoConfig& cfg,
                                   const EnergyParams& p_base);

}  // namespace wgflow
