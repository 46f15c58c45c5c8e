// Standard-normal CDF and quantile helpers.
#pragma once

namespace wgflow {

/// Inverse of the standard normal CDF. Acklam's rational initial guess
/// followed by two Halley refinements against erfc; accurate to ~1e-15
/// over (0,1). Throws std::domain_error for p outside (0,1).
double standard_normal_quantile(double p);

/// Standard normal CDF via erfc.
double standard_normal_cdf(double x);

/// Standard normal density.
double standard_normal_pdf(double x);

}  // namespace wgflow
