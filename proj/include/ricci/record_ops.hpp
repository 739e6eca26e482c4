#pragma once

#include "ricci/autodiff.hpp"
#include "ricci/feature_map.hpp"

// Recorded (differentiable) counterparts of the gyrovector and feature-map
// formulas, applied row-wise to N x d coordinate matrices.
namespace ricci {

ad::Tensor tan_k_record(const ad::Tensor& t, double kappa);
ad::Tensor atan_k_record(const ad::Tensor& t, double kappa);

// Row-wise Mobius addition of two N x d matrices.
ad::Tensor mobius_add_record(const ad::Tensor& x, const ad::Tensor& y, double kappa);

// Row-wise geodesic distances, N x 1.
ad::Tensor gyro_distance_record(const ad::Tensor& x, const ad::Tensor& y, double kappa);

// Row-wise logarithm at the origin, N x d.
ad::Tensor log_map_zero_record(const ad::Tensor& x, double kappa);

// Row-wise feature map under the spec's frozen draws, N x dim_out.
ad::Tensor apply_map_record(const FeatureMapSpec& spec, const ad::Tensor& x);

}  // namespace ricci
