// The 2x2 Jordan block has the disc of radius 1/2 as numerical range.
#include <cstdio>

#include "fovlab/fov.hpp"

int main() {
  const fovlab::ComplexMatrix j(2, {0.0, 1.0, 0.0, 0.0});
  const auto r = fovlab::numerical_radius(j, 1e-8);
  const auto m = fovlab::inner_numerical_radius_certificate(j, 1e-8);
  std::printf("r_plus  in [%.12f, %.12f]\n", r.lower, r.upper);
  std::printf("min h   in [%.12f, %.12f], r_minus = %.12f\n", m.min_h_lower, m.min_h_upper, m.value);
  std::printf("0.6 is %s, 0.3i is %s\n",
              fovlab::membership_name(fovlab::contains(fovlab::range_boundary(j, 1e-6), 0.6)),
              fovlab::membership_name(fovlab::contains(fovlab::range_boundary(j, 1e-6), {0.0, 0.3})));
}
