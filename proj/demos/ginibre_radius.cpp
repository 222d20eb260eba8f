// r_plus and r_minus of a few Ginibre samples against the large-N prediction.
#include <cstdio>

#include "fovlab/ensembles.hpp"
#include "fovlab/fov.hpp"
#include "fovlab/harness.hpp"

int main() {
  const std::size_t n = 128;
  for (std::uint64_t t = 0; t < 5; ++t) {
    fovlab::RngStream rng(2024, t);
    const auto a = fovlab::sample(fovlab::EnsembleSpec::ginibre(n), rng);
    const auto rb = fovlab::range_boundary(a, fovlab::experiment_sweep());
    std::printf("trial %llu: r_plus %.6f  r_minus %.6f  (%zu samples)\n",
                static_cast<unsigned long long>(t), rb.r_plus(), rb.r_minus_value, rb.samples.size());
  }
  std::printf("prediction: r_plus %.6f  r_minus %.6f\n", fovlab::r_plus_prediction(n),
              fovlab::r_minus_prediction(n));
}
