// Writes spectrum, boundary and reference ellipse for one elliptic matrix.
#include <cstdio>

#include "fovlab/harness.hpp"

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "elliptic_figure";
  const auto f = fovlab::figure_data(fovlab::EnsembleSpec::elliptic(256, 0.4), 1);
  f.report.write(dir);
  std::printf("%s: max|Re z| %.4f (ref %.4f), max|Im z| %.4f (ref %.4f), membership %s\n", dir,
              f.max_abs_re, std::sqrt(2.8), f.max_abs_im, std::sqrt(1.2), f.membership_ok ? "ok" : "FAILED");
}
