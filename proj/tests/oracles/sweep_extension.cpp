// Ratio of the constant-extension seminorm on the torus segment to the interval seminorm.
#include <cstdio>

#include "form_families.hpp"

using namespace mreg;

int main() {
  Rng rng(77);
  const TimeGrid grid = make_padded_grid(1.0, 512, 1.0);
  double worst = 0.0;
  for (double s : {0.6, 0.75, 0.9}) {
    for (int trial = 0; trial < 40; ++trial) {
      const GelfandTriple T(random_spd(3, rng, 10));
      const auto F = testkit::random_smooth_family(T, rng, 1.0, 4.0, uniform(rng, 0.1, 1.0), 1 + trial % 4,
                                                   uniform(rng, 0.3, 3.0));
      ExtensionOptions o;
      o.s = s;
      o.p = 2;
      const auto E = extend_form_to_line(F, grid, o);
      const double r = form_regularity(E, s, 2, grid.without_window()).seminorm / form_regularity(F, s, 2, grid).seminorm;
      worst = std::max(worst, r);
    }
    std::printf("s=%.2f worst ratio so far %.4f\n", s, worst);
  }
}
