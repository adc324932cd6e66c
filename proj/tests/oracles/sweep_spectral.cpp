// One-time sweeps for constants frozen in the spectral tests (seed differs from the tests).
#include <cstdio>

#include "mreg/fractional.hpp"
#include "test_util.hpp"

using namespace mreg;

int main() {
  std::mt19937_64 rng(987654321);
  const TimeGrid grid(1024, 4.0, Window{0.0, 1.0});
  double kref = 0, khol = 0;
  SeminormOptions win;
  win.domain = SeminormDomain::window;
  for (int i = 0; i < 3000; ++i) {
    const Signal u = testkit::random_on_window(grid, 1 + i % 3, rng, 2 + i % 6, false, 1);
    const auto e = extend_reflect(u);
    kref = std::max(kref, gagliardo_seminorm(e.extended, 0.3, 2.0) / gagliardo_seminorm(u, 0.3, 2.0, win));
    khol = std::max(khol, holder_seminorm(u, 0.5) / gagliardo_seminorm(u, 0.75, 4.0, win));
  }
  std::printf("reflect K %.6f\nholder K %.6f\n", kref, khol);
}
