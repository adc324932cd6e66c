#pragma once

#include "mreg/nonauto_form.hpp"
#include "mreg/random_models.hpp"
#include "mreg/signal.hpp"

namespace mreg {

// A(t) = B^{1/2} (C0 + sum_m c_m(t) C_m) B^{1/2} with smooth trig c_m; coercive with margin.
NonAutonomousForm random_smooth_family(const GelfandTriple& T, Rng& rng, double eta = 1.0, double M = 4.0,
                                       double amplitude = 0.3, int modes = 3, double period = 1.0);

// Gaussian-windowed random trigonometric sum; decays to ~e^{-50} at the torus edges
// when L >= 20 sigma.
Signal random_packet(const TimeGrid& grid, Eigen::Index d, Rng& rng, double sigma = 2.0, double max_freq = 4.0,
                     int terms = 4);

// Random trigonometric polynomial in the grid's own frequencies (exactly band-limited).
Signal random_trig(const TimeGrid& grid, Eigen::Index d, Rng& rng, int kmax = 8);

// Smooth random function on the window [a,b] (trig sum in (t-a)/(b-a)), zero elsewhere.
Signal random_on_window(const TimeGrid& grid, Eigen::Index d, Rng& rng, int terms = 5, bool vanish_at_a = false,
                        int first_mode = 0);

}  // namespace mreg
