#include "mreg/generators.hpp"

#include <cmath>
#include <numbers>

namespace mreg {

namespace {
constexpr double kPi = std::numbers::pi;
}

NonAutonomousForm random_smooth_family(const GelfandTriple& T, Rng& rng, double eta, double M, double amplitude,
                                       int modes, double period) {
  const auto d = T.dim();
  const Eigen::MatrixXcd C0 = random_normalized_form(d, eta, M, rng);
  std::vector<Eigen::MatrixXcd> Cm;
  std::vector<double> phase;
  for (int m = 0; m < modes; ++m) {
    Eigen::MatrixXcd X = random_complex(d, d, rng);
    X *= amplitude * eta / (X.norm() * modes);
    Cm.push_back(X);
    phase.push_back(uniform(rng, 0, 2 * kPi));
  }
  const Eigen::MatrixXcd S = T.power(1.0).cast<cplx>();
  return NonAutonomousForm(T, [=](double t) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd C = C0;
    for (std::size_t m = 0; m < Cm.size(); ++m)
      C += std::cos(2 * kPi * double(m + 1) * t / period + phase[m]) * Cm[m];
    return S * C * S;
  });
}

Signal random_packet(const TimeGrid& grid, Eigen::Index d, Rng& rng, double sigma, double max_freq, int terms) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> freq(static_cast<std::size_t>(terms * d));
  std::vector<cplx> amp(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i) {
    freq[i] = max_freq * uni(rng);
    amp[i] = cplx(uni(rng), uni(rng));
  }
  const double shift = 0.5 * sigma * uni(rng);
  return Signal::sample(grid, d, [&](double t) {
    Eigen::VectorXcd v(d);
    const double env = std::exp(-(t - shift) * (t - shift) / (2 * sigma * sigma));
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx s = 0;
      for (int m = 0; m < terms; ++m) {
        const std::size_t i = static_cast<std::size_t>(j * terms + m);
        s += amp[i] * std::polar(1.0, freq[i] * t);
      }
      v(j) = env * s;
    }
    return v;
  });
}

Signal random_trig(const TimeGrid& grid, Eigen::Index d, Rng& rng, int kmax) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), d);
  for (int k = -kmax; k <= kmax; ++k) {
    const double xi = 2 * kPi * k / grid.period();
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx a(nd(rng), nd(rng));
      for (std::size_t i = 0; i < grid.size(); ++i)
        v(static_cast<Eigen::Index>(i), j) += a * std::polar(1.0, xi * grid.time(i)) / (1.0 + k * k);
    }
  }
  return Signal(grid, v);
}

Signal random_on_window(const TimeGrid& grid, Eigen::Index d, Rng& rng, int terms, bool vanish_at_a,
                        int first_mode) {
  std::normal_distribution<double> nd;
  const auto& w = grid.window();
  std::vector<cplx> a(static_cast<std::size_t>(terms * d));
  for (auto& x : a) x = cplx(nd(rng), nd(rng));
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), d);
  for (std::size_t i = grid.window_first(); i <= grid.window_last(); ++i) {
    const double x = (grid.time(i) - w.a) / w.length();
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx s = 0;
      for (int m = first_mode; m < terms; ++m) {
        const cplx c = a[static_cast<std::size_t>(j * terms + m)] / double(1 + m);
        s += c * (std::polar(1.0, kPi * m * x) - (vanish_at_a ? 1.0 : 0.0));
      }
      v(static_cast<Eigen::Index>(i), j) = s;
    }
  }
  return Signal(grid, v);
}

}  // namespace mreg
