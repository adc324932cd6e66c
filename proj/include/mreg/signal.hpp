#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "mreg/time_grid.hpp"

namespace mreg {

using cplx = std::complex<double>;

// Which H_gamma the coordinates of a signal live in.
struct SpaceTag {
  double gamma = 0.0;
  explicit SpaceTag(double g = 0.0);
};

// Samples u(t_k) in C^d, stored as rows of an n x d matrix.
class Signal {
 public:
  Signal(TimeGrid grid, Eigen::MatrixXcd values, SpaceTag space = SpaceTag{});

  static Signal zeros(const TimeGrid& grid, Eigen::Index dim, SpaceTag space = SpaceTag{});
  static Signal sample(const TimeGrid& grid, Eigen::Index dim, const std::function<Eigen::VectorXcd(double)>& fn,
                       SpaceTag space = SpaceTag{});
  static Signal scalar(const TimeGrid& grid, const std::function<cplx(double)>& fn);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  Eigen::Index dim() const { return values_.cols(); }
  std::size_t size() const { return grid_.size(); }
  SpaceTag space() const { return space_; }
  Eigen::VectorXcd at(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)).transpose(); }

  Signal with_values(Eigen::MatrixXcd v) const { return Signal(grid_, std::move(v), space_); }
  Signal with_grid(const TimeGrid& g) const { return Signal(g, values_, space_); }
  Signal restricted_to_window() const;
  Signal scaled(cplx c) const { return with_values(c * values_); }

 private:
  TimeGrid grid_;
  Eigen::MatrixXcd values_;
  SpaceTag space_;
};

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);

// h * sum_k w_k^* v_k and its induced norm, in the stored coordinates.
cplx l2_inner(const Signal& v, const Signal& w);
double l2_norm(const Signal& u);
double max_abs(const Signal& u);

void write_csv(std::ostream& os, const Signal& u, bool complex_columns);
// Reconstructs the grid from the t column (uniform, power-of-two length).
Signal read_csv(std::istream& is, std::optional<Window> window = std::nullopt);

}  // namespace mreg
