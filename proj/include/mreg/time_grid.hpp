#pragma once

#include <cstddef>
#include <optional>

#include <nlohmann/json.hpp>

namespace mreg {

struct Window {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

// Uniform periodic grid t_k = -L/2 + k*h on [-L/2, L/2), h = L/n.
class TimeGrid {
 public:
  TimeGrid(std::size_t n_points, double period, std::optional<Window> window = std::nullopt);

  std::size_t size() const { return n_; }
  double period() const { return period_; }
  double spacing() const { return period_ / static_cast<double>(n_); }
  double time(std::size_t k) const;
  // Signed angular frequency of FFT bin k; the Nyquist bin counts as negative.
  double frequency(std::size_t k) const;
  long signed_index(std::size_t k) const;

  bool has_window() const { return window_.has_value(); }
  const Window& window() const;
  std::size_t window_first() const { return first_; }
  std::size_t window_last() const { return last_; }
  std::size_t window_points() const { return last_ - first_ + 1; }
  // Nearest node index to t (no range check beyond the torus).
  std::size_t index_of(double t) const;

  TimeGrid with_window(std::optional<Window> w) const { return TimeGrid(n_, period_, w); }
  TimeGrid without_window() const { return TimeGrid(n_, period_); }

  bool operator==(const TimeGrid& o) const;
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }

 private:
  std::size_t n_;
  double period_;
  std::optional<Window> window_;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
};

// Grid whose window [0,T] sits on nodes with at least `pad` of room on both sides.
TimeGrid make_padded_grid(double T, std::size_t n_points, double pad);

void to_json(nlohmann::json& j, const TimeGrid& g);
TimeGrid grid_from_json(const nlohmann::json& j);

}  // namespace mreg
