#include "mreg/time_grid.hpp"

#include <cmath>
#include <numbers>

#include "mreg/errors.hpp"

namespace mreg {

namespace {

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::size_t node_of(double t, double left, double h, const char* what) {
  const double x = (t - left) / h;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-8)
    throw StructuralError(std::string("window endpoint ") + what + " is not a grid node");
  return static_cast<std::size_t>(r);
}

}  // namespace

TimeGrid::TimeGrid(std::size_t n_points, double period, std::optional<Window> window)
    : n_(n_points), period_(period), window_(window) {
  if (!power_of_two(n_)) throw StructuralError("grid size must be a power of two >= 2");
  if (!(period > 0.0) || !std::isfinite(period)) throw StructuralError("grid period must be positive");
  if (window_) {
    const double left = -period_ / 2, right = period_ / 2;
    const double len = window_->length();
    if (!(len > 0.0)) throw StructuralError("empty interval window");
    const double slack = 1e-9 * period_;
    if (window_->a - left < len - slack || right - window_->b < len - slack)
      throw StructuralError("interval window needs padding >= its length on both sides");
    first_ = node_of(window_->a, left, spacing(), "a");
    last_ = node_of(window_->b, left, spacing(), "b");
  }
}

double TimeGrid::time(std::size_t k) const { return -period_ / 2 + static_cast<double>(k) * spacing(); }

long TimeGrid::signed_index(std::size_t k) const {
  const long n = static_cast<long>(n_), kk = static_cast<long>(k);
  return kk < n / 2 ? kk : kk - n;
}

double TimeGrid::frequency(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(signed_index(k)) / period_;
}

const Window& TimeGrid::window() const {
  if (!window_) throw StructuralError("grid has no interval window");
  return *window_;
}

std::size_t TimeGrid::index_of(double t) const {
  const double x = std::round((t + period_ / 2) / spacing());
  if (x < 0) return 0;
  return std::min(n_ - 1, static_cast<std::size_t>(x));
}

bool TimeGrid::operator==(const TimeGrid& o) const {
  if (n_ != o.n_ || period_ != o.period_ || window_.has_value() != o.window_.has_value()) return false;
  return !window_ || (window_->a == o.window_->a && window_->b == o.window_->b);
}

TimeGrid make_padded_grid(double T, std::size_t n_points, double pad) {
  if (!(T > 0)) throw DomainError("interval length must be positive");
  pad = std::max(pad, T);
  // T = m*h and L = n*h with L/2 - T >= pad; 0 is a node because n is even.
  std::size_t m = static_cast<std::size_t>(std::floor(static_cast<double>(n_points) * T / (2 * T + 2 * pad)));
  if (m < 2) throw StructuralError("too few points to resolve the interval");
  const double L = static_cast<double>(n_points) * T / static_cast<double>(m);
  return TimeGrid(n_points, L, Window{0.0, T});
}

void to_json(nlohmann::json& j, const TimeGrid& g) {
  j = {{"n_points", g.size()}, {"period", g.period()}};
  if (g.has_window()) j["window"] = {g.window().a, g.window().b};
}

TimeGrid grid_from_json(const nlohmann::json& j) {
  std::optional<Window> w;
  if (j.contains("window")) w = Window{j["window"].at(0).get<double>(), j["window"].at(1).get<double>()};
  return TimeGrid(j.at("n_points").get<std::size_t>(), j.at("period").get<double>(), w);
}

}  // namespace mreg
