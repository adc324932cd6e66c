#include "mreg/fourier.hpp"

#include <cmath>
#include <numbers>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"

namespace mreg {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

cplx i_xi_pow(double xi, double alpha) {
  if (alpha == 0.0) return 1.0;
  if (xi == 0.0) return 0.0;
  return std::pow(std::abs(xi), alpha) * std::polar(1.0, alpha * std::numbers::pi * sgn(xi) / 2);
}

}  // namespace

FourierMultiplier::FourierMultiplier(std::string name, Symbol symbol, nlohmann::json params)
    : name_(std::move(name)), symbol_(std::move(symbol)), params_(std::move(params)) {
  if (!std::isfinite(std::abs(symbol_(0.0)))) throw DomainError("multiplier symbol must be finite at 0");
}

nlohmann::json FourierMultiplier::metadata() const { return {{"name", name_}, {"params", params_}}; }

Eigen::VectorXcd FourierMultiplier::on(const TimeGrid& grid) const {
  Eigen::VectorXcd s(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) s(static_cast<Eigen::Index>(k)) = symbol_(grid.frequency(k));
  return s;
}

FourierMultiplier FourierMultiplier::then(const FourierMultiplier& next) const {
  auto a = symbol_, b = next.symbol_;
  return FourierMultiplier(next.name_ + " o " + name_, [a, b](double xi) { return b(xi) * a(xi); },
                           {{"outer", next.metadata()}, {"inner", metadata()}});
}

FourierMultiplier FourierMultiplier::adjoint() const {
  auto a = symbol_;
  return FourierMultiplier("(" + name_ + ")*", [a](double xi) { return std::conj(a(xi)); }, params_);
}

FourierMultiplier identity_multiplier() {
  return FourierMultiplier("Id", [](double) { return cplx(1.0); });
}

FourierMultiplier frac_derivative(double alpha) {
  return FourierMultiplier("d^alpha", [alpha](double xi) { return i_xi_pow(xi, alpha); }, {{"alpha", alpha}});
}

FourierMultiplier frac_derivative_adjoint(double alpha) {
  return FourierMultiplier("d^alpha*", [alpha](double xi) { return std::conj(i_xi_pow(xi, alpha)); },
                           {{"alpha", alpha}});
}

FourierMultiplier abs_derivative(double alpha) {
  return FourierMultiplier(
      "|d|^alpha",
      [alpha](double xi) -> cplx {
        if (alpha == 0.0) return 1.0;
        return xi == 0.0 ? 0.0 : std::pow(std::abs(xi), alpha);
      },
      {{"alpha", alpha}});
}

FourierMultiplier hilbert() {
  return FourierMultiplier("H", [](double xi) { return cplx(0.0, -sgn(xi)); });
}

FourierMultiplier stabilizer(double delta) {
  return FourierMultiplier("(1-delta H)", [delta](double xi) { return cplx(1.0, delta * sgn(xi)); },
                           {{"delta", delta}});
}

Signal apply_symbol(const Eigen::VectorXcd& symbol, const Signal& u) {
  if (static_cast<std::size_t>(symbol.size()) != u.size()) throw StructuralError("symbol length does not match grid");
  Eigen::MatrixXcd x = fft(u.values());
  x = symbol.asDiagonal() * x;
  ifft_columns(x);
  return u.with_values(std::move(x));
}

Signal apply_multiplier(const FourierMultiplier& m, const Signal& u) { return apply_symbol(m.on(u.grid()), u); }

double derivative_norm(const Signal& u, double s) {
  const Eigen::MatrixXcd x = fft(u.values());
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double xi = std::abs(u.grid().frequency(k));
    const double w = s == 0.0 ? 1.0 : (xi == 0.0 ? 0.0 : std::pow(xi, 2 * s));
    acc += w * x.row(static_cast<Eigen::Index>(k)).squaredNorm();
  }
  return std::sqrt(u.grid().spacing() * acc);
}

}  // namespace mreg
