#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "mreg/signal.hpp"

namespace mreg {

// Diagonal operator on torus frequencies: (m u)^(xi) = symbol(xi) * u^(xi).
class FourierMultiplier {
 public:
  using Symbol = std::function<cplx(double)>;

  FourierMultiplier(std::string name, Symbol symbol, nlohmann::json params = nlohmann::json::object());

  cplx operator()(double xi) const { return symbol_(xi); }
  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }
  nlohmann::json metadata() const;

  // Symbol values in FFT bin order for a grid.
  Eigen::VectorXcd on(const TimeGrid& grid) const;
  // Product of symbols, i.e. composition of the operators.
  FourierMultiplier then(const FourierMultiplier& next) const;
  FourierMultiplier adjoint() const;

 private:
  std::string name_;
  Symbol symbol_;
  nlohmann::json params_;
};

FourierMultiplier identity_multiplier();
// (i xi)^alpha on the principal branch, 0 at xi = 0 (identity when alpha = 0).
FourierMultiplier frac_derivative(double alpha);
FourierMultiplier frac_derivative_adjoint(double alpha);
FourierMultiplier abs_derivative(double alpha);
// Symbol -i sign(xi).
FourierMultiplier hilbert();
// 1 - delta*H, symbol 1 + i delta sign(xi).
FourierMultiplier stabilizer(double delta);

Signal apply_multiplier(const FourierMultiplier& m, const Signal& u);
// Applies a tabulated symbol (FFT bin order).
Signal apply_symbol(const Eigen::VectorXcd& symbol, const Signal& u);

// ||d^s u||_{L^2} in the stored coordinates (s = 0 gives the plain L^2 norm).
double derivative_norm(const Signal& u, double s);

}  // namespace mreg
