#pragma once

#include <string>

#include "mreg/gelfand.hpp"
#include "mreg/nonauto_form.hpp"

namespace mreg {

// alpha = 0: weak form E(v,w) = <v' + A v, (1 - delta H) w>.
// alpha > 0: E(v,w) = <v' + A v, Phi w>, Phi with symbol (1 + i delta sign xi)|xi|^{2 alpha} + rho.
struct StabilizedSpec {
  double alpha = 0.0;
  double delta = 0.0;
  double rho = 0.0;
};

cplx stabilized_form(const SpaceTimeOperator& A, const Signal& v, const Signal& w, const StabilizedSpec& s);

// alpha = 0: ||d^{1/2} v||^2_{L2(H)} + ||v||^2_{L2(V)}.
// alpha > 0: ||d^{1/2+alpha} v||^2_{L2(H)} + ||d^alpha v||^2_{L2(V)} + ||v||^2_{L2(V)}.
double stabilized_norm_sq(const GelfandTriple& T, const Signal& v, double alpha);

struct CoercivityMeasure {
  double value = 0.0;  // min Re E(v,v) / ||v||^2
  std::string method;  // "dense" or "lanczos"
  int steps = 0;
};

CoercivityMeasure measure_stabilized_coercivity(const SpaceTimeOperator& A, const GelfandTriple& T,
                                                const StabilizedSpec& s, std::size_t dense_limit = 1536,
                                                int lanczos_steps = 160);

// Coefficients of u in the (frequency, B-eigenvector) basis, n x d.
Eigen::MatrixXcd to_spectral(const GelfandTriple& T, const Signal& u);
Signal from_spectral(const GelfandTriple& T, const TimeGrid& grid, const Eigen::MatrixXcd& c);

}  // namespace mreg
