#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mreg/nonauto_form.hpp"

namespace mreg {

enum class LinearSolverKind { automatic, direct, iterative };

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::automatic;
  double tol = 1e-10;
  int max_iter = 600;
  int restart = 80;
  // automatic switches to the iterative solver above this many unknowns.
  std::size_t direct_limit = 1024;
};

struct OracleOptions {
  bool enabled = false;
  std::size_t oversample = 4;
};

struct SolveConfig {
  explicit SolveConfig(TimeGrid g) : grid(std::move(g)) {}

  double alpha = 0.0;                 // 0: weak theory only
  std::optional<double> delta_stab;   // default eta/(M+1)
  std::optional<double> rho;          // default: doubling search
  double delta0 = 0.1;                // regularity margin for the hypothesis check
  TimeGrid grid;
  LinearSolverOptions linear;
  OracleOptions oracle;
  bool measure_stabilized = true;
  std::size_t measure_nodes = 1024;  // torus nodes for the coercivity measurement (coarsened when larger)
  int junction_order = 3;             // Taylor order at the interval ends (solve_ivp)
  double tail_tol = 1e-8;

  void validate() const;
};

// (d u)(t_k) by the spectral derivative.
Signal time_derivative(const Signal& u);

// The collocation system (d + A) u = f on the torus.
class CollocationSystem {
 public:
  explicit CollocationSystem(SpaceTimeOperator op);

  const SpaceTimeOperator& op() const { return op_; }
  const TimeGrid& grid() const { return op_.grid(); }
  Signal apply(const Signal& u) const;
  // (d + A_mean)^{-1} r, block diagonal in frequency.
  Signal precondition(const Signal& r) const;
  Eigen::MatrixXcd dense() const;

  struct Result {
    Signal u;
    double residual = 0.0;
    std::vector<double> history;
    int iterations = 0;
    std::string method;
  };
  Result solve(const Signal& f, const LinearSolverOptions& opt) const;

 private:
  SpaceTimeOperator op_;
  Eigen::MatrixXcd V_, Vinv_;
  Eigen::VectorXcd lambda_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;  // fallback when A_mean is badly non-normal
};

struct TraceReport {
  Eigen::VectorXcd u0, uT;
  double start_error = 0.0;      // ||u(0) - u0||_H
  double u0_h2alpha = 0.0;       // ||u0||_{H_{2 alpha}}
  double u0_sqrtA = 0.0;         // ||A(0)^{1/2} u0||_H
  double uT_sqrtA = 0.0;         // ||A(T)^{1/2} u(T)||_H
  nlohmann::json to_json() const;
};

struct StabilizedReport {
  double alpha = 0.0, delta = 0.0, rho = 0.0;
  double predicted = 0.0;  // delta
  double measured = 0.0;   // discrete coercivity constant of E in the V_alpha norm
  int doublings = 0;
  bool reached = false;    // measured >= predicted / 2
  std::string method;
  nlohmann::json to_json() const;
};

struct WeakSolution {
  WeakSolution(Signal u_, Signal du_, Signal Au_) : u(std::move(u_)), du(std::move(du_)), Au(std::move(Au_)) {}
  Signal u, du, Au;
  double alpha = 0.0;
  std::map<std::string, double> norms;
  double residual = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  std::string method;
  FormConstants constants;
  std::optional<TraceReport> trace;
  std::optional<StabilizedReport> stabilized;
  std::vector<std::string> warnings;
  nlohmann::json to_json() const;  // everything except the signals
};

// Norms of a line solution (keys documented in the README).
std::map<std::string, double> line_norms(const GelfandTriple& T, const Signal& u, const Signal& du, const Signal& Au,
                                         double alpha);
// Norms on the window I of the grid.
std::map<std::string, double> interval_norms(const GelfandTriple& T, const Signal& u, const Signal& du,
                                             const Signal& Au, double alpha);

WeakSolution solve_line_weak(const NonAutonomousForm& F, const Signal& f, const SolveConfig& cfg);
WeakSolution solve_line_regular(const NonAutonomousForm& F, const Signal& f, const SolveConfig& cfg);

struct CausalityReport {
  double t_cut = 0.0, buffer = 0.0, tolerance = 0.0;
  double ratio = 0.0;  // ||u||_{L^2((-L/2 + buffer, t_cut); H)} / ||u||_{L^2; H}
  bool region_empty = false;
  bool holds = true;
  nlohmann::json to_json() const;
};

// Throws DomainError when f does not vanish before t_cut.
CausalityReport causality_check(const NonAutonomousForm& F, const Signal& f, const WeakSolution& u, double t_cut,
                                double tolerance = 1e-6);

// u' + A(t) u = f on I = window of cfg.grid, u(0) = u0. f is read on the window nodes only.
WeakSolution solve_ivp(const NonAutonomousForm& F, const Signal& f, const Eigen::VectorXcd& u0, const SolveConfig& cfg);

// Torus grid with n spacings on the window [0, T] and enough room on both sides for the dissipation buffer.
// The torus size is the smallest power of two that fits.
TimeGrid ivp_grid(double T, std::size_t n, const NonAutonomousForm& F, double tail_tol = 1e-8);

struct EnergyReport {
  double lhs = 0.0;  // 1/2 |u(T)|^2 + int Re a(t,u,u)
  double rhs = 0.0;  // 1/2 |u0|^2 + int Re <f,u>
  double relative_error = 0.0;
  nlohmann::json to_json() const;
};

EnergyReport energy_balance(const NonAutonomousForm& F, const Signal& f, const WeakSolution& sol,
                            const Eigen::VectorXcd& u0);

struct InterpolationReport {
  double alpha = 0.0, delta = 0.0, theta = 0.0;
  double lhs = 0.0, first = 0.0, second = 0.0, rhs = 0.0, slack = 0.0;
  bool holds = true;
  nlohmann::json to_json() const;
};

// ||d^{delta+2alpha} u||_{L2(H_{1-2delta-2alpha})} <= ||d^{(delta+1)/2+alpha} u||_{L2(H_{-delta})}^theta
//   * ||d^{delta+alpha} u||_{L2(H_{1-2delta})}^{1-theta}, theta = 2alpha/(1-delta).
InterpolationReport interpolation_inequality_check(const Signal& u, double alpha, double delta,
                                                   const GelfandTriple& T);

}  // namespace mreg
