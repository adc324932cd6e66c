#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mreg/gelfand.hpp"

namespace mreg {

using MatrixSampler = std::function<Eigen::MatrixXcd(double)>;
using ScalarProfile = std::function<double(double)>;

struct FormConstants {
  double M = 0.0;
  double eta = 0.0;
  double omega = 0.0;
  double M2 = 0.0;
  double eta2 = 0.0;
  nlohmann::json to_json() const;
};

// a = a1 + a2 with a2 bounded from V into H_{1+2beta-2alpha}'.
struct FormSplit {
  MatrixSampler part1;
  MatrixSampler part2;
  double alpha = 0.5;
  double beta = 0.0;
};

// A(t) = base + g(t) * direction; lets regularity reports factor through g.
struct SeparableStructure {
  Eigen::MatrixXcd base;
  Eigen::MatrixXcd direction;
  ScalarProfile profile;
};

class NonAutonomousForm {
 public:
  NonAutonomousForm(GelfandTriple triple, MatrixSampler sampler, nlohmann::json description = nlohmann::json::object());

  static NonAutonomousForm autonomous(GelfandTriple triple, Eigen::MatrixXcd A);
  static NonAutonomousForm separable(GelfandTriple triple, Eigen::MatrixXcd base, Eigen::MatrixXcd direction,
                                     ScalarProfile g, nlohmann::json description = nlohmann::json::object());

  // Validated sample: right dimension, finite entries.
  Eigen::MatrixXcd at(double t) const;
  const GelfandTriple& triple() const { return *triple_; }
  Eigen::Index dim() const { return triple_->dim(); }
  const MatrixSampler& sampler() const { return sampler_; }
  const FormConstants& constants() const { return constants_; }
  const std::optional<FormSplit>& split() const { return split_; }
  const std::optional<SeparableStructure>& separable_structure() const { return separable_; }
  bool is_autonomous() const { return autonomous_; }
  const nlohmann::json& description() const { return description_; }

  NonAutonomousForm with_split(FormSplit split) const;
  NonAutonomousForm with_constants(FormConstants c) const;
  NonAutonomousForm with_sampler(MatrixSampler sampler, nlohmann::json description) const;

 private:
  std::shared_ptr<const GelfandTriple> triple_;
  MatrixSampler sampler_;
  nlohmann::json description_;
  FormConstants constants_;
  std::optional<FormSplit> split_;
  std::optional<SeparableStructure> separable_;
  bool autonomous_ = false;
};

// Block-diagonal-in-time operator (A v)(t_k) = A(t_k) v(t_k). Separable and autonomous forms are
// stored as base + g_k direction, general forms as one block per node.
class SpaceTimeOperator {
 public:
  SpaceTimeOperator(TimeGrid grid, std::vector<Eigen::MatrixXcd> blocks);
  SpaceTimeOperator(TimeGrid grid, Eigen::MatrixXcd base, Eigen::MatrixXcd direction, std::vector<double> g);

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return affine_ ? base_.rows() : blocks_.front().rows(); }
  Eigen::MatrixXcd block(std::size_t k) const;
  Signal apply(const Signal& v) const;
  Signal apply_adjoint(const Signal& v) const;
  // int <A v, w> = h sum_k w_k^* A_k v_k
  cplx pairing(const Signal& v, const Signal& w) const;
  Eigen::MatrixXcd mean_block() const;

 private:
  Signal apply_impl(const Signal& v, bool adjoint) const;

  TimeGrid grid_;
  bool affine_ = false;
  std::vector<Eigen::MatrixXcd> blocks_;
  Eigen::MatrixXcd base_, dir_;
  std::vector<double> g_;
};

SpaceTimeOperator assemble_spacetime(const NonAutonomousForm& F, const TimeGrid& grid);
// Quadrature of a(t, v(t), w(t)) straight from the sampler.
cplx form_quadrature(const NonAutonomousForm& F, const Signal& v, const Signal& w);
// 1_{(-inf, t)} v on grid nodes.
Signal mask_before(const Signal& v, double t);

// Measured M, eta, omega (and M2, eta2 when split) over the grid's window, or all nodes.
FormConstants estimate_constants(const NonAutonomousForm& F, const TimeGrid& grid);

struct RegularityBand {
  double lo = 0, hi = 0;  // |t-s| range
  double contribution = 0;
};

struct RegularityReport {
  double s = 0, p = 0;
  double integral = 0;  // the double integral, p-th power of the seminorm
  double seminorm = 0;
  std::vector<RegularityBand> bands;  // coarse to fine
  // Least-squares slope of log2(contribution) over the finer half of the bands:
  // negative means decaying bands (finite seminorm in the limit).
  double fine_slope = 0;
  nlohmann::json to_json() const;
};

RegularityReport form_regularity(const NonAutonomousForm& F, double s, double p, const TimeGrid& grid);
// The same report for a scalar profile g (operator norm replaced by |g(t)-g(s)|).
RegularityReport profile_regularity(const ScalarProfile& g, double s, double p, const TimeGrid& grid);

struct CommutatorReport {
  double gamma = 0, epsilon = 0, delta0 = 0, delta = 0, p = 0, q = 0;
  double sup_G = 0;
  double G_seminorm = 0;  // [G]_{W^{gamma+delta0, 1/gamma}} on R (constant continuation)
  double h = 0, rho = 0, c_eps = 0;
  double lhs = 0;  // sqrt of the double integral
  double d_gamma_v = 0, l2_v = 0;
  double rhs = 0;
  bool holds = true;
  double bounded_lhs = 0;  // ||d^gamma (G v)||
  double bounded_rhs = 0;
  double c_one = 0;
  bool bounded_holds = true;
  nlohmann::json to_json() const;
};

struct CommutatorRecipe {
  double gamma = 0, epsilon = 0, delta0 = 0, delta = 0, p = 0, q = 0;
  double sup_G = 0, G_seminorm = 0;
  double h = 0, rho = 0, c_eps = 0;
};

// c_eps from the near/far split of the commutator estimate.
CommutatorRecipe commutator_recipe(double gamma, double epsilon, double delta0, double sup_G, double G_seminorm,
                                   double h_max);

// G sampled on a grid and continued by its end values outside the torus. The G-dependent
// part (sup, seminorm, c_eps) is computed once and reused for every v.
class CommutatorEstimate {
 public:
  CommutatorEstimate(const MatrixSampler& G, const TimeGrid& grid, Eigen::Index dim, double gamma, double epsilon,
                     std::optional<double> delta0 = std::nullopt);
  CommutatorReport check(const Signal& v) const;
  const CommutatorRecipe& recipe() const { return rec_; }

 private:
  TimeGrid grid_;
  std::vector<Eigen::MatrixXcd> Gs_;
  Eigen::MatrixXcd GL_, GR_;
  double gamma_, epsilon_;
  CommutatorRecipe rec_, rec1_;
};

CommutatorReport commutator_check(const MatrixSampler& G, const Signal& v, double gamma, double epsilon,
                                  std::optional<double> delta0 = std::nullopt);

enum class ExtensionMode { time_average, constant };

struct ExtensionOptions {
  ExtensionMode mode = ExtensionMode::constant;
  // Regularity index checked against the continuity threshold in constant mode.
  double s = 0.75;
  double p = 2.0;
};

// Extends a form given on the grid's window to the whole torus.
NonAutonomousForm extend_form_to_line(const NonAutonomousForm& F, const TimeGrid& grid, const ExtensionOptions& opt);
// a(t) + omega (.|.)_H
NonAutonomousForm shift_form(const NonAutonomousForm& F, double omega);

}  // namespace mreg
