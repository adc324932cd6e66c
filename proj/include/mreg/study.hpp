#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mreg/examples.hpp"
#include "mreg/solver.hpp"

namespace mreg {

// Data shape: spatial vector times a scalar time factor.
//   spatial: zero | first_mode | sine | ones
//   time:    constant | cos (cos 2 pi t / T) | ramp (t / T)
struct DataSpec {
  std::string spatial = "zero";
  double amplitude = 1.0;
  std::string time = "constant";
  nlohmann::json to_json() const;
};

DataSpec data_spec_from_json(const nlohmann::json& j, const char* field);

// first_mode is the lowest eigenvector of Herm A(0), unit in H. sine is sin(pi x_j) or
// sin(2 pi x_j) on the torus, normalized in H. Components of systems share the profile.
Eigen::VectorXcd spatial_vector(const ProblemInstance& P, const std::string& kind);
// Lowest eigenvalue of Herm A(0): the decay rate of first_mode for an autonomous form.
double first_eigenvalue(const ProblemInstance& P);

Eigen::VectorXcd initial_value(const ProblemInstance& P, const DataSpec& s);
Signal forcing_signal(const ProblemInstance& P, const DataSpec& s, const TimeGrid& grid);

struct StudyRow {
  std::size_t n = 0;             // spacings on [0, T]
  std::size_t torus_nodes = 0;
  double du_L2H = 0.0;           // ||u'||_{L2(I;H)}
  double u_HhalfV = 0.0;         // ||u||_{H^{1/2}(I;V)}
  double mr = 0.0;
  double start_error = 0.0;
  double tail_ratio = 0.0;
  std::string method;
  nlohmann::json to_json() const;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double variation_du = 0.0;    // (max - min) / min across rows
  double variation_half = 0.0;
  nlohmann::json to_json() const;
};

double relative_variation(const std::vector<double>& v);

// One solve_ivp run on ivp_grid(T, n) summarized as a row.
StudyRow study_point(const ProblemInstance& P, const DataSpec& f, const DataSpec& u0, double T, std::size_t n,
                     double alpha);
StudyRow row_from_solution(const WeakSolution& sol, std::size_t n);

StudyResult refinement_study(const ProblemInstance& P, const DataSpec& f, const DataSpec& u0, double T,
                             const std::vector<std::size_t>& ns, double alpha);

}  // namespace mreg
