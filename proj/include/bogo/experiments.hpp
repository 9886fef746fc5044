#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bogo/eigen.hpp"
#include "bogo/fock.hpp"
#include "bogo/hartree.hpp"
#include "bogo/model.hpp"
#include "bogo/quadratic.hpp"

namespace bogo {

struct StudyConfig {
  ModelSystem model;
  std::string model_source;  // path, or "builtin:<name>" / "inline:<generator>"
  std::vector<int> N_list{10, 20, 40, 80};
  int L = 3;
  std::optional<double> beta;
  std::optional<double> kappa;
  int cutoff = 60;
  std::vector<int> M_loc_list{4, 8, 16};
  std::uint64_t seed = 12345;
  std::string output_dir = "out";
  HartreeOptions hartree;
  eig::LanczosOptions lanczos;
  double eps0 = 0.1;    // (1 - eps0) sum h_j in the strong-condensation check
  double slack = 0.05;  // accepted o(N) term, per particle
  std::vector<int> validate_N{4, 8, 16};
  int ims_samples = 200;
  std::size_t basis_cap = kDefaultBasisCap;
};

// Checks N_list ascending with N >= 2, L >= 1, cutoff >= 2.
void validate_config(const StudyConfig& cfg);

// JSON document; `model` is a path (relative to base_dir), or an object
// {"builtin": name} / {"lattice_gas": {...}} / {"separable_gas": {...}}.
StudyConfig config_from_json(const std::string& text, const std::string& base_dir = ".");
StudyConfig load_config(const std::string& path);
std::string config_to_json(const StudyConfig& cfg);

// Hartree solution, quadratic form and its diagonalization.
struct Pipeline {
  HartreeSolution hartree;
  QuadraticForm qf;
  std::optional<BogoliubovSpectrum> spectrum;  // empty when eta_H <= 0
};
Pipeline prepare(const StudyConfig& cfg);

struct ConvergenceRow {
  int N = 0;
  std::vector<double> lambda_N;  // lambda_L(H_N) - N e_H
  std::vector<double> lambda_H;  // lambda_L(HH) (+ kappa (mu_H - e_H))
  std::vector<double> abs_err;
  double condensation_deficit = 0.0;
  double overlap = 0.0;
  double residual_ratio = 0.0;
  double gap = 0.0;  // lambda_2(H_N) - lambda_1(H_N)
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double e_H = 0.0;
  double mu_H = 0.0;
  double eta_H = 0.0;
  double xi_min = 0.0;
  std::vector<double> fitted_exponent;  // slope of log abs_err vs log N, per L
};
ConvergenceReport run_convergence(const StudyConfig& cfg);

struct ResidualRow {
  int N = 0;
  int M_loc = 0;
  double r = 0.0;
  double ratio = 0.0;  // r / sqrt(M_loc / N)
};
std::vector<ResidualRow> run_residual(const StudyConfig& cfg);

struct ImsRow {
  int M_loc = 0;
  int cutoff = 0;
  double max_defect = 0.0;
  double bound = 0.0;  // C_f sigma^3 / M_loc^2, sigma = 2
  double C_f = 0.0;
  bool pass = false;
};
std::vector<ImsRow> run_ims(const StudyConfig& cfg);
std::vector<ImsRow> run_ims(const QuadraticForm& qf, const std::vector<int>& M_loc_list,
                            int samples, std::uint64_t seed);

struct ThermalRow {
  int N = 0;
  double F_N = 0.0;       // F_beta(N) - N e_H
  double F_H = 0.0;       // -beta^{-1} log Tr e^{-beta HH}
  double gap = 0.0;       // |F_N - F_H|
  double trace_dist = 0.0;
  int window = 0;         // excitation cutoff of the trace-norm comparison
};
std::vector<ThermalRow> run_thermal(const StudyConfig& cfg);

struct CondensationCheck {
  int N = 0;
  double lambda_min_per_N = 0.0;  // lambda_min(H_N - N e_H - (1 - eps0) dGamma(h)) / N
  bool pass = false;
};

struct AssumptionReport {
  double restart_agreement = 0.0;
  bool uniqueness_warning = false;
  double eta_H = 0.0;
  double h_min = 0.0;  // lambda_min(h_plus)
  double K1_hs = 0.0;
  double K2_hs = 0.0;
  double grad_norm = 0.0;
  std::vector<CondensationCheck> condensation;
  bool passed = false;
};
AssumptionReport validate_assumptions(const StudyConfig& cfg);

// s -> "%.17g"
std::string fmt(double v);

// Entry point of the command-line tool. Exit codes: 0 success, 1 validation
// failure, 2 usage error, 3 resource cap.
int cli_main(int argc, const char* const* argv);

}  // namespace bogo
