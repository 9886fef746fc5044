#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bogo/model.hpp"

namespace bogo {

// E(u) = u^dagger T u + 1/2 sum W_{mnpq} conj(u_m) conj(u_n) u_p u_q.
double hartree_energy(const ModelSystem& m, const Vec& u);

// Tangent gradient 2 (I - u u^dagger)(T u + sum_{npq} W_{.npq} conj(u_n) u_p u_q).
// For a tangent direction d the derivative of E along the retraction
// (u + t d)/|u + t d| at t = 0 equals Re <G, d>.
Vec hartree_gradient(const ModelSystem& m, const Vec& u);

struct HartreeOptions {
  int restarts = 8;
  double tol = 1e-10;     // on the tangent gradient norm
  int max_iter = 20000;
  double step0 = 0.5;
  std::uint64_t seed = 2024;
};

struct HartreeSolution {
  Vec u0;
  double e_H = 0.0;
  double mu_H = 0.0;
  Mat R;       // unitary, column 0 = u0
  Mat h_full;  // rotated mean-field operator on all M modes
  Mat h_plus;  // (M-1)x(M-1)
  Mat K1;
  Mat K2;
  double eta_H = 0.0;
  double grad_norm = 0.0;
  double restart_agreement = 1.0;
  bool uniqueness_warning = false;
  int best_restart = 0;
  std::vector<double> restart_energies;
  ModelSystem rotated;  // T and W expressed in the basis given by R's columns
};

struct ExcitationOperators {
  Mat R;
  Mat h_full;  // rotated h on all M modes; row/column 0 vanish at a critical point
  Mat h_plus;
  Mat K1;
  Mat K2;
  double e_H = 0.0;
  double mu_H = 0.0;
  ModelSystem rotated;
};

// Unitary with column 0 = u0 from a Householder reflection. R = I when
// u0 = e_0.
Mat householder_frame(const Vec& u0);

// W~_{abcd} = sum conj(R_ma) conj(R_nb) R_pc R_qd W_{mnpq}, T~ = R^dagger T R.
ModelSystem rotate_model(const ModelSystem& m, const Mat& R);

ExcitationOperators build_excitation_operators(const ModelSystem& m, const Vec& u0);

// lambda_min of [[h+K1, K2], [conj(K2), conj(h+K1)]]. For real data the
// reduction min(lambda_min(h+K1+K2), lambda_min(h+K1-K2)) is evaluated too
// and the two must agree to 1e-10.
double hessian_gap(const Mat& h_plus, const Mat& K1, const Mat& K2, bool is_real);
double hessian_gap_block(const Mat& h_plus, const Mat& K1, const Mat& K2);
double hessian_gap_real(const Mat& h_plus, const Mat& K1, const Mat& K2);

HartreeSolution minimize_hartree(const ModelSystem& m, const HartreeOptions& opts = {});

// Solution with a prescribed condensate (no minimization).
HartreeSolution hartree_at(const ModelSystem& m, const Vec& u0);

}  // namespace bogo
