#pragma once

#include <utility>
#include <vector>

#include "bogo/types.hpp"

namespace bogo {

// HH = sum H_mn a*_m a_n + 1/2 sum K_mn a*_m a*_n + 1/2 sum conj(K_mn) a_m a_n
// on d modes, with H Hermitian and K = K^T.
struct QuadraticForm {
  int d = 0;
  Mat H;
  Mat K;
  bool is_real = false;

  // [[H, K], [conj(K), conj(H)]]
  Mat block() const;
  double eta() const;
};

// Checks shapes, Hermiticity of H and symmetry of K.
QuadraticForm make_quadratic(const Mat& H, const Mat& K);

// The diagonalizing transform satisfies a = U b + conj(V) b*, so that
// HH = sum xi_i b*_i b_i + E0.
struct BogoliubovSpectrum {
  RVec xi;  // ascending
  double E0 = 0.0;
  Mat U;
  Mat V;
};

enum class DiagPath { Automatic, Real, Complex };

// Real data uses the symmetric product (H-K)^{1/2}(H+K)(H-K)^{1/2}; complex
// data uses the eigenproblem of S A. Throws HessianGapError when eta <= 0.
BogoliubovSpectrum diagonalize(const QuadraticForm& qf, DiagPath path = DiagPath::Automatic);

struct SymplecticResidual {
  double normalization = 0.0;  // |U*U - V*V - I|_max
  double symmetry = 0.0;       // |U^T V - V^T U|_max
  double diagonal = 0.0;       // |T* A T - diag(xi, xi)|_max
};
SymplecticResidual symplectic_residual(const QuadraticForm& qf, const BogoliubovSpectrum& s);

// Root of t -> lambda_min(H + K - t^2 (H-K)^{-1}) by bisection. Real data only.
double xi_min_via_Xt(const QuadraticForm& qf, std::pair<double, double> bracket, double tol);
double xi_min_via_Xt(const QuadraticForm& qf, double tol = 1e-12);
double lambda_min_Xt(const QuadraticForm& qf, double t);

struct SpectrumWindow {
  std::vector<double> values;  // ascending, with multiplicity
  bool truncated = false;
};

// Every E0 + sum n_i xi_i <= E0 + window, up to max_count values.
SpectrumWindow enumerate_spectrum(const BogoliubovSpectrum& s, double window,
                                  std::size_t max_count = 100000);

// gamma_mn = <a*_n a_m>, alpha_mn = <a_n a_m>.
struct QuasiFreePair {
  Mat gamma;
  Mat alpha;
};

QuasiFreePair ground_state_dm(const BogoliubovSpectrum& s);

struct QuasiFreeResidual {
  double purity = 0.0;       // |alpha alpha* - gamma (I + gamma)|_max
  double commutation = 0.0;  // |gamma alpha - alpha conj(gamma)|_max
  double alpha_symmetry = 0.0;
  double gamma_hermiticity = 0.0;
};
QuasiFreeResidual quasi_free_residual(const QuasiFreePair& p);

// Tr[H gamma] + Re sum K_mn conj(alpha_mn)  (= <HH> for that pair).
double evaluate_q(const QuadraticForm& qf, const QuasiFreePair& p);

// E0 + beta^{-1} sum log(1 - exp(-beta xi_i)).
double free_energy_bogoliubov(const BogoliubovSpectrum& s, double beta);

}  // namespace bogo
