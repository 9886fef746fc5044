#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bogo/eigen.hpp"
#include "bogo/model.hpp"
#include "bogo/quadratic.hpp"

namespace bogo {

constexpr std::size_t kDefaultBasisCap = 5'000'000;

// Occupation vectors of M modes, either with sum exactly N (sector) or sum at
// most N (truncated). States are stored in lexicographic order of
// (n_0, n_1, ...), so the vacuum is state 0 of a truncated basis.
class OccupationBasis {
 public:
  enum class Kind { Sector, Truncated };

  static OccupationBasis sector(int M, int N, std::size_t cap = kDefaultBasisCap);
  static OccupationBasis truncated(int M, int N_max, std::size_t cap = kDefaultBasisCap);

  // Dimension without building the basis; saturates at UINT64_MAX.
  static std::uint64_t sector_dim(int M, int N);
  static std::uint64_t truncated_dim(int M, int N_max);

  Kind kind() const { return kind_; }
  int M() const { return M_; }
  int N() const { return N_; }
  std::size_t dim() const { return dim_; }

  const int* state(std::size_t i) const { return states_.data() + i * static_cast<std::size_t>(M_); }
  int occupation(std::size_t i, int mode) const { return state(i)[mode]; }
  int total(std::size_t i) const;

  // Exact rank of an occupation vector, or -1 if it is not in the basis.
  long long index_of(const int* occ) const;
  long long index_of(const std::vector<int>& occ) const { return index_of(occ.data()); }

 private:
  OccupationBasis(Kind kind, int M, int N, std::size_t cap);
  std::uint64_t binom(int n, int k) const;

  Kind kind_ = Kind::Sector;
  int M_ = 0;
  int N_ = 0;
  std::size_t dim_ = 0;
  std::vector<int> states_;
  std::vector<std::uint64_t> binom_;  // (N + M + 2) x (M + 2) table
  int binom_cols_ = 0;
};

// sum A_mn a*_m a_n on any basis.
eig::SparseHermitian assemble_one_body(const OccupationBasis& basis, const Mat& A);

// sum T_mn a*_m a_n + kappa_N/2 sum W_mnpq a*_m a*_n a_p a_q on the N-particle
// sector, kappa_N = 1/(N-1) (+ kappa/N^2 when kappa is given).
eig::SparseHermitian assemble_HN(const ModelSystem& m, int N, std::optional<double> kappa = {},
                                 std::size_t cap = kDefaultBasisCap);

// The quadratic Hamiltonian on the truncated basis of d modes with at most
// `cutoff` excitations.
eig::SparseHermitian assemble_bogoliubov_fock(const QuadraticForm& qf, int cutoff,
                                              std::size_t cap = kDefaultBasisCap);

// map[i] = index in `to` of the relabeled sector state i of `from`.
std::vector<std::size_t> un_permutation(const OccupationBasis& from, const OccupationBasis& to);

// (n_0, n_1, ..., n_{M-1}) |-> (n_1, ..., n_{M-1}), coefficients unchanged.
Vec apply_UN(const Vec& psi, const OccupationBasis& from, const OccupationBasis& to);
Vec apply_UN_inverse(const Vec& phi, const OccupationBasis& from, const OccupationBasis& to);

// Conjugates a sector operator by the relabeling.
eig::SparseHermitian relabel(const eig::SparseHermitian& A, const std::vector<std::size_t>& map,
                             std::size_t dim);
Mat relabel(const Mat& A, const std::vector<std::size_t>& map);

// U_N (H_N - N e_H) U_N^* on the truncated excitation basis (M-1 modes, <= N).
// `m` must already be expressed in a basis whose mode 0 is the condensate.
eig::SparseHermitian transformed_HN(const ModelSystem& m, int N, double e_H,
                                    std::optional<double> kappa = {},
                                    std::size_t cap = kDefaultBasisCap);

// Restriction of an operator on a truncated basis to states with at most
// `n_max` excitations.
eig::SparseHermitian restrict_truncated(const eig::SparseHermitian& A,
                                        const OccupationBasis& basis, int n_max);

// Diagonal of N_+: N - n_0 on a sector, sum of occupations on a truncated basis.
RVec number_plus(const OccupationBasis& basis);

// Smoothstep-based partition of unity in N_+/M_loc.
double loc_f(double x);
double loc_g(double x);
double localization_constant();  // C_f = 2(|f'|_inf^2 + |g'|_inf^2)

struct Localization {
  RVec f;
  RVec g;
  double C_f = 0.0;
};
Localization localization_ops(const OccupationBasis& basis, int M_loc);

struct OneBodyDM {
  Mat gamma;  // gamma_mn = <a*_n a_m>
  Mat alpha;  // alpha_mn = <a_n a_m>
};
OneBodyDM one_body_dm(const Vec& psi, const OccupationBasis& basis);

// gamma_00 / N for a sector vector.
double condensation_fraction(const Vec& psi, const OccupationBasis& basis);

constexpr Eigen::Index kDenseGibbsCap = 4000;

struct GibbsObjects {
  double free_energy = 0.0;
  Mat gibbs;
};
GibbsObjects gibbs_objects(const Mat& H, double beta);

}  // namespace bogo
