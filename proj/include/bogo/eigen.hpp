#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bogo/types.hpp"

// Spectral kernels shared by every other module.
namespace bogo::eig {

// Number of worker threads used by sparse matvec and Fock-space assembly.
// Results are bit-identical for every thread count.
void set_threads(int n);
int threads();

// Runs fn(begin, end) over contiguous chunks of [0, n), one chunk per worker,
// chunks ordered by index.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, int)>& fn);

// max |A - A^dagger| entry with its location.
struct Asymmetry {
  double value = 0.0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};
Asymmetry max_asymmetry(const Mat& A);

bool is_hermitian(const Mat& A, double rel_tol = 1e-12);

// Throws ValidationError naming the worst entry when A is not Hermitian.
void require_hermitian(const Mat& A, const char* what = "matrix");

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

// Hermitian matrix stored as its upper triangle (row <= col). Entries added
// below the diagonal are conjugated into the upper triangle. After
// finalize() duplicates are merged and a full CSR copy is kept for matvec.
class SparseHermitian {
 public:
  SparseHermitian() = default;
  explicit SparseHermitian(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  void add(std::size_t row, std::size_t col, cplx value);
  void append(const std::vector<Triplet>& upper);
  void finalize();
  bool finalized() const { return finalized_; }

  const std::vector<Triplet>& triplets() const { return upper_; }
  std::size_t nnz() const { return upper_.size(); }

  void matvec(Eigen::Ref<const Vec> x, Vec& y) const;
  // Imaginary parts of all stored entries are exactly zero.
  bool real_valued() const { return real_valued_; }
  // Requires real_valued().
  void matvec_real(Eigen::Ref<const RVec> x, RVec& y) const;
  Vec operator*(const Vec& x) const;

  Mat to_dense() const;
  double max_abs() const;

  // Diagonal (real parts).
  RVec diagonal() const;

 private:
  std::size_t dim_ = 0;
  bool finalized_ = false;
  std::vector<Triplet> upper_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<cplx> values_;
  std::vector<double> real_values_;
  bool real_valued_ = false;
};

SparseHermitian from_dense(const Mat& A, double drop = 0.0);

struct EigResult {
  RVec values;                   // ascending
  Mat vectors;                   // orthonormal columns
  std::vector<double> residuals; // ||A v - lambda v|| per pair
};

EigResult eigh_dense(const Mat& A);

struct LanczosOptions {
  double tol = 1e-10;            // residual <= tol * ||A||_est
  int max_iter = 400;            // restart cycles
  std::uint64_t seed = 12345;
  std::size_t krylov_dim = 0;    // 0: automatic
  std::size_t dense_below = 128; // dimensions at or below this use eigh_dense
};

// k lowest eigenpairs of A by block Krylov iteration with full
// reorthogonalization and thick restart. The block size equals k, so
// eigenvalues of multiplicity up to k are resolved. ||A||_est is the largest
// |Ritz value| seen so far. Falls back to eigh_dense when k >= dim.
EigResult lanczos_lowest(const SparseHermitian& A, std::size_t k,
                         const LanczosOptions& opts = {});

// Principal square root of a positive definite Hermitian matrix. Throws
// ValidationError when lambda_min(A) < floor.
Mat sqrt_psd(const Mat& A, double floor);

// Sum of |eigenvalues| of A - B.
double trace_norm_diff(const Mat& A, const Mat& B);

double lambda_min(const Mat& A);

}  // namespace bogo::eig
