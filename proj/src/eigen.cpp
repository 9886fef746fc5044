#include "bogo/eigen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>
#include <type_traits>

namespace bogo::eig {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads.load(); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, int)>& fn) {
  const int nt = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads()), std::max<std::size_t>(n, 1)));
  if (nt <= 1 || n < 256) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::size_t b = std::min(n, t * chunk);
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([&fn, b, e, t] { fn(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

Asymmetry max_asymmetry(const Mat& A) {
  Asymmetry out;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j && i < A.rows(); ++i) {
      const double d = std::abs(A(i, j) - std::conj(A(j, i)));
      if (d > out.value) out = {d, i, j};
    }
  }
  return out;
}

bool is_hermitian(const Mat& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = 1.0 + (A.size() ? A.cwiseAbs().maxCoeff() : 0.0);
  return max_asymmetry(A).value <= rel_tol * scale;
}

void require_hermitian(const Mat& A, const char* what) {
  if (A.rows() != A.cols()) {
    std::ostringstream os;
    os << what << " is not square (" << A.rows() << "x" << A.cols() << ")";
    throw ValidationError(os.str());
  }
  if (!is_hermitian(A)) {
    const auto a = max_asymmetry(A);
    std::ostringstream os;
    os << what << " is not Hermitian: |A(" << a.row << "," << a.col << ") - conj(A("
       << a.col << "," << a.row << "))| = " << a.value;
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------

void SparseHermitian::add(std::size_t row, std::size_t col, cplx value) {
  if (row >= dim_ || col >= dim_) throw Error("SparseHermitian::add: index out of range");
  finalized_ = false;
  if (row <= col)
    upper_.push_back({row, col, value});
  else
    upper_.push_back({col, row, std::conj(value)});
}

void SparseHermitian::append(const std::vector<Triplet>& upper) {
  finalized_ = false;
  upper_.insert(upper_.end(), upper.begin(), upper.end());
}

void SparseHermitian::finalize() {
  std::stable_sort(upper_.begin(), upper_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Triplet> merged;
  merged.reserve(upper_.size());
  for (const auto& t : upper_) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
      merged.back().value += t.value;
    else
      merged.push_back(t);
  }
  for (auto& t : merged)
    if (t.row == t.col) t.value = cplx(t.value.real(), 0.0);
  std::erase_if(merged, [](const Triplet& t) { return t.value == cplx(0.0, 0.0); });
  upper_ = std::move(merged);

  // Full CSR: row r holds (r, c) for c >= r from the upper list, plus the
  // mirrored (r, c) for c < r.
  std::vector<std::size_t> count(dim_ + 1, 0);
  for (const auto& t : upper_) {
    ++count[t.row + 1];
    if (t.row != t.col) ++count[t.col + 1];
  }
  row_ptr_.assign(dim_ + 1, 0);
  for (std::size_t r = 0; r < dim_; ++r) row_ptr_[r + 1] = row_ptr_[r] + count[r + 1];
  col_idx_.assign(row_ptr_[dim_], 0);
  values_.assign(row_ptr_[dim_], cplx(0.0));
  std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  // Lower entries first so each CSR row is column-sorted.
  for (const auto& t : upper_) {
    if (t.row != t.col) {
      const std::size_t k = fill[t.col]++;
      col_idx_[k] = t.row;
      values_[k] = std::conj(t.value);
    }
  }
  for (const auto& t : upper_) {
    const std::size_t k = fill[t.row]++;
    col_idx_[k] = t.col;
    values_[k] = t.value;
  }
  real_valued_ = std::all_of(values_.begin(), values_.end(),
                             [](const cplx& v) { return v.imag() == 0.0; });
  real_values_.clear();
  if (real_valued_) {
    real_values_.reserve(values_.size());
    for (const auto& v : values_) real_values_.push_back(v.real());
  }
  // Lower entries of row r were appended in increasing t.row order and all
  // precede r; upper entries follow in increasing col. Rows are sorted.
  finalized_ = true;
}

void SparseHermitian::matvec(Eigen::Ref<const Vec> x, Vec& y) const {
  if (!finalized_) throw Error("SparseHermitian::matvec before finalize()");
  y.resize(static_cast<Eigen::Index>(dim_));
  parallel_chunks(dim_, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t r = b; r < e; ++r) {
      cplx acc(0.0);
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        acc += values_[k] * x[static_cast<Eigen::Index>(col_idx_[k])];
      y[static_cast<Eigen::Index>(r)] = acc;
    }
  });
}

void SparseHermitian::matvec_real(Eigen::Ref<const RVec> x, RVec& y) const {
  if (!finalized_) throw Error("SparseHermitian::matvec before finalize()");
  if (!real_valued_) throw Error("SparseHermitian::matvec_real on a complex matrix");
  y.resize(static_cast<Eigen::Index>(dim_));
  parallel_chunks(dim_, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t r = b; r < e; ++r) {
      double acc = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        acc += real_values_[k] * x[static_cast<Eigen::Index>(col_idx_[k])];
      y[static_cast<Eigen::Index>(r)] = acc;
    }
  });
}

Vec SparseHermitian::operator*(const Vec& x) const {
  Vec y;
  matvec(x, y);
  return y;
}

Mat SparseHermitian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Mat A = Mat::Zero(n, n);
  for (const auto& t : upper_) {
    const auto r = static_cast<Eigen::Index>(t.row);
    const auto c = static_cast<Eigen::Index>(t.col);
    A(r, c) += t.value;
    if (r != c) A(c, r) += std::conj(t.value);
  }
  return A;
}

double SparseHermitian::max_abs() const {
  double m = 0.0;
  for (const auto& t : upper_) m = std::max(m, std::abs(t.value));
  return m;
}

RVec SparseHermitian::diagonal() const {
  RVec d = RVec::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& t : upper_)
    if (t.row == t.col) d[static_cast<Eigen::Index>(t.row)] += t.value.real();
  return d;
}

SparseHermitian from_dense(const Mat& A, double drop) {
  require_hermitian(A, "from_dense input");
  SparseHermitian S(static_cast<std::size_t>(A.rows()));
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (std::abs(A(i, j)) > drop)
        S.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j), A(i, j));
  S.finalize();
  return S;
}

// ---------------------------------------------------------------------------

EigResult eigh_dense(const Mat& A) {
  require_hermitian(A, "eigh_dense input");
  EigResult out;
  if (A.rows() == 0) return out;
  const Mat Ah = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(Ah);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigh_dense: solver failed", {});
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  out.residuals.resize(static_cast<std::size_t>(A.rows()));
  const Mat R = Ah * out.vectors - out.vectors * out.values.asDiagonal();
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    out.residuals[static_cast<std::size_t>(i)] = R.col(i).norm();
  return out;
}

namespace {

template <class S>
using DVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using DMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
DVec<S> random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  DVec<S> v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    if constexpr (std::is_same_v<S, double>)
      v[i] = re;
    else
      v[i] = cplx(re, im);
  }
  return v;
}

// Orthogonalizes w against the first `cols` columns of V by classical
// Gram-Schmidt, with a second pass when the first one cancels most of w.
// Returns the accumulated coefficients.
template <class S>
DVec<S> orthogonalize(const DMat<S>& V, Eigen::Index cols, DVec<S>& w) {
  if (cols == 0) return DVec<S>();
  const double before = w.norm();
  DVec<S> h = V.leftCols(cols).adjoint() * w;
  w.noalias() -= V.leftCols(cols) * h;
  if (w.norm() < 0.7 * before) {
    const DVec<S> h2 = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * h2;
    h += h2;
  }
  return h;
}

template <class S, class MatVec>
EigResult lanczos_impl(const MatVec& apply, Eigen::Index N, std::size_t k,
                       const LanczosOptions& opts) {
  using V1 = DVec<S>;
  using M2 = DMat<S>;
  const auto K = static_cast<Eigen::Index>(k);
  const Eigen::Index block = K;
  Eigen::Index m = opts.krylov_dim ? static_cast<Eigen::Index>(opts.krylov_dim)
                                   : std::max<Eigen::Index>(6 * block, 48);
  m = std::min<Eigen::Index>(std::max<Eigen::Index>(m, 3 * block), N);
  const Eigen::Index keep_max =
      std::min<Eigen::Index>(std::max<Eigen::Index>(K + block, m / 2), m - block);

  std::mt19937_64 rng(opts.seed);
  M2 V = M2::Zero(N, m);
  M2 Hp = M2::Zero(m, m);
  double anorm = 0.0;

  // Appends w (already orthogonal to V[:, :cur]) if it carries new
  // directions; otherwise substitutes a random orthogonal vector.
  Eigen::Index cur = 0;
  auto append = [&](V1 w, double scale) -> double {
    if (cur >= m) return 0.0;
    double nw = w.norm();
    double coupling = nw;
    if (nw <= 1e-12 * std::max(scale, 1e-300)) {
      for (int attempt = 0; attempt < 4; ++attempt) {
        w = random_vector<S>(N, rng);
        orthogonalize<S>(V, cur, w);
        nw = w.norm();
        if (nw > 1e-8) break;
      }
      coupling = 0.0;
      if (nw <= 1e-8) return 0.0;
    }
    V.col(cur) = w / nw;
    ++cur;
    return coupling;
  };

  for (Eigen::Index b = 0; b < block; ++b) {
    V1 w = random_vector<S>(N, rng);
    orthogonalize<S>(V, cur, w);
    append(w, 1.0);
  }

  Eigen::Index processed = 0;  // columns < processed have their A-image in Hp
  std::vector<double> best_res(k, std::numeric_limits<double>::infinity());
  V1 w(N);

  for (int cycle = 0; cycle < opts.max_iter; ++cycle) {
    for (Eigen::Index j = processed; j < cur; ++j) {
      apply(V.col(j), w);
      const double wn = w.norm();
      anorm = std::max(anorm, std::abs(V.col(j).dot(w)));
      const V1 h = orthogonalize<S>(V, cur, w);
      for (Eigen::Index i = 0; i < cur; ++i) {
        Hp(i, j) = h[i];
        Hp(j, i) = Eigen::numext::conj(h[i]);
      }
      Hp(j, j) = S(Eigen::numext::real(Hp(j, j)));
      if (cur < m) {
        const Eigen::Index c = cur;
        const double beta = append(w, std::max(anorm, wn));
        if (cur > c) {
          // ||w|| couples the new column back to column j.
          Hp(c, j) = beta;
          Hp(j, c) = beta;
        }
      }
    }
    processed = cur;

    const M2 Hs = 0.5 * (Hp.topLeftCorner(cur, cur) + Hp.topLeftCorner(cur, cur).adjoint());
    Eigen::SelfAdjointEigenSolver<M2> es(Hs);
    const RVec theta = es.eigenvalues();
    const M2 Sv = es.eigenvectors();
    anorm = std::max({anorm, std::abs(theta[0]), std::abs(theta[cur - 1])});

    const Eigen::Index nk = std::min(K, cur);
    M2 X = V.leftCols(cur) * Sv.leftCols(nk);
    M2 R(N, nk);
    std::vector<double> res(static_cast<std::size_t>(nk));
    bool ok = nk == K;
    for (Eigen::Index i = 0; i < nk; ++i) {
      V1 ax(N);
      apply(X.col(i), ax);
      R.col(i) = ax - theta[i] * X.col(i);
      res[static_cast<std::size_t>(i)] = R.col(i).norm();
      if (res[static_cast<std::size_t>(i)] > opts.tol * std::max(anorm, 1e-300)) ok = false;
    }
    for (Eigen::Index i = 0; i < nk; ++i)
      best_res[static_cast<std::size_t>(i)] =
          std::min(best_res[static_cast<std::size_t>(i)], res[static_cast<std::size_t>(i)]);

    if (ok || cur == N) {
      EigResult out;
      out.values = theta.head(nk);
      out.vectors = X.template cast<cplx>();
      out.residuals = res;
      return out;
    }

    // Thick restart: keep the lowest Ritz vectors, extend with the residuals
    // of the wanted ones.
    const Eigen::Index p = std::min(keep_max, cur);
    const M2 Xk = V.leftCols(cur) * Sv.leftCols(p);
    V.leftCols(p) = Xk;
    Hp.setZero();
    for (Eigen::Index i = 0; i < p; ++i) Hp(i, i) = theta[i];
    cur = p;
    processed = p;
    for (Eigen::Index i = 0; i < nk && cur < m; ++i) {
      V1 r = R.col(i);
      orthogonalize<S>(V, cur, r);
      append(r, std::max(anorm, res[static_cast<std::size_t>(i)]));
    }
  }

  std::ostringstream os;
  os << "lanczos_lowest: no convergence after " << opts.max_iter << " cycles; best residuals:";
  for (double r : best_res) os << ' ' << r;
  throw ConvergenceError(os.str(), best_res);
}

}  // namespace

EigResult lanczos_lowest(const SparseHermitian& A, std::size_t k, const LanczosOptions& opts) {
  const std::size_t n = A.dim();
  if (k == 0) return {};
  if (k >= n || n <= opts.dense_below) {
    EigResult full = eigh_dense(A.to_dense());
    const auto kk = static_cast<Eigen::Index>(std::min(k, n));
    EigResult out;
    out.values = full.values.head(kk);
    out.vectors = full.vectors.leftCols(kk);
    out.residuals.assign(full.residuals.begin(), full.residuals.begin() + kk);
    return out;
  }
  const auto N = static_cast<Eigen::Index>(n);
  if (A.real_valued()) {
    auto apply = [&A](const auto& x, RVec& y) { A.matvec_real(x, y); };
    return lanczos_impl<double>(apply, N, k, opts);
  }
  auto apply = [&A](const auto& x, Vec& y) { A.matvec(x, y); };
  return lanczos_impl<cplx>(apply, N, k, opts);
}

// ---------------------------------------------------------------------------

Mat sqrt_psd(const Mat& A, double floor) {
  const EigResult e = eigh_dense(A);
  if (e.values.size() == 0) return A;
  if (e.values[0] < floor) {
    std::ostringstream os;
    os << "sqrt_psd: lambda_min = " << e.values[0] << " below floor " << floor;
    throw ValidationError(os.str());
  }
  const RVec s = e.values.cwiseSqrt();
  Mat B = e.vectors * s.asDiagonal() * e.vectors.adjoint();
  return 0.5 * (B + B.adjoint());
}

double trace_norm_diff(const Mat& A, const Mat& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw ValidationError("trace_norm_diff: dimension mismatch");
  const Mat D = A - B;
  if (D.size() == 0) return 0.0;
  return eigh_dense(0.5 * (D + D.adjoint())).values.cwiseAbs().sum();
}

double lambda_min(const Mat& A) {
  const EigResult e = eigh_dense(A);
  return e.values.size() ? e.values[0] : 0.0;
}

}  // namespace bogo::eig
