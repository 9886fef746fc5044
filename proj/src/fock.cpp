#include "bogo/fock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace bogo {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t binom_exact(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (long long i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > static_cast<unsigned __int128>(kSat / 2)) return kSat;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace

std::uint64_t OccupationBasis::sector_dim(int M, int N) {
  if (M < 1 || N < 0) return 0;
  return binom_exact(static_cast<long long>(N) + M - 1, M - 1);
}

std::uint64_t OccupationBasis::truncated_dim(int M, int N_max) {
  if (M < 0 || N_max < 0) return 0;
  return binom_exact(static_cast<long long>(N_max) + M, M);
}

OccupationBasis OccupationBasis::sector(int M, int N, std::size_t cap) {
  return OccupationBasis(Kind::Sector, M, N, cap);
}

OccupationBasis OccupationBasis::truncated(int M, int N_max, std::size_t cap) {
  return OccupationBasis(Kind::Truncated, M, N_max, cap);
}

OccupationBasis::OccupationBasis(Kind kind, int M, int N, std::size_t cap)
    : kind_(kind), M_(M), N_(N) {
  if (kind == Kind::Sector && M < 1) throw ValidationError("sector basis needs M >= 1");
  if (M < 0 || N < 0) throw ValidationError("occupation basis needs M >= 0 and N >= 0");
  const std::uint64_t d = kind == Kind::Sector ? sector_dim(M, N) : truncated_dim(M, N);
  if (d > cap) {
    std::ostringstream os;
    os << (kind == Kind::Sector ? "sector" : "truncated") << " basis M=" << M << ", N=" << N
       << " has dimension " << (d == kSat ? std::string("> 1.8e19") : std::to_string(d))
       << ", above the cap " << cap;
    throw ResourceError(os.str());
  }
  dim_ = static_cast<std::size_t>(d);

  binom_cols_ = M + 2;
  const int rows = N + M + 2;
  binom_.assign(static_cast<std::size_t>(rows) * binom_cols_, 0);
  for (int n = 0; n < rows; ++n)
    for (int k = 0; k < binom_cols_; ++k) {
      std::uint64_t v;
      if (k == 0)
        v = 1;
      else if (n == 0)
        v = 0;
      else {
        const std::uint64_t a = binom_[(n - 1) * binom_cols_ + k - 1];
        const std::uint64_t b = binom_[(n - 1) * binom_cols_ + k];
        v = (a > kSat - b) ? kSat : a + b;
      }
      binom_[static_cast<std::size_t>(n) * binom_cols_ + k] = v;
    }

  states_.resize(dim_ * static_cast<std::size_t>(M));
  if (M == 0) return;  // a truncated basis of zero modes holds only the vacuum
  std::vector<int> occ(M, 0);
  std::size_t count = 0;
  // Lexicographic enumeration: position i runs from 0 up to the budget left.
  auto emit = [&]() {
    std::copy(occ.begin(), occ.end(), states_.begin() + static_cast<long>(count * M));
    ++count;
  };
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == M - 1) {
      if (kind_ == Kind::Sector) {
        occ[i] = left;
        emit();
      } else {
        for (int v = 0; v <= left; ++v) {
          occ[i] = v;
          emit();
        }
      }
      return;
    }
    for (int v = 0; v <= left; ++v) {
      occ[i] = v;
      rec(i + 1, left - v);
    }
    occ[i] = 0;
  };
  rec(0, N);
  if (count != dim_) throw Error("OccupationBasis: enumeration count mismatch");
}

std::uint64_t OccupationBasis::binom(int n, int k) const {
  if (k < 0 || n < 0 || k > n) return 0;
  return binom_[static_cast<std::size_t>(n) * binom_cols_ + k];
}

int OccupationBasis::total(std::size_t i) const {
  const int* s = state(i);
  int t = 0;
  for (int k = 0; k < M_; ++k) t += s[k];
  return t;
}

long long OccupationBasis::index_of(const int* occ) const {
  long long sum = 0;
  for (int k = 0; k < M_; ++k) {
    if (occ[k] < 0) return -1;
    sum += occ[k];
  }
  if (kind_ == Kind::Sector ? sum != N_ : sum > N_) return -1;
  std::uint64_t rank = 0;
  int rem = N_;
  for (int i = 0; i < M_; ++i) {
    const int len = M_ - i - 1;
    const int n = occ[i];
    if (n > 0) {
      // Completions counted by hockey-stick sums over the smaller values v < n.
      if (kind_ == Kind::Sector) {
        if (len > 0) rank += binom(rem + len, len) - binom(rem - n + len, len);
      } else {
        rank += binom(rem + len + 1, len + 1) - binom(rem - n + len + 1, len + 1);
      }
    }
    rem -= n;
  }
  return static_cast<long long>(rank);
}

// ---------------------------------------------------------------------------

namespace {

// Per-thread triplet collection over contiguous column chunks; chunks are
// concatenated in column order so the result does not depend on threads.
template <typename ColumnFn>
eig::SparseHermitian assemble_columns(std::size_t dim, ColumnFn&& column) {
  const int nt = std::max(1, eig::threads());
  std::vector<std::vector<eig::Triplet>> buf(static_cast<std::size_t>(nt));
  std::vector<std::pair<std::size_t, int>> order(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) order[t] = {dim, t};
  eig::parallel_chunks(dim, [&](std::size_t b, std::size_t e, int t) {
    order[t] = {b, t};
    auto& out = buf[t];
    std::vector<int> scratch;
    for (std::size_t c = b; c < e; ++c) column(c, out, scratch);
  });
  std::sort(order.begin(), order.end());
  eig::SparseHermitian S(dim);
  for (const auto& [b, t] : order) S.append(buf[t]);
  S.finalize();
  return S;
}

inline void emit(std::vector<eig::Triplet>& out, long long row, std::size_t col, cplx v) {
  if (row < 0 || static_cast<std::size_t>(row) > col || v == cplx(0.0)) return;
  out.push_back({static_cast<std::size_t>(row), col, v});
}

}  // namespace

eig::SparseHermitian assemble_one_body(const OccupationBasis& basis, const Mat& A) {
  const int M = basis.M();
  if (A.rows() != M || A.cols() != M) throw ValidationError("assemble_one_body: shape mismatch");
  const Mat Ah = 0.5 * (A + A.adjoint());
  std::vector<std::pair<int, int>> terms;
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n)
      if (Ah(m, n) != cplx(0.0)) terms.push_back({m, n});
  return assemble_columns(basis.dim(), [&](std::size_t c, std::vector<eig::Triplet>& out,
                                           std::vector<int>& occ) {
    const int* s = basis.state(c);
    occ.assign(s, s + M);
    for (const auto& [m, n] : terms) {
      if (occ[n] == 0) continue;
      if (m == n) {
        emit(out, c, c, Ah(m, n) * static_cast<double>(occ[n]));
        continue;
      }
      double amp = std::sqrt(static_cast<double>(occ[n]));
      --occ[n];
      amp *= std::sqrt(static_cast<double>(occ[m] + 1));
      ++occ[m];
      emit(out, basis.index_of(occ), c, Ah(m, n) * amp);
      --occ[m];
      ++occ[n];
    }
  });
}

eig::SparseHermitian assemble_HN(const ModelSystem& m, int N, std::optional<double> kappa,
                                 std::size_t cap) {
  if (m.W.M() != m.M || m.T.rows() != m.M) throw ValidationError("assemble_HN: malformed model");
  if (N < 0) throw ValidationError("assemble_HN: N must be nonnegative");
  const bool interacting = !m.W.empty();
  if (interacting && N < 2)
    throw ValidationError("assemble_HN: the coupling 1/(N-1) is undefined for N < 2");
  const OccupationBasis basis = OccupationBasis::sector(m.M, N, cap);
  double kN = 0.0;
  if (interacting) {
    kN = 1.0 / (N - 1);
    if (kappa) kN += *kappa / (static_cast<double>(N) * N);
  }
  const int M = m.M;
  const Mat Th = 0.5 * (m.T + m.T.adjoint());
  const auto W = m.W.entries();
  std::vector<std::pair<int, int>> one;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      if (Th(a, b) != cplx(0.0)) one.push_back({a, b});
  return assemble_columns(basis.dim(), [&](std::size_t c, std::vector<eig::Triplet>& out,
                                           std::vector<int>& occ) {
    const int* s = basis.state(c);
    occ.assign(s, s + M);
    for (const auto& [a, b] : one) {
      if (occ[b] == 0) continue;
      double amp = std::sqrt(static_cast<double>(occ[b]));
      --occ[b];
      amp *= std::sqrt(static_cast<double>(occ[a] + 1));
      ++occ[a];
      emit(out, basis.index_of(occ), c, Th(a, b) * amp);
      --occ[a];
      ++occ[b];
    }
    for (const auto& e : W) {
      // a*_m a*_n a_p a_q, rightmost first
      if (occ[e.q] == 0) continue;
      double amp = std::sqrt(static_cast<double>(occ[e.q]));
      --occ[e.q];
      if (occ[e.p] == 0) {
        ++occ[e.q];
        continue;
      }
      amp *= std::sqrt(static_cast<double>(occ[e.p]));
      --occ[e.p];
      amp *= std::sqrt(static_cast<double>(occ[e.n] + 1));
      ++occ[e.n];
      amp *= std::sqrt(static_cast<double>(occ[e.m] + 1));
      ++occ[e.m];
      emit(out, basis.index_of(occ), c, 0.5 * kN * e.value * amp);
      --occ[e.m];
      --occ[e.n];
      ++occ[e.p];
      ++occ[e.q];
    }
  });
}

eig::SparseHermitian assemble_bogoliubov_fock(const QuadraticForm& qf, int cutoff, std::size_t cap) {
  if (cutoff < 2) throw ValidationError("assemble_bogoliubov_fock: cutoff must be at least 2");
  const int d = qf.d;
  const OccupationBasis basis = OccupationBasis::truncated(d, cutoff, cap);
  const Mat H = 0.5 * (qf.H + qf.H.adjoint());
  const Mat K = 0.5 * (qf.K + qf.K.transpose());
  std::vector<std::pair<int, int>> hterms, kterms;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (H(a, b) != cplx(0.0)) hterms.push_back({a, b});
      if (K(a, b) != cplx(0.0)) kterms.push_back({a, b});
    }
  return assemble_columns(basis.dim(), [&](std::size_t c, std::vector<eig::Triplet>& out,
                                           std::vector<int>& occ) {
    const int* s = basis.state(c);
    occ.assign(s, s + d);
    for (const auto& [a, b] : hterms) {
      if (occ[b] == 0) continue;
      double amp = std::sqrt(static_cast<double>(occ[b]));
      --occ[b];
      amp *= std::sqrt(static_cast<double>(occ[a] + 1));
      ++occ[a];
      emit(out, basis.index_of(occ), c, H(a, b) * amp);
      --occ[a];
      ++occ[b];
    }
    for (const auto& [a, b] : kterms) {
      // 1/2 K_ab a*_a a*_b
      {
        double amp = std::sqrt(static_cast<double>(occ[b] + 1));
        ++occ[b];
        amp *= std::sqrt(static_cast<double>(occ[a] + 1));
        ++occ[a];
        emit(out, basis.index_of(occ), c, 0.5 * K(a, b) * amp);
        --occ[a];
        --occ[b];
      }
      // 1/2 conj(K_ab) a_a a_b
      if (occ[b] > 0) {
        double amp = std::sqrt(static_cast<double>(occ[b]));
        --occ[b];
        if (occ[a] > 0) {
          amp *= std::sqrt(static_cast<double>(occ[a]));
          --occ[a];
          emit(out, basis.index_of(occ), c, 0.5 * std::conj(K(a, b)) * amp);
          ++occ[a];
        }
        ++occ[b];
      }
    }
  });
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> un_permutation(const OccupationBasis& from, const OccupationBasis& to) {
  if (from.kind() != OccupationBasis::Kind::Sector ||
      to.kind() != OccupationBasis::Kind::Truncated || to.M() != from.M() - 1 ||
      to.N() != from.N())
    throw ValidationError(
        "apply_UN: expects a sector basis (M, N) and a truncated basis (M-1, <= N)");
  std::vector<std::size_t> map(from.dim());
  for (std::size_t i = 0; i < from.dim(); ++i) {
    const long long j = to.index_of(from.state(i) + 1);
    if (j < 0) throw Error("apply_UN: relabeled state missing from target basis");
    map[i] = static_cast<std::size_t>(j);
  }
  return map;
}

Vec apply_UN(const Vec& psi, const OccupationBasis& from, const OccupationBasis& to) {
  if (static_cast<std::size_t>(psi.size()) != from.dim())
    throw ValidationError("apply_UN: vector length differs from basis dimension");
  const auto map = un_permutation(from, to);
  Vec out(static_cast<Eigen::Index>(to.dim()));
  for (std::size_t i = 0; i < map.size(); ++i)
    out[static_cast<Eigen::Index>(map[i])] = psi[static_cast<Eigen::Index>(i)];
  return out;
}

Vec apply_UN_inverse(const Vec& phi, const OccupationBasis& from, const OccupationBasis& to) {
  if (static_cast<std::size_t>(phi.size()) != to.dim())
    throw ValidationError("apply_UN_inverse: vector length differs from basis dimension");
  const auto map = un_permutation(from, to);
  Vec out(static_cast<Eigen::Index>(from.dim()));
  for (std::size_t i = 0; i < map.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = phi[static_cast<Eigen::Index>(map[i])];
  return out;
}

eig::SparseHermitian relabel(const eig::SparseHermitian& A, const std::vector<std::size_t>& map,
                             std::size_t dim) {
  eig::SparseHermitian B(dim);
  for (const auto& t : A.triplets()) B.add(map[t.row], map[t.col], t.value);
  B.finalize();
  return B;
}

Mat relabel(const Mat& A, const std::vector<std::size_t>& map) {
  const auto n = static_cast<Eigen::Index>(map.size());
  Mat B = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      B(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j])) = A(i, j);
  return B;
}

eig::SparseHermitian transformed_HN(const ModelSystem& m, int N, double e_H,
                                    std::optional<double> kappa, std::size_t cap) {
  const eig::SparseHermitian H = assemble_HN(m, N, kappa, cap);
  const OccupationBasis from = OccupationBasis::sector(m.M, N, cap);
  const OccupationBasis to = OccupationBasis::truncated(m.M - 1, N, cap);
  const auto map = un_permutation(from, to);
  eig::SparseHermitian B(to.dim());
  for (const auto& t : H.triplets()) B.add(map[t.row], map[t.col], t.value);
  const double shift = -static_cast<double>(N) * e_H;
  if (shift != 0.0)
    for (std::size_t i = 0; i < to.dim(); ++i) B.add(i, i, shift);
  B.finalize();
  return B;
}

eig::SparseHermitian restrict_truncated(const eig::SparseHermitian& A,
                                        const OccupationBasis& basis, int n_max) {
  if (basis.kind() != OccupationBasis::Kind::Truncated || A.dim() != basis.dim())
    throw ValidationError("restrict_truncated: operator and truncated basis do not match");
  n_max = std::min(n_max, basis.N());
  const OccupationBasis small = OccupationBasis::truncated(basis.M(), n_max);
  std::vector<long long> map(basis.dim(), -1);
  for (std::size_t i = 0; i < basis.dim(); ++i)
    if (basis.total(i) <= n_max) map[i] = small.index_of(basis.state(i));
  eig::SparseHermitian B(small.dim());
  for (const auto& t : A.triplets()) {
    const long long r = map[t.row], c = map[t.col];
    if (r >= 0 && c >= 0)
      B.add(static_cast<std::size_t>(r), static_cast<std::size_t>(c), t.value);
  }
  B.finalize();
  return B;
}

RVec number_plus(const OccupationBasis& basis) {
  RVec d(static_cast<Eigen::Index>(basis.dim()));
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const int v = basis.kind() == OccupationBasis::Kind::Sector ? basis.N() - basis.occupation(i, 0)
                                                                : basis.total(i);
    d[static_cast<Eigen::Index>(i)] = v;
  }
  return d;
}

// ---------------------------------------------------------------------------

namespace {

double smoothstep(double y) {
  y = std::clamp(y, 0.0, 1.0);
  return y * y * (3.0 - 2.0 * y);
}

// |f'(x)| = |g'(x)| envelope as a function of y = 2|x| - 1 in [0, 1]:
// |f'| = pi s'(y) sin(pi s / 2), |g'| = pi s'(y) cos(pi s / 2).
double df_abs(double y) {
  const double sp = 6.0 * y * (1.0 - y);
  return std::numbers::pi * sp * std::sin(0.5 * std::numbers::pi * smoothstep(y));
}

double golden_max(double (*fn)(double), double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

double loc_f(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::cos(0.5 * std::numbers::pi * smoothstep(2.0 * std::abs(x) - 1.0));
}

double loc_g(double x) {
  if (std::abs(x) >= 1.0) return 1.0;
  return std::sin(0.5 * std::numbers::pi * smoothstep(2.0 * std::abs(x) - 1.0));
}

double localization_constant() {
  // df_abs is unimodal on [0, 1]; g' is its mirror image y -> 1 - y, so both
  // sup norms coincide.
  const double m = golden_max(df_abs, 0.0, 1.0);
  return 2.0 * (m * m + m * m);
}

Localization localization_ops(const OccupationBasis& basis, int M_loc) {
  if (M_loc < 1) throw ValidationError("localization_ops: M_loc must be at least 1");
  const RVec np = number_plus(basis);
  Localization L;
  L.f.resize(np.size());
  L.g.resize(np.size());
  for (Eigen::Index i = 0; i < np.size(); ++i) {
    const double x = np[i] / M_loc;
    L.f[i] = loc_f(x);
    L.g[i] = loc_g(x);
  }
  L.C_f = localization_constant();
  return L;
}

// ---------------------------------------------------------------------------

OneBodyDM one_body_dm(const Vec& psi, const OccupationBasis& basis) {
  if (static_cast<std::size_t>(psi.size()) != basis.dim())
    throw ValidationError("one_body_dm: vector length differs from basis dimension");
  const int M = basis.M();
  OneBodyDM r;
  r.gamma = Mat::Zero(M, M);
  r.alpha = Mat::Zero(M, M);
  std::vector<int> occ(M);
  for (std::size_t s = 0; s < basis.dim(); ++s) {
    const cplx ps = psi[static_cast<Eigen::Index>(s)];
    if (ps == cplx(0.0)) continue;
    const int* st = basis.state(s);
    occ.assign(st, st + M);
    for (int m = 0; m < M; ++m) {
      if (occ[m] == 0) continue;
      const double am = std::sqrt(static_cast<double>(occ[m]));
      --occ[m];
      for (int n = 0; n < M; ++n) {
        // a*_n a_m
        const double an = std::sqrt(static_cast<double>(occ[n] + 1));
        ++occ[n];
        const long long t = basis.index_of(occ);
        if (t >= 0) r.gamma(m, n) += std::conj(psi[t]) * ps * am * an;
        --occ[n];
        // a_n a_m
        if (occ[n] > 0) {
          const double bn = std::sqrt(static_cast<double>(occ[n]));
          --occ[n];
          const long long u = basis.index_of(occ);
          if (u >= 0) r.alpha(m, n) += std::conj(psi[u]) * ps * am * bn;
          ++occ[n];
        }
      }
      ++occ[m];
    }
  }
  return r;
}

double condensation_fraction(const Vec& psi, const OccupationBasis& basis) {
  if (basis.kind() != OccupationBasis::Kind::Sector || basis.N() == 0)
    throw ValidationError("condensation_fraction: needs a sector basis with N >= 1");
  const RVec np = number_plus(basis);
  double n0 = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) n0 += std::norm(psi[i]) * (basis.N() - np[i]);
  return n0 / (basis.N() * psi.squaredNorm());
}

GibbsObjects gibbs_objects(const Mat& H, double beta) {
  if (!(beta > 0.0)) throw ValidationError("gibbs_objects: beta must be positive");
  if (H.rows() > kDenseGibbsCap) {
    std::ostringstream os;
    os << "gibbs_objects: dimension " << H.rows() << " exceeds the dense cap " << kDenseGibbsCap
       << "; use a smaller model or a spectrum-window approximation";
    throw ResourceError(os.str());
  }
  const auto e = eig::eigh_dense(H);
  const double lmin = e.values[0];
  RVec w(e.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::exp(-beta * (e.values[i] - lmin));
  const double Z = w.sum();
  GibbsObjects g;
  g.free_energy = lmin - std::log(Z) / beta;
  const RVec p = w / Z;
  g.gibbs = e.vectors * p.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  g.gibbs = 0.5 * (g.gibbs + g.gibbs.adjoint()).eval();
  return g;
}

}  // namespace bogo
