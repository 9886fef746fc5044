#include <cmath>

#include "bogo/fock.hpp"
#include "bogo/hartree.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bogo;

namespace {

// Dense second quantization from explicit ladder operators on the
// truncated basis (no particle-number bookkeeping shared with the library).
Mat annihilator(const OccupationBasis& b, int mode) {
  const auto n = static_cast<Eigen::Index>(b.dim());
  Mat a = Mat::Zero(n, n);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    std::vector<int> occ(b.state(i), b.state(i) + b.M());
    if (occ[mode] == 0) continue;
    const double amp = std::sqrt(static_cast<double>(occ[mode]));
    --occ[mode];
    const long long j = b.index_of(occ);
    if (j >= 0) a(j, static_cast<Eigen::Index>(i)) = amp;
  }
  return a;
}

Mat dense(const eig::SparseHermitian& A) { return A.to_dense(); }

}  // namespace

TEST_CASE("basis dimensions") {
  CHECK(OccupationBasis::sector(3, 2).dim() == 6);
  CHECK(OccupationBasis::sector(1, 7).dim() == 1);
  CHECK(OccupationBasis::sector(4, 60).dim() == 39711);
  CHECK(OccupationBasis::sector_dim(4, 60) == 39711);
  CHECK(OccupationBasis::truncated(3, 4).dim() == 35);
  CHECK(OccupationBasis::truncated_dim(3, 4) == 35);
  CHECK(OccupationBasis::sector(3, 0).dim() == 1);
  CHECK_THROWS_AS(OccupationBasis::sector(10, 40, 1000), ResourceError);
  CHECK(OccupationBasis::sector_dim(200, 200) == UINT64_MAX);
}

TEST_CASE("basis ordering and lookup") {
  for (const auto& b : {OccupationBasis::sector(3, 5), OccupationBasis::truncated(3, 5),
                        OccupationBasis::sector(4, 3), OccupationBasis::truncated(1, 6)}) {
    for (std::size_t i = 0; i < b.dim(); ++i) {
      CHECK(b.index_of(b.state(i)) == static_cast<long long>(i));
      if (i > 0) {
        const std::vector<int> a(b.state(i - 1), b.state(i - 1) + b.M());
        const std::vector<int> c(b.state(i), b.state(i) + b.M());
        CHECK(a < c);
      }
    }
  }
  const auto s = OccupationBasis::sector(3, 4);
  CHECK(s.index_of(std::vector<int>{1, 1, 1}) == -1);
  CHECK(s.index_of(std::vector<int>{-1, 4, 1}) == -1);
  CHECK(OccupationBasis::truncated(2, 3).total(0) == 0);
}

TEST_CASE("M=2 N=2 hand-computed entries") {
  ModelSystem m = separable_gas(2, {0.3, 1.1}, {});
  m.T(0, 1) = cplx(0.2, 0.1);
  m.T(1, 0) = std::conj(m.T(0, 1));
  m.W.set(0, 0, 0, 0, 0.5);
  m.W.set(1, 1, 1, 1, 0.7);
  m.W.set(0, 1, 0, 1, 0.4);
  m.W.set(0, 0, 1, 1, 0.25);
  m.W.set(0, 0, 0, 1, cplx(0.1, 0.05));
  m.is_real = false;
  require_valid(m);
  const Mat H = dense(assemble_HN(m, 2));
  // basis order (0,2), (1,1), (2,0); kappa_N = 1
  const cplx t01 = m.T(0, 1);
  const double s2 = std::sqrt(2.0);
  const cplx w0001(0.1, 0.05);
  Mat want(3, 3);
  want(0, 0) = 2 * 1.1 + 0.5 * 2 * 0.7;
  // the orbit {(0,1,0,1), (1,0,1,0)} contributes 2 n_0 n_1
  want(1, 1) = 0.3 + 1.1 + 0.5 * 2 * 0.4;
  want(2, 2) = 2 * 0.3 + 0.5 * 2 * 0.5;
  want(1, 0) = s2 * t01;                        // a*_0 a_1 |0,2>
  want(2, 1) = s2 * t01;                        // a*_0 a_1 |1,1>
  want(0, 1) = std::conj(want(1, 0));
  want(1, 2) = std::conj(want(2, 1));
  // a*_0 a*_0 a_1 a_1 |0,2> = 2 |2,0>, with the four exchange-equivalent orderings of (0,0,1,1)
  want(2, 0) = 0.5 * 0.25 * 2;
  want(0, 2) = std::conj(want(2, 0));
  // a*_0 a*_0 a_0 a_1 |1,1> = sqrt2 |2,0>; the orbit of (0,0,0,1) has two members with this operator
  want(2, 1) += 0.5 * 2.0 * w0001 * s2;
  want(1, 2) = std::conj(want(2, 1));
  CHECK((H - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("H_N against dense ladder operators") {
  std::mt19937_64 rng(1);
  std::vector<FormFactor> ff{{0.3, testutil::random_complex(3, 1, rng).col(0)}};
  ModelSystem m = separable_gas(3, {0, 0.5, 1.0}, ff);
  m.T += 0.1 * testutil::random_hermitian(3, rng);
  const int N = 4;
  const auto sector = OccupationBasis::sector(3, N);
  const auto trunc = OccupationBasis::truncated(3, N);
  std::vector<Mat> a;
  for (int k = 0; k < 3; ++k) a.push_back(annihilator(trunc, k));
  Mat Hd = Mat::Zero(trunc.dim(), trunc.dim());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Hd += m.T(i, j) * a[i].adjoint() * a[j];
  for (const auto& e : m.W.entries())
    Hd += 0.5 / (N - 1) * e.value * a[e.m].adjoint() * a[e.n].adjoint() * a[e.p] * a[e.q];
  const Mat H = dense(assemble_HN(m, N));
  for (std::size_t i = 0; i < sector.dim(); ++i)
    for (std::size_t j = 0; j < sector.dim(); ++j) {
      const long long I = trunc.index_of(sector.state(i)), J = trunc.index_of(sector.state(j));
      CHECK(std::abs(H(i, j) - Hd(I, J)) < 1e-13);
    }
}

TEST_CASE("free and contact models") {
  const ModelSystem free = separable_gas(3, {0.2, 1.0, 1.5}, {});
  for (int N : {2, 5, 9}) {
    const auto H = assemble_HN(free, N);
    CHECK(std::abs(eig::lanczos_lowest(H, 1).values[0] - 0.2 * N) < 1e-10);
  }
  Vec v = Vec::Zero(2);
  v[0] = 1.0;
  const double g = 0.3;
  const ModelSystem c = separable_gas(2, {0.1, 1.0}, {{g, v}});
  const auto H = assemble_HN(c, 10);
  const auto r = eig::lanczos_lowest(H, 1);
  CHECK(std::abs(r.values[0] - (10 * 0.1 + g * 10 / 2)) < 1e-12);
  CHECK(std::abs(std::abs(r.vectors(H.dim() - 1, 0)) - 1.0) < 1e-10);

  CHECK_THROWS_AS(assemble_HN(c, 1), ValidationError);
  CHECK_NOTHROW(assemble_HN(free, 1));
}

TEST_CASE("coupling shift") {
  const ModelSystem m = builtin_model("two_mode");
  const int N = 6;
  const auto H0 = dense(assemble_HN(m, N));
  const auto H1 = dense(assemble_HN(m, N, 0.7));
  const Mat T = dense(assemble_HN(separable_gas(2, {0, 1}, {}), N));
  // the interaction part scales from 1/(N-1) to 1/(N-1) + kappa/N^2
  const double ratio = (1.0 / (N - 1) + 0.7 / (N * N)) * (N - 1);
  CHECK(((H1 - T) - ratio * (H0 - T)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("assembly is identical across thread counts") {
  const ModelSystem m = builtin_model("lattice4");
  eig::set_threads(1);
  const auto a = assemble_HN(m, 20);
  eig::set_threads(4);
  const auto b = assemble_HN(m, 20);
  eig::set_threads(1);
  REQUIRE(a.nnz() == b.nnz());
  const auto& ta = a.triplets();
  const auto& tb = b.triplets();
  bool same = true;
  for (std::size_t i = 0; i < ta.size(); ++i)
    same = same && ta[i].row == tb[i].row && ta[i].col == tb[i].col && ta[i].value == tb[i].value;
  CHECK(same);
}

TEST_CASE("Bogoliubov Fock matrix") {
  SUBCASE("no pairing: sector spectra are sums of eig(H)") {
    Mat H(2, 2);
    H << 1.0, 0.2, 0.2, 1.7;
    const auto qf = make_quadratic(H, Mat::Zero(2, 2));
    const auto e = eig::eigh_dense(dense(assemble_bogoliubov_fock(qf, 4))).values;
    const auto h = eig::eigh_dense(H).values;
    std::vector<double> want;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j) want.push_back(i * h[0] + j * h[1]);
    std::sort(want.begin(), want.end());
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(e[k] - want[k]) < 1e-12);
  }
  SUBCASE("single mode ground energy") {
    const auto qf = make_quadratic(Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0));
    const auto r = eig::lanczos_lowest(assemble_bogoliubov_fock(qf, 60), 1);
    CHECK(std::abs(r.values[0] - (std::sqrt(3.0) - 2) / 2) < 1e-8);
  }
  SUBCASE("band structure") {
    std::mt19937_64 rng(2);
    Mat H = testutil::random_pd(3, rng, 1.0);
    Mat K = testutil::random_complex(3, 3, rng);
    K = 0.1 * (K + K.transpose()).eval();
    const auto qf = make_quadratic(H, K);
    const auto b = OccupationBasis::truncated(3, 6);
    const auto A = assemble_bogoliubov_fock(qf, 6);
    const RVec np = number_plus(b);
    bool ok = true, has_pair = false;
    for (const auto& t : A.triplets()) {
      const int di = static_cast<int>(std::abs(np[t.row] - np[t.col]));
      ok = ok && (di == 0 || di == 2);
      has_pair = has_pair || di == 2;
    }
    CHECK(ok);
    CHECK(has_pair);
  }
  SUBCASE("sector blocks equal the symmetric Kronecker sum") {
    Mat H(2, 2);
    H << 0.9, cplx(0.1, 0.2), cplx(0.1, -0.2), 1.4;
    Mat K(2, 2);
    K << 0.1, 0.05, 0.05, 0.2;
    const auto qf = make_quadratic(H, K);
    const auto b = OccupationBasis::truncated(2, 3);
    const Mat A = dense(assemble_bogoliubov_fock(qf, 3));
    std::vector<Mat> a{annihilator(b, 0), annihilator(b, 1)};
    const RVec np = number_plus(b);
    Mat D = Mat::Zero(b.dim(), b.dim());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) D += H(i, j) * a[i].adjoint() * a[j];
    for (std::size_t i = 0; i < b.dim(); ++i)
      for (std::size_t j = 0; j < b.dim(); ++j)
        if (np[i] == np[j]) CHECK(std::abs(A(i, j) - D(i, j)) < 1e-14);
  }
  CHECK_THROWS_AS(assemble_bogoliubov_fock(make_quadratic(Mat::Identity(1, 1), Mat::Zero(1, 1)), 1),
                  ValidationError);
}

TEST_CASE("U_N relabeling") {
  const auto s3 = OccupationBasis::sector(2, 3);
  const auto t3 = OccupationBasis::truncated(1, 3);
  Vec psi = Vec::Zero(4);
  psi[s3.index_of(std::vector<int>{3, 0})] = 1.0;
  Vec x = apply_UN(psi, s3, t3);
  CHECK(x[t3.index_of(std::vector<int>{0})] == cplx(1.0));

  psi.setZero();
  psi[s3.index_of(std::vector<int>{1, 2})] = 1.0;
  x = apply_UN(psi, s3, t3);
  CHECK(x[t3.index_of(std::vector<int>{2})] == cplx(1.0));

  std::mt19937_64 rng(3);
  const auto s = OccupationBasis::sector(4, 7);
  const auto t = OccupationBasis::truncated(3, 7);
  const Vec r = testutil::random_complex(s.dim(), 1, rng).col(0);
  const Vec u = apply_UN(r, s, t);
  // same coefficients in a different order: any order-independent norm agrees bit for bit
  auto sorted_sq = [](const Vec& v) {
    std::vector<double> a(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = std::norm(v[i]);
    std::sort(a.begin(), a.end());
    return a;
  };
  CHECK(sorted_sq(u) == sorted_sq(r));
  CHECK(u.cwiseAbs().maxCoeff() == r.cwiseAbs().maxCoeff());
  CHECK(apply_UN_inverse(u, s, t) == r);
  CHECK_THROWS_AS(apply_UN(r, s, OccupationBasis::truncated(3, 6)), ValidationError);
}

TEST_CASE("U_N maps a*_0 a_0 to N - N_+") {
  for (int M = 2; M <= 3; ++M)
    for (int N = 0; N <= 6; ++N) {
      const auto s = OccupationBasis::sector(M, N);
      const auto t = OccupationBasis::truncated(M - 1, N);
      Mat n0 = Mat::Zero(M, M);
      n0(0, 0) = 1.0;
      const Mat A = relabel(dense(assemble_one_body(s, n0)), un_permutation(s, t));
      const RVec np = number_plus(t);
      bool exact = true;
      for (std::size_t i = 0; i < t.dim(); ++i)
        for (std::size_t j = 0; j < t.dim(); ++j)
          exact = exact && A(i, j) == (i == j ? cplx(N - np[i]) : cplx(0.0));
      CHECK(exact);
    }
}

TEST_CASE("transformed H_N") {
  const auto hs = minimize_hartree(builtin_model("two_mode"));
  const int N = 30;
  const auto T = transformed_HN(hs.rotated, N, hs.e_H);
  const auto H = assemble_HN(hs.rotated, N);
  CHECK(std::abs(eig::lanczos_lowest(T, 1).values[0] - (eig::lanczos_lowest(H, 1).values[0] - N * hs.e_H)) <
        1e-12 * N);
  // pairing couples N_+ sectors
  const RVec np = number_plus(OccupationBasis::truncated(1, N));
  bool off = false;
  for (const auto& t : T.triplets()) off = off || np[t.row] != np[t.col];
  CHECK(off);

  Vec v = Vec::Zero(3);
  v[0] = 1.0;
  const auto c = minimize_hartree(separable_gas(3, {0, 1, 1.5}, {{0.2, v}}));
  CHECK(std::abs(eig::lanczos_lowest(transformed_HN(c.rotated, 12, c.e_H), 1).values[0]) < 1e-12);
}

TEST_CASE("weak convergence of matrix elements") {
  const auto hs = minimize_hartree(builtin_model("lattice4"));
  const auto qf = make_quadratic(hs.h_plus + hs.K1, hs.K2);
  const int Mloc = 3;
  const Mat Hb = dense(assemble_bogoliubov_fock(qf, Mloc));
  double prev = 1e300;
  for (int N : {8, 16, 32, 64}) {
    const auto exc = OccupationBasis::truncated(3, N);
    const Mat T = dense(restrict_truncated(transformed_HN(hs.rotated, N, hs.e_H), exc, Mloc));
    const double diff = (T - Hb).cwiseAbs().maxCoeff();
    CHECK(diff < prev);
    prev = diff;
  }
}

TEST_CASE("number_plus") {
  const auto t = OccupationBasis::truncated(3, 3);
  const RVec np = number_plus(t);
  CHECK(np[0] == 0.0);
  CHECK(np[t.index_of(std::vector<int>{0, 2, 1})] == 3.0);
  const auto s = OccupationBasis::sector(3, 4);
  const RVec ns = number_plus(s);
  double sum = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    CHECK(ns[i] == 4 - s.occupation(i, 0));
    sum += ns[i];
  }
  // each mode carries N/M particles on average over the sector
  CHECK(std::abs(sum - 4.0 * s.dim() * 2 / 3) < 1e-12);
}

TEST_CASE("localization profile") {
  CHECK(loc_f(0.0) == 1.0);
  CHECK(loc_f(0.5) == 1.0);
  CHECK(loc_f(1.0) == doctest::Approx(0.0));
  CHECK(loc_g(0.25) == 0.0);
  CHECK(loc_g(1.5) == 1.0);
  for (double x = 0; x <= 2; x += 1e-3)
    CHECK(std::abs(loc_f(x) * loc_f(x) + loc_g(x) * loc_g(x) - 1.0) <= 1e-15);

  // C_f from the largest slope on a fine grid
  double m = 0;
  const double h = 1e-6;
  for (double x = 0.5; x <= 1.0; x += 1e-4)
    m = std::max(m, std::abs(loc_f(x + h) - loc_f(x - h)) / (2 * h));
  CHECK(localization_constant() == doctest::Approx(4 * m * m).epsilon(1e-6));

  const auto b = OccupationBasis::truncated(2, 12);
  const auto L = localization_ops(b, 4);
  const RVec np = number_plus(b);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (np[i] == 0) CHECK(L.f[i] == 1.0);
    if (np[i] >= 4) CHECK(L.f[i] == 0.0);
    CHECK(std::abs(L.f[i] * L.f[i] + L.g[i] * L.g[i] - 1.0) <= 1e-15);
  }
  CHECK_THROWS_AS(localization_ops(b, 0), ValidationError);
}

TEST_CASE("one-body density matrices") {
  const auto s = OccupationBasis::sector(3, 5);
  Vec psi = Vec::Zero(s.dim());
  psi[s.index_of(std::vector<int>{5, 0, 0})] = 1.0;
  auto dm = one_body_dm(psi, s);
  CHECK(std::abs(dm.gamma(0, 0) - 5.0) < 1e-15);
  CHECK(dm.gamma.cwiseAbs().sum() == doctest::Approx(5.0));
  CHECK(condensation_fraction(psi, s) == 1.0);

  psi.setZero();
  psi[s.index_of(std::vector<int>{0, 3, 2})] = 1.0;
  CHECK(condensation_fraction(psi, s) == 0.0);

  const auto t = OccupationBasis::truncated(2, 4);
  Vec vac = Vec::Zero(t.dim());
  vac[0] = 1.0;
  dm = one_body_dm(vac, t);
  CHECK(dm.gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(dm.alpha.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(4);
  Vec r = testutil::random_complex(t.dim(), 1, rng).col(0);
  r.normalize();
  dm = one_body_dm(r, t);
  const RVec np = number_plus(t);
  double n_mean = 0;
  for (std::size_t i = 0; i < t.dim(); ++i) n_mean += std::norm(r[i]) * np[i];
  CHECK(std::abs(dm.gamma.trace().real() - n_mean) < 1e-12);
  CHECK(eig::is_hermitian(dm.gamma));
  CHECK(eig::lambda_min(dm.gamma) >= -1e-12);
  CHECK((dm.alpha - dm.alpha.transpose()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("condensation improves with N on the lattice model") {
  const auto hs = minimize_hartree(builtin_model("lattice4"));
  double prev = 1.0;
  for (int N : {20, 40}) {
    const auto s = OccupationBasis::sector(4, N);
    const Vec psi = eig::lanczos_lowest(assemble_HN(hs.rotated, N), 1).vectors.col(0);
    const double deficit = 1 - condensation_fraction(psi, s);
    CHECK(deficit < prev);
    prev = deficit;
  }
}

TEST_CASE("Gibbs objects") {
  const double beta = 1.3;
  auto g = gibbs_objects(Mat::Zero(1, 1), beta);
  CHECK(g.free_energy == 0.0);
  Mat H = Mat::Zero(2, 2);
  H(1, 1) = std::log(2.0) / beta;
  g = gibbs_objects(H, beta);
  CHECK(g.free_energy == doctest::Approx(-std::log(1.5) / beta).epsilon(1e-14));
  CHECK(std::abs(g.gibbs.trace() - 1.0) < 1e-12);
  CHECK(std::abs(g.gibbs(0, 0) - 2.0 / 3) < 1e-14);

  std::mt19937_64 rng(5);
  const Mat A = testutil::random_hermitian(6, rng);
  const auto e = eig::eigh_dense(A).values;
  g = gibbs_objects(A, 50 / (e[1] - e[0]));
  CHECK(std::abs(g.free_energy - e[0]) < 1e-9);
  CHECK(eig::lambda_min(g.gibbs) >= -1e-14);
  CHECK_THROWS_AS(gibbs_objects(Mat::Zero(kDenseGibbsCap + 1, 1), 1.0), ResourceError);
}

TEST_CASE("free-boson thermal oracle") {
  // W = 0: the sector partition sum is a complete homogeneous symmetric
  // polynomial of the Boltzmann factors, the Fock one a product of geometric series.
  const std::vector<double> t{0.0, 0.7, 1.1};
  const ModelSystem m = separable_gas(3, t, {});
  const double beta = 1.5;
  const auto hs = minimize_hartree(m);
  const auto s = diagonalize(make_quadratic(hs.h_plus + hs.K1, hs.K2));
  double prev = 1e300;
  for (int N : {4, 8, 16}) {
    const double F = gibbs_objects(dense(assemble_HN(m, N)), beta).free_energy;
    const double x1 = std::exp(-beta * t[1]), x2 = std::exp(-beta * t[2]);
    double hN = 0;
    for (int a = 0; a <= N; ++a)
      for (int b = 0; a + b <= N; ++b) hN += std::pow(x1, a) * std::pow(x2, b);
    CHECK(std::abs(F - (-std::log(hN) / beta)) < 1e-12);
    const double gap_exact = std::log((1 / ((1 - x1) * (1 - x2))) / hN) / beta;
    const double gap = F - free_energy_bogoliubov(s, beta);
    CHECK(std::abs(gap - gap_exact) < 1e-12);
    CHECK(gap < prev);
    prev = gap;
  }
}
