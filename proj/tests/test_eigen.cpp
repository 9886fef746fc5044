#include "doctest.h"

#include <random>

#include "bogo/eigen.hpp"
#include "test_util.hpp"

using namespace bogo;
using namespace bogo::eig;

TEST_CASE("eigh_dense: identity and diagonal") {
  auto r = eigh_dense(Mat::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(r.values[i] == doctest::Approx(1.0));

  Mat D = Mat::Zero(3, 3);
  D(0, 0) = 3;
  D(1, 1) = 1;
  D(2, 2) = 2;
  r = eigh_dense(D);
  CHECK(r.values[0] == doctest::Approx(1.0));
  CHECK(r.values[1] == doctest::Approx(2.0));
  CHECK(r.values[2] == doctest::Approx(3.0));
}

TEST_CASE("eigh_dense: trace, orthonormality, reconstruction on random 50x50") {
  std::mt19937_64 rng(7);
  const Mat A = testutil::random_hermitian(50, rng);
  const auto r = eigh_dense(A);
  const double amax = A.cwiseAbs().maxCoeff();
  CHECK(std::abs(r.values.sum() - A.trace().real()) <= 1e-10 * 50 * amax);
  for (int i = 1; i < 50; ++i) CHECK(r.values[i] >= r.values[i - 1]);
  const Mat G = r.vectors.adjoint() * r.vectors;
  CHECK((G - Mat::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-10);
  const Mat Rc = r.vectors * r.values.cast<cplx>().asDiagonal() * r.vectors.adjoint();
  CHECK((Rc - A).cwiseAbs().maxCoeff() <= 1e-10 * (1 + amax));
}

TEST_CASE("eigh_dense: non-Hermitian input names the worst entry") {
  Mat A = Mat::Identity(3, 3);
  A(0, 2) = 0.5;
  try {
    eigh_dense(A);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("A(0,2)") != std::string::npos);
  }
}

TEST_CASE("SparseHermitian: assembly merges duplicates and mirrors lower entries") {
  SparseHermitian S(3);
  S.add(0, 1, cplx(1, 2));
  S.add(1, 0, cplx(1, -2));  // same entry, given in the lower triangle
  S.add(2, 2, 4.0);
  S.finalize();
  CHECK(S.nnz() == 2);
  const Mat D = S.to_dense();
  CHECK(D(0, 1) == cplx(2, 4));
  CHECK(D(1, 0) == cplx(2, -4));
  Vec x = Vec::Random(3);
  CHECK((S * x - D * x).norm() <= 1e-14);
}

TEST_CASE("lanczos_lowest: diagonal 0..99") {
  SparseHermitian S(100);
  for (std::size_t i = 0; i < 100; ++i) S.add(i, i, static_cast<double>(i));
  S.finalize();
  LanczosOptions o;
  o.dense_below = 0;
  const auto r = lanczos_lowest(S, 3, o);
  REQUIRE(r.values.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.values[i] - i) <= 1e-9);
}

TEST_CASE("lanczos_lowest: scalar matrix") {
  SparseHermitian S(200);
  for (std::size_t i = 0; i < 200; ++i) S.add(i, i, 2.5);
  S.finalize();
  LanczosOptions o;
  o.dense_below = 0;
  const auto r = lanczos_lowest(S, 4, o);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(r.values[i] - 2.5) <= 1e-12);
}

TEST_CASE("lanczos_lowest: random sparse 300x300 vs dense") {
  std::mt19937_64 rng(11);
  const SparseHermitian S = testutil::random_sparse(300, 0.03, rng);
  LanczosOptions o;
  o.dense_below = 0;
  const auto r = lanczos_lowest(S, 5, o);
  const auto d = eigh_dense(S.to_dense());
  for (int i = 0; i < 5; ++i) CHECK(std::abs(r.values[i] - d.values[i]) <= 1e-8);
  const Mat G = r.vectors.adjoint() * r.vectors;
  CHECK((G - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("lanczos_lowest: real symmetric input takes the real path") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  SparseHermitian S(400);
  for (std::size_t i = 0; i < 400; ++i) {
    S.add(i, i, nd(rng));
    for (std::size_t j = i + 1; j < 400; ++j)
      if (u(rng) < 0.02) S.add(i, j, nd(rng));
  }
  S.finalize();
  CHECK(S.real_valued());
  CHECK_FALSE(testutil::random_sparse(50, 0.1, rng).real_valued());
  LanczosOptions o;
  o.dense_below = 0;
  const auto r = lanczos_lowest(S, 4, o);
  const auto d = eigh_dense(S.to_dense());
  for (int i = 0; i < 4; ++i) CHECK(std::abs(r.values[i] - d.values[i]) <= 1e-8);
  CHECK(r.vectors.imag().cwiseAbs().maxCoeff() == 0.0);
  const Mat res = S.to_dense() * r.vectors - r.vectors * r.values.cast<cplx>().asDiagonal();
  CHECK(res.cwiseAbs().maxCoeff() <= 1e-8);
  RVec y;
  CHECK_THROWS_AS(testutil::random_sparse(20, 0.5, rng).matvec_real(RVec::Ones(20), y), Error);
}

TEST_CASE("lanczos_lowest: deterministic for fixed seed and thread count") {
  std::mt19937_64 rng(3);
  const SparseHermitian S = testutil::random_sparse(400, 0.02, rng);
  LanczosOptions o;
  o.dense_below = 0;
  const auto a = lanczos_lowest(S, 3, o);
  set_threads(4);
  const auto b = lanczos_lowest(S, 3, o);
  set_threads(1);
  for (int i = 0; i < 3; ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("lanczos_lowest: k >= dim falls back to dense") {
  SparseHermitian S(3);
  S.add(0, 0, 3.0);
  S.add(1, 1, 1.0);
  S.add(2, 2, 2.0);
  S.finalize();
  const auto r = lanczos_lowest(S, 5);
  REQUIRE(r.values.size() == 3);
  CHECK(r.values[0] == doctest::Approx(1.0));
}

TEST_CASE("lanczos_lowest: non-convergence carries residuals") {
  std::mt19937_64 rng(5);
  const SparseHermitian S = testutil::random_sparse(500, 0.02, rng);
  LanczosOptions o;
  o.dense_below = 0;
  o.max_iter = 1;
  o.krylov_dim = 12;
  o.tol = 1e-15;
  try {
    lanczos_lowest(S, 4, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residuals().size() == 4);
  }
}

TEST_CASE("sqrt_psd") {
  CHECK((sqrt_psd(Mat::Identity(4, 4), 0.5) - Mat::Identity(4, 4)).norm() <= 1e-14);
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 9;
  const Mat B = sqrt_psd(D, 1e-12);
  CHECK(std::abs(B(0, 0) - 2.0) <= 1e-14);
  CHECK(std::abs(B(1, 1) - 3.0) <= 1e-14);

  std::mt19937_64 rng(9);
  const Mat A = testutil::random_pd(20, rng, 0.5);
  const Mat S = sqrt_psd(A, 1e-12);
  CHECK((S - S.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((S * S - A).norm() <= 1e-10 * A.norm());

  CHECK_THROWS_AS(sqrt_psd(-Mat::Identity(2, 2), 1e-12), ValidationError);
}

TEST_CASE("sqrt_psd: monotone on commuting pairs") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Mat A = Mat::Zero(5, 5), B = Mat::Zero(5, 5);
    for (int i = 0; i < 5; ++i) {
      A(i, i) = u(rng);
      B(i, i) = A(i, i) + u(rng);
    }
    REQUIRE(lambda_min(B - A) >= 0.0);
    CHECK(sqrt_psd(A, 1e-12).trace().real() <= sqrt_psd(B, 1e-12).trace().real());
  }
}

TEST_CASE("trace_norm_diff") {
  std::mt19937_64 rng(4);
  const Mat A = testutil::random_hermitian(6, rng);
  const Mat B = testutil::random_hermitian(6, rng);
  CHECK(trace_norm_diff(A, A) == 0.0);
  Mat P = Mat::Zero(2, 2), Q = Mat::Zero(2, 2);
  P(0, 0) = 1;
  Q(1, 1) = 1;
  CHECK(std::abs(trace_norm_diff(P, Q) - 2.0) <= 1e-14);
  const double oracle = eigh_dense(A - B).values.cwiseAbs().sum();
  CHECK(std::abs(trace_norm_diff(A, B) - oracle) <= 1e-12);
  CHECK(std::abs(trace_norm_diff(A, B) - trace_norm_diff(B, A)) <= 1e-12);
  CHECK_THROWS_AS(trace_norm_diff(P, A), ValidationError);
}
