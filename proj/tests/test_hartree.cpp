#include <cmath>

#include "bogo/hartree.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bogo;

namespace {

Vec random_unit(int M, std::mt19937_64& rng) {
  Vec u = testutil::random_complex(M, 1, rng).col(0);
  return u / u.norm();
}

ModelSystem random_model(int M, std::mt19937_64& rng) {
  std::vector<double> t(M);
  for (int i = 0; i < M; ++i) t[i] = 0.5 * i;
  std::vector<FormFactor> ff;
  for (int a = 0; a < 2; ++a) ff.push_back({0.3 + 0.2 * a, testutil::random_complex(M, 1, rng).col(0)});
  ModelSystem m = separable_gas(M, t, ff);
  const Mat X = testutil::random_hermitian(M, rng);
  m.T += 0.2 * X;
  return m;
}

ModelSystem contact_only(const std::vector<double>& t, double g) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(t.size()));
  v[0] = 1.0;
  return separable_gas(static_cast<int>(t.size()), t, {{g, v}});
}

}  // namespace

TEST_CASE("hartree_energy basic cases") {
  const ModelSystem free = separable_gas(3, {0.5, 1.0, 2.0}, {});
  Vec e0 = Vec::Zero(3);
  e0[0] = 1.0;
  CHECK(hartree_energy(free, e0) == doctest::Approx(0.5).epsilon(1e-15));

  const ModelSystem c = contact_only({0.3, 1.0, 2.0}, 0.4);
  CHECK(std::abs(hartree_energy(c, e0) - (0.3 + 0.2)) < 1e-15);

  std::mt19937_64 rng(1);
  const ModelSystem m = random_model(4, rng);
  const Vec u = random_unit(4, rng);
  const double E = hartree_energy(m, u);
  for (double th : {0.3, 1.7, -2.5})
    CHECK(std::abs(hartree_energy(m, std::polar(1.0, th) * u) - E) < 1e-12);

  CHECK_THROWS_AS(hartree_energy(m, 2.0 * u), ValidationError);
}

TEST_CASE("hartree_gradient is tangent and vanishes at eigenvectors of a free model") {
  const ModelSystem free = separable_gas(3, {0.5, 1.0, 2.0}, {});
  for (int k = 0; k < 3; ++k) {
    Vec e = Vec::Zero(3);
    e[k] = 1.0;
    CHECK(hartree_gradient(free, e).norm() < 1e-12);
  }
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelSystem m = random_model(4, rng);
    const Vec u = random_unit(4, rng);
    CHECK(std::abs(u.dot(hartree_gradient(m, u))) < 1e-12);
  }
}

TEST_CASE("hartree_gradient matches central differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int M = 2 + trial % 4;
    const ModelSystem m = random_model(M, rng);
    const Vec u = random_unit(M, rng);
    Vec d = testutil::random_complex(M, 1, rng).col(0);
    d -= u * u.dot(d);
    d /= d.norm();
    auto E = [&](double t) {
      const Vec v = u + t * d;
      return hartree_energy(m, v / v.norm());
    };
    const double fd = (E(h) - E(-h)) / (2 * h);
    const double an = hartree_gradient(m, u).dot(d).real();
    CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("householder frame") {
  Vec e0 = Vec::Zero(4);
  e0[0] = 1.0;
  CHECK(householder_frame(e0) == Mat::Identity(4, 4));

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec u = random_unit(5, rng);
    const Mat R = householder_frame(u);
    CHECK((R.adjoint() * R - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((R.col(0) - u).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("hessian_gap small cases and path agreement") {
  Mat h = Mat::Zero(2, 2);
  h(0, 0) = 1;
  h(1, 1) = 2;
  const Mat Z = Mat::Zero(2, 2);
  CHECK(hessian_gap(h, Z, Z, true) == doctest::Approx(1.0).epsilon(1e-14));

  Mat h1(1, 1), K1(1, 1), K2(1, 1);
  h1(0, 0) = 2;
  K1(0, 0) = 0;
  K2(0, 0) = 1;
  CHECK(hessian_gap(h1, K1, K2, true) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hessian_gap_block(h1, K1, K2) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 5;
    const Mat hh = testutil::random_real(d, d, rng);
    const Mat k1 = testutil::random_real(d, d, rng);
    const Mat k2 = testutil::random_real(d, d, rng);
    const Mat H = 0.5 * (hh + hh.transpose()), A = 0.5 * (k1 + k1.transpose()),
              B = 0.5 * (k2 + k2.transpose());
    CHECK(std::abs(hessian_gap_block(H, A, B) - hessian_gap_real(H, A, B)) < 1e-10);
  }
}

TEST_CASE("free model minimizer") {
  const ModelSystem m = separable_gas(3, {0, 1, 2}, {});
  const HartreeSolution s = minimize_hartree(m);
  CHECK(std::abs(std::abs(s.u0[0]) - 1.0) < 1e-12);
  CHECK(std::abs(s.e_H) < 1e-14);
  CHECK(std::abs(s.mu_H) < 1e-14);
  CHECK(s.K1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.K2.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(s.h_plus(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(s.h_plus(1, 1) - 2.0) < 1e-14);
  // the Hessian gap of a free model is the spectral gap of T
  CHECK(s.eta_H == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("contact-only model") {
  const double g = 0.4;
  const ModelSystem m = contact_only({0.3, 1.0, 2.0}, g);
  const HartreeSolution s = minimize_hartree(m);
  CHECK(std::abs(std::abs(s.u0[0]) - 1.0) < 1e-12);
  CHECK(std::abs(s.e_H - (0.3 + g / 2)) < 1e-12);
  CHECK(std::abs(s.mu_H - (0.3 + g)) < 1e-12);
  CHECK(s.K1.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(s.K2.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(s.h_plus(0, 0) - (1.0 - 0.3 - g)) < 1e-12);
  CHECK(std::abs(s.h_plus(1, 1) - (2.0 - 0.3 - g)) < 1e-12);
  CHECK(s.grad_norm <= 1e-10);
}

TEST_CASE("lattice gas condenses in the zero-momentum mode") {
  const std::vector<double> w{0.5, 0.3, 0.2, 0.3};
  const ModelSystem m = lattice_gas(4, 1.0, w);
  Vec e0 = Vec::Zero(4);
  e0[0] = 1.0;
  CHECK(hartree_gradient(m, e0).norm() < 1e-15);
  const HartreeSolution s = minimize_hartree(m);
  CHECK(std::abs(std::abs(s.u0[0]) - 1.0) < 1e-12);
  CHECK(std::abs(s.e_H - w[0] / 8) < 1e-12);

  // pairing only between p and -p: excitation index i holds momentum i + 1
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const int pa = a + 1, pb = b + 1;
      const double want = (pa + pb) % 4 == 0 ? w[pa] / 4 : 0.0;
      CHECK(std::abs(s.K2(a, b) - want) < 1e-14);
      CHECK(std::abs(s.K1(a, b) - (a == b ? w[pa] / 4 : 0.0)) < 1e-14);
    }
}

TEST_CASE("solution invariants on builtin models") {
  for (const char* name : {"two_mode", "lattice4", "free3", "contact3"}) {
    const ModelSystem m = builtin_model(name);
    const HartreeSolution s = minimize_hartree(m);
    CAPTURE(name);
    CHECK(std::abs(s.u0.norm() - 1.0) < 1e-12);
    CHECK(s.grad_norm <= 1e-10);
    CHECK(std::abs(hartree_energy(m, s.u0) - s.e_H) <= 1e-12);
    CHECK(std::abs(s.mu_H - s.e_H - 0.5 * s.rotated.W.get(0, 0, 0, 0).real()) <= 1e-10);
    CHECK((s.R.col(0) - s.u0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s.h_full.row(0).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(s.h_full.col(0).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((s.K2 - s.K2.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(eig::is_hermitian(s.K1));
    CHECK(eig::is_hermitian(s.h_plus));
    CHECK(s.restart_agreement > 0.999);
    CHECK_FALSE(s.uniqueness_warning);
  }
}

TEST_CASE("minimizers agree up to phase across seeds") {
  for (const char* name : {"two_mode", "lattice4", "contact3"}) {
    const ModelSystem m = builtin_model(name);
    HartreeOptions a, b;
    a.seed = 11;
    b.seed = 97;
    const auto s1 = minimize_hartree(m, a);
    const auto s2 = minimize_hartree(m, b);
    CHECK(std::abs(std::abs(s1.u0.dot(s2.u0)) - 1.0) < 1e-8);
  }
}

TEST_CASE("complex model pipeline") {
  std::mt19937_64 rng(6);
  const ModelSystem m = random_model(3, rng);
  const HartreeSolution s = minimize_hartree(m);
  CHECK(s.grad_norm <= 1e-10);
  CHECK(s.h_full.row(0).cwiseAbs().maxCoeff() <= 1e-8);
  const ModelSystem r = rotate_model(m, s.R);
  CHECK(validate_model(r).passed);
  CHECK(std::abs(r.T(0, 0).real() + 0.5 * r.W.get(0, 0, 0, 0).real() - s.e_H) < 1e-12);
  // rotation by R then R^dagger returns the model
  const ModelSystem back = rotate_model(r, s.R.adjoint());
  CHECK((back.T - m.T).cwiseAbs().maxCoeff() < 1e-13);
  for (const auto& e : m.W.entries())
    CHECK(std::abs(back.W.get(e.m, e.n, e.p, e.q) - e.value) < 1e-13);
}

TEST_CASE("saddle point reports a negative Hessian gap") {
  HartreeOptions o;
  o.restarts = 1;
  const HartreeSolution s = minimize_hartree(builtin_model("saddle2"), o);
  CHECK(s.eta_H < 0);
  CHECK(s.eta_H == doctest::Approx(-0.9).epsilon(1e-12));
}

TEST_CASE("hartree_at uses the prescribed condensate") {
  const ModelSystem m = builtin_model("two_mode");
  Vec e0 = Vec::Zero(2);
  e0[0] = 1.0;
  const HartreeSolution s = hartree_at(m, e0);
  CHECK(s.R == Mat::Identity(2, 2));
  CHECK(std::abs(s.e_H - hartree_energy(m, e0)) < 1e-15);
}
