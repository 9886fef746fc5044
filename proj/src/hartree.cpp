#include "bogo/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bogo/eigen.hpp"

namespace bogo {

namespace {

void require_unit(const Vec& u, int M, const char* what) {
  if (u.size() != M) {
    std::ostringstream os;
    os << what << ": vector has length " << u.size() << ", model has M=" << M;
    throw ValidationError(os.str());
  }
  if (std::abs(u.norm() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << what << ": vector not normalized (|u| = " << u.norm() << ")";
    throw ValidationError(os.str());
  }
}

// sum_{npq} W_{mnpq} conj(u_n) u_p u_q for every m.
Vec quartic_field(const std::vector<TensorEntry>& W, const Vec& u) {
  Vec g = Vec::Zero(u.size());
  for (const auto& e : W) g[e.m] += e.value * std::conj(u[e.n]) * u[e.p] * u[e.q];
  return g;
}

double energy(const ModelSystem& m, const std::vector<TensorEntry>& W, const Vec& u) {
  cplx quartic(0.0);
  for (const auto& e : W)
    quartic += e.value * std::conj(u[e.m]) * std::conj(u[e.n]) * u[e.p] * u[e.q];
  return (u.dot(m.T * u)).real() + 0.5 * quartic.real();
}

Vec gradient(const ModelSystem& m, const std::vector<TensorEntry>& W, const Vec& u) {
  const Vec g = m.T * u + quartic_field(W, u);
  return 2.0 * (g - u * u.dot(g));
}

struct Trajectory {
  Vec u;
  double E = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

Trajectory descend(const ModelSystem& m, const std::vector<TensorEntry>& W, Vec u,
                   const HartreeOptions& o) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Trajectory t;
  u.normalize();
  double E = energy(m, W, u);
  Vec G = gradient(m, W, u);
  double gn = G.norm();
  double step = o.step0;
  int it = 0;
  for (; it < o.max_iter && gn > o.tol; ++it) {
    bool accepted = false;
    while (step > 1e-20) {
      Vec trial = u - step * G;
      trial.normalize();
      const double Et = energy(m, W, trial);
      const double noise = 16 * eps * (1 + std::abs(E));
      const double required = 1e-4 * step * gn * gn;
      if (required > noise) {
        accepted = Et <= E - required;
      } else if (Et <= E + noise) {
        // The required decrease is below rounding; accept on gradient decrease.
        const Vec Gt = gradient(m, W, trial);
        if (Gt.norm() < gn) accepted = true;
      }
      if (accepted) {
        u = trial;
        E = Et;
        G = gradient(m, W, u);
        gn = G.norm();
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  t.u = u;
  t.E = E;
  t.grad_norm = gn;
  t.iterations = it;
  t.converged = gn <= o.tol;
  return t;
}

Vec random_unit(int M, std::mt19937_64& rng, bool real) {
  std::normal_distribution<double> nd;
  Vec v(M);
  for (int i = 0; i < M; ++i) {
    const double re = nd(rng);
    const double im = real ? 0.0 : nd(rng);
    v[i] = cplx(re, im);
  }
  return v / v.norm();
}

}  // namespace

double hartree_energy(const ModelSystem& m, const Vec& u) {
  require_unit(u, m.M, "hartree_energy");
  return energy(m, m.W.entries(), u);
}

Vec hartree_gradient(const ModelSystem& m, const Vec& u) {
  require_unit(u, m.M, "hartree_gradient");
  return gradient(m, m.W.entries(), u);
}

Mat householder_frame(const Vec& u0) {
  const Eigen::Index M = u0.size();
  const double r = std::abs(u0[0]);
  const cplx ph = r > 1e-14 ? u0[0] / r : cplx(1.0);
  Vec w = u0;
  w[0] += ph;
  Mat H = Mat::Identity(M, M) - (2.0 / w.squaredNorm()) * (w * w.adjoint());
  H.col(0) *= -ph;
  return H;
}

ModelSystem rotate_model(const ModelSystem& m, const Mat& R) {
  const int M = m.M;
  ModelSystem out;
  out.name = m.name;
  out.M = M;
  const bool R_real = R.imag().cwiseAbs().maxCoeff() == 0.0;
  out.is_real = m.is_real && R_real;
  if (R == Mat::Identity(M, M)) {
    out.T = m.T;
    out.W = m.W;
    return out;
  }
  const Mat Tr = R.adjoint() * m.T * R;
  out.T = 0.5 * (Tr + Tr.adjoint());
  if (out.is_real) out.T = out.T.real().cast<cplx>();

  const std::size_t M2 = static_cast<std::size_t>(M) * M;
  const std::size_t M4 = M2 * M2;
  if (M4 > 40'000'000) throw ResourceError("rotate_model: M too large for dense tensor rotation");
  auto at = [M](int a, int b, int c, int d) {
    return ((static_cast<std::size_t>(a) * M + b) * M + c) * M + d;
  };
  std::vector<cplx> A(M4, cplx(0.0)), B(M4, cplx(0.0));
  for (const auto& e : m.W.entries())
    for (int a = 0; a < M; ++a) A[at(a, e.n, e.p, e.q)] += std::conj(R(e.m, a)) * e.value;
  // leg 2
  for (int a = 0; a < M; ++a)
    for (int n = 0; n < M; ++n)
      for (int b = 0; b < M; ++b) {
        const cplx r = std::conj(R(n, b));
        if (r == cplx(0.0)) continue;
        for (int p = 0; p < M; ++p)
          for (int q = 0; q < M; ++q) B[at(a, b, p, q)] += r * A[at(a, n, p, q)];
      }
  std::fill(A.begin(), A.end(), cplx(0.0));
  // leg 3
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int p = 0; p < M; ++p)
        for (int c = 0; c < M; ++c) {
          const cplx r = R(p, c);
          if (r == cplx(0.0)) continue;
          for (int q = 0; q < M; ++q) A[at(a, b, c, q)] += r * B[at(a, b, p, q)];
        }
  std::fill(B.begin(), B.end(), cplx(0.0));
  // leg 4
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int q = 0; q < M; ++q) {
          const cplx v = A[at(a, b, c, q)];
          if (v == cplx(0.0)) continue;
          for (int d = 0; d < M; ++d) B[at(a, b, c, d)] += R(q, d) * v;
        }

  double vmax = 0.0;
  for (const auto& v : B) vmax = std::max(vmax, std::abs(v));
  out.W = Tensor4(M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < M; ++c)
        for (int d = 0; d < M; ++d) {
          const Index4 idx{a, b, c, d};
          if (Tensor4::canonical(idx).first != idx) continue;
          // Average over the orbit so the stored tensor is exactly symmetric.
          cplx v = 0.25 * (B[at(a, b, c, d)] + B[at(b, a, d, c)] + std::conj(B[at(c, d, a, b)]) +
                           std::conj(B[at(d, c, b, a)]));
          if (out.is_real) v = cplx(v.real(), 0.0);
          if (Tensor4::self_conjugate(idx)) v = cplx(v.real(), 0.0);
          if (std::abs(v) <= 1e-15 * vmax) continue;
          out.W.set(a, b, c, d, v);
        }
  return out;
}

ExcitationOperators build_excitation_operators(const ModelSystem& m, const Vec& u0) {
  require_unit(u0, m.M, "build_excitation_operators");
  ExcitationOperators x;
  x.R = householder_frame(u0);
  x.rotated = rotate_model(m, x.R);
  const auto& W = x.rotated.W;
  const int M = m.M;
  const double T00 = x.rotated.T(0, 0).real();
  const double W0000 = W.get(0, 0, 0, 0).real();
  x.e_H = T00 + 0.5 * W0000;
  x.mu_H = T00 + W0000;
  x.h_full = x.rotated.T;
  for (int a = 0; a < M; ++a) {
    for (int b = 0; b < M; ++b) x.h_full(a, b) += W.get(a, 0, b, 0);
    x.h_full(a, a) -= x.mu_H;
  }
  const int d = M - 1;
  x.h_plus = x.h_full.bottomRightCorner(d, d);
  x.K1 = Mat::Zero(d, d);
  x.K2 = Mat::Zero(d, d);
  for (int a = 1; a < M; ++a)
    for (int b = 1; b < M; ++b) {
      x.K1(a - 1, b - 1) = W.get(a, 0, 0, b);
      x.K2(a - 1, b - 1) = W.get(a, b, 0, 0);
    }
  return x;
}

double hessian_gap_block(const Mat& h_plus, const Mat& K1, const Mat& K2) {
  const Eigen::Index d = h_plus.rows();
  Mat B(2 * d, 2 * d);
  const Mat A = h_plus + K1;
  B.topLeftCorner(d, d) = A;
  B.topRightCorner(d, d) = K2;
  B.bottomLeftCorner(d, d) = K2.conjugate();
  B.bottomRightCorner(d, d) = A.conjugate();
  return eig::lambda_min(B);
}

double hessian_gap_real(const Mat& h_plus, const Mat& K1, const Mat& K2) {
  const Mat A = h_plus + K1;
  return std::min(eig::lambda_min(A + K2), eig::lambda_min(A - K2));
}

double hessian_gap(const Mat& h_plus, const Mat& K1, const Mat& K2, bool is_real) {
  if (h_plus.rows() != h_plus.cols() || K1.rows() != h_plus.rows() ||
      K2.rows() != h_plus.rows() || K1.cols() != K1.rows() || K2.cols() != K2.rows())
    throw ValidationError("hessian_gap: inconsistent operator shapes");
  const double eta = hessian_gap_block(h_plus, K1, K2);
  if (is_real) {
    const double eta_r = hessian_gap_real(h_plus, K1, K2);
    if (std::abs(eta - eta_r) > 1e-10 * (1.0 + std::abs(eta))) {
      std::ostringstream os;
      os << "hessian_gap: block path " << eta << " and real path " << eta_r << " disagree";
      throw Error(os.str());
    }
  }
  return eta;
}

namespace {

HartreeSolution finish(const ModelSystem& m, Vec u0) {
  const double r = std::abs(u0[0]);
  if (r > 1e-14) u0 *= std::conj(u0[0]) / r;
  if (m.is_real && u0.imag().cwiseAbs().maxCoeff() < 1e-6) {
    u0 = u0.real().cast<cplx>();
    u0.normalize();
  }
  HartreeSolution s;
  ExcitationOperators x = build_excitation_operators(m, u0);
  s.u0 = u0;
  s.e_H = x.e_H;
  s.mu_H = x.mu_H;
  s.R = std::move(x.R);
  s.h_full = std::move(x.h_full);
  s.h_plus = std::move(x.h_plus);
  s.K1 = std::move(x.K1);
  s.K2 = std::move(x.K2);
  s.rotated = std::move(x.rotated);
  s.grad_norm = hartree_gradient(m, u0).norm();
  s.eta_H = hessian_gap(s.h_plus, s.K1, s.K2, s.rotated.is_real);
  return s;
}

}  // namespace

HartreeSolution hartree_at(const ModelSystem& m, const Vec& u0) {
  require_valid(m);
  HartreeSolution s = finish(m, u0);
  s.restart_energies = {s.e_H};
  return s;
}

HartreeSolution minimize_hartree(const ModelSystem& m, const HartreeOptions& o) {
  require_valid(m);
  if (o.restarts < 1) throw ValidationError("minimize_hartree: restarts must be at least 1");
  const auto W = m.W.entries();
  std::mt19937_64 rng(o.seed);
  std::vector<Trajectory> runs;
  for (int r = 0; r < o.restarts; ++r) {
    Vec start = r == 0 ? Vec(Vec::Unit(m.M, 0)) : random_unit(m.M, rng, m.is_real);
    runs.push_back(descend(m, W, start, o));
  }
  int best = -1;
  for (int r = 0; r < o.restarts; ++r) {
    if (!runs[r].converged) continue;
    if (best < 0 || runs[r].E < runs[best].E - 1e-12 * (1.0 + std::abs(runs[best].E))) best = r;
  }
  if (best < 0) {
    std::ostringstream os;
    os << "minimize_hartree: no restart converged to tol " << o.tol << ";";
    for (int r = 0; r < o.restarts; ++r)
      os << " [restart " << r << ": E=" << runs[r].E << " |grad|=" << runs[r].grad_norm
         << " iters=" << runs[r].iterations << "]";
    std::vector<double> g;
    for (const auto& t : runs) g.push_back(t.grad_norm);
    throw ConvergenceError(os.str(), g);
  }
  HartreeSolution s = finish(m, runs[best].u);
  s.best_restart = best;
  s.restart_agreement = 1.0;
  for (const auto& t : runs) {
    s.restart_energies.push_back(t.E);
    if (t.converged)
      s.restart_agreement = std::min(s.restart_agreement, std::abs(runs[best].u.dot(t.u)));
  }
  s.uniqueness_warning = s.restart_agreement < 0.999;
  return s;
}

}  // namespace bogo
