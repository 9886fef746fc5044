#include "bogo/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "bogo/eigen.hpp"

namespace bogo {

Mat QuadraticForm::block() const {
  Mat A(2 * d, 2 * d);
  A.topLeftCorner(d, d) = H;
  A.topRightCorner(d, d) = K;
  A.bottomLeftCorner(d, d) = K.conjugate();
  A.bottomRightCorner(d, d) = H.conjugate();
  return A;
}

double QuadraticForm::eta() const { return eig::lambda_min(block()); }

QuadraticForm make_quadratic(const Mat& H, const Mat& K) {
  if (H.rows() != H.cols() || K.rows() != K.cols() || H.rows() != K.rows())
    throw ValidationError("make_quadratic: H and K must be square of equal size");
  if (H.rows() == 0) throw ValidationError("make_quadratic: empty mode space");
  eig::require_hermitian(H, "H");
  const double scale = 1.0 + K.cwiseAbs().maxCoeff();
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("make_quadratic: K is not symmetric");
  QuadraticForm qf;
  qf.d = static_cast<int>(H.rows());
  qf.H = 0.5 * (H + H.adjoint());
  qf.K = 0.5 * (K + K.transpose());
  qf.is_real = qf.H.imag().cwiseAbs().maxCoeff() == 0.0 && qf.K.imag().cwiseAbs().maxCoeff() == 0.0;
  return qf;
}

namespace {

void require_gap(const QuadraticForm& qf) {
  const double eta = qf.eta();
  if (!(eta > 0.0)) {
    std::ostringstream os;
    os << "Hessian gap violated: lambda_min of the block matrix is " << eta;
    throw HessianGapError(os.str(), eta);
  }
}

BogoliubovSpectrum diagonalize_real(const QuadraticForm& qf) {
  const int d = qf.d;
  const RMat H = qf.H.real();
  const RMat K = qf.K.real();
  Eigen::SelfAdjointEigenSolver<RMat> eb(H - K);
  const RVec b = eb.eigenvalues();
  if (b[0] <= 0.0) throw HessianGapError("Hessian gap violated: H - K is not positive", b[0]);
  const RMat Bh = eb.eigenvectors() * b.cwiseSqrt().asDiagonal() * eb.eigenvectors().transpose();
  const RMat Bhi =
      eb.eigenvectors() * b.cwiseSqrt().cwiseInverse().asDiagonal() * eb.eigenvectors().transpose();
  RMat C = Bh * (H + K) * Bh;
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMat> ec(C);
  const RVec w2 = ec.eigenvalues();
  if (w2[0] <= 0.0) throw HessianGapError("Hessian gap violated: H + K is not positive", w2[0]);
  const RVec omega = w2.cwiseSqrt();
  const RMat& O = ec.eigenvectors();
  const RMat S = Bh * O * omega.cwiseSqrt().cwiseInverse().asDiagonal();
  const RMat SinvT = Bhi * O * omega.cwiseSqrt().asDiagonal();
  BogoliubovSpectrum s;
  s.xi = omega;
  s.U = (0.5 * (S + SinvT)).cast<cplx>();
  s.V = (0.5 * (S - SinvT)).cast<cplx>();
  s.E0 = 0.5 * (omega.sum() - H.trace());
  (void)d;
  return s;
}

BogoliubovSpectrum diagonalize_complex(const QuadraticForm& qf) {
  const int d = qf.d;
  const Mat A = qf.block();
  Mat Sg = Mat::Identity(2 * d, 2 * d);
  Sg.bottomRightCorner(d, d) *= -1.0;

  // Eigenvalues of S A must be real and come in +- pairs.
  Eigen::ComplexEigenSolver<Mat> ge(Sg * A, false);
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  int positive = 0;
  for (Eigen::Index i = 0; i < ge.eigenvalues().size(); ++i) {
    const cplx l = ge.eigenvalues()[i];
    if (std::abs(l.imag()) > 1e-8 * scale) {
      std::ostringstream os;
      os << "diagonalize: S*A has a non-real eigenvalue " << l.real() << " + " << l.imag() << "i";
      throw ValidationError(os.str());
    }
    if (l.real() > 0) ++positive;
  }
  if (positive != d) throw ValidationError("diagonalize: S*A eigenvalues are not in +- pairs");

  // Eigenvectors through the Hermitian similar matrix A^{1/2} S A^{1/2}.
  const auto ea = eig::eigh_dense(A);
  const RVec a = ea.values;
  const Mat Ah = ea.vectors * a.cwiseSqrt().cast<cplx>().asDiagonal() * ea.vectors.adjoint();
  const Mat Ahi =
      ea.vectors * a.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * ea.vectors.adjoint();
  Mat G = Ah * Sg * Ah;
  G = 0.5 * (G + G.adjoint()).eval();
  const auto eg = eig::eigh_dense(G);
  BogoliubovSpectrum s;
  s.xi.resize(d);
  s.U.resize(d, d);
  s.V.resize(d, d);
  for (int k = 0; k < d; ++k) {
    const double xi = eg.values[d + k];
    s.xi[k] = xi;
    const Vec x = std::sqrt(xi) * (Ahi * eg.vectors.col(d + k));
    s.U.col(k) = x.head(d);
    s.V.col(k) = x.tail(d);
  }
  s.E0 = 0.5 * (s.xi.sum() - qf.H.trace().real());
  return s;
}

}  // namespace

BogoliubovSpectrum diagonalize(const QuadraticForm& qf, DiagPath path) {
  require_gap(qf);
  if (path == DiagPath::Real || (path == DiagPath::Automatic && qf.is_real)) {
    if (!qf.is_real) throw ValidationError("diagonalize: real path requested for complex data");
    return diagonalize_real(qf);
  }
  return diagonalize_complex(qf);
}

SymplecticResidual symplectic_residual(const QuadraticForm& qf, const BogoliubovSpectrum& s) {
  const int d = qf.d;
  SymplecticResidual r;
  r.normalization = (s.U.adjoint() * s.U - s.V.adjoint() * s.V - Mat::Identity(d, d))
                        .cwiseAbs()
                        .maxCoeff();
  const Mat UtV = s.U.transpose() * s.V;
  r.symmetry = (UtV - UtV.transpose()).cwiseAbs().maxCoeff();
  Mat Tm(2 * d, 2 * d);
  Tm.topLeftCorner(d, d) = s.U;
  Tm.topRightCorner(d, d) = s.V.conjugate();
  Tm.bottomLeftCorner(d, d) = s.V;
  Tm.bottomRightCorner(d, d) = s.U.conjugate();
  RVec dd(2 * d);
  dd << s.xi, s.xi;
  r.diagonal = (Tm.adjoint() * qf.block() * Tm - Mat(dd.cast<cplx>().asDiagonal()))
                   .cwiseAbs()
                   .maxCoeff();
  return r;
}

// ---------------------------------------------------------------------------

double lambda_min_Xt(const QuadraticForm& qf, double t) {
  if (!qf.is_real) throw ValidationError("X_t characterization requires real H and K");
  const RMat H = qf.H.real();
  const RMat K = qf.K.real();
  const RMat B = H - K;
  RMat X = H + K - t * t * B.inverse();
  X = 0.5 * (X + X.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMat> es(X, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double xi_min_via_Xt(const QuadraticForm& qf, std::pair<double, double> bracket, double tol) {
  require_gap(qf);
  double lo = bracket.first, hi = bracket.second;
  const double flo = lambda_min_Xt(qf, lo);
  const double fhi = lambda_min_Xt(qf, hi);
  if (!(flo > 0.0 && fhi < 0.0)) {
    std::ostringstream os;
    os << "xi_min_via_Xt: bracket (" << lo << ", " << hi << ") does not straddle a root ("
       << flo << ", " << fhi << ")";
    throw ValidationError(os.str());
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lambda_min_Xt(qf, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double xi_min_via_Xt(const QuadraticForm& qf, double tol) {
  const double eta = qf.eta();
  const double hi = qf.H.trace().real() + qf.K.norm() * qf.d;
  return xi_min_via_Xt(qf, {0.5 * eta, hi}, tol);
}

// ---------------------------------------------------------------------------

SpectrumWindow enumerate_spectrum(const BogoliubovSpectrum& s, double window,
                                  std::size_t max_count) {
  if (!(window > 0.0)) throw ValidationError("enumerate_spectrum: window must be positive");
  if (s.xi.size() > 0 && !(s.xi.minCoeff() > 0.0))
    throw ValidationError("enumerate_spectrum: frequencies must be positive");
  std::vector<double> xi(s.xi.data(), s.xi.data() + s.xi.size());
  std::sort(xi.begin(), xi.end());
  const double limit = window + 1e-12 * (1.0 + window);
  const std::size_t node_cap = 50 * std::max<std::size_t>(max_count, 1) + 1000;

  SpectrumWindow out;
  std::priority_queue<double> keep;  // max-heap of the smallest sums seen
  std::size_t nodes = 0;
  // Depth-first over occupation tuples; mode i only grows once modes < i are fixed.
  std::vector<std::pair<std::size_t, double>> stack{{0, 0.0}};
  auto push_value = [&](double v) {
    if (keep.size() < max_count) {
      keep.push(v);
    } else {
      out.truncated = true;
      if (!keep.empty() && v < keep.top()) {
        keep.pop();
        keep.push(v);
      }
    }
  };
  // Each stack item (i, e): a configuration whose last incremented mode is >= i.
  push_value(0.0);
  while (!stack.empty()) {
    const auto [i, e] = stack.back();
    stack.pop_back();
    for (std::size_t j = i; j < xi.size(); ++j) {
      const double v = e + xi[j];
      if (v > limit) break;  // xi sorted: larger j only grows
      if (++nodes > node_cap) {
        out.truncated = true;
        stack.clear();
        break;
      }
      push_value(v);
      stack.push_back({j, v});
    }
  }
  out.values.reserve(keep.size());
  while (!keep.empty()) {
    out.values.push_back(keep.top() + s.E0);
    keep.pop();
  }
  std::reverse(out.values.begin(), out.values.end());
  return out;
}

// ---------------------------------------------------------------------------

QuasiFreePair ground_state_dm(const BogoliubovSpectrum& s) {
  QuasiFreePair p;
  p.gamma = s.V.conjugate() * s.V.transpose();
  p.alpha = s.V.conjugate() * s.U.transpose();
  const auto r = quasi_free_residual(p);
  const double scale = 1.0 + p.gamma.cwiseAbs().maxCoeff() + p.alpha.cwiseAbs().maxCoeff();
  const double worst = std::max({r.purity, r.commutation, r.alpha_symmetry, r.gamma_hermiticity});
  if (worst > 1e-9 * scale * scale) {
    std::ostringstream os;
    os << "ground_state_dm: quasi-free identities violated (residual " << worst << ")";
    throw Error(os.str());
  }
  return p;
}

QuasiFreeResidual quasi_free_residual(const QuasiFreePair& p) {
  const Eigen::Index d = p.gamma.rows();
  QuasiFreeResidual r;
  r.purity = (p.alpha * p.alpha.adjoint() - p.gamma * (Mat::Identity(d, d) + p.gamma))
                 .cwiseAbs()
                 .maxCoeff();
  r.commutation = (p.gamma * p.alpha - p.alpha * p.gamma.conjugate()).cwiseAbs().maxCoeff();
  r.alpha_symmetry = (p.alpha - p.alpha.transpose()).cwiseAbs().maxCoeff();
  r.gamma_hermiticity = (p.gamma - p.gamma.adjoint()).cwiseAbs().maxCoeff();
  return r;
}

double evaluate_q(const QuadraticForm& qf, const QuasiFreePair& p) {
  if (p.gamma.rows() != qf.d || p.alpha.rows() != qf.d)
    throw ValidationError("evaluate_q: shape mismatch");
  const double kin = (qf.H * p.gamma).trace().real();
  const double pair = (qf.K.array() * p.alpha.conjugate().array()).sum().real();
  return kin + pair;
}

double free_energy_bogoliubov(const BogoliubovSpectrum& s, double beta) {
  if (!(beta > 0.0)) throw ValidationError("free_energy_bogoliubov: beta must be positive");
  if (s.xi.size() && !(s.xi.minCoeff() > 0.0))
    throw ValidationError("free_energy_bogoliubov: frequencies must be positive");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.xi.size(); ++i) acc += std::log1p(-std::exp(-beta * s.xi[i]));
  return s.E0 + acc / beta;
}

}  // namespace bogo
