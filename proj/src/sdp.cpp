#include "dfrc/sdp.hpp"

#include <algorithm>
#include <limits>

namespace dfrc {

int SdpProblem::n_caps() const {
  int n = 0;
  if (diag_caps) n += static_cast<int>(diag_caps->index.size());
  if (general_caps) n += static_cast<int>(general_caps->vectors.cols());
  return n;
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::MaxIters: return "max_iters";
    case SdpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double eigen_ratio(const ComplexMatrix& x) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x, Eigen::EigenvaluesOnly);
  const RealVector lam = es.eigenvalues().cwiseMax(0.0);
  const double total = lam.sum();
  return total > 0.0 ? lam.maxCoeff() / total : 0.0;
}

namespace {

// Constraint operator in normalized units: equalities with ‖E_i‖_F = 1 and
// caps with unit-norm vectors. Diagonal selectors are kept as vectors.
class Constraints {
 public:
  Constraints(const SdpProblem& p, int n) : n_(n) {
    for (const auto& eq : p.equalities) {
      require_dims(eq.selector.rows() == n && eq.selector.cols() == n, "solve_sdp: equality selector size");
      const double nrm = eq.selector.norm();
      if (nrm == 0.0) {
        if (std::abs(eq.value) > 0.0) trivially_infeasible_ = true;
        continue;
      }
      const ComplexMatrix e = eq.selector / nrm;
      const bool diagonal = (e - ComplexMatrix(e.diagonal().asDiagonal())).norm() == 0.0;
      eq_full_.push_back(e);
      eq_diag_.push_back(diagonal ? RealVector(e.diagonal().real()) : RealVector());
      e_.conservativeResize(e_.size() + 1);
      e_(e_.size() - 1) = eq.value / nrm;
    }
    if (p.diag_caps) {
      for (int i : p.diag_caps->index) {
        require_dims(i >= 0 && i < n, "solve_sdp: diagonal cap index out of range");
        diag_idx_.push_back(i);
      }
    }
    std::vector<double> h(diag_idx_.size(), p.diag_caps ? p.diag_caps->bound : 0.0);
    if (p.general_caps) {
      const auto& vecs = p.general_caps->vectors;
      require_dims(vecs.rows() == n, "solve_sdp: cap vectors must have the problem dimension");
      std::vector<Eigen::Index> keep;
      for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        const double nrm2 = vecs.col(j).squaredNorm();
        if (nrm2 == 0.0) {
          if (p.general_caps->bound < 0.0) trivially_infeasible_ = true;
          continue;
        }
        keep.push_back(j);
        h.push_back(p.general_caps->bound / nrm2);
      }
      vecs_.resize(n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k)
        vecs_.col(static_cast<Eigen::Index>(k)) = vecs.col(keep[k]).normalized();
      if (p.general_caps->kron_inner > 0) {
        const auto& t = p.general_caps->kron_factor;
        inner_ = p.general_caps->kron_inner;
        require_dims(t.rows() * inner_ == vecs.cols() && t.cols() * inner_ <= n &&
                         static_cast<Eigen::Index>(keep.size()) == vecs.cols(),
                     "solve_sdp: inconsistent factored caps");
        kron_ = t.rowwise().normalized();
      }
    }
    h_ = Eigen::Map<const RealVector>(h.data(), static_cast<Eigen::Index>(h.size()));
    for (double b : h)
      if (b < 0.0) trivially_infeasible_ = true;
    build_gram();
  }

  int n_eq() const { return static_cast<int>(e_.size()); }
  int n_cap() const { return static_cast<int>(h_.size()); }
  int n_diag() const { return static_cast<int>(diag_idx_.size()); }
  const RealVector& e() const { return e_; }
  const RealVector& h() const { return h_; }
  bool trivially_infeasible() const { return trivially_infeasible_; }

  RealVector apply_e(const ComplexMatrix& x) const {
    RealVector out(n_eq());
    for (int i = 0; i < n_eq(); ++i) {
      if (eq_diag_[i].size()) out(i) = eq_diag_[i].dot(x.diagonal().real());
      else out(i) = (eq_full_[i].conjugate().cwiseProduct(x)).sum().real();
    }
    return out;
  }

  RealVector apply_c(const ComplexMatrix& x) const {
    RealVector out(n_cap());
    for (int j = 0; j < n_diag(); ++j) out(j) = x(diag_idx_[j], diag_idx_[j]).real();
    if (inner_ > 0) {
      const Eigen::Index ns = kron_.cols();
      const Eigen::Index off = n_diag();
      for (int t = 0; t < inner_; ++t) {
        const auto idx = Eigen::seqN(t, ns, inner_);
        const ComplexMatrix xt = x(idx, idx);
        const ComplexMatrix y = kron_ * xt;
        const RealVector c = (y.cwiseProduct(kron_.conjugate())).rowwise().sum().real();
        for (Eigen::Index m = 0; m < kron_.rows(); ++m) out(off + m * inner_ + t) = c(m);
      }
    } else if (vecs_.cols()) {
      const ComplexMatrix xv = x * vecs_;
      out.tail(vecs_.cols()) = (vecs_.conjugate().cwiseProduct(xv)).colwise().sum().real().transpose();
    }
    return out;
  }

  void add_e_adjoint(ComplexMatrix& x, const RealVector& nu, double sign) const {
    for (int i = 0; i < n_eq(); ++i) {
      if (eq_diag_[i].size()) x.diagonal().real() += sign * nu(i) * eq_diag_[i];
      else x += (sign * nu(i)) * eq_full_[i];
    }
  }

  void add_c_adjoint(ComplexMatrix& x, const RealVector& lam, double sign) const {
    for (int j = 0; j < n_diag(); ++j) x(diag_idx_[j], diag_idx_[j]) += sign * lam(j);
    if (inner_ > 0) {
      const Eigen::Index ns = kron_.cols();
      const Eigen::Index off = n_diag();
      RealVector lt(kron_.rows());
      for (int t = 0; t < inner_; ++t) {
        for (Eigen::Index m = 0; m < kron_.rows(); ++m) lt(m) = sign * lam(off + m * inner_ + t);
        const auto idx = Eigen::seqN(t, ns, inner_);
        x(idx, idx) += kron_.adjoint() * lt.asDiagonal() * kron_;
      }
    } else if (vecs_.cols()) {
      const RealVector tail = sign * lam.tail(vecs_.cols());
      x.noalias() += vecs_ * tail.asDiagonal() * vecs_.adjoint();
    }
  }

  RealVector solve_gram(const RealVector& rhs) const { return gram_.solve(rhs); }
  RealVector solve_eq_gram(const RealVector& rhs) const { return eq_gram_.solve(rhs); }

 private:
  void build_gram() {
    const int me = n_eq();
    const int mc = n_cap();
    RealMatrix g = RealMatrix::Zero(me + mc, me + mc);
    for (int i = 0; i < me; ++i)
      for (int j = 0; j < me; ++j) g(i, j) = (eq_full_[i].conjugate().cwiseProduct(eq_full_[j])).sum().real();
    for (int i = 0; i < me; ++i) {
      const RealVector ci = apply_c(eq_full_[i]);
      g.block(i, me, 1, mc) = ci.transpose();
      g.block(me, i, mc, 1) = ci;
    }
    const int nd = n_diag();
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b) g(me + a, me + b) = diag_idx_[a] == diag_idx_[b] ? 1.0 : 0.0;
    if (vecs_.cols()) {
      for (int a = 0; a < nd; ++a) {
        const RealVector row = vecs_.row(diag_idx_[a]).cwiseAbs2().transpose();
        g.block(me + a, me + nd, 1, vecs_.cols()) = row.transpose();
        g.block(me + nd, me + a, vecs_.cols(), 1) = row;
      }
      g.bottomRightCorner(vecs_.cols(), vecs_.cols()) = (vecs_.adjoint() * vecs_).cwiseAbs2();
    }
    g.bottomRightCorner(mc, mc) += RealMatrix::Identity(mc, mc);
    gram_.compute(g);
    eq_gram_.compute(g.topLeftCorner(me, me));
  }

  int n_;
  std::vector<ComplexMatrix> eq_full_;
  std::vector<RealVector> eq_diag_;
  RealVector e_;
  std::vector<int> diag_idx_;
  ComplexMatrix vecs_;
  ComplexMatrix kron_;
  int inner_ = 0;
  RealVector h_;
  bool trivially_infeasible_ = false;
  Eigen::LDLT<RealMatrix> gram_;
  Eigen::LDLT<RealMatrix> eq_gram_;
};

// Eigenvector of the symmetric tridiagonal (d, e) for eigenvalue lam by
// inverse iteration with a pivoted tridiagonal LU.
RealVector tridiagonal_eigenvector(const RealVector& d, const RealVector& e, double lam, double scale) {
  const Eigen::Index n = d.size();
  RealVector x = RealVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (n == 1) return RealVector::Ones(1);
  const double shift = lam + 1e-14 * scale;
  RealVector dl = e, dd = d.array() - shift, du = e, du2 = RealVector::Zero(n);
  std::vector<char> swapped(n, 0);
  const double tiny = 1e-300;
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    if (std::abs(dd(i)) >= std::abs(dl(i))) {
      if (dd(i) == 0.0) dd(i) = tiny;
      const double f = dl(i) / dd(i);
      dl(i) = f;
      dd(i + 1) -= f * du(i);
    } else {
      const double f = dd(i) / dl(i);
      dd(i) = dl(i);
      dl(i) = f;
      const double t = du(i);
      du(i) = dd(i + 1);
      dd(i + 1) = t - f * dd(i + 1);
      if (i < n - 2) {
        du2(i) = du(i + 1);
        du(i + 1) = -f * du(i + 1);
      }
      swapped[i] = 1;
    }
  }
  if (dd(n - 1) == 0.0) dd(n - 1) = tiny;
  for (int it = 0; it < 3; ++it) {
    for (Eigen::Index i = 0; i < n - 1; ++i) {
      if (!swapped[i]) {
        x(i + 1) -= dl(i) * x(i);
      } else {
        const double t = x(i);
        x(i) = x(i + 1);
        x(i + 1) = t - dl(i) * x(i);
      }
    }
    x(n - 1) /= dd(n - 1);
    x(n - 2) = (x(n - 2) - du(n - 2) * x(n - 1)) / dd(n - 2);
    for (Eigen::Index i = n - 3; i >= 0; --i) x(i) = (x(i) - du(i) * x(i + 1) - du2(i) * x(i + 2)) / dd(i);
    x.normalize();
  }
  return x;
}

// Π_PSD(W) and W − Π_PSD(W). Tridiagonalizes W once, takes the spectrum
// from the real tridiagonal form and builds only the smaller of the two
// spectral parts, by inverse iteration when that part is small and well
// separated, otherwise from the full tridiagonal eigensystem.
class PsdProjector {
 public:
  explicit PsdProjector(int n) : n_(n), tri_(n), tri_eig_(n) {}

  void project(const ComplexMatrix& w, ComplexMatrix& pos, ComplexMatrix& neg) {
    tri_.compute(w);
    diag_ = tri_.diagonal();
    sub_ = tri_.subDiagonal();
    tri_eig_.computeFromTridiagonal(diag_, sub_, Eigen::EigenvaluesOnly);
    const RealVector lam = tri_eig_.eigenvalues();
    Eigen::Index n_neg = 0;
    while (n_neg < n_ && lam(n_neg) <= 0.0) ++n_neg;
    const Eigen::Index n_pos = n_ - n_neg;
    const bool from_pos = n_pos <= n_neg;
    const Eigen::Index k = from_pos ? n_pos : n_neg;
    const Eigen::Index first = from_pos ? n_neg : 0;

    ComplexMatrix& part = from_pos ? pos : neg;
    ComplexMatrix& rest = from_pos ? neg : pos;
    if (k == 0) {
      part.setZero(n_, n_);
      rest = w;
      return;
    }
    const double scale = lam.cwiseAbs().maxCoeff() + 1e-300;
    RealMatrix vt;
    if (!small_part(lam, first, k, scale, vt)) {
      tri_eig_.computeFromTridiagonal(diag_, sub_, Eigen::ComputeEigenvectors);
      vt = tri_eig_.eigenvectors().middleCols(first, k);
    }
    vecs_ = vt.cast<cdouble>();
    vecs_.applyOnTheLeft(tri_.matrixQ());
    part.noalias() = vecs_ * lam.segment(first, k).asDiagonal() * vecs_.adjoint();
    rest = w - part;
  }

 private:
  bool small_part(const RealVector& lam, Eigen::Index first, Eigen::Index k, double scale, RealMatrix& vt) const {
    if (k > 4) return false;
    for (Eigen::Index j = first; j < first + k; ++j) {
      if (j > 0 && lam(j) - lam(j - 1) < 1e-8 * scale) return false;
      if (j + 1 < n_ && lam(j + 1) - lam(j) < 1e-8 * scale) return false;
    }
    vt.resize(n_, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double l = lam(first + j);
      RealVector x = tridiagonal_eigenvector(diag_, sub_, l, scale);
      RealVector tx = diag_.cwiseProduct(x) - l * x;
      tx.head(n_ - 1) += sub_.cwiseProduct(x.tail(n_ - 1));
      tx.tail(n_ - 1) += sub_.cwiseProduct(x.head(n_ - 1));
      if (!(tx.norm() <= 1e-11 * scale)) return false;
      vt.col(j) = x;
    }
    return true;
  }

  Eigen::Index n_;
  Eigen::Tridiagonalization<ComplexMatrix> tri_;
  Eigen::SelfAdjointEigenSolver<RealMatrix> tri_eig_;
  RealVector diag_, sub_;
  ComplexMatrix vecs_;
};

struct Certificate {
  double pobj = 0.0;
  double dobj = 0.0;
  SdpResiduals res;
  double dual_norm = 0.0;
  double score() const { return std::max({res.primal, res.dual, res.gap}); }
};

Certificate certify(const Constraints& c, const ComplexMatrix& qn, const ComplexMatrix& z, const ComplexMatrix& u,
                    const RealVector& v, double r) {
  Certificate cert;
  const ComplexMatrix s = -r * u;
  const RealVector lam = r * v;
  ComplexMatrix rem = qn - s;
  c.add_c_adjoint(rem, lam, 1.0);
  const RealVector nu = c.n_eq() ? c.solve_eq_gram(c.apply_e(rem)) : RealVector();
  c.add_e_adjoint(rem, nu, -1.0);

  const RealVector eq_res = c.apply_e(z) - c.e();
  const RealVector cap_res = (c.apply_c(z) - c.h()).cwiseMax(0.0);
  const double scale = 1.0 + std::sqrt(c.e().squaredNorm() + c.h().squaredNorm());
  cert.res.primal = std::sqrt(eq_res.squaredNorm() + cap_res.squaredNorm()) / scale;
  cert.res.dual = rem.norm() / (1.0 + qn.norm());
  cert.pobj = (qn.conjugate().cwiseProduct(z)).sum().real();
  cert.dobj = (c.n_eq() ? c.e().dot(nu) : 0.0) - (c.n_cap() ? c.h().dot(lam) : 0.0);
  cert.res.gap = std::abs(cert.pobj - cert.dobj) / (1.0 + std::abs(cert.pobj) + std::abs(cert.dobj));
  cert.dual_norm = std::max({nu.size() ? nu.cwiseAbs().maxCoeff() : 0.0, lam.size() ? lam.maxCoeff() : 0.0, s.norm()});
  return cert;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, double tol, int max_iters) {
  SdpOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  return solve_sdp(p, opts);
}

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts) {
  const int n = p.dim();
  require_dims(n >= 1 && p.q.cols() == n, "solve_sdp: Q must be square and nonempty");
  if ((p.q - p.q.adjoint()).norm() > 1e-9 * (1.0 + p.q.norm()))
    throw std::invalid_argument("solve_sdp: Q must be Hermitian");

  const Constraints c(p, n);
  const double qscale = p.q.norm() > 0.0 ? p.q.norm() : 1.0;
  const ComplexMatrix qn = 0.5 * (p.q + p.q.adjoint()) / qscale;

  SdpSolution sol;
  if (c.trivially_infeasible()) {
    sol.status = SdpStatus::Infeasible;
    sol.g_hat = ComplexMatrix::Zero(n, n);
    return sol;
  }

  ComplexMatrix z = ComplexMatrix::Zero(n, n);
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  RealVector w = RealVector::Zero(c.n_cap());
  RealVector v = RealVector::Zero(c.n_cap());
  double r = 1.0;
  if (opts.warm && opts.warm->z.rows() == n && opts.warm->v.size() == c.n_cap()) {
    z = opts.warm->z;
    u = opts.warm->u;
    v = opts.warm->v;
    r = opts.warm->penalty;
    w = c.apply_c(z).cwiseMin(c.h());
  }

  const double alpha = opts.relaxation;
  PsdProjector proj(n);
  ComplexMatrix x(n, n), xh(n, n), wmat(n, n), z_prev(n, n);
  RealVector rhs(c.n_eq() + c.n_cap());

  Certificate best;
  best.res = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
  ComplexMatrix best_z = z;
  sol.status = SdpStatus::MaxIters;

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    // Affine projection of (Z − U − Q/r, w − V).
    x = z - u - qn / r;
    RealVector y = w - v;
    rhs.head(c.n_eq()) = c.apply_e(x) - c.e();
    rhs.tail(c.n_cap()) = c.apply_c(x) - y;
    const RealVector mu = c.solve_gram(rhs);
    c.add_e_adjoint(x, mu.head(c.n_eq()), -1.0);
    c.add_c_adjoint(x, mu.tail(c.n_cap()), -1.0);
    y += mu.tail(c.n_cap());

    xh = alpha * x + (1.0 - alpha) * z;
    const RealVector yh = alpha * y + (1.0 - alpha) * w;

    // Cone projection.
    z_prev = z;
    wmat = xh + u;
    wmat = 0.5 * (wmat + wmat.adjoint()).eval();
    proj.project(wmat, z, u);
    const RealVector w_prev = w;
    const RealVector wv = yh + v;
    w = wv.cwiseMin(c.h());
    v = wv - w;

    if ((it + 1) % opts.check_every != 0) continue;

    const Certificate cert = certify(c, qn, z, u, v, r);
    if (cert.score() < best.score()) {
      best = cert;
      best_z = z;
    }
    if (cert.res.primal < opts.tol && cert.res.dual < opts.tol && cert.res.gap < opts.tol) {
      sol.status = SdpStatus::Optimal;
      ++it;
      break;
    }
    if (cert.dual_norm > opts.divergence) {
      sol.status = SdpStatus::Infeasible;
      ++it;
      break;
    }

    // Residual balancing of the penalty.
    const double prim = std::sqrt((x - z).squaredNorm() + (y - w).squaredNorm());
    const double dual = r * std::sqrt((z - z_prev).squaredNorm() + (w - w_prev).squaredNorm());
    if (prim > 5.0 * dual) {
      r *= 2.0;
      u /= 2.0;
      v /= 2.0;
    } else if (dual > 5.0 * prim) {
      r /= 2.0;
      u *= 2.0;
      v *= 2.0;
    }
  }

  if (sol.status == SdpStatus::Optimal) {
    best_z = z;
    best = certify(c, qn, z, u, v, r);
  }
  sol.iterations = it;
  sol.g_hat = best_z;
  sol.objective = (p.q.conjugate().cwiseProduct(best_z)).sum().real();
  sol.dual_objective = qscale * best.dobj;
  sol.residuals = best.res;
  sol.warm = {z, u, v, r};

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> fin(sol.g_hat);
  const RealVector lam = fin.eigenvalues().cwiseMax(0.0);
  const double total = lam.sum();
  sol.eig_ratio = total > 0.0 ? lam(n - 1) / total : 0.0;
  ComplexVector lead = std::sqrt(lam(n - 1)) * fin.eigenvectors().col(n - 1);
  const cdouble xi = lead(n - 1);
  if (std::abs(xi) > 0.0) lead *= std::conj(xi) / std::abs(xi);
  sol.extracted = lead.head(n - 1);
  return sol;
}

}  // namespace dfrc
