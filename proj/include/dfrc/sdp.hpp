#pragma once

#include <optional>
#include <vector>

#include "dfrc/types.hpp"

namespace dfrc {

/// Linear equality tr(E X) = value with Hermitian E.
struct TraceEquality {
  ComplexMatrix selector;
  double value = 0.0;
};

/// Upper bounds X_ii ≤ bound on the listed diagonal entries.
struct DiagCaps {
  std::vector<int> index;
  double bound = 0.0;
};

/// Upper bounds v_j^H X v_j ≤ bound, one column v_j of `vectors` per cap.
struct Rank1Caps {
  ComplexMatrix vectors;
  double bound = 0.0;
  /// Optional factored form. When kron_inner > 0, column m·inner + t of
  /// `vectors` is the conjugated row m·inner + t of kron(kron_factor, I_inner),
  /// zero-padded to the problem dimension; the solver then applies the caps
  /// block by block.
  ComplexMatrix kron_factor;
  int kron_inner = 0;
};

/// min tr(QX) s.t. tr(E_i X) = e_i, caps, X ⪰ 0.
struct SdpProblem {
  ComplexMatrix q;
  std::vector<TraceEquality> equalities;
  std::optional<DiagCaps> diag_caps;
  std::optional<Rank1Caps> general_caps;

  int dim() const { return static_cast<int>(q.rows()); }
  int n_caps() const;
};

enum class SdpStatus { Optimal, MaxIters, Infeasible };

const char* to_string(SdpStatus s);

/// Solver state that can seed a later solve of a nearby problem with the
/// same dimensions and constraint structure.
struct SdpWarmStart {
  ComplexMatrix z;
  ComplexMatrix u;
  RealVector v;
  double penalty = 1.0;
};

struct SdpResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct SdpSolution {
  ComplexMatrix g_hat;
  double objective = 0.0;
  double dual_objective = 0.0;
  double eig_ratio = 0.0;  ///< λ₁/Σλ of g_hat
  ComplexVector extracted;
  SdpStatus status = SdpStatus::MaxIters;
  int iterations = 0;
  SdpResiduals residuals;
  SdpWarmStart warm;
};

struct SdpOptions {
  double tol = 1e-6;
  int max_iters = 20000;
  double relaxation = 1.6;
  int check_every = 10;
  double divergence = 1e6;
  const SdpWarmStart* warm = nullptr;
};

/// ADMM on the split (X, y) ∈ {E(X) = e, C(X) = y} and (Z, w) ∈ PSD × {w ≤ h}.
///
/// The affine step is an exact projection using a Cholesky-factored Gram
/// matrix of the constraint operator, the cone step an eigendecomposition.
/// A dual certificate (S, ν, λ) is recovered from the scaled multipliers
/// every few iterations; the run stops once primal infeasibility, dual
/// infeasibility and the duality gap are all below `tol` in relative terms.
SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts = {});
SdpSolution solve_sdp(const SdpProblem& p, double tol, int max_iters);

/// λ₁/Σλ over the nonnegative spectrum of a Hermitian matrix.
double eigen_ratio(const ComplexMatrix& x);

}  // namespace dfrc
