#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dfrc/channel.hpp"
#include "dfrc/papr.hpp"
#include "dfrc/rng.hpp"
#include "dfrc/sdp.hpp"

namespace dfrc {

enum class PaprConstraint { None, Nyquist, Oversampled };
enum class DesignMethod { FullSdp, PerSnapshot };

const char* to_string(PaprConstraint m);

/// Weighted objective ‖AG − B‖_F² with
/// A = [√ρ/‖S‖·H_D; √(1−ρ)/‖G₀‖·I] and B = [√ρ/‖S‖·S; √(1−ρ)/‖G₀‖·G₀].
struct DesignProblem {
  ComplexMatrix a_mat;
  ComplexMatrix b_mat;
  ComplexMatrix aha;  ///< A^H A
  ComplexMatrix ahb;  ///< A^H B
  double rho = 0.5;
  double papr_rhs = 0.0;
  double cap_margin = 0.0;  ///< caps enter the relaxation as papr_rhs·(1 − cap_margin)
  double p_sym_per_col = 0.0;
  double p_cp_per_col = 0.0;
  PaprConstraint papr_mode = PaprConstraint::None;
  int oversample = 1;
  std::optional<ComplexMatrix> theta_map;
  std::optional<ComplexMatrix> theta_factor;  ///< T with Θ = T ⊗ I_{N_t}
  int n_tx = 1;
  Eigen::Array<bool, Eigen::Dynamic, 1> cp_mask;
  double s_norm = 0.0;
  double g0_norm = 0.0;

  int dim() const { return static_cast<int>(a_mat.cols()); }
  int frame_len() const { return static_cast<int>(b_mat.cols()); }
  /// ‖AG − B‖_F² of a post-IDFT frame.
  double objective(const ComplexMatrix& g) const;
};

/// A cap-free config (papr_eps = ∞) always yields PaprConstraint::None.
DesignProblem build_problem(const ChannelRealization& ch, const OfdmOperators& ops, const SymbolMatrix& s,
                            const Waveform& g0, const SystemConfig& cfg,
                            PaprConstraint mode = PaprConstraint::Oversampled);

/// Homogeneous lifting of column l: ĝ = [g; ξ], Q_l = [A^HA, −A^Hb_l; −b_l^HA, ‖b_l‖²].
SdpProblem lift_snapshot(const DesignProblem& prob, int l);
/// Lifting of the whole frame with the frame-level power budget.
SdpProblem lift_full(const DesignProblem& prob);

/// Feasible set of the unlifted vector, used to repair relaxed solutions.
struct FeasibleSet {
  Eigen::Array<bool, Eigen::Dynamic, 1> cp_mask;
  double p_total = 0.0;  ///< ‖g‖²
  double p_cp = 0.0;     ///< ‖g on cp_mask‖²
  /// Caps |(C g)_j|² ≤ bound; C = I when absent.
  std::optional<ComplexMatrix> cap_map;
  std::optional<ComplexMatrix> cap_pinv;  ///< least-squares inverse of cap_map
  double cap_bound = std::numeric_limits<double>::infinity();
  /// A point known to satisfy every constraint, used as a last-resort blend target.
  std::optional<ComplexVector> anchor;

  int dim() const { return static_cast<int>(cp_mask.size()); }
};

FeasibleSet snapshot_feasible_set(const DesignProblem& prob);
FeasibleSet frame_feasible_set(const DesignProblem& prob);

struct FeasibilityCheck {
  double power_error = 0.0;  ///< max relative error of the two power equalities
  double cap_excess = 0.0;   ///< max relative cap excess, 0 when satisfied
  bool ok(double power_tol = 1e-8, double cap_slack = 1e-6) const {
    return power_error <= power_tol && cap_excess <= cap_slack;
  }
};

FeasibilityCheck check_feasible(const FeasibleSet& set, const ComplexVector& g);

struct Extraction {
  ComplexVector g;
  double objective = 0.0;  ///< ĝ^H Q ĝ with ξ = 1
  bool randomized = false;
  FeasibilityCheck check;
};

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(const std::string& what, ComplexVector best, FeasibilityCheck violations)
      : std::runtime_error(what), best_(std::move(best)), violations_(violations) {}
  const ComplexVector& best_candidate() const { return best_; }
  const FeasibilityCheck& violations() const { return violations_; }

 private:
  ComplexVector best_;
  FeasibilityCheck violations_;
};

/// Leading eigenvector when λ₁/Σλ reaches the threshold, otherwise Gaussian
/// randomization over CN(0, Ĝ); each candidate is de-rotated by ξ and
/// repaired by alternating power rescaling and cap clipping.
Extraction extract_rank1(const SdpSolution& sol, const SdpProblem& p, const FeasibleSet& set,
                         const SolverSettings& settings, Rng& rng);

/// Scale the CP block and the remaining block to their power targets.
void rescale_powers(const FeasibleSet& set, ComplexVector& g);
/// Shrink every cap level |(Cg)_j|² above `level` onto it, then map back by least squares.
void clip_caps(const FeasibleSet& set, ComplexVector& g, double level);
/// Alternate rescaling and clipping; if that fails, blend towards the anchor
/// with the smallest weight found by bisection. True once feasible.
bool repair(const FeasibleSet& set, ComplexVector& g, int passes);

struct ColumnDiagnostics {
  double sdp_objective = 0.0;
  double objective = 0.0;
  double eig_ratio = 0.0;
  SdpStatus status = SdpStatus::MaxIters;
  int iterations = 0;
  bool randomized = false;
  FeasibilityCheck check;
};

struct DesignDiagnostics {
  std::vector<ColumnDiagnostics> columns;
  double objective = 0.0;
  PaprReport papr_nyquist;
  PaprReport papr_oversampled;
  int max_iters_hits = 0;
  int randomized = 0;
  double min_eig_ratio = 1.0;
};

struct DesignOptions {
  DesignMethod method = DesignMethod::PerSnapshot;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Per-column solver state, read when sized L and overwritten afterwards.
  std::vector<SdpWarmStart>* warm = nullptr;
};

class DesignError : public std::runtime_error {
 public:
  DesignError(int column, const std::string& what)
      : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

struct DesignResult {
  Waveform xs;  ///< pre-IDFT
  Waveform g;   ///< post-IDFT
  DesignDiagnostics diagnostics;
};

DesignResult design_waveform(const DesignProblem& prob, const OfdmOperators& ops, const SystemConfig& cfg,
                             const DesignOptions& opts = {});

}  // namespace dfrc
