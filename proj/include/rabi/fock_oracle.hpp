#pragma once

#include <string>
#include <vector>

#include "rabi/model.hpp"
#include "rabi/rootfinder.hpp"

namespace rabi {

/// Dense real symmetric matrix. Writes go through set(), which mirrors the entry.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(int dimension);

  int dimension() const { return n_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  void set(int i, int j, double value);
  void add(int i, int j, double value);
  double frobenius_norm() const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  const std::vector<double>& data() const { return a_; }

private:
  int n_ = 0;
  std::vector<double> a_;
};

/// Two-component state truncated at photon number `cutoff`: up and down spin blocks.
struct FockVector {
  int cutoff = 0;
  std::vector<double> up;
  std::vector<double> down;

  double norm() const;
  void normalize();
  /// Largest of the amplitudes at n = cutoff and cutoff - 1 (both blocks), over the norm.
  double tail() const;
  /// Concatenation up ++ down, the basis order of build_hamiltonian.
  std::vector<double> flat() const;
  static FockVector from_flat(const std::vector<double>& v);
};

double dot(const FockVector& a, const FockVector& b);

/// Hamiltonian in the basis |n> (x) {up, down}, n = 0..n_f, ordered as all up states then
/// all down states. Throws CutoffTooSmall for n_f < 0.
SymMatrix build_hamiltonian(const ModelParams& p, int n_f);

/// All eigenvalues by cyclic Jacobi rotations, ascending. Converged once the off-diagonal
/// Frobenius norm is at most 1e-12 of the matrix norm; NoConvergence otherwise.
std::vector<double> sym_eigenvalues(const SymMatrix& m, int max_sweeps = 60);

/// One symmetry block of the Hamiltonian.
struct EdBlock {
  std::string label;
  SymMatrix matrix;
  std::vector<double> eigenvalues;
};

/// Symmetry blocks: unbiased one-photon splits by parity (two blocks), the two-photon
/// model by photon-number parity and the generalized parity (four blocks). The biased
/// one-photon model is a single block. Eigenvalues are filled in.
std::vector<EdBlock> ed_blocks(const ModelParams& p, int n_f);

/// Union of the block spectra, ascending.
std::vector<double> ed_eigenvalues(const ModelParams& p, int n_f);

/// ED eigenvector near energy e by inverse iteration on the full matrix.
FockVector ed_eigenvector(const ModelParams& p, int n_f, double energy, int iterations = 3);

/// |n>_A for the displaced frame A = a + g (pass -g for B = a - g), single block.
/// Throws CutoffTooSmall if the amplitudes at the cutoff exceed 1e-10.
std::vector<double> displaced_fock_vector(double g, int n, int n_f);

/// |n>_b for b = u a + v a^dag, single block (pass -v for the c frame).
std::vector<double> squeezed_fock_vector(const SqueezeFrame& frame, int n, int n_f);

/// Frames used to expand an eigenstate: A/B for the one-photon model, b/c for two photons.
enum class StateFrame { Primary, Secondary };

/// Eigenstate at a regular root, expanded in one frame with the decaying solution of the
/// coefficient recurrence, normalized. Throws CutoffTooSmall when the state does not fit.
FockVector reconstruct_eigenstate(const ModelParams& p, const Root& root, int n_f,
                                  StateFrame frame = StateFrame::Primary);

/// ||(H - E) psi|| / ||psi|| with H at the vector's cutoff.
double residual_norm(const ModelParams& p, double energy, const FockVector& psi);

struct Proportionality {
  double defect = 0.0;  // 1 - |<psi1|psi2>| / (|psi1| |psi2|)
  double ratio = 0.0;   // <psi1|psi2> / |psi2|^2
};

/// Compares the two frame expansions of the state at a regular root.
/// Throws DegenerateState for exceptional roots.
Proportionality proportionality_check(const ModelParams& p, const Root& root, int n_f);

struct ValidationRow {
  double energy_g = 0.0;
  double energy_ed = 0.0;
  double abs_err = 0.0;
  double residual = -1.0;  // negative when not computed
  double defect = -1.0;
  int state_cutoff = 0;  // photon cutoff the reconstructed state needed
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  RootKind kind = RootKind::Regular;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  std::vector<double> unmatched_g;   // G-method energies without an ED partner
  std::vector<double> unmatched_ed;  // ED energies in the window without a G partner
  double max_abs_err = 0.0;
  double max_residual = 0.0;
  double max_defect = 0.0;
  /// Rows whose eigenstate did not fit below 4096 photons; their residual stays negative.
  int states_skipped = 0;
};

/// Matches the roots (ascending energy) to ED eigenvalues in [e_lo, e_hi] one to one.
/// When with_states is set, regular roots also get residuals and proportionality defects;
/// the reconstruction cutoff starts at n_f and doubles (up to 4096) until the state fits.
ValidationReport validate_roots(const ModelParams& p, const std::vector<Root>& roots,
                                double e_lo, double e_hi, int n_f, bool with_states = false);

/// Default ED cutoff: 300 photons for the one-photon model, 400 for two photons.
int default_cutoff(const ModelParams& p);

}  // namespace rabi
