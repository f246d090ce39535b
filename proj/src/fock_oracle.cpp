#include "rabi/fock_oracle.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>

#include "rabi/chains.hpp"
#include "rabi/errors.hpp"
#include "rabi/extended_real.hpp"

namespace rabi {

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(int dimension) : n_(dimension) {
  if (dimension < 0) throw Error(ErrorCode::InvalidParameter, "negative matrix dimension");
  a_.assign(static_cast<std::size_t>(dimension) * dimension, 0.0);
}

void SymMatrix::set(int i, int j, double value) {
  a_[static_cast<std::size_t>(i) * n_ + j] = value;
  a_[static_cast<std::size_t>(j) * n_ + i] = value;
}

void SymMatrix::add(int i, int j, double value) {
  set(i, j, (*this)(i, j) + value);
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

std::vector<double> SymMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const double* row = &a_[static_cast<std::size_t>(i) * n_];
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

// ---------------------------------------------------------------------------
// FockVector

double FockVector::norm() const {
  double s = 0.0;
  for (double v : up) s += v * v;
  for (double v : down) s += v * v;
  return std::sqrt(s);
}

void FockVector::normalize() {
  const double n = norm();
  if (n == 0.0) return;
  for (double& v : up) v /= n;
  for (double& v : down) v /= n;
}

double FockVector::tail() const {
  const double n = norm();
  if (n == 0.0 || up.empty()) return 0.0;
  double t = 0.0;
  for (int k = std::max(0, cutoff - 1); k <= cutoff; ++k)
    t = std::max({t, std::fabs(up[k]), std::fabs(down[k])});
  return t / n;
}

std::vector<double> FockVector::flat() const {
  std::vector<double> v(up);
  v.insert(v.end(), down.begin(), down.end());
  return v;
}

FockVector FockVector::from_flat(const std::vector<double>& v) {
  FockVector f;
  const std::size_t half = v.size() / 2;
  f.cutoff = static_cast<int>(half) - 1;
  f.up.assign(v.begin(), v.begin() + half);
  f.down.assign(v.begin() + half, v.end());
  return f;
}

double dot(const FockVector& a, const FockVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.up.size() && i < b.up.size(); ++i) s += a.up[i] * b.up[i];
  for (std::size_t i = 0; i < a.down.size() && i < b.down.size(); ++i)
    s += a.down[i] * b.down[i];
  return s;
}

// ---------------------------------------------------------------------------
// Hamiltonians

namespace {

// Matrix elements shared by the full matrix, the symmetry blocks and the residual.
struct Couplings {
  bool two_photon = false;
  double delta = 0.0;
  double eps = 0.0;
  double g = 0.0;

  explicit Couplings(const ModelParams& p) {
    if (const auto* one = std::get_if<OnePhotonParams>(&p)) {
      delta = one->delta;
      eps = one->eps;
      g = one->g;
    } else {
      const auto& two = std::get<TwoPhotonParams>(p);
      two_photon = true;
      delta = two.delta;
      g = two.g;
    }
  }
  int step() const { return two_photon ? 2 : 1; }
  // <n+step| photon coupling |n> without the spin sign.
  double hop(int n) const {
    return two_photon ? g * std::sqrt((n + 1.0) * (n + 2.0)) : g * std::sqrt(n + 1.0);
  }
};

}  // namespace

SymMatrix build_hamiltonian(const ModelParams& p, int n_f) {
  validate(p);
  if (n_f < 0) throw Error(ErrorCode::CutoffTooSmall, "photon cutoff must be >= 0");
  const Couplings c(p);
  const int m = n_f + 1;
  SymMatrix h(2 * m);
  for (int n = 0; n <= n_f; ++n) {
    h.set(n, n, n - c.eps / 2);
    h.set(m + n, m + n, n + c.eps / 2);
    h.set(n, m + n, -c.delta / 2);
    if (n + c.step() <= n_f) {
      h.set(n, n + c.step(), c.hop(n));
      h.set(m + n, m + n + c.step(), -c.hop(n));
    }
  }
  return h;
}

std::vector<double> sym_eigenvalues(const SymMatrix& m, int max_sweeps) {
  const int n = m.dimension();
  std::vector<double> a = m.data();
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  const double norm = m.frobenius_norm();
  const double target = 1e-12 * norm;

  auto off_norm = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2 * at(i, j) * at(i, j);
    return std::sqrt(s);
  };

  bool done = n <= 1 || off_norm() <= target;
  for (int sweep = 0; sweep < max_sweeps && !done; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double app = at(p, p);
        const double aqq = at(q, q);
        // Once the rotation would not change the diagonal in floating point, drop the entry.
        if (sweep > 3 && std::fabs(apq) * 1e18 < std::fabs(app) &&
            std::fabs(apq) * 1e18 < std::fabs(aqq)) {
          at(p, q) = at(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        double* rp = &a[static_cast<std::size_t>(p) * n];
        double* rq = &a[static_cast<std::size_t>(q) * n];
        for (int k = 0; k < n; ++k) {
          const double x = rp[k];
          const double y = rq[k];
          rp[k] = cs * x - sn * y;
          rq[k] = sn * x + cs * y;
        }
        for (int k = 0; k < n; ++k) {
          at(k, p) = rp[k];
          at(k, q) = rq[k];
        }
        at(p, p) = app - t * apq;
        at(q, q) = aqq + t * apq;
        at(p, q) = at(q, p) = 0.0;
      }
    }
    done = off_norm() <= target;
  }
  if (!done) throw Error(ErrorCode::NoConvergence, "Jacobi did not converge");

  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<EdBlock> ed_blocks(const ModelParams& p, int n_f) {
  validate(p);
  if (n_f < 0) throw Error(ErrorCode::CutoffTooSmall, "photon cutoff must be >= 0");
  const Couplings c(p);
  std::vector<EdBlock> out;

  if (!c.two_photon && c.eps != 0.0) {
    EdBlock b{std::string(to_string(Sector::OnePhotonBiased)), build_hamiltonian(p, n_f), {}};
    b.eigenvalues = sym_eigenvalues(b.matrix);
    out.push_back(std::move(b));
    return out;
  }

  // Basis |n>(|up> + s phase(n) |down>)/sqrt 2 with phase (-1)^n (one photon) or
  // (-1)^floor(n/2) (two photons); the spin flip changes phase between coupled states,
  // so each block is a chain with diagonal n - s phase(n) delta/2. Sector Plus is s = -1.
  struct Spec {
    Sector sector;
    int first;
    double s;
  };
  std::vector<Spec> specs;
  if (c.two_photon) {
    specs = {{Sector::TwoPhotonEvenPlus, 0, -1.0},
             {Sector::TwoPhotonEvenMinus, 0, 1.0},
             {Sector::TwoPhotonOddPlus, 1, -1.0},
             {Sector::TwoPhotonOddMinus, 1, 1.0}};
  } else {
    specs = {{Sector::OnePhotonUnbiasedPlus, 0, -1.0}, {Sector::OnePhotonUnbiasedMinus, 0, 1.0}};
  }
  for (const Spec& sp : specs) {
    std::vector<int> ns;
    for (int n = sp.first; n <= n_f; n += c.step()) ns.push_back(n);
    SymMatrix h(static_cast<int>(ns.size()));
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const int n = ns[i];
      const double phase = c.two_photon ? ((n / 2) % 2 == 0 ? 1.0 : -1.0)
                                        : (n % 2 == 0 ? 1.0 : -1.0);
      h.set(static_cast<int>(i), static_cast<int>(i), n - sp.s * phase * c.delta / 2);
      if (i + 1 < ns.size()) h.set(static_cast<int>(i), static_cast<int>(i + 1), c.hop(n));
    }
    EdBlock b{std::string(to_string(sp.sector)), std::move(h), {}};
    b.eigenvalues = sym_eigenvalues(b.matrix);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<double> ed_eigenvalues(const ModelParams& p, int n_f) {
  std::vector<double> all;
  for (const EdBlock& b : ed_blocks(p, n_f))
    all.insert(all.end(), b.eigenvalues.begin(), b.eigenvalues.end());
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

// Solves (A - shift) x = b in place by Gaussian elimination with partial pivoting.
class ShiftedLu {
public:
  ShiftedLu(const SymMatrix& m, double shift) : n_(m.dimension()), a_(m.data()), piv_(n_) {
    for (int i = 0; i < n_; ++i) at(i, i) -= shift;
    const double tiny = std::max(1e-300, 1e-15 * m.frobenius_norm());
    for (int k = 0; k < n_; ++k) {
      int best = k;
      for (int i = k + 1; i < n_; ++i)
        if (std::fabs(at(i, k)) > std::fabs(at(best, k))) best = i;
      piv_[k] = best;
      if (best != k)
        for (int j = 0; j < n_; ++j) std::swap(at(k, j), at(best, j));
      // An exact eigenvalue shift leaves a zero pivot; nudging it keeps the solve
      // finite and only scales the result.
      if (std::fabs(at(k, k)) < tiny) at(k, k) = tiny;
      const double inv = 1.0 / at(k, k);
      for (int i = k + 1; i < n_; ++i) {
        const double f = at(i, k) * inv;
        if (f == 0.0) continue;
        at(i, k) = f;
        double* ri = &a_[static_cast<std::size_t>(i) * n_];
        const double* rk = &a_[static_cast<std::size_t>(k) * n_];
        for (int j = k + 1; j < n_; ++j) ri[j] -= f * rk[j];
      }
    }
  }

  void solve(std::vector<double>& b) const {
    for (int k = 0; k < n_; ++k) {
      std::swap(b[k], b[piv_[k]]);
      for (int i = k + 1; i < n_; ++i) b[i] -= at(i, k) * b[k];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = b[i];
      for (int j = i + 1; j < n_; ++j) s -= at(i, j) * b[j];
      b[i] = s / at(i, i);
    }
  }

private:
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  int n_;
  std::vector<double> a_;
  std::vector<int> piv_;
};

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0)
    for (double& x : v) x /= s;
}

}  // namespace

FockVector ed_eigenvector(const ModelParams& p, int n_f, double energy, int iterations) {
  const SymMatrix h = build_hamiltonian(p, n_f);
  const ShiftedLu lu(h, energy);
  std::vector<double> v(h.dimension());
  // Deterministic start with weight on every component.
  for (int i = 0; i < h.dimension(); ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.37 * i);
  normalize(v);
  for (int it = 0; it < iterations; ++it) {
    lu.solve(v);
    normalize(v);
  }
  FockVector f = FockVector::from_flat(v);
  return f;
}

// ---------------------------------------------------------------------------
// Frame Fock states
//
// |n>_A = D(-g)|n> with D(t) = exp(t (a^dag - a)), and |n>_b = S(r)|n> with
// S(r) = exp(r (a^2 - a^dag^2)/2), sinh r = v. Both generators are antisymmetric in
// any truncation, so applying them by short Taylor steps is orthogonal and does not
// amplify rounding noise the way repeated raising operators do.

namespace {

constexpr double kBasisTailTol = 1e-10;
constexpr double kStateTailTol = 1e-8;
constexpr double kChainTailTol = 1e-10;
constexpr double kTaylorStep = 2.0;

int internal_dim(int n_f) { return n_f + 100; }

enum class Generator { Displace, Squeeze };

void apply_generator(Generator gen, const std::vector<double>& v, std::vector<double>& out) {
  const int dim = static_cast<int>(v.size()) - 1;
  for (int m = 0; m <= dim; ++m) {
    double s = 0.0;
    if (gen == Generator::Displace) {
      if (m >= 1) s += std::sqrt(static_cast<double>(m)) * v[m - 1];
      if (m + 1 <= dim) s -= std::sqrt(m + 1.0) * v[m + 1];
    } else {
      if (m + 2 <= dim) s += 0.5 * std::sqrt((m + 1.0) * (m + 2.0)) * v[m + 2];
      if (m >= 2) s -= 0.5 * std::sqrt(m * (m - 1.0)) * v[m - 2];
    }
    out[m] = s;
  }
}

double generator_norm_bound(Generator gen, int dim) {
  return gen == Generator::Displace ? 2 * std::sqrt(dim + 1.0) : dim + 2.0;
}

// exp(theta K) applied to each vector in place.
void propagate(Generator gen, double theta, std::vector<std::vector<double>*> vs) {
  if (theta == 0.0 || vs.empty()) return;
  const int dim = static_cast<int>(vs.front()->size()) - 1;
  const int steps = std::max(
      1, static_cast<int>(std::ceil(std::fabs(theta) * generator_norm_bound(gen, dim) / kTaylorStep)));
  const double h = theta / steps;
  std::vector<double> term(dim + 1), next(dim + 1);
  for (std::vector<double>* v : vs) {
    for (int s = 0; s < steps; ++s) {
      term = *v;
      for (int j = 1; j < 80; ++j) {
        apply_generator(gen, term, next);
        double tn = 0.0, vn = 0.0;
        for (int m = 0; m <= dim; ++m) {
          term[m] = next[m] * h / j;
          (*v)[m] += term[m];
          tn = std::max(tn, std::fabs(term[m]));
          vn = std::max(vn, std::fabs((*v)[m]));
        }
        if (tn <= 1e-18 * vn) break;
      }
    }
  }
}

double squeeze_parameter(const SqueezeFrame& f) { return std::asinh(f.v); }

std::vector<double> truncate_checked(const std::vector<double>& v, int n_f, double tol) {
  std::vector<double> out(v.begin(), v.begin() + n_f + 1);
  double tail = std::fabs(out[n_f]);
  if (n_f >= 1) tail = std::max(tail, std::fabs(out[n_f - 1]));
  if (tail > tol)
    throw Error(ErrorCode::CutoffTooSmall,
                "state does not fit below the photon cutoff " + std::to_string(n_f));
  return out;
}

std::vector<double> unit_vector(int n, int dim) {
  std::vector<double> v(dim + 1, 0.0);
  v[n] = 1.0;
  return v;
}

}  // namespace

std::vector<double> displaced_fock_vector(double g, int n, int n_f) {
  if (n < 0 || n_f < 0) throw Error(ErrorCode::InvalidParameter, "negative Fock index");
  if (2 * n > n_f) throw Error(ErrorCode::CutoffTooSmall, "need n <= n_f / 2");
  std::vector<double> v = unit_vector(n, internal_dim(n_f));
  propagate(Generator::Displace, -g, {&v});
  return truncate_checked(v, n_f, kBasisTailTol);
}

std::vector<double> squeezed_fock_vector(const SqueezeFrame& frame, int n, int n_f) {
  if (n < 0 || n_f < 0) throw Error(ErrorCode::InvalidParameter, "negative Fock index");
  if (4 * n > n_f) throw Error(ErrorCode::CutoffTooSmall, "need n <= n_f / 4");
  std::vector<double> v = unit_vector(n, internal_dim(n_f));
  propagate(Generator::Squeeze, squeeze_parameter(frame), {&v});
  return truncate_checked(v, n_f, kBasisTailTol);
}

// ---------------------------------------------------------------------------
// Eigenstate reconstruction

namespace {

// Frame coefficients sqrt(n!) f_n of the chain spin and sqrt(n!) e_n of the spin whose
// block is diagonal in the frame, rescaled to doubles by a common factor.
struct FrameCoefficients {
  std::vector<double> chain;
  std::vector<double> diagonal;
};

FrameCoefficients scale_to_double(const std::vector<ExtendedReal>& chain,
                                  const std::vector<ExtendedReal>& diag) {
  std::vector<ExtendedReal> c(chain.size()), d(diag.size());
  ExtendedReal sqrt_fact(1.0);
  ExtendedReal mx;
  for (std::size_t n = 0; n < chain.size(); ++n) {
    if (n > 0) sqrt_fact *= ExtendedReal(std::sqrt(static_cast<double>(n)));
    c[n] = chain[n] * sqrt_fact;
    d[n] = diag[n] * sqrt_fact;
    mx = max_abs(mx, max_abs(c[n], d[n]));
  }
  FrameCoefficients out;
  out.chain.resize(chain.size());
  out.diagonal.resize(diag.size());
  if (mx.is_zero()) return out;
  for (std::size_t n = 0; n < chain.size(); ++n) {
    out.chain[n] = (c[n] / mx).to_double();
    out.diagonal[n] = (d[n] / mx).to_double();
  }
  return out;
}

bool is_two_photon(const ModelParams& p) { return std::holds_alternative<TwoPhotonParams>(p); }

ChainStart start_of(Sector s) {
  return (s == Sector::TwoPhotonOddPlus || s == Sector::TwoPhotonOddMinus) ? ChainStart::Odd
                                                                            : ChainStart::Even;
}

FockVector assemble(const FrameCoefficients& coef, bool chain_is_down, int n_f, Generator gen,
                    double theta) {
  const int dim = internal_dim(n_f);
  if (static_cast<int>(coef.chain.size()) > dim + 1)
    throw Error(ErrorCode::CutoffTooSmall, "frame expansion longer than the Fock space");
  // The expansion is cut at the end of the chain; its last terms bound what was dropped.
  const std::size_t len = coef.chain.size();
  double last = 0.0;
  for (std::size_t n = len >= 4 ? len - 4 : 0; n < len; ++n)
    last = std::max({last, std::fabs(coef.chain[n]), std::fabs(coef.diagonal[n])});
  if (last > kChainTailTol)
    throw Error(ErrorCode::CutoffTooSmall,
                "frame expansion has not decayed below the photon cutoff " + std::to_string(n_f));
  std::vector<double> up(dim + 1, 0.0), down(dim + 1, 0.0);
  std::vector<double>& chain_block = chain_is_down ? down : up;
  std::vector<double>& diag_block = chain_is_down ? up : down;
  for (std::size_t n = 0; n < coef.chain.size(); ++n) {
    chain_block[n] = coef.chain[n];
    diag_block[n] = coef.diagonal[n];
  }
  propagate(gen, theta, {&up, &down});

  FockVector out;
  out.cutoff = n_f;
  double total = 0.0, kept = 0.0;
  for (int m = 0; m <= dim; ++m) {
    const double w = up[m] * up[m] + down[m] * down[m];
    total += w;
    if (m <= n_f) kept += w;
  }
  out.up.assign(up.begin(), up.begin() + n_f + 1);
  out.down.assign(down.begin(), down.begin() + n_f + 1);
  if (total == 0.0) throw Error(ErrorCode::NotConverged, "reconstructed state vanished");
  if (std::sqrt(std::max(0.0, total - kept) / total) > kStateTailTol || out.tail() > kStateTailTol)
    throw Error(ErrorCode::CutoffTooSmall,
                "reconstructed state does not fit below the photon cutoff " + std::to_string(n_f));
  out.normalize();
  return out;
}

FockVector one_photon_state(const OnePhotonParams& p, double energy, int n_f, StateFrame sf) {
  const Frame frame = sf == StateFrame::Primary ? Frame::A : Frame::B;
  const int n_top = std::max(2, n_f / 2);
  const std::vector<ExtendedReal> f = one_photon_minimal_chain(p, energy, frame, n_top);
  const OnePhotonOmega omega(p, one_photon_x(p, energy), frame);

  // Frame A: f belongs to spin down, e_n = (delta/2) f_n / (n - alpha - E) to spin up.
  // Frame B: the roles swap and the displacement sign gives the factor (-1)^n.
  std::vector<ExtendedReal> chain(f.size()), diag(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (f[n].is_zero()) continue;
    const double sign = (frame == Frame::B && n % 2 == 1) ? -1.0 : 1.0;
    chain[n] = f[n] * ExtendedReal(sign);
    const double d = omega.denominator(static_cast<int>(n));
    if (std::fabs(d) < kPoleGuard)
      throw Error(ErrorCode::PoleTooClose, "energy sits on a pole of the upper-spin relation");
    diag[n] = chain[n] * ExtendedReal(p.delta / 2 / d);
  }
  const double theta = frame == Frame::A ? -p.g : p.g;
  return assemble(scale_to_double(chain, diag), frame == Frame::A, n_f, Generator::Displace,
                  theta);
}

FockVector two_photon_state(const TwoPhotonParams& p, double energy, Sector sector, int n_f,
                            StateFrame sf) {
  const SqueezeFrame sq = derive_squeeze_frame(p);
  const double x = two_photon_x(sq, energy);
  const int n_top = std::max(4, n_f / 2);
  const std::vector<ExtendedReal> f = two_photon_minimal_chain(p, x, start_of(sector), n_top);

  // Frame b: f belongs to spin down, e_n = (delta/2) beta2 f_n / (n - x) to spin up.
  // Frame c: the roles swap and each step of two photons flips the sign.
  const bool primary = sf == StateFrame::Primary;
  std::vector<ExtendedReal> chain(f.size()), diag(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (f[n].is_zero()) continue;
    const double sign = (!primary && (n / 2) % 2 == 1) ? -1.0 : 1.0;
    chain[n] = f[n] * ExtendedReal(sign);
    const double d = static_cast<double>(n) - x;
    if (std::fabs(d) < kPoleGuard)
      throw Error(ErrorCode::PoleTooClose, "energy sits on a pole of the upper-spin relation");
    diag[n] = chain[n] * ExtendedReal(p.delta / 2 * sq.beta2 / d);
  }
  const double r = squeeze_parameter(sq);
  return assemble(scale_to_double(chain, diag), primary, n_f, Generator::Squeeze,
                  primary ? r : -r);
}

}  // namespace

FockVector reconstruct_eigenstate(const ModelParams& p, const Root& root, int n_f,
                                  StateFrame frame) {
  validate(p);
  if (n_f < 4) throw Error(ErrorCode::CutoffTooSmall, "reconstruction needs a cutoff >= 4");
  if (is_two_photon(p))
    return two_photon_state(std::get<TwoPhotonParams>(p), root.energy, root.sector, n_f, frame);
  return one_photon_state(std::get<OnePhotonParams>(p), root.energy, n_f, frame);
}

double residual_norm(const ModelParams& p, double energy, const FockVector& psi) {
  validate(p);
  if (psi.tail() > kStateTailTol)
    throw Error(ErrorCode::CutoffTooSmall, "state tail too large for a residual");
  const Couplings c(p);
  const int n_f = psi.cutoff;
  std::vector<double> ru(n_f + 1), rd(n_f + 1);
  for (int n = 0; n <= n_f; ++n) {
    ru[n] = (n - c.eps / 2 - energy) * psi.up[n] - c.delta / 2 * psi.down[n];
    rd[n] = (n + c.eps / 2 - energy) * psi.down[n] - c.delta / 2 * psi.up[n];
    const int s = c.step();
    if (n + s <= n_f) {
      ru[n] += c.hop(n) * psi.up[n + s];
      rd[n] -= c.hop(n) * psi.down[n + s];
    }
    if (n - s >= 0) {
      ru[n] += c.hop(n - s) * psi.up[n - s];
      rd[n] -= c.hop(n - s) * psi.down[n - s];
    }
  }
  double r = 0.0;
  for (int n = 0; n <= n_f; ++n) r += ru[n] * ru[n] + rd[n] * rd[n];
  return std::sqrt(r) / psi.norm();
}

Proportionality proportionality_check(const ModelParams& p, const Root& root, int n_f) {
  if (root.kind == RootKind::Exceptional)
    throw Error(ErrorCode::DegenerateState, "proportionality is undefined at exceptional roots");
  const FockVector a = reconstruct_eigenstate(p, root, n_f, StateFrame::Primary);
  const FockVector b = reconstruct_eigenstate(p, root, n_f, StateFrame::Secondary);
  const double ab = dot(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  // Rounding can push the cosine a hair above one.
  return {std::max(0.0, 1.0 - std::fabs(ab) / (na * nb)), ab / (nb * nb)};
}

int default_cutoff(const ModelParams& p) { return is_two_photon(p) ? 400 : 300; }

constexpr int kMaxStateCutoff = 4096;

ValidationReport validate_roots(const ModelParams& p, const std::vector<Root>& roots,
                                double e_lo, double e_hi, int n_f, bool with_states) {
  std::vector<double> ed;
  for (double e : ed_eigenvalues(p, n_f))
    if (e >= e_lo && e <= e_hi) ed.push_back(e);

  std::vector<Root> sorted = roots;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Root& a, const Root& b) { return a.energy < b.energy; });

  // One-to-one matching in ascending order; a gap larger than the match window means
  // one side has an extra level.
  constexpr double kMatchWindow = 1e-4;
  ValidationReport rep;
  std::size_t i = 0, j = 0;
  while (i < sorted.size() && j < ed.size()) {
    const double d = sorted[i].energy - ed[j];
    if (std::fabs(d) <= kMatchWindow) {
      ValidationRow row;
      row.energy_g = sorted[i].energy;
      row.energy_ed = ed[j];
      row.abs_err = std::fabs(d);
      row.sector = sorted[i].sector;
      row.kind = sorted[i].kind;
      if (with_states && sorted[i].kind == RootKind::Regular) {
        // Frame expansions can decay much more slowly than the Fock amplitudes, so the
        // reconstruction cutoff is doubled until the state fits.
        for (int cut = n_f;; cut *= 2) {
          try {
            const FockVector psi = reconstruct_eigenstate(p, sorted[i], cut);
            row.residual = residual_norm(p, sorted[i].energy, psi);
            row.defect = proportionality_check(p, sorted[i], cut).defect;
            row.state_cutoff = cut;
            rep.max_residual = std::max(rep.max_residual, row.residual);
            rep.max_defect = std::max(rep.max_defect, row.defect);
            break;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::CutoffTooSmall) throw;
            if (2 * cut > kMaxStateCutoff) {
              ++rep.states_skipped;
              break;
            }
          }
        }
      }
      rep.max_abs_err = std::max(rep.max_abs_err, row.abs_err);
      rep.rows.push_back(row);
      ++i;
      ++j;
    } else if (d < 0) {
      rep.unmatched_g.push_back(sorted[i++].energy);
    } else {
      rep.unmatched_ed.push_back(ed[j++]);
    }
  }
  for (; i < sorted.size(); ++i) rep.unmatched_g.push_back(sorted[i].energy);
  for (; j < ed.size(); ++j) rep.unmatched_ed.push_back(ed[j]);
  return rep;
}

}  // namespace rabi
