#include "bangbang/open_system.hpp"
#include "bangbang/statevector.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bangbang {

namespace {

using ComplexMatrix = dense_types<double>::ComplexMatrix;
constexpr Complex kI(0.0, 1.0);

struct Piece {
  double duration = 0.0;
  double g = 0.0;
  bool ramp = false;
};

std::vector<Piece> pieces_of(const Schedule &s) {
  std::vector<Piece> out;
  if (const auto *ramp = std::get_if<LinearRamp>(&s)) {
    if (!(ramp->total_time > 0.0))
      throw std::invalid_argument("ramp time must be positive");
    out.push_back({ramp->total_time, 0.0, true});
    return out;
  }
  const Protocol p = std::holds_alternative<Protocol>(s)
                         ? std::get<Protocol>(s)
                         : std::get<BangBangProtocol>(s).to_protocol();
  p.validate();
  for (const auto &seg : p.segments)
    if (seg.dt > 0.0)
      out.push_back({seg.dt, seg.g, false});
  return out;
}

void require_square(const DensityMatrix &rho, const CostVector &cv) {
  if (rho.rows() != cv.dim() || rho.cols() != cv.dim())
    throw std::invalid_argument("density matrix and instance sizes differ");
}

struct Workspace {
  DensityMatrix k1, k2, k3, k4, tmp;
};

template <typename Rhs>
void rk4_step(DensityMatrix &rho, double t, double h, Rhs &&rhs, Workspace &w) {
  rhs(t, rho, w.k1);
  w.tmp = rho + (0.5 * h) * w.k1;
  rhs(t + 0.5 * h, w.tmp, w.k2);
  w.tmp = rho + (0.5 * h) * w.k2;
  rhs(t + 0.5 * h, w.tmp, w.k3);
  w.tmp = rho + h * w.k3;
  rhs(t + h, w.tmp, w.k4);
  rho += (h / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

// -i[H_g, rho] - W^2 sum_i (rho - Z_i rho Z_i) - W^2 sum_i (rho - X_i rho X_i)
void dephasing_rhs(const DensityMatrix &rho, double g, double w2,
                   const RealVector &costs, int n, DensityMatrix &out) {
  const Index d = rho.rows();
  out.resize(d, d);
  for (Index b = 0; b < d; ++b) {
    for (Index a = 0; a < d; ++a) {
      const Complex r = rho(a, b);
      Complex mix(0.0, 0.0);
      Complex both(0.0, 0.0);
      for (Index bit = 1; bit < d; bit <<= 1) {
        mix += rho(a, b ^ bit) - rho(a ^ bit, b);
        both += rho(a ^ bit, b ^ bit);
      }
      const Complex commutator = g * (costs(a) - costs(b)) * r + (1.0 - g) * mix;
      const auto differing = std::popcount(static_cast<std::uint64_t>(a ^ b));
      out(a, b) = -kI * commutator - w2 * (2.0 * differing) * r - w2 * (double(n) * r - both);
    }
  }
}

// Redfield generator for a fixed Hamiltonian. Writing the right-hand side
// as Z + Z^dagger with
//   Z = (-iH - K) rho + sum_i (L_i rho) Z_i,   K = sum_i Z_i L_i,
// everything reduces to one stacked real product with rho.
class RedfieldGenerator {
public:
  RedfieldGenerator(const RealMatrix &h, const RedfieldConfig &cfg, int n)
      : n_(n), d_(h.rows()) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("Redfield eigendecomposition failed");
    const RealMatrix &v = es.eigenvectors();
    const RealVector &e = es.eigenvalues();
    RealMatrix rate(d_, d_);
    for (Index b = 0; b < d_; ++b)
      for (Index a = 0; a < d_; ++a)
        rate(a, b) = 0.5 * spectral_density(e(b) - e(a), cfg);

    stacked_.resize((n_ + 2) * d_, d_);
    stacked_.topRows(d_) = h;
    RealMatrix k = RealMatrix::Zero(d_, d_);
    for (int i = 0; i < n_; ++i) {
      const RealVector z = signs(i);
      const RealMatrix coupling_eig = v.transpose() * z.asDiagonal() * v;
      const RealMatrix lambda = v * coupling_eig.cwiseProduct(rate) * v.transpose();
      stacked_.middleRows((i + 2) * d_, d_) = lambda;
      k += z.asDiagonal() * lambda;
    }
    stacked_.middleRows(d_, d_) = -k;
  }

  void operator()(const DensityMatrix &rho, DensityMatrix &out) {
    prod_re_.noalias() = stacked_ * rho.real();
    prod_im_.noalias() = stacked_ * rho.imag();
    // (-iH) rho = H Im(rho) - i H Re(rho).
    z_.resize(d_, d_);
    z_.real() = prod_im_.topRows(d_) + prod_re_.middleRows(d_, d_);
    z_.imag() = -prod_re_.topRows(d_) + prod_im_.middleRows(d_, d_);
    for (int i = 0; i < n_; ++i) {
      const Index row = (i + 2) * d_;
      for (Index b = 0; b < d_; ++b) {
        const double s = ((b >> i) & 1) ? -1.0 : 1.0;
        z_.real().col(b) += s * prod_re_.block(row, b, d_, 1);
        z_.imag().col(b) += s * prod_im_.block(row, b, d_, 1);
      }
    }
    out = z_ + z_.adjoint();
  }

private:
  RealVector signs(int i) const {
    RealVector z(d_);
    for (Index a = 0; a < d_; ++a)
      z(a) = spin(a, i);
    return z;
  }

  int n_;
  Index d_;
  RealMatrix stacked_;
  RealMatrix prod_re_, prod_im_;
  ComplexMatrix z_;
};

struct Diagnostics {
  double trace0 = 0.0;
  double trace_drift = 0.0;
  double hermiticity = 0.0;
  double min_eig = 0.0;
  bool first = true;

  // Returns false on an invariant violation.
  bool check(const DensityMatrix &rho, double elapsed, const OpenOptions &opts) {
    const double drift = std::abs(rho.trace().real() - trace0);
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const double me = min_eigenvalue(rho);
    trace_drift = std::max(trace_drift, drift);
    hermiticity = std::max(hermiticity, herm);
    min_eig = first ? me : std::min(min_eig, me);
    first = false;
    return drift <= opts.trace_tolerance_per_time * std::max(1.0, elapsed) &&
           herm <= opts.hermiticity_tolerance && me >= -opts.positivity_tolerance;
  }
};

// Runs `step(piece, t_local, t_global, h, rho)` over every piece with
// checkpoints, halving the step on invariant violations.
template <typename Stepper>
OpenEvolution drive(const DensityMatrix &rho0, const std::vector<Piece> &pieces,
                    double step, const OpenOptions &opts, Stepper &&stepper) {
  if (!(step > 0.0))
    throw std::invalid_argument("integration step must be positive");
  for (int attempt = 0; attempt <= opts.max_halvings; ++attempt) {
    DensityMatrix rho = rho0;
    Diagnostics diag;
    diag.trace0 = rho0.trace().real();
    bool ok = diag.check(rho, 0.0, opts);
    double t = 0.0;
    double next_checkpoint = opts.checkpoint_interval;
    for (const auto &piece : pieces) {
      if (!ok)
        break;
      const auto steps = static_cast<long>(std::ceil(piece.duration / step - 1e-9));
      const double h = piece.duration / static_cast<double>(std::max(1L, steps));
      stepper.begin(piece);
      for (long s = 0; s < std::max(1L, steps); ++s) {
        const double local = h * static_cast<double>(s);
        stepper.step(piece, local, h, rho);
        const double now = t + local + h;
        if (now >= next_checkpoint && s + 1 < steps) {
          next_checkpoint += opts.checkpoint_interval;
          if (!(ok = diag.check(rho, now, opts)))
            break;
        }
      }
      t += piece.duration;
      if (ok)
        ok = diag.check(rho, t, opts);
    }
    if (ok) {
      return {std::move(rho), diag.trace_drift, diag.hermiticity, diag.min_eig, step};
    }
    if (attempt == opts.max_halvings)
      throw InvariantViolation(
          "open-system invariant violated: trace drift " +
          std::to_string(diag.trace_drift) + ", hermiticity " +
          std::to_string(diag.hermiticity) + ", min eigenvalue " +
          std::to_string(diag.min_eig));
    step *= 0.5;
  }
  throw std::logic_error("unreachable");
}

} // namespace

double schedule_time(const Schedule &s) {
  if (const auto *r = std::get_if<LinearRamp>(&s))
    return r->total_time;
  if (const auto *p = std::get_if<Protocol>(&s))
    return p->total_time;
  return std::get<BangBangProtocol>(s).total_time;
}

void DephasingConfig::validate() const {
  if (!(W >= 0.0))
    throw std::invalid_argument("noise strength W must be non-negative");
  if (!(step > 0.0))
    throw std::invalid_argument("integration step must be positive");
}

void RedfieldConfig::validate() const {
  if (!(eta >= 0.0))
    throw std::invalid_argument("coupling eta must be non-negative");
  if (!(beta > 0.0))
    throw std::invalid_argument("inverse temperature beta must be positive");
  if (!(step > 0.0))
    throw std::invalid_argument("integration step must be positive");
}

double spectral_density(double omega, const RedfieldConfig &cfg) {
  const double x = cfg.beta * omega;
  if (std::abs(x) < 1e-12)
    return cfg.eta / cfg.beta;
  return cfg.eta * omega / -std::expm1(-x);
}

DensityMatrix pure_density(const StateVector &psi) {
  return psi * psi.adjoint();
}

OpenEvolution dephasing_evolve(const DensityMatrix &rho0, const Schedule &s,
                               const DephasingConfig &cfg, const CostVector &cv,
                               const OpenOptions &opts) {
  cfg.validate();
  require_square(rho0, cv);
  const auto pieces = pieces_of(s);
  const double T = schedule_time(s);
  const double w2 = cfg.W * cfg.W;

  struct Stepper {
    const CostVector &cv;
    double T, w2;
    Workspace work;
    double offset = 0.0;
    double last_duration = 0.0;
    void begin(const Piece &p) {
      offset += last_duration;
      last_duration = p.duration;
    }
    void step(const Piece &p, double local, double h, DensityMatrix &rho) {
      auto rhs = [&](double tl, const DensityMatrix &r, DensityMatrix &out) {
        const double g = p.ramp ? (offset + tl) / T : p.g;
        dephasing_rhs(r, g, w2, cv.values, cv.n, out);
      };
      rk4_step(rho, local, h, rhs, work);
    }
  } stepper{cv, T, w2, {}};

  return drive(rho0, pieces, cfg.step, opts, stepper);
}

OpenEvolution redfield_evolve(const DensityMatrix &rho0, const Schedule &s,
                              const RedfieldConfig &cfg, const CostVector &cv,
                              const OpenOptions &opts) {
  cfg.validate();
  require_square(rho0, cv);
  const auto pieces = pieces_of(s);
  const double T = schedule_time(s);

  struct Stepper {
    const CostVector &cv;
    const RedfieldConfig &cfg;
    double T;
    Workspace work;
    std::optional<RedfieldGenerator> fixed;
    double offset = 0.0;
    double last_duration = 0.0;
    void begin(const Piece &p) {
      offset += last_duration;
      last_duration = p.duration;
      if (!p.ramp)
        fixed.emplace(dense_hamiltonian(cv, p.g), cfg, cv.n);
    }
    void step(const Piece &p, double local, double h, DensityMatrix &rho) {
      if (p.ramp)
        fixed.emplace(dense_hamiltonian(cv, (offset + local + 0.5 * h) / T), cfg, cv.n);
      auto rhs = [&](double, const DensityMatrix &r, DensityMatrix &out) {
        (*fixed)(r, out);
      };
      rk4_step(rho, local, h, rhs, work);
    }
  } stepper{cv, cfg, T, {}, std::nullopt};

  return drive(rho0, pieces, cfg.step, opts, stepper);
}

DensityMatrix redfield_rhs(const DensityMatrix &rho, const RealMatrix &hamiltonian,
                           const RedfieldConfig &cfg, int n) {
  RedfieldGenerator gen(hamiltonian, cfg, n);
  DensityMatrix out;
  gen(rho, out);
  return out;
}

double energy(const DensityMatrix &rho, const CostVector &cv) {
  require_square(rho, cv);
  return rho.diagonal().real().dot(cv.values);
}

double fidelity_error(const DensityMatrix &rho, const CostVector &cv) {
  require_square(rho, cv);
  return 1.0 - ground_state_probability(rho, cv);
}

double min_eigenvalue(const DensityMatrix &rho) {
  const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
  const DensityMatrix diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace bangbang
