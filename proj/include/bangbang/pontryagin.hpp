#ifndef BANGBANG_PONTRYAGIN_HPP
#define BANGBANG_PONTRYAGIN_HPP

#include <optional>
#include <string>
#include <vector>

#include "bangbang/protocol.hpp"
#include "bangbang/sk_model.hpp"
#include "bangbang/statevector.hpp"

namespace bangbang {

// Costate machinery for the cost F = sum_z |A_z(T)|^2 C_z.
//
// With Pi = P + iQ conjugate to (Re A, Im A), the optimal-control
// Hamiltonian is  calH = Im <Pi| H_g |A>  and Pi obeys the same Schroedinger
// equation as A, integrated backward from Pi(T) = 2 C A(T). The switching
// function is Phi = d calH / dg = Im <Pi| (C - B) |A>, which is also the
// functional derivative dF/dg(t). Minimising calH picks g = 1 where Phi < 0
// and g = 0 where Phi > 0.

CostateVector terminal_costate(const StateVector &final_state,
                               const CostVector &cv);

// Im <Pi|C|A> and Im <Pi|B|A>; every switching quantity is built from these.
struct HamiltonianParts {
  double cost = 0.0;
  double mixer = 0.0;

  double switching() const { return cost - mixer; }
  double at(double g) const { return g * cost + (1.0 - g) * mixer; }
};

HamiltonianParts hamiltonian_parts(const StateVector &state,
                                   const CostateVector &costate,
                                   const CostVector &cv);

double switching_function(const StateVector &state,
                          const CostateVector &costate, const CostVector &cv);

// Moves a vector between two times of a protocol, forwards or backwards,
// splitting segments at the endpoints. Generic segments reuse the plan's
// sub-step density.
void propagate_between(StateVector &amps, const Protocol &p,
                       const IntegrationPlan &plan, const CostVector &cv,
                       double t_from, double t_to);

// Costate at each requested time (any order), integrated backward from
// costate_T. `plan` must be the one used for the forward trajectory; when
// omitted the protocol must be bang-bang.
std::vector<CostateVector>
backward_sweep(const CostateVector &costate_T, const Protocol &p,
               const CostVector &cv, const std::vector<double> &times,
               const std::optional<IntegrationPlan> &plan = std::nullopt);

struct SwitchingTrace {
  std::vector<double> times;
  std::vector<double> phi;
  std::vector<double> g;
  // Zeros of Phi located by sign change and bisection.
  std::vector<double> switch_times;

  double max_abs_phi() const;
};

inline constexpr double kTraceSamplesPerUnitTime = 1000.0;

// Samples Phi on a uniform grid over [0, T] for the trajectory that starts
// in the uniform superposition.
SwitchingTrace switching_trace(const Protocol &p, const CostVector &cv,
                               double samples_per_unit = kTraceSamplesPerUnitTime);

// Phi at arbitrary times along the optimal-control trajectory of p.
std::vector<double> switching_at(const Protocol &p, const CostVector &cv,
                                 const std::vector<double> &times);

// Gradient of F for a bang-bang protocol.
//   duration[i] = dF/dd_i with the other durations fixed (so T grows); this
//                 equals calH evaluated during pulse i.
//   switching[k] = dF/dtau_k for the boundary between pulses k and k+1 with
//                 T fixed; equals (g_k - g_{k+1}) Phi(tau_k).
struct BangBangGradient {
  double cost = 0.0;
  std::vector<double> duration;
  std::vector<double> switching;
  std::vector<double> phi_at_switch;
};

BangBangGradient bang_bang_gradient(const BangBangProtocol &p,
                                    const CostVector &cv);

// Only the cost, for line searches.
double bang_bang_cost(const BangBangProtocol &p, const CostVector &cv);

// Pulse-end weight for a g = 1 interval starting at t0:
//   w(tau) = sum_{z,k} Im[(e^{-i (C_z - C_{z^k}) tau} - 1) A_z conj(Pi_{z^k})]
// evaluated from the state and costate at t0.
class PulseEndWeight {
public:
  PulseEndWeight(const StateVector &state_t0, const CostateVector &costate_t0,
                 const CostVector &cv);
  double operator()(double tau) const;

private:
  RealVector gaps_;
  dense_types<double>::ComplexVector weights_;
};

// First tau > 0 with w(tau) = 0 (coarse scan at 1e-3 then bisection to
// 1e-10), or nullopt when there is none within the horizon.
std::optional<double> pulse_end_root(const StateVector &state_t0,
                                     const CostateVector &costate_t0,
                                     const CostVector &cv, double horizon);

struct CertificateOptions {
  double switch_tolerance = 1e-3;  // |Phi(tau_k)| / max|Phi|
  double sign_tolerance = 1e-3;    // wrong-sign excursion / max|Phi|
  double interior_tolerance = 0.0; // allowed fraction of time with 0 < g < 1
  double singular_threshold = 1e-8;
  int singular_window = 10;
  double samples_per_unit = kTraceSamplesPerUnitTime;
};

enum class CertificateStatus { Pass, Fail, PossiblySingular };

std::string to_string(CertificateStatus s);

struct SwitchResidual {
  double time = 0.0;
  double phi = 0.0;
  double relative = 0.0;
};

struct SegmentCheck {
  double start = 0.0;
  double end = 0.0;
  double g = 0.0;
  // Largest excursion of Phi to the wrong side of zero, relative to max|Phi|.
  double violation = 0.0;
  bool consistent = true;
};

struct Certificate {
  CertificateStatus status = CertificateStatus::Fail;
  double interior_fraction = 0.0;
  double max_abs_phi = 0.0;
  std::vector<SwitchResidual> switches;
  std::vector<SegmentCheck> segments;
  bool singular = false;
  SwitchingTrace trace;

  double max_switch_residual() const;
  double max_sign_violation() const;
};

Certificate certify_protocol(const Protocol &p, const CostVector &cv,
                             const CertificateOptions &opts = {});

} // namespace bangbang

#endif // BANGBANG_PONTRYAGIN_HPP
