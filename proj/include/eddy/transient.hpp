#pragma once

// θ-method integration of R_i I + L_i I' = −R_D i_D − L_D i_D' − M₀ i₀'.
// Both representations use the same discrete right-hand side
//
//   (L_i + Δtθ R_i) δI = −Δt R_i I^k − Δt R_D i_D^k − (L_D + Δtθ R_D) δi_D − M₀ δi₀
//
// TD1 solves it with a Cholesky factor; TD2 projects it onto the modes, where
// the system is diagonal.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "eddy/drive.hpp"
#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"
#include "eddy/modal.hpp"
#include "eddy/observer.hpp"
#include "eddy/parallel.hpp"
#include "eddy/reduction.hpp"

namespace eddy {

enum class Method { td1, td2 };

inline const char* to_string(Method m) { return m == Method::td1 ? "td1" : "td2"; }

struct TransientConfig {
  double theta = 1.0;
  double dt = 0.0;     // s
  double t_end = 0.0;  // s
  Method method = Method::td2;
  std::size_t capture_stride = 1;
  double capture_from = 0.0;   // s; earlier samples are not recorded
  bool capture_states = true;  // keep I_i snapshots

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (!(t_end >= dt * (1.0 - 1e-12))) throw ValidationError("t_end must be at least dt");
    if (capture_stride == 0) throw ValidationError("capture stride must be at least 1");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
};

struct SimulationResult {
  std::vector<double> times;               // s
  std::vector<Vector> internal_states;     // I_i per capture (A)
  std::vector<Vector> probe_fields;        // observer rows per capture (T)
  double wall_time_setup = 0.0;            // s
  double wall_time_stepping = 0.0;         // s
  double per_step_cost = 0.0;              // s
  std::size_t steps = 0;
};

namespace detail {

inline void check_length(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) throw DimensionMismatch(std::string(what) + " has the wrong length");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Drive-dependent part of the right-hand side, shared by both steppers:
/// −Δt R_D i_D − (L_D + Δtθ R_D) δi_D − M₀ δi₀, with D = L_D + ΔtθR_D
/// precomputed.
struct DriveTerms {
  Matrix resistance;  // Δt R_D
  Matrix combined;    // L_D + Δtθ R_D
  Matrix coils;       // M₀

  DriveTerms() = default;
  DriveTerms(const Matrix& r_d, const Matrix& l_d, const Matrix& m0, double dt, double theta)
      : resistance(r_d), combined(l_d), coils(m0) {
    for (std::size_t i = 0; i < r_d.rows() * r_d.cols(); ++i) {
      resistance.data()[i] = dt * r_d.data()[i];
      combined.data()[i] = l_d.data()[i] + dt * theta * r_d.data()[i];
    }
  }

  /// Adds the forcing to `rhs`.
  void apply(std::span<double> rhs, std::span<const double> i_d, std::span<const double> di_d,
             std::span<const double> di0) const {
    detail::check_length(i_d, resistance.cols(), "port current");
    detail::check_length(di_d, resistance.cols(), "port current increment");
    detail::check_length(di0, coils.cols(), "coil current increment");
    for (std::size_t n = 0; n < rhs.size(); ++n) {
      double f = 0.0;
      auto r = resistance.row(n);
      auto c = combined.row(n);
      for (std::size_t p = 0; p < r.size(); ++p) f -= r[p] * i_d[p] + c[p] * di_d[p];
      auto m = coils.row(n);
      for (std::size_t s = 0; s < m.size(); ++s) f -= m[s] * di0[s];
      rhs[n] += f;
    }
  }
};

/// Factored TD1 system; rebuild when Δt or θ change.
class Td1Stepper {
 public:
  Td1Stepper(const ReducedModel& rm, double dt, double theta) : dt_(dt), theta_(theta), r_(rm.resistance) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
    const std::size_t n = rm.n_internal();
    SymMatrix z(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) z.lower(i, j) = rm.inductance(i, j) + dt * theta * rm.resistance(i, j);
    factor_ = cholesky(z);
    drive_ = DriveTerms(rm.drive_resistance, rm.drive_inductance, rm.coil_mutual, dt, theta);
  }

  double dt() const { return dt_; }
  double theta() const { return theta_; }
  std::size_t size() const { return r_.size(); }
  const LowerTriangular& factor() const { return factor_; }
  bool matches(double dt, double theta) const { return dt == dt_ && theta == theta_; }

  /// Advances `state` in place from I^k to I^(k+1).
  void step(std::span<double> state, std::span<const double> i_d, std::span<const double> di_d,
            std::span<const double> di0) const {
    detail::check_length(state, size(), "internal state");
    Vector rhs = multiply(r_, state);
    for (auto& v : rhs) v = -dt_ * v;
    drive_.apply(rhs, i_d, di_d, di0);
    solve_cholesky_in_place(factor_, rhs);
    for (std::size_t i = 0; i < rhs.size(); ++i) state[i] += rhs[i];
  }

 private:
  double dt_;
  double theta_;
  SymMatrix r_;
  LowerTriangular factor_;
  DriveTerms drive_;
};

inline Td1Stepper prepare_td1(const ReducedModel& rm, double dt, double theta) { return Td1Stepper(rm, dt, theta); }

inline Vector step_td1(const Td1Stepper& s, std::span<const double> state, std::span<const double> i_d,
                       std::span<const double> di_d, std::span<const double> di0) {
  Vector next(state.begin(), state.end());
  s.step(next, i_d, di_d, di0);
  return next;
}

/// Decoupled modal updates: (L_n + Δtθ R_n) δa_n = −Δt R_n a_n + f_n.
class Td2Stepper {
 public:
  Td2Stepper(const ModalBasis& mb, const ReducedModel& rm, double dt, double theta)
      : dt_(dt), theta_(theta), r_(mb.resistance), c_(mb.size()) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
    for (std::size_t n = 0; n < c_.size(); ++n) {
      const double z = mb.inductance[n] + dt * theta * mb.resistance[n];
      if (!(z > 0.0)) throw NotPositiveDefinite(n, z);
      c_[n] = std::sqrt(z);
    }
    const ModalDrive md = project_drive(mb, rm);
    drive_ = DriveTerms(md.resistance, md.inductance, md.coils, dt, theta);
  }

  std::size_t size() const { return c_.size(); }
  bool matches(double dt, double theta) const { return dt == dt_ && theta == theta_; }

  /// Modal forcing increments f = Vᵀ(drive part of the right-hand side).
  Vector forcing(std::span<const double> i_d, std::span<const double> di_d, std::span<const double> di0) const {
    Vector f(size(), 0.0);
    drive_.apply(f, i_d, di_d, di0);
    return f;
  }

  /// Advances modal amplitudes in place given precomputed forcing.
  void step(std::span<double> amplitudes, std::span<const double> forcing) const {
    detail::check_length(amplitudes, size(), "modal state");
    detail::check_length(forcing, size(), "modal forcing");
    for (std::size_t n = 0; n < amplitudes.size(); ++n) {
      const double rhs = -dt_ * (r_[n] * amplitudes[n]) + forcing[n];
      amplitudes[n] += (rhs / c_[n]) / c_[n];
    }
  }

  void step(std::span<double> amplitudes, std::span<const double> i_d, std::span<const double> di_d,
            std::span<const double> di0) const {
    detail::check_length(amplitudes, size(), "modal state");
    const Vector f = forcing(i_d, di_d, di0);
    step(amplitudes, f);
  }

 private:
  double dt_;
  double theta_;
  Vector r_;
  Vector c_;  // sqrt(L_n + Δtθ R_n)
  DriveTerms drive_;
};

inline Vector step_td2(const Td2Stepper& s, std::span<const double> amplitudes, std::span<const double> forcing) {
  Vector next(amplitudes.begin(), amplitudes.end());
  s.step(next, forcing);
  return next;
}

/// Exact port and coil currents of the drive at time t.
struct DriveSample {
  Vector ports;
  Vector coils;
};

inline DriveSample sample_drive(const DriveSignal& d, double t) {
  const double i = eval_drive(d, t);
  DriveSample s{d.port_weights, d.coil_weights};
  for (auto& v : s.ports) v *= i;
  for (auto& v : s.coils) v *= i;
  return s;
}

/// Integrates from rest. TD2 requires `basis`; `observer` is optional.
inline SimulationResult run_transient(const ReducedModel& rm, const ModalBasis* basis, const ProbeObserver* observer,
                                      const DriveSignal& drive, const TransientConfig& cfg) {
  cfg.validate();
  drive.validate();
  if (drive.port_weights.size() != rm.n_ports()) throw DimensionMismatch("drive needs one weight per port");
  if (drive.coil_weights.size() != rm.n_coils()) throw DimensionMismatch("drive needs one weight per free coil");
  if (cfg.method == Method::td2 && basis == nullptr) throw ValidationError("TD2 needs a modal basis");

  SimulationResult res;
  const std::size_t n = rm.n_internal();
  const std::size_t steps = cfg.steps();
  res.steps = steps;

  const auto t_setup = std::chrono::steady_clock::now();
  std::optional<Td1Stepper> td1;
  std::optional<Td2Stepper> td2;
  if (cfg.method == Method::td1)
    td1.emplace(rm, cfg.dt, cfg.theta);
  else
    td2.emplace(*basis, rm, cfg.dt, cfg.theta);
  // TD2 can observe straight from the amplitudes: rows (G V) instead of G.
  std::optional<ProbeObserver> modal_observer;
  if (td2 && observer != nullptr && !cfg.capture_states && n > 0) {
    modal_observer = *observer;
    modal_observer->internal = multiply(observer->internal, basis->vectors);
  }
  res.wall_time_setup = detail::seconds_since(t_setup);

  const std::size_t first_capture =
      static_cast<std::size_t>(std::max(0.0, std::ceil(cfg.capture_from / cfg.dt - 1e-9)));
  Vector state(n, 0.0);  // I_i for TD1, modal amplitudes for TD2
  auto capture = [&](std::size_t k, const DriveSample& d) {
    if (k < first_capture || (k - first_capture) % cfg.capture_stride != 0) return;
    res.times.push_back(static_cast<double>(k) * cfg.dt);
    if (!cfg.capture_states && observer != nullptr && modal_observer) {
      res.probe_fields.push_back(modal_observer->observe(state, d.ports, d.coils));
      return;
    }
    const bool need_internal = cfg.capture_states || observer != nullptr;
    if (!need_internal) return;
    Vector internal = cfg.method == Method::td1 ? state : from_modal(*basis, state);
    if (observer != nullptr) res.probe_fields.push_back(observer->observe(internal, d.ports, d.coils));
    if (cfg.capture_states) res.internal_states.push_back(std::move(internal));
  };

  const auto t_step = std::chrono::steady_clock::now();
  DriveSample now = sample_drive(drive, 0.0);
  capture(0, now);
  Vector di_d(now.ports.size());
  Vector di0(now.coils.size());
  for (std::size_t k = 0; k < steps; ++k) {
    const DriveSample next = sample_drive(drive, static_cast<double>(k + 1) * cfg.dt);
    for (std::size_t p = 0; p < di_d.size(); ++p) di_d[p] = next.ports[p] - now.ports[p];
    for (std::size_t s = 0; s < di0.size(); ++s) di0[s] = next.coils[s] - now.coils[s];
    if (td1)
      td1->step(state, now.ports, di_d, di0);
    else
      td2->step(state, now.ports, di_d, di0);
    now = next;
    capture(k + 1, now);
  }
  res.wall_time_stepping = detail::seconds_since(t_step);
  res.per_step_cost = steps > 0 ? res.wall_time_stepping / static_cast<double>(steps) : 0.0;
  return res;
}

/// Exact solution of L_n a' + R_n a = E_n(t) when the port and coil currents
/// are piecewise linear between the given samples. Returns modal amplitudes
/// at every sample time, starting from `initial`.
inline std::vector<Vector> exact_modal_reference(const ModalBasis& mb, const ReducedModel& rm,
                                                 std::span<const double> times, const std::vector<Vector>& port_samples,
                                                 const std::vector<Vector>& coil_samples, std::span<const double> initial) {
  const std::size_t n = mb.size();
  detail::check_length(initial, n, "initial modal state");
  if (port_samples.size() != times.size() || (!coil_samples.empty() && coil_samples.size() != times.size()))
    throw DimensionMismatch("one drive sample per time expected");
  const ModalDrive md = project_drive(mb, rm);
  const std::size_t np = rm.n_ports();
  const std::size_t nc = rm.n_coils();

  std::vector<Vector> out;
  out.reserve(times.size());
  Vector a(initial.begin(), initial.end());
  if (!times.empty()) out.push_back(a);
  Vector slope_d(np), slope_c(nc);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    if (!(h > 0.0)) throw ValidationError("sample times must be strictly increasing");
    detail::check_length(port_samples[k], np, "port sample");
    for (std::size_t p = 0; p < np; ++p) slope_d[p] = (port_samples[k + 1][p] - port_samples[k][p]) / h;
    for (std::size_t s = 0; s < nc; ++s)
      slope_c[s] = coil_samples.empty() ? 0.0 : (coil_samples[k + 1][s] - coil_samples[k][s]) / h;
    for (std::size_t m = 0; m < n; ++m) {
      // E(σ) = e0 + e1 σ on σ ∈ [0, h].
      double e0 = 0.0;
      double e1 = 0.0;
      for (std::size_t p = 0; p < np; ++p) {
        e0 -= md.resistance(m, p) * port_samples[k][p] + md.inductance(m, p) * slope_d[p];
        e1 -= md.resistance(m, p) * slope_d[p];
      }
      for (std::size_t s = 0; s < nc; ++s) e0 -= md.coils(m, s) * slope_c[s];
      const double r = mb.resistance[m];
      const double tau = mb.inductance[m] / r;
      const double c0 = e0 / r;
      const double c1 = e1 / r;
      const double start = c0 - c1 * tau;  // particular solution at σ = 0
      a[m] = start + c1 * h + (a[m] - start) * std::exp(-h / tau);
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace eddy
