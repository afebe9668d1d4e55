#pragma once

// Eddy-current testing experiment: multi-sine drive through the tube,
// azimuthal field phasors on a probe ring, and crack signatures as phasor
// differences against the defect-free tube.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eddy/current_basis.hpp"
#include "eddy/drive.hpp"
#include "eddy/errors.hpp"
#include "eddy/frequency.hpp"
#include "eddy/inductance.hpp"
#include "eddy/modal.hpp"
#include "eddy/network.hpp"
#include "eddy/observer.hpp"
#include "eddy/parallel.hpp"
#include "eddy/reduction.hpp"
#include "eddy/transient.hpp"

namespace eddy {

enum class Solver { td1, td2, fd };

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::td1: return "td1";
    case Solver::td2: return "td2";
    case Solver::fd: return "fd";
  }
  return "?";
}

/// Probes on a circle coaxial with the tube, evenly spaced over `span`
/// and centered on `center`.
struct ProbeRing {
  std::size_t count = 25;
  double offset = 0.01;  // m outside the tube surface
  double height = 0.15;  // m
  double span = std::numbers::pi;
  double center = 0.5 * std::numbers::pi;

  double angle(std::size_t i) const {
    if (count == 1) return center;
    return center - 0.5 * span + span * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  double spacing() const { return count > 1 ? span / static_cast<double>(count - 1) : 0.0; }

  std::vector<double> angles() const {
    std::vector<double> a(count);
    for (std::size_t i = 0; i < count; ++i) a[i] = angle(i);
    return a;
  }

  std::vector<Vec3> positions(const TubeGeometry& g) const {
    const double r = g.radius + offset;
    std::vector<Vec3> p(count);
    for (std::size_t i = 0; i < count; ++i) p[i] = {r * std::cos(angle(i)), r * std::sin(angle(i)), height};
    return p;
  }
};

/// A defect configuration; no window means the defect-free control case.
struct NamedDefect {
  std::string name;
  std::optional<DefectSpec> window;
};

struct ExperimentSpec {
  TubeGeometry geometry;
  ElectrodeSpec electrodes = ElectrodeSpec::opposite_pairs();
  Vector port_weights{0.5, 0.5, -0.5};
  std::vector<NamedDefect> defects;
  std::vector<Tone> tones;
  ProbeRing probes;
  double sample_rate = 30000.0;  // S/s
  double settle_multiple = 5.0;  // settle time in units of τ₁ ...
  double settle_time = -1.0;     // ... unless this is non-negative (s)
  double window = 1.0;           // s
  Solver method = Solver::td2;
  double theta = 0.5;
  int quad_order = NeumannOptions{}.quad_order;

  double dt() const { return 1.0 / sample_rate; }
  std::size_t window_samples() const { return static_cast<std::size_t>(std::llround(window * sample_rate)); }

  std::vector<double> frequencies() const {
    std::vector<double> f;
    for (const auto& t : tones) f.push_back(t.frequency);
    return f;
  }

  DriveSignal drive() const { return {tones, port_weights, {}}; }

  void validate() const {
    if (probes.count == 0) throw ValidationError("at least one probe is required");
    if (!(probes.offset > 0.0)) throw ValidationError("probe offset must be positive");
    if (!(probes.span >= 0.0 && probes.span <= 2.0 * std::numbers::pi)) throw ValidationError("probe span must lie in [0, 2π]");
    if (tones.empty()) throw ValidationError("at least one tone is required");
    drive().validate();
    if (!(sample_rate > 0.0)) throw ValidationError("sample rate must be positive");
    if (!(window > 0.0)) throw ValidationError("analysis window must be positive");
    if (!(settle_multiple >= 0.0)) throw ValidationError("settle multiple must be non-negative");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
    if (std::abs(window * sample_rate - static_cast<double>(window_samples())) > 1e-9 * window * sample_rate)
      throw NonintegerPeriods("analysis window must hold an integer number of samples");
    for (const auto& t : tones) detail::check_dft_window(window_samples(), dt(), t.frequency);
    if (electrodes.placements.size() != port_weights.size() + 1)
      throw DimensionMismatch("one port weight per non-reference electrode expected");
    for (const auto& d : defects)
      if (d.window) d.window->validate();
  }
};

inline std::vector<double> default_tone_frequencies() {
  return {1,    50,   100,  150,  250,  300,  400,  600,  700,  800,  900,  1000, 1500, 2000, 2500,
          3000, 3500, 4000, 4500, 5000, 5500, 6000, 6500, 7000, 7500, 8000, 8500, 9000, 9500, 10000};
}

/// 30 tones of 4 A on the reference tube, probed over half the circumference.
/// Two defects at the probe plane, centered at 90°: a cut axial branch and
/// the same branch with tenfold resistivity.
inline ExperimentSpec default_experiment() {
  ExperimentSpec s;
  const auto freqs = default_tone_frequencies();
  const auto phases = default_phases(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) s.tones.push_back({4.0, freqs[k], phases[k]});
  DefectSpec cut;
  cut.angle_min = 0.5 * std::numbers::pi - 0.05;
  cut.angle_max = 0.5 * std::numbers::pi + 0.05;
  cut.z_min = 0.14;
  cut.z_max = 0.16;
  DefectSpec thin = cut;
  thin.mode = DefectMode::scale_resistivity;
  thin.factor = 10.0;
  s.defects = {{"cut", cut}, {"thinned", thin}};
  return s;
}

struct ConfigurationRun {
  PhasorSet phasors;
  std::size_t n_internal = 0;
  double tau1 = 0.0;           // s
  double setup_seconds = 0.0;  // assembly, reduction, factorizations
  double solve_seconds = 0.0;  // stepping or per-tone solves plus DFT
};

/// One end-to-end pipeline: grid, matrices, reduction, solve, phasors.
inline ConfigurationRun simulate_configuration(const ExperimentSpec& spec, const std::optional<DefectSpec>& defect) {
  spec.validate();
  ConfigurationRun out;
  const auto t0 = std::chrono::steady_clock::now();
  const LoopNetwork net = generate_tube_grid(spec.geometry, spec.electrodes, defect);
  const CurrentBasis basis = build_current_basis(net);
  const IncidenceE e = electrode_incidence(basis, net);
  const BranchMatrices bm = assemble_branch_matrices(net, spec.quad_order);
  const ReducedModel rm = project_model(bm, basis, e, assemble_source_mutuals(net, basis, spec.quad_order));
  const auto positions = spec.probes.positions(spec.geometry);
  const ProbeObserver obs = azimuthal(make_probe_observer(net, basis, rm, positions));
  const DriveSignal drive = spec.drive();
  out.n_internal = rm.n_internal();

  const auto freqs = spec.frequencies();
  out.phasors = PhasorSet(obs.rows(), freqs);
  out.phasors.probe_angles = spec.probes.angles();

  if (spec.method == Solver::fd) {
    out.setup_seconds = detail::seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    parallel_for(freqs.size(), [&](std::size_t k) {
      const Complex x = std::polar(spec.tones[k].amplitude, spec.tones[k].phase);
      ComplexVector ports;
      for (double w : spec.port_weights) ports.push_back(w * x);
      const auto sol = fd_solve(rm, 2.0 * std::numbers::pi * freqs[k], ports, {}, &obs);
      for (std::size_t p = 0; p < obs.rows(); ++p) out.phasors.at(p, k) = sol.probes[p];
    });
    out.solve_seconds = detail::seconds_since(t1);
    return out;
  }

  std::optional<ModalBasis> mb;
  if (spec.method == Solver::td2) {
    mb = generalized_eig(rm.inductance, rm.resistance);
    out.tau1 = mb->size() > 0 ? mb->tau[0] : 0.0;
  } else {
    out.tau1 = dominant_time_constant(rm.inductance, rm.resistance);
  }
  out.setup_seconds = detail::seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const double dt = spec.dt();
  const double settle = spec.settle_time >= 0.0 ? spec.settle_time : spec.settle_multiple * out.tau1;
  const auto first = static_cast<std::size_t>(std::ceil(settle / dt - 1e-9));
  const std::size_t n = spec.window_samples();
  TransientConfig cfg;
  cfg.theta = spec.theta;
  cfg.dt = dt;
  cfg.method = spec.method == Solver::td1 ? Method::td1 : Method::td2;
  cfg.capture_from = static_cast<double>(first) * dt;
  cfg.t_end = static_cast<double>(first + n - 1) * dt;
  cfg.capture_states = false;
  if (first + n - 1 == 0) cfg.t_end = dt;  // a single-sample window still needs one step
  const auto res = run_transient(rm, mb ? &*mb : nullptr, &obs, drive, cfg);
  const std::vector<Vector> series(res.probe_fields.begin(), res.probe_fields.begin() + static_cast<std::ptrdiff_t>(n));
  auto ph = dft_phasors(series, obs.rows(), dt, freqs, first);
  ph.probe_angles = std::move(out.phasors.probe_angles);
  out.phasors = std::move(ph);
  out.solve_seconds = detail::seconds_since(t1);
  return out;
}

inline PhasorSet run_configuration(const ExperimentSpec& spec, const std::optional<DefectSpec>& defect = std::nullopt) {
  return simulate_configuration(spec, defect).phasors;
}

/// ΔB per (probe, tone), probe-major like PhasorSet.
struct CrackSignature {
  std::vector<double> probe_angles;
  std::vector<double> frequencies;
  std::size_t probe_count = 0;
  ComplexVector values;

  std::size_t tone_count() const { return frequencies.size(); }
  Complex at(std::size_t probe, std::size_t tone) const { return values[probe * tone_count() + tone]; }

  /// Index of the probe with the largest |ΔB| at the given tone.
  std::size_t peak_probe(std::size_t tone) const {
    std::size_t best = 0;
    for (std::size_t p = 1; p < probe_count; ++p)
      if (std::abs(at(p, tone)) > std::abs(at(best, tone))) best = p;
    return best;
  }

  /// ΔB divided by the largest |ΔB| over probes, per tone. All-zero tones
  /// stay zero.
  CrackSignature normalized() const {
    CrackSignature out = *this;
    for (std::size_t k = 0; k < tone_count(); ++k) {
      const double m = std::abs(at(peak_probe(k), k));
      if (m == 0.0) continue;
      for (std::size_t p = 0; p < probe_count; ++p) out.values[p * tone_count() + k] /= m;
    }
    return out;
  }
};

inline CrackSignature crack_signature(const PhasorSet& defect, const PhasorSet& background) {
  if (defect.probe_count != background.probe_count || defect.frequencies != background.frequencies ||
      defect.probe_angles != background.probe_angles || defect.values.size() != background.values.size())
    throw IndexMismatch("phasor sets cover different probes or tones");
  CrackSignature s{defect.probe_angles, defect.frequencies, defect.probe_count, ComplexVector(defect.values.size())};
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = defect.values[i] - background.values[i];
  return s;
}

struct DefectResult {
  std::string name;
  ConfigurationRun run;
  CrackSignature signature;
};

struct ExperimentResult {
  ConfigurationRun background;
  std::vector<DefectResult> defects;
};

/// Background plus every defect configuration, each an independent pipeline.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult out;
  out.background = simulate_configuration(spec, std::nullopt);
  for (const auto& d : spec.defects) {
    auto run = simulate_configuration(spec, d.window);
    auto sig = crack_signature(run.phasors, out.background.phasors);
    out.defects.push_back({d.name, std::move(run), std::move(sig)});
  }
  return out;
}

}  // namespace eddy
