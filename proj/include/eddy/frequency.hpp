#pragma once

// Phasor solution (R_i + jω L_i) Î = Ê and DFT phasor extraction.
// Convention: a phasor X represents x(t) = Im{X e^{jωt}}, so the drive
// I sin(ωt + φ) has phasor I e^{jφ}.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"
#include "eddy/observer.hpp"
#include "eddy/parallel.hpp"
#include "eddy/reduction.hpp"

namespace eddy {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

struct FdSolution {
  ComplexVector internal;  // Î
  ComplexVector probes;    // observer rows
  double residual = 0.0;   // ‖(R + jωL)Î − Ê‖ / ‖Ê‖
};

/// Solves the 2N₀ real system [[R, ωL], [ωL, −R]] (x, −y) = (Re Ê, Im Ê),
/// which is (R + jωL)(x + jy) = Ê split into real and imaginary parts.
inline FdSolution fd_solve(const ReducedModel& rm, double omega, std::span<const Complex> port_phasors,
                           std::span<const Complex> coil_phasors = {}, const ProbeObserver* observer = nullptr) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ValidationError("angular frequency must be non-negative");
  const std::size_t n = rm.n_internal();
  if (port_phasors.size() != rm.n_ports()) throw DimensionMismatch("one phasor per port expected");
  if (coil_phasors.size() != rm.n_coils() && !(coil_phasors.empty() && rm.n_coils() == 0))
    throw DimensionMismatch("one phasor per free coil expected");

  const Complex jw(0.0, omega);
  ComplexVector e(n, Complex{});
  for (std::size_t i = 0; i < n; ++i) {
    Complex s{};
    for (std::size_t p = 0; p < rm.n_ports(); ++p)
      s -= (rm.drive_resistance(i, p) + jw * rm.drive_inductance(i, p)) * port_phasors[p];
    for (std::size_t c = 0; c < coil_phasors.size(); ++c) s -= jw * rm.coil_mutual(i, c) * coil_phasors[c];
    e[i] = s;
  }

  FdSolution out;
  out.internal.assign(n, Complex{});
  if (n > 0) {
    Matrix a(2 * n, 2 * n);
    Vector b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double r = rm.resistance(i, j);
        const double wl = omega * rm.inductance(i, j);
        a(i, j) = r;
        a(i, n + j) = wl;
        a(n + i, j) = wl;
        a(n + i, n + j) = -r;
      }
      b[i] = e[i].real();
      b[n + i] = e[i].imag();
    }
    const Vector sol = lu_solve(std::move(a), std::move(b));
    for (std::size_t i = 0; i < n; ++i) out.internal[i] = {sol[i], -sol[n + i]};

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = -e[i];
      for (std::size_t j = 0; j < n; ++j) s += (rm.resistance(i, j) + jw * rm.inductance(i, j)) * out.internal[j];
      num += std::norm(s);
      den += std::norm(e[i]);
    }
    out.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }

  if (observer != nullptr) {
    out.probes.assign(observer->rows(), Complex{});
    for (std::size_t r = 0; r < observer->rows(); ++r) {
      Complex s{};
      for (std::size_t i = 0; i < n; ++i) s += observer->internal(r, i) * out.internal[i];
      for (std::size_t p = 0; p < rm.n_ports(); ++p) s += observer->ports(r, p) * port_phasors[p];
      for (std::size_t c = 0; c < coil_phasors.size(); ++c) s += observer->coils(r, c) * coil_phasors[c];
      out.probes[r] = s;
    }
  }
  return out;
}

/// Complex values indexed by (probe, tone).
struct PhasorSet {
  std::vector<double> frequencies;  // Hz
  std::size_t probe_count = 0;
  std::vector<double> probe_angles;  // rad, one per probe when known
  ComplexVector values;  // probe-major: values[p * frequencies.size() + k]

  PhasorSet() = default;
  PhasorSet(std::size_t probes, std::vector<double> freqs)
      : frequencies(std::move(freqs)), probe_count(probes), values(probes * frequencies.size()) {}

  std::size_t tone_count() const { return frequencies.size(); }
  Complex& at(std::size_t probe, std::size_t tone) { return values[probe * tone_count() + tone]; }
  Complex at(std::size_t probe, std::size_t tone) const { return values[probe * tone_count() + tone]; }
};

namespace detail {

inline void check_dft_window(std::size_t n, double dt, double f) {
  if (n == 0) throw ValidationError("empty DFT window");
  if (!(dt > 0.0)) throw ValidationError("sample spacing must be positive");
  if (!(f >= 0.0 && f < 0.5 / dt)) throw NyquistViolation("tone frequency is at or above the Nyquist limit");
  const double periods = static_cast<double>(n) * dt * f;
  if (std::abs(periods - std::round(periods)) >= 1e-9)
    throw NonintegerPeriods("analysis window does not span an integer number of periods");
}

}  // namespace detail

/// Phasor of tone f from samples x[m] taken at t = (first + m)·dt:
/// X = j (2/N) Σ x[m] e^{−jωt}. The factor j maps the cosine-referenced DFT
/// coefficient onto the Im{X e^{jωt}} convention.
inline Complex dft_phasor(std::span<const double> samples, double dt, double f, std::size_t first = 0) {
  detail::check_dft_window(samples.size(), dt, f);
  const double w = 2.0 * std::numbers::pi * f;
  Complex s{};
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const double t = static_cast<double>(first + m) * dt;
    s += samples[m] * Complex(std::cos(w * t), -std::sin(w * t));
  }
  return Complex(0.0, 2.0 / static_cast<double>(samples.size())) * s;
}

/// DFT phasors of several channels at several tones. `series[m][c]` is
/// channel c at sample m, taken at t = (first + m)·dt.
inline PhasorSet dft_phasors(const std::vector<Vector>& series, std::size_t channels, double dt,
                             std::span<const double> freqs, std::size_t first = 0) {
  const std::size_t n = series.size();
  for (double f : freqs) detail::check_dft_window(n, dt, f);
  PhasorSet out(channels, std::vector<double>(freqs.begin(), freqs.end()));
  parallel_for(freqs.size(), [&](std::size_t k) {
    const double w = 2.0 * std::numbers::pi * freqs[k];
    ComplexVector acc(channels);
    for (std::size_t m = 0; m < n; ++m) {
      const double t = static_cast<double>(first + m) * dt;
      const Complex e(std::cos(w * t), -std::sin(w * t));
      const auto& row = series[m];
      for (std::size_t c = 0; c < channels; ++c) acc[c] += row[c] * e;
    }
    const Complex scale(0.0, 2.0 / static_cast<double>(n));
    for (std::size_t c = 0; c < channels; ++c) out.at(c, k) = scale * acc[c];
  });
  return out;
}

}  // namespace eddy
