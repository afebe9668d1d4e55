#pragma once

// Multi-sine drive currents.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"

namespace eddy {

struct Tone {
  double amplitude = 0.0;  // A
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
};

/// Scalar waveform i(t) = Σ I_k sin(2π f_k t + φ_k), distributed to the
/// electrode ports and free source coils by fixed weights.
struct DriveSignal {
  std::vector<Tone> tones;
  Vector port_weights;  // i_D(t) = port_weights · i(t)
  Vector coil_weights;  // i₀(t) = coil_weights · i(t)

  void validate() const {
    for (std::size_t k = 0; k < tones.size(); ++k) {
      if (!(tones[k].frequency > 0.0)) throw ValidationError("tone frequencies must be positive");
      if (!(tones[k].amplitude >= 0.0)) throw ValidationError("tone amplitudes must be non-negative");
      for (std::size_t j = 0; j < k; ++j)
        if (tones[j].frequency == tones[k].frequency) throw ValidationError("tone frequencies must be distinct");
    }
  }

  DriveSignal scaled(double s) const {
    DriveSignal d = *this;
    for (auto& t : d.tones) t.amplitude *= s;
    return d;
  }
};

inline double eval_drive(std::span<const Tone> tones, double t) {
  double s = 0.0;
  for (const auto& k : tones) s += k.amplitude * std::sin(2.0 * std::numbers::pi * k.frequency * t + k.phase);
  return s;
}

inline double eval_drive(const DriveSignal& d, double t) { return eval_drive(d.tones, t); }

inline double eval_drive_rate(std::span<const Tone> tones, double t) {
  double s = 0.0;
  for (const auto& k : tones) {
    const double w = 2.0 * std::numbers::pi * k.frequency;
    s += k.amplitude * w * std::cos(w * t + k.phase);
  }
  return s;
}

inline double eval_drive_rate(const DriveSignal& d, double t) { return eval_drive_rate(d.tones, t); }

/// Low-crest-factor phase schedule φ_k = −π k(k−1)/N_s, k = 1..N_s.
inline std::vector<double> default_phases(std::size_t n_tones) {
  if (n_tones == 0) throw ValidationError("phase schedule needs at least one tone");
  std::vector<double> phases(n_tones);
  const double ns = static_cast<double>(n_tones);
  for (std::size_t i = 0; i < n_tones; ++i) {
    const double k = static_cast<double>(i + 1);
    phases[i] = -std::numbers::pi * k * (k - 1.0) / ns;
  }
  return phases;
}

struct WaveformStats {
  double max = 0.0;
  double min = 0.0;
  double rms = 0.0;
  double crest_factor() const { return std::max(std::abs(max), std::abs(min)) / rms; }
};

/// Samples i(t) on [0, duration) at the given rate.
inline WaveformStats waveform_stats(std::span<const Tone> tones, double duration, double sample_rate) {
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  if (n == 0) throw ValidationError("waveform window holds no samples");
  WaveformStats st;
  st.max = -INFINITY;
  st.min = INFINITY;
  double sq = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double v = eval_drive(tones, static_cast<double>(m) / sample_rate);
    st.max = std::max(st.max, v);
    st.min = std::min(st.min, v);
    sq += v * v;
  }
  st.rms = std::sqrt(sq / static_cast<double>(n));
  return st;
}

}  // namespace eddy
