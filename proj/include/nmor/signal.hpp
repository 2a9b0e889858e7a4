#pragma once
//
// Desk-scale version of the modulated-field measurement: d_B(t) is swept
// slowly enough that each sample is a steady propagation solve, white
// rotation-angle noise is added, and the Hann-windowed spectrum gives the
// SNR at the modulation frequency.  The output is a constructed qualitative
// comparison, not a sensitivity prediction.
//

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fftw3.h>

#include "nmor/colliding_probe.hpp"
#include "nmor/detail/parallel.hpp"
#include "nmor/model.hpp"
#include "nmor/single_probe.hpp"

namespace nmor {

enum class SignalScenario { colliding, single_probe };

inline std::string to_string(SignalScenario s) { return s == SignalScenario::colliding ? "colliding" : "single"; }

struct TimeSeriesSpec {
  MagneticFieldSpec field;  ///< static d_B plus modulation
  double duration_s = 2.0;
  double sample_rate_hz = 500.0;
  double noise_sigma = 0.0;  ///< white rotation noise, rad

  std::size_t samples() const { return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz)); }
  double modulation_hz() const { return field.modulation ? field.modulation->frequency_hz : 0.0; }

  void validate() const {
    field.validate();
    if (!(duration_s > 0.0)) throw ConfigError("signal.duration_s", "must be > 0");
    const double n = duration_s * sample_rate_hz;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || n < 64.0)
      throw ConfigError("signal.sample_rate_hz", "duration * rate must be an integer >= 64");
    if (field.modulation && !(sample_rate_hz > 2.0 * field.modulation->frequency_hz))
      throw ConfigError("signal.sample_rate_hz", "must exceed twice the modulation frequency");
    if (!(noise_sigma >= 0.0)) throw ConfigError("signal.noise_sigma", "must be >= 0");
  }
  bool operator==(const TimeSeriesSpec&) const = default;
};

struct SignalModel {
  ModelParams params;
  CpBoundary boundary;
  CpOptions solver;
};

/// Noise-free rotation at one static field: Delta theta(L) from the colliding
/// solve, or the linear single-probe law at the same L and probe-1 power.
inline double steady_rotation(SignalScenario sc, const SignalModel& m, double d_B) {
  if (sc == SignalScenario::single_probe)
    return sp_rotation(m.boundary.length, m.boundary.probe1.S_plus + m.boundary.probe1.S_minus, m.params, d_B);
  const auto pr = cp_solve_bvp(m.boundary, m.params, d_B, m.solver);
  const auto& y = pr.points.back();
  return y.p1[2] - y.p1[3];
}

/// Rotation-angle time series.  Samples sharing a d_B value (common for
/// periodic modulation) share one solve.
inline std::vector<double> synthesize(const TimeSeriesSpec& spec, SignalScenario sc, const SignalModel& m,
                                      std::uint64_t seed, unsigned workers = 0) {
  spec.validate();
  const std::size_t n = spec.samples();
  std::vector<double> field(n);
  for (std::size_t k = 0; k < n; ++k) field[k] = spec.field.at(static_cast<double>(k) / spec.sample_rate_hz);

  std::map<std::uint64_t, std::size_t> slot;  // bit pattern of d_B -> unique index
  std::vector<double> unique;
  for (double v : field)
    if (slot.emplace(std::bit_cast<std::uint64_t>(v), unique.size()).second) unique.push_back(v);

  std::vector<double> rot(unique.size());
  detail::parallel_for_rethrow(
      unique.size(),
      [&](std::size_t i) {
        try {
          rot[i] = steady_rotation(sc, m, unique[i]);
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(std::string(e.what()) + " at d_B = " + std::to_string(unique[i]), e.iterations(),
                                 e.residual());
        }
      },
      workers);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double draw = noise(rng);  // drawn even at sigma = 0 so the stream is stable
    out[k] = rot[slot.at(std::bit_cast<std::uint64_t>(field[k]))] + spec.noise_sigma * draw;
  }
  return out;
}

struct SpectrumResult {
  std::vector<double> frequency_hz;
  std::vector<double> magnitude;     ///< amplitude-calibrated |X|, rad
  std::vector<double> magnitude_db;  ///< 20 log10(magnitude / 1 rad)
  double snr_db = 0.0;
  double peak_db = 0.0;
  double floor_db = 0.0;
  std::size_t peak_bin = 0;
  double parseval_error = 0.0;  ///< |time power - spectral power| / time power of the windowed series
  std::string scenario;
};

inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  return w;
}

/// Real-input DFT X_k = sum x_j e^{-2 pi i jk/n}, k = 0..n/2, via FFTW.
inline std::vector<complex> real_dft(const std::vector<double>& x) {
  static std::mutex planner;  // FFTW planning is not thread-safe
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x);
  std::vector<complex> out(x.size() / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner);
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner);
    fftw_destroy_plan(plan);
  }
  return out;
}

/// Hann-windowed amplitude spectrum.  The SNR is the modulation-bin level
/// over the median of all other bins (DC and +-2 bins around the peak
/// excluded).
inline SpectrumResult spectrum(const std::vector<double>& series, const TimeSeriesSpec& spec,
                               const std::string& scenario = "") {
  if (series.size() != spec.samples()) throw ConfigError("series", "length must equal duration * rate");
  const std::size_t n = series.size();
  const auto w = hann_window(n);
  double wsum = 0.0;
  std::vector<double> xw(n);
  double time_power = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    xw[k] = series[k] * w[k];
    wsum += w[k];
    time_power += xw[k] * xw[k];
  }
  const auto X = real_dft(xw);

  SpectrumResult r;
  r.scenario = scenario;
  double spec_power = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const bool paired = k != 0 && !(n % 2 == 0 && k == n / 2);
    spec_power += (paired ? 2.0 : 1.0) * std::norm(X[k]);
    r.frequency_hz.push_back(static_cast<double>(k) * spec.sample_rate_hz / static_cast<double>(n));
    const double mag = (paired ? 2.0 : 1.0) * std::abs(X[k]) / wsum;
    r.magnitude.push_back(mag);
    r.magnitude_db.push_back(20.0 * std::log10(std::max(mag, 1e-300)));
  }
  spec_power /= static_cast<double>(n);
  r.parseval_error = time_power > 0.0 ? std::abs(time_power - spec_power) / time_power : 0.0;

  const double f_mod = spec.modulation_hz();
  r.peak_bin = static_cast<std::size_t>(std::llround(f_mod * spec.duration_s));
  r.peak_bin = std::min(r.peak_bin, X.size() - 1);
  std::vector<double> floor;
  for (std::size_t k = 1; k < X.size(); ++k)
    if (k + 2 < r.peak_bin || k > r.peak_bin + 2) floor.push_back(r.magnitude[k]);
  std::nth_element(floor.begin(), floor.begin() + static_cast<std::ptrdiff_t>(floor.size() / 2), floor.end());
  const double med = floor.empty() ? 0.0 : floor[floor.size() / 2];
  r.peak_db = r.magnitude_db[r.peak_bin];
  r.floor_db = 20.0 * std::log10(std::max(med, 1e-300));
  r.snr_db = r.peak_db - r.floor_db;
  return r;
}

/// Shipped demo: 20 Hz sine modulation of amplitude 0.1 about zero field,
/// 2 s at 500 Hz, with rotation noise set so the single-probe line sits near
/// the floor.  Probe 2 is detuned three times closer than probe 1.
struct Fig1Demo {
  TimeSeriesSpec series;
  SignalModel model;
  std::uint64_t seed = 20;
};

inline Fig1Demo fig1_demo() {
  Fig1Demo d;
  d.series.field.d_B = 0.0;
  d.series.field.modulation = Modulation{Waveform::sine, 20.0, 0.1};
  d.series.duration_s = 2.0;
  d.series.sample_rate_hz = 500.0;
  d.series.noise_sigma = 0.02;
  d.model.params.d_p1 = 10.0;
  d.model.params.d_p2 = 10.0 / 3.0;
  d.model.params.alpha_p1 = d.model.params.alpha_p2 = 0.0065;
  d.model.boundary.probe1 = {25.0, 25.0, 0.0, 0.0};
  d.model.boundary.probe2 = {25.0, 25.0, 0.0, 0.0};
  d.model.boundary.length = 5.0;
  return d;
}

}  // namespace nmor
