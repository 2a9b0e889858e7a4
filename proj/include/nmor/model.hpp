#pragma once
//
// Dimensionless model parameters and the elementary derived quantities
// shared by every solver: two-photon saturation parameters, light shift and
// broadening, and the cross-probe gain function.
//
// Units: rates are normalised so that gamma (ground) and Gamma (excited)
// default to 1; one-photon detunings d_p are in units of Gamma; the Zeeman
// shift d_B is in units of gamma; Rabi amplitudes are in units of
// sqrt(gamma*Gamma).  Propagation constants alpha_p absorb the atomic
// density, dipole moments and 1/(Gamma(1+d^2)), so they are supplied
// directly and nothing finer is represented.
//

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "nmor/errors.hpp"

namespace nmor {

using complex = std::complex<double>;

struct ModelParams {
  double ground_decay = 1.0;   ///< gamma
  double excited_decay = 1.0;  ///< Gamma
  double d_p1 = 10.0;          ///< probe-1 one-photon detuning / Gamma
  double d_p2 = 5.0;           ///< probe-2 one-photon detuning / Gamma
  double alpha_p1 = 0.0065;
  double alpha_p2 = 0.0065;
  /// Drop the light shift B and broadening H (beta+ = beta- = -d_B,
  /// Gamma+ = Gamma- = 1).
  bool far_detuned = true;

  void validate() const {
    if (!(ground_decay > 0.0) || !std::isfinite(ground_decay))
      throw ConfigError("model.gamma", "must be finite and > 0");
    if (!(excited_decay > 0.0) || !std::isfinite(excited_decay))
      throw ConfigError("model.Gamma", "must be finite and > 0");
    if (!std::isfinite(d_p1)) throw ConfigError("model.d_p1", "must be finite");
    if (!std::isfinite(d_p2)) throw ConfigError("model.d_p2", "must be finite");
    if (!(alpha_p1 >= 0.0) || !std::isfinite(alpha_p1))
      throw ConfigError("model.alpha_p1", "must be finite and >= 0");
    if (!(alpha_p2 >= 0.0) || !std::isfinite(alpha_p2))
      throw ConfigError("model.alpha_p2", "must be finite and >= 0");
  }

  bool operator==(const ModelParams&) const = default;
};

/// Rabi component as amplitude and phase; rectangular form only at the edges.
struct Component {
  double amplitude = 0.0;
  double phase = 0.0;

  complex rabi() const { return std::polar(amplitude, phase); }
  bool operator==(const Component&) const = default;
};

/// The four circular components at one position.  Probe-1 sigma+ drives
/// |1>-|2>, sigma- drives |3>-|2>; probe-2 sigma+ drives |3>-|4>, sigma-
/// drives |1>-|4>.
struct FieldState {
  Component p1_plus;
  Component p1_minus;
  Component p2_plus;
  Component p2_minus;
  double cross_angle = 0.0;  ///< theta0, between the two linear polarisations

  bool operator==(const FieldState&) const = default;
};

struct SaturationSet {
  double p1_plus = 0.0;
  double p1_minus = 0.0;
  double p2_plus = 0.0;
  double p2_minus = 0.0;

  double p1_product() const { return p1_plus * p1_minus; }
  double p2_product() const { return p2_plus * p2_minus; }
  bool operator==(const SaturationSet&) const = default;
};

struct ShiftBroadening {
  double shift_plus = 0.0;  ///< B+
  double shift_minus = 0.0;
  double broadening_plus = 0.0;  ///< H+
  double broadening_minus = 0.0;
  double beta_plus = 0.0;  ///< -d_B + B+
  double beta_minus = 0.0;  ///< -d_B - B-
  double width_plus = 1.0;  ///< 1 + H+
  double width_minus = 1.0;
};

enum class Waveform { sine, square, triangle };

inline std::string to_string(Waveform w) {
  switch (w) {
    case Waveform::sine: return "sine";
    case Waveform::square: return "square";
    case Waveform::triangle: return "triangle";
  }
  return "sine";
}

inline Waveform waveform_from_string(const std::string& s) {
  if (s == "sine") return Waveform::sine;
  if (s == "square") return Waveform::square;
  if (s == "triangle") return Waveform::triangle;
  throw ConfigError("field.modulation.waveform", "expected sine|square|triangle, got '" + s + "'");
}

/// Unit-amplitude periodic waveform evaluated at phase 2*pi*f*t.
inline double waveform_value(Waveform w, double cycles) {
  const double frac = cycles - std::floor(cycles);
  switch (w) {
    case Waveform::sine: return std::sin(2.0 * std::numbers::pi * cycles);
    case Waveform::square: return frac < 0.5 ? 1.0 : -1.0;
    case Waveform::triangle:
      return frac < 0.25 ? 4.0 * frac : (frac < 0.75 ? 2.0 - 4.0 * frac : 4.0 * frac - 4.0);
  }
  return 0.0;
}

/// Optional physical-unit adapter: delta_B = g*mu0*B, d_B = delta_B / gamma.
struct PhysicalField {
  double B_tesla = 0.0;
  double g_mu0 = 0.0;         ///< rad s^-1 T^-1, supplied by the user
  double gamma_rate = 0.0;    ///< physical ground decay, rad s^-1

  double d_B() const {
    if (!(gamma_rate > 0.0)) throw ConfigError("field.physical.gamma_rate", "must be > 0");
    return g_mu0 * B_tesla / gamma_rate;
  }
  bool operator==(const PhysicalField&) const = default;
};

struct Modulation {
  Waveform waveform = Waveform::sine;
  double frequency_hz = 20.0;
  double amplitude = 1.0;  ///< in d_B units

  bool operator==(const Modulation&) const = default;
};

struct MagneticFieldSpec {
  double d_B = 1.0;
  std::optional<PhysicalField> physical;
  std::optional<Modulation> modulation;

  /// Static Zeeman parameter; the physical block overrides d_B when present.
  double static_d_B() const { return physical ? physical->d_B() : d_B; }

  /// Instantaneous d_B(t) including modulation.
  double at(double t) const {
    double v = static_d_B();
    if (modulation) v += modulation->amplitude * waveform_value(modulation->waveform, modulation->frequency_hz * t);
    return v;
  }

  void validate() const {
    if (!std::isfinite(d_B)) throw ConfigError("field.d_B", "must be finite");
    if (modulation && !(modulation->frequency_hz > 0.0))
      throw ConfigError("field.modulation.frequency_hz", "must be > 0");
    if (physical && !(physical->gamma_rate > 0.0))
      throw ConfigError("field.physical.gamma_rate", "must be > 0");
  }

  bool operator==(const MagneticFieldSpec&) const = default;
};

/// S = |Omega|^2 / (gamma Gamma)
inline SaturationSet saturation_set(const FieldState& fs, const ModelParams& p) {
  const double norm = p.ground_decay * p.excited_decay;
  auto sat = [norm](const Component& c) { return c.amplitude * c.amplitude / norm; };
  return {sat(fs.p1_plus), sat(fs.p1_minus), sat(fs.p2_plus), sat(fs.p2_minus)};
}

/// Light shift B+-, broadening H+-, and the shifted detunings/widths.  Each
/// sign pairs the probe-1 component with the probe-2 component that shares
/// the same ground level (p1+ with p2-, p1- with p2+).
inline ShiftBroadening shift_broadening(const SaturationSet& s, const ModelParams& p, double d_B) {
  ShiftBroadening r;
  if (!p.far_detuned) {
    const double l1 = 1.0 + p.d_p1 * p.d_p1;
    const double l2 = 1.0 + p.d_p2 * p.d_p2;
    r.shift_plus = p.d_p1 * s.p1_plus / l1 + p.d_p2 * s.p2_minus / l2;
    r.shift_minus = p.d_p1 * s.p1_minus / l1 + p.d_p2 * s.p2_plus / l2;
    r.broadening_plus = s.p1_plus / l1 + s.p2_minus / l2;
    r.broadening_minus = s.p1_minus / l1 + s.p2_plus / l2;
  }
  r.beta_plus = -d_B + r.shift_plus;
  r.beta_minus = -d_B - r.shift_minus;
  r.width_plus = 1.0 + r.broadening_plus;
  r.width_minus = 1.0 + r.broadening_minus;
  return r;
}

/// G = (1+d_p1^2) sqrt(S2+ S2-) / ((1+d_p2^2) sqrt(S1+ S1-)).
/// Throws SingularGainError when S1+ S1- vanishes.
inline double gain_function(const SaturationSet& s, const ModelParams& p) {
  const double p1 = s.p1_product();
  if (!(p1 > 0.0)) throw SingularGainError("gain function undefined: probe-1 saturation product is zero");
  const double ratio = (1.0 + p.d_p1 * p.d_p1) / (1.0 + p.d_p2 * p.d_p2);
  return ratio * std::sqrt(s.p2_product()) / std::sqrt(p1);
}

}  // namespace nmor
