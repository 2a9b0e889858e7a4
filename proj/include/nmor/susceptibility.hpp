#pragma once
//
// Third-order perturbative coherences.
//
// With the excited amplitudes adiabatically eliminated, the two ground
// amplitudes obey a 2x2 linear system whose diagonal carries the Zeeman
// shift, the light shift B and the broadening H, and whose off-diagonal
// Raman couplings
//
//   C31 = [Om23* Om21 / (1 - i d1) + Om43* Om41 / (1 - i d2)] / (gamma Gamma)
//   C13 = [Om21* Om23 / (1 - i d1) + Om41* Om43 / (1 - i d2)] / (gamma Gamma)
//
// build the second-order Zeeman coherence from equal ground populations:
//
//   rho31 = -(i/2) [ C31 / (beta- + i Gamma-) + conj(C13) / (beta+ + i Gamma+) ]
//
// Every optical coherence then follows from the steady excited amplitude,
// e.g. rho21 = i Om23 rho31 / (Gamma (1 - i d1)).
//

#include <complex>

#include "nmor/model.hpp"

namespace nmor {

struct CoherenceSet {
  complex rho21;  ///< source of probe-1 sigma+
  complex rho23;  ///< source of probe-1 sigma-
  complex rho41;  ///< source of probe-2 sigma-
  complex rho43;  ///< source of probe-2 sigma+
};

/// Which sign joins the two bracketed denominators of the rho21 closed form.
/// `consistent` (+) reduces to the propagation law used by every solver;
/// `as_printed` (-) is kept only for comparison.
enum class CoherenceForm { consistent, as_printed };

/// Second-order ground-state (Zeeman) coherence rho31.
inline complex zeeman_coherence(const FieldState& fs, const ModelParams& p, double d_B) {
  const auto s = saturation_set(fs, p);
  const auto sb = shift_broadening(s, p, d_B);
  const double norm = p.ground_decay * p.excited_decay;
  const complex i{0.0, 1.0};

  const complex om21 = fs.p1_plus.rabi();
  const complex om23 = fs.p1_minus.rabi();
  const complex om41 = fs.p2_minus.rabi();
  const complex om43 = fs.p2_plus.rabi();
  const complex l1 = 1.0 - i * p.d_p1;
  const complex l2 = 1.0 - i * p.d_p2;

  const complex c31 = (std::conj(om23) * om21 / l1 + std::conj(om43) * om41 / l2) / norm;
  const complex c13 = (std::conj(om21) * om23 / l1 + std::conj(om41) * om43 / l2) / norm;

  const complex den_minus{sb.beta_minus, sb.width_minus};
  const complex den_plus{sb.beta_plus, sb.width_plus};
  return -0.5 * i * (c31 / den_minus + std::conj(c13) / den_plus);
}

/// rho21 evaluated term by term from its closed form (no rho31 route).
inline complex rho21_third_order(const FieldState& fs, const ModelParams& p, double d_B,
                                 CoherenceForm form = CoherenceForm::consistent) {
  const auto s = saturation_set(fs, p);
  const auto sb = shift_broadening(s, p, d_B);
  const complex i{0.0, 1.0};
  const double d1 = p.d_p1;
  const double d2 = p.d_p2;
  const double sign = form == CoherenceForm::consistent ? 1.0 : -1.0;

  const complex den_minus{sb.beta_minus, sb.width_minus};
  const complex den_plus{sb.beta_plus, sb.width_plus};
  auto bracket = [&](double d) {
    return (1.0 + i * d) / den_minus + sign * (1.0 - i * d) / den_plus;
  };

  const complex self = s.p1_minus * fs.p1_plus.rabi() / (1.0 + d1 * d1) * bracket(d1);
  complex cross;
  if (form == CoherenceForm::consistent) {
    cross = fs.p1_minus.rabi() * std::conj(fs.p2_plus.rabi()) * fs.p2_minus.rabi() /
            (p.ground_decay * p.excited_decay) / (1.0 + d2 * d2) * bracket(d2);
  } else {
    cross = s.p1_minus * fs.p2_minus.rabi() / (1.0 + d2 * d2) * bracket(d2);
  }
  return (self + cross) / (2.0 * p.excited_decay * (1.0 - i * d1));
}

inline CoherenceSet coherence_set(const FieldState& fs, const ModelParams& p, double d_B) {
  const complex i{0.0, 1.0};
  const complex r31 = zeeman_coherence(fs, p, d_B);
  const complex r13 = std::conj(r31);
  const complex l1 = p.excited_decay * (1.0 - i * p.d_p1);
  const complex l2 = p.excited_decay * (1.0 - i * p.d_p2);
  return {
      i * fs.p1_minus.rabi() * r31 / l1,
      i * fs.p1_plus.rabi() * r13 / l1,
      i * fs.p2_plus.rabi() * r31 / l2,
      i * fs.p2_minus.rabi() * r13 / l2,
  };
}

}  // namespace nmor
