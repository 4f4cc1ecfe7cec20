#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "tfqds/params.hpp"

// Analytic (expected-value) model of the twin-field key generation
// observables for the symmetric two-arm setup: interference integrals over
// the post-selected phase slice, the ring integral for both-send Z events,
// and the per-category one-detector click probabilities.

namespace tfqds {

// Per-arm transmittance. distance_km is the total sender-to-sender span and
// each arm covers half of it, hence the /20 exponent.
inline double arm_transmittance(const SystemParams& sys) {
    return sys.eta_d * std::pow(10.0, -sys.alpha_db_per_km * sys.distance_km / 20.0);
}

namespace detail {

// Adaptive Simpson quadrature, relative tolerance on the whole-interval
// estimate. The slice integrands are smooth and nearly constant, so this
// terminates after a handful of refinements.
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::abs(whole), 1e-300) * rel_tol;
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace detail

enum class SliceKind { sin2, cos2 };

// (1/Delta) Int_{-Delta/2}^{Delta/2} exp(-2 eta x trig^2(theta/2)) dtheta.
// Values lie in [exp(-2 eta x), 1] for either trig kind.
inline double slice_integral(double intensity, double eta, double delta, SliceKind kind) {
    if (!(intensity >= 0.0)) throw std::domain_error("slice_integral: intensity must be >= 0");
    if (!(delta > 0.0 && delta <= 2.0 * std::numbers::pi + 1e-12))
        throw std::domain_error("slice_integral: delta must lie in (0, 2pi]");
    const double c = 2.0 * eta * intensity;
    auto f = [c, kind](double t) {
        const double s = (kind == SliceKind::sin2) ? std::sin(0.5 * t) : std::cos(0.5 * t);
        return std::exp(-c * s * s);
    };
    return detail::integrate(f, -0.5 * delta, 0.5 * delta, 1e-10) / delta;
}

// (1/2pi) Int_0^{2pi} exp(z cos theta) dtheta, i.e. the modified Bessel
// function I0(z). Power series below z = 10, quadrature beyond.
inline double ring_integral(double z) {
    if (!(z >= 0.0)) throw std::domain_error("ring_integral: z must be >= 0");
    if (z < 10.0) {
        const double q = 0.25 * z * z;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum;
    }
    auto f = [z](double t) { return std::exp(z * std::cos(t)); };
    return detail::integrate(f, 0.0, 2.0 * std::numbers::pi, 1e-10) / (2.0 * std::numbers::pi);
}

// Per-event one-detector click probabilities for every event category. This
// is the layer shared by the expected-value model and the Monte Carlo
// sampler.
struct ClickModel {
    double eta = 0.0;    // per-arm transmittance
    double delta = 0.0;  // phase slice width 2pi/M

    // X windows, one-detector heralded events
    double q_00 = 0.0;  // both vacuum: dark counts only
    double q_w = 0.0;   // exactly one side sends w
    double q_v = 0.0;   // exactly one side sends v

    // X-window effective events (equal intensity, same slice)
    double q_eff_total_w = 0.0, q_eff_wrong_w = 0.0;
    double q_eff_total_v = 0.0, q_eff_wrong_v = 0.0;

    // Z windows, split by sending pattern
    double q_z_neither = 0.0;  // neither sends
    double q_z_one = 0.0;      // exactly one sends
    double q_z_both = 0.0;     // both send
};

namespace detail {

// Click probability when a single arm carries a phase-randomized pulse of
// the given intensity: the beam splits evenly onto the two detectors.
inline double one_side_click(double intensity, double eta, double p_dc) {
    const double q = 1.0 - p_dc;
    return 2.0 * (q * std::exp(-eta * intensity / 2.0) - q * q * std::exp(-eta * intensity));
}

// Wrong / total one-detector click probabilities for effective X events at
// equal intensity a on both sides, averaged over the accepted slice. The
// misalignment e_d swaps which detector plays the wrong role.
inline std::pair<double, double> effective_clicks(double a, double eta, double delta,
                                                  double p_dc, double e_d) {
    const double q = 1.0 - p_dc;
    const double s_int = slice_integral(a, eta, delta, SliceKind::sin2);
    const double c_int = slice_integral(a, eta, delta, SliceKind::cos2);
    const double both = q * q * std::exp(-2.0 * eta * a);
    const double bright_only = q * s_int - both;  // dim detector silent
    const double dim_only = q * c_int - both;     // bright detector silent
    const double wrong = e_d * bright_only + (1.0 - e_d) * dim_only;
    const double total = bright_only + dim_only;
    return {wrong, total};
}

}  // namespace detail

inline ClickModel click_model(const SystemParams& sys, const ProtocolParams& proto) {
    sys.validate();
    proto.validate();
    ClickModel m;
    m.eta = arm_transmittance(sys);
    m.delta = proto.slice_width();
    const double q = 1.0 - sys.p_dc;

    m.q_00 = 2.0 * sys.p_dc * q;
    m.q_w = detail::one_side_click(proto.w, m.eta, sys.p_dc);
    m.q_v = detail::one_side_click(proto.v, m.eta, sys.p_dc);

    std::tie(m.q_eff_wrong_w, m.q_eff_total_w) =
        detail::effective_clicks(proto.w, m.eta, m.delta, sys.p_dc, sys.e_d);
    std::tie(m.q_eff_wrong_v, m.q_eff_total_v) =
        detail::effective_clicks(proto.v, m.eta, m.delta, sys.p_dc, sys.e_d);

    m.q_z_neither = 2.0 * sys.p_dc * q;
    m.q_z_one = detail::one_side_click(proto.u, m.eta, sys.p_dc);
    m.q_z_both = 2.0 * (q * std::exp(-m.eta * proto.u) * ring_integral(m.eta * proto.u) -
                        q * q * std::exp(-2.0 * m.eta * proto.u));
    return m;
}

// Expected observed values under the linear model. All counts are real
// numbers (expected values); rounding to integers happens only in the
// Monte Carlo sampler.
struct ChannelObservables {
    double n_00 = 0, n_0w = 0, n_w0 = 0, n_0v = 0, n_v0 = 0;
    double m_ww = 0, m_vv = 0;  // wrong clicks among effective events
    double n_z = 0;             // one-detector heralded count on Z windows
    double e_z = 0;             // Z-window bit error rate
    double t_z_neither = 0, t_z_one = 0, t_z_both = 0;  // n_z split by pattern

    // Populations. Index 0/1/2 = vacuum/w/v for the X-window combinations.
    std::array<std::array<double, 3>, 3> population_x{};
    double population_z = 0;                             // N_Z = p_z^2 N
    double population_eff_ww = 0, population_eff_vv = 0;  // P^D_aa N
    double p_eff_ww = 0, p_eff_vv = 0;                    // P^D_aa
};

inline ChannelObservables expected_observables(const SystemParams& sys,
                                               const ProtocolParams& proto) {
    const ClickModel m = click_model(sys, proto);
    ChannelObservables obs;

    const double n = proto.n_pulses;
    const std::array<double, 3> pick = {proto.p_vacuum(), proto.p_w, proto.p_v};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) obs.population_x[a][b] = pick[a] * pick[b] * n;

    obs.n_00 = m.q_00 * obs.population_x[0][0];
    obs.n_0w = m.q_w * obs.population_x[0][1];
    obs.n_w0 = m.q_w * obs.population_x[1][0];
    obs.n_0v = m.q_v * obs.population_x[0][2];
    obs.n_v0 = m.q_v * obs.population_x[2][0];

    const double slice_fraction = m.delta / (2.0 * std::numbers::pi);
    obs.p_eff_ww = 2.0 * proto.p_w * proto.p_w * slice_fraction;
    obs.p_eff_vv = 2.0 * proto.p_v * proto.p_v * slice_fraction;
    obs.population_eff_ww = obs.p_eff_ww * n;
    obs.population_eff_vv = obs.p_eff_vv * n;
    obs.m_ww = m.q_eff_wrong_w * obs.population_eff_ww;
    obs.m_vv = m.q_eff_wrong_v * obs.population_eff_vv;

    obs.population_z = proto.p_z * proto.p_z * n;
    const double ps = proto.p_s;
    obs.t_z_neither = (1.0 - ps) * (1.0 - ps) * m.q_z_neither * obs.population_z;
    obs.t_z_one = 2.0 * ps * (1.0 - ps) * m.q_z_one * obs.population_z;
    obs.t_z_both = ps * ps * m.q_z_both * obs.population_z;
    obs.n_z = obs.t_z_neither + obs.t_z_one + obs.t_z_both;

    // Bit mapping: matching bits require exactly one side to have sent, so
    // neither-send and both-send heralded events are errors.
    obs.e_z = obs.n_z > 0.0 ? (obs.t_z_neither + obs.t_z_both) / obs.n_z : 0.5;
    return obs;
}

inline double z_window_error_rate(const SystemParams& sys, const ProtocolParams& proto) {
    return expected_observables(sys, proto).e_z;
}

// Exact single-photon truth under the linear model, by Poisson expansion of
// the coherent-state formulas. A single photon delocalized over the two
// arms survives with probability eta and lands on either detector, so its
// one-detector click probability is the same for every intensity
// combination:
//   Y1 = (1-p_dc)(2-eta) - 2(1-p_dc)^2(1-eta)  ==  (1-p_dc)(eta + 2 p_dc (1-eta)),
// which equals the first-order coefficient of the one-side-send click
// probability (verified in the test suite against the w -> 0 limit). The
// wrong-click coefficient additionally averages the interference pattern
// over the accepted slice.
struct SinglePhotonTruth {
    double population_z1 = 0;  // expected single-photon preparations on Z windows
    double yield = 0;          // one-detector click probability for one photon
    double error_rate = 0;     // wrong-click fraction among single-photon events
    double n_z1 = 0;           // population_z1 * yield
};

inline SinglePhotonTruth true_single_photon_oracle(const SystemParams& sys,
                                                   const ProtocolParams& proto) {
    sys.validate();
    proto.validate();
    const double eta = arm_transmittance(sys);
    const double delta = proto.slice_width();
    const double q = 1.0 - sys.p_dc;

    SinglePhotonTruth t;
    t.population_z1 = 2.0 * proto.p_s * (1.0 - proto.p_s) * proto.u * std::exp(-proto.u) *
                      (proto.p_z * proto.p_z * proto.n_pulses);
    t.yield = q * (2.0 - eta) - 2.0 * q * q * (1.0 - eta);

    // Slice averages of sin^2(theta/2) and cos^2(theta/2).
    const double sbar = 0.5 - std::sin(0.5 * delta) / delta;
    const double cbar = 0.5 + std::sin(0.5 * delta) / delta;
    const double wrong1 = sys.e_d * (q * (1.0 - eta * sbar) - q * q * (1.0 - eta)) +
                          (1.0 - sys.e_d) * (q * (1.0 - eta * cbar) - q * q * (1.0 - eta));
    t.error_rate = t.yield > 0.0 ? wrong1 / t.yield : 0.0;
    t.n_z1 = t.population_z1 * t.yield;
    return t;
}

}  // namespace tfqds
