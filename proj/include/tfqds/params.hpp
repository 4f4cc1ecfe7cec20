#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tfqds {

namespace detail {
inline void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}
}  // namespace detail

// Physical setup of the symmetric two-arm link. distance_km is the TOTAL
// sender-to-sender distance; the untrusted measurement node sits halfway, so
// each arm spans half of it and the per-arm transmittance carries the /20
// exponent (see channel.hpp).
struct SystemParams {
    double alpha_db_per_km = 0.2;  // fiber loss coefficient
    double eta_d = 0.5;            // detector efficiency
    double p_dc = 1e-7;            // dark count probability per detector per gate
    double e_d = 0.03;             // optical misalignment error
    double distance_km = 100.0;    // total distance between the two senders

    void validate() const {
        detail::require(alpha_db_per_km >= 0.0, "alpha_db_per_km must be nonnegative");
        detail::require(eta_d >= 0.0 && eta_d <= 1.0, "eta_d must lie in [0, 1]");
        detail::require(p_dc >= 0.0 && p_dc <= 1.0, "p_dc must lie in [0, 1]");
        detail::require(e_d >= 0.0 && e_d <= 0.5, "e_d must lie in [0, 0.5]");
        detail::require(distance_km >= 0.0, "distance_km must be nonnegative");
    }
};

// Tunable protocol knobs. Each pulse pair is an X (decoy) window with a
// vacuum / w / v intensity choice, or a Z (signal) window where intensity u
// is sent with probability p_s. The vacuum choice probability is the
// remainder p_0 = 1 - p_w - p_v - p_z.
struct ProtocolParams {
    double w = 0.005;    // weaker decoy intensity
    double v = 0.04;     // stronger decoy intensity
    double u = 0.27;     // signal intensity
    double p_w = 0.016;  // probability of choosing decoy w
    double p_v = 0.021;  // probability of choosing decoy v
    double p_z = 0.95;   // probability of choosing the Z window
    double p_s = 0.03;   // probability of sending within a Z window
    int m_slices = 16;   // number of phase slices M
    double n_pulses = 1e13;  // total pulse-pair count N
    double r_et = 0.055;     // fraction of sifted key consumed by the error test

    double p_vacuum() const { return 1.0 - p_w - p_v - p_z; }
    double slice_width() const { return 2.0 * std::numbers::pi / m_slices; }

    void validate() const {
        detail::require(w > 0.0, "decoy intensity w must be positive");
        detail::require(w < v, "decoy intensities must satisfy w < v");
        detail::require(u > 0.0, "signal intensity u must be positive");
        for (double p : {p_w, p_v, p_z, p_s})
            detail::require(p > 0.0 && p < 1.0, "window/send probabilities must lie in (0, 1)");
        detail::require(p_vacuum() >= -1e-15,
                        "window probabilities must satisfy p_w + p_v + p_z <= 1");
        detail::require(m_slices >= 2, "m_slices must be an integer >= 2");
        detail::require(n_pulses >= 1.0, "n_pulses must be at least 1");
        detail::require(n_pulses <= 9e15, "n_pulses exceeds exact integer range of double");
        detail::require(r_et > 0.0 && r_et < 1.0, "r_et must lie in (0, 1)");
    }
};

// Failure probabilities and the overall security target.
struct SecurityBudget {
    double eps_pe = 1e-12;     // failure probability of the error test
    double eps_sf = 1e-12;     // per-use statistical-fluctuation failure probability
    double g = 1e-12;          // forger lucky-guess probability
    double eps_target = 1e-5;  // overall security level

    void validate() const {
        for (double e : {eps_pe, eps_sf, g, eps_target})
            detail::require(e > 0.0 && e < 1.0, "security budget entries must lie in (0, 1)");
        detail::require(eps_target > eps_pe && eps_target > eps_sf && eps_target > g,
                        "eps_target must exceed eps_pe, eps_sf and g");
    }
};

}  // namespace tfqds
