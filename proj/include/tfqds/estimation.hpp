#pragma once

#include <algorithm>
#include <cmath>

#include "tfqds/channel.hpp"
#include "tfqds/math.hpp"
#include "tfqds/params.hpp"

// Finite-size estimation chain: decoy-state bounds on the X windows,
// population bounds, Serfling transfer to the Z windows, per-block bounds,
// and the test-error extrapolation to the kept key half.

namespace tfqds {

struct EstimationOptions {
    // Reproduce the literally printed error-count formula (e^v on both
    // terms) instead of the corrected one (e^w on the subtracted term).
    bool as_printed = false;
};

// Probability that a pulse pair carries exactly one photon, summed over all
// X-window intensity combinations: tau_X1 = sum_ab P_ab (a+b) e^{-a-b}.
inline double tau_x1(const ProtocolParams& proto) {
    const std::array<double, 3> pick = {proto.p_vacuum(), proto.p_w, proto.p_v};
    const std::array<double, 3> mu = {0.0, proto.w, proto.v};
    double tau = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            tau += pick[a] * pick[b] * (mu[a] + mu[b]) * std::exp(-mu[a] - mu[b]);
    return tau;
}

struct XWindowBounds {
    double n_x1_lower = 0;   // lower bound on single-photon counts, X windows
    double m_x1_upper = 0;   // upper bound on single-photon error counts
    double e_x1_upper = 0;   // m_x1_upper / n_x1_lower
    double tau_x1 = 0;
    bool usable = false;     // false when the decoy method is uninformative here
    int clamp_events = 0;
};

// Vacuum + two-decoy bounds from the observed one-detector heralded counts.
// Fluctuation directions follow the printed superscripts: the additive
// counts are lowered, the subtracted ones raised for the count bound, and
// vice versa for the error bound.
inline XWindowBounds decoy_bounds_x(const ChannelObservables& obs, const ProtocolParams& proto,
                                    double eps_sf, const EstimationOptions& opt = {}) {
    if (!(proto.w < proto.v))
        throw std::invalid_argument("decoy intensities must satisfy w < v");
    XWindowBounds xb;
    xb.tau_x1 = tau_x1(proto);

    const double w = proto.w, v = proto.v;
    const double n = proto.n_pulses;
    const double p_0w = obs.population_x[0][1] / n;
    const double p_0v = obs.population_x[0][2] / n;
    const double p_00 = obs.population_x[0][0] / n;
    if (p_0w <= 0.0 || p_0v <= 0.0 || p_00 <= 0.0) return xb;  // unusable

    const double low_w = fluctuate(obs.n_0w, eps_sf, Tail::lower) +
                         fluctuate(obs.n_w0, eps_sf, Tail::lower);
    const double high_v = fluctuate(obs.n_0v, eps_sf, Tail::upper) +
                          fluctuate(obs.n_v0, eps_sf, Tail::upper);
    const double high_00 = fluctuate(obs.n_00, eps_sf, Tail::upper);

    const double raw_n = xb.tau_x1 / (2.0 * w * v * (v - w)) *
                         (v * v * std::exp(w) * low_w / p_0w -
                          w * w * std::exp(v) * high_v / p_0v -
                          2.0 * (v * v - w * w) * high_00 / p_00);
    if (!(raw_n > 0.0)) {
        xb.n_x1_lower = 0.0;
        ++xb.clamp_events;
        return xb;  // estimation failure: decoy method uninformative
    }
    xb.n_x1_lower = raw_n;

    const double m_vv_high = fluctuate(obs.m_vv, eps_sf, Tail::upper);
    const double m_ww_low = fluctuate(obs.m_ww, eps_sf, Tail::lower);
    const double coeff_ww = opt.as_printed ? std::exp(v) : std::exp(w);
    double raw_m = xb.tau_x1 / (v - w) *
                   (std::exp(v) * m_vv_high / obs.p_eff_vv -
                    coeff_ww * m_ww_low / obs.p_eff_ww);
    if (raw_m < 0.0) {
        raw_m = 0.0;
        ++xb.clamp_events;
    }
    xb.m_x1_upper = raw_m;
    xb.e_x1_upper = std::min(xb.m_x1_upper / xb.n_x1_lower, 1.0);
    xb.usable = true;
    return xb;
}

struct PopulationBounds {
    double n_z1_population_lower = 0;  // single-photon preparations on Z windows
    double n_x1_population_upper = 0;  // single-photon preparations on X windows
    bool usable = false;
    int clamp_events = 0;
};

inline PopulationBounds population_bounds(const ProtocolParams& proto, double eps_sf) {
    PopulationBounds pb;
    const double n_z = proto.p_z * proto.p_z * proto.n_pulses;
    const double expected_z1 =
        2.0 * proto.p_s * (1.0 - proto.p_s) * proto.u * std::exp(-proto.u) * n_z;
    pb.n_z1_population_lower = expected_z1 - hoeffding_delta(n_z, eps_sf);
    if (pb.n_z1_population_lower < 0.0) {
        pb.n_z1_population_lower = 0.0;
        ++pb.clamp_events;
    }

    const std::array<double, 3> pick = {proto.p_vacuum(), proto.p_w, proto.p_v};
    const std::array<double, 3> mu = {0.0, proto.w, proto.v};
    double upper = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double pop = pick[a] * pick[b] * proto.n_pulses;
            upper += (mu[a] + mu[b]) * std::exp(-mu[a] - mu[b]) * pop +
                     hoeffding_delta(pop, eps_sf);
        }
    pb.n_x1_population_upper = upper;
    pb.usable = pb.n_z1_population_lower > 0.0 && pb.n_x1_population_upper > 0.0;
    return pb;
}

struct ZWindowBounds {
    double n_z1_population_lower = 0;
    double n_x1_population_upper = 0;
    double n_z1_lower = 0;  // single-photon counts on Z windows
    double m_z1_upper = 0;  // single-photon error counts on Z windows
    double e_z1_upper = 0;
    bool usable = false;
    int clamp_events = 0;
};

// Transfer of the X-window single-photon statistics to the Z windows by
// sampling without replacement over the joint single-photon population.
inline ZWindowBounds z_single_photon_bounds(const XWindowBounds& xb, const PopulationBounds& pb,
                                            double eps_sf) {
    ZWindowBounds zb;
    zb.n_z1_population_lower = pb.n_z1_population_lower;
    zb.n_x1_population_upper = pb.n_x1_population_upper;
    zb.clamp_events = xb.clamp_events + pb.clamp_events;
    if (!xb.usable || !pb.usable) return zb;

    zb.n_z1_lower = xb.n_x1_lower * pb.n_z1_population_lower / pb.n_x1_population_upper -
                    serfling_upsilon(pb.n_z1_population_lower, pb.n_x1_population_upper, eps_sf);
    if (!(zb.n_z1_lower > 0.0)) {
        zb.n_z1_lower = 0.0;
        ++zb.clamp_events;
        return zb;  // estimation failure
    }
    zb.m_z1_upper = xb.m_x1_upper * zb.n_z1_lower / xb.n_x1_lower +
                    serfling_upsilon(zb.n_z1_lower, xb.n_x1_lower, eps_sf);
    zb.e_z1_upper = std::clamp(zb.m_z1_upper / zb.n_z1_lower, 0.0, 1.0);
    zb.usable = true;
    return zb;
}

struct BlockBounds {
    double n_l1_lower = 0;  // single-photon counts in the kept half of a block
    double e_l1_upper = 0;  // single-photon error rate in the kept half
    double eps_n_l1 = 0;    // accumulated failure budget behind n_l1_lower
    double eps_e_l1 = 0;    // accumulated failure budget behind e_l1_upper
    bool usable = false;
    int clamp_events = 0;
};

// Failure budget accounting: 17 fluctuated quantities feed the count bound
// (5 observed X counts, 1 Z population, 9 X populations, 1 Serfling transfer,
// 1 block sampling) and 4 feed the error bound (2 observed error counts,
// 1 Serfling transfer, 1 block sampling).
inline constexpr double kEpsCountUses = 17.0;
inline constexpr double kEpsErrorUses = 4.0;

inline BlockBounds block_bounds(const ZWindowBounds& zb, double n_z, long long block_length,
                                double eps_sf, double n_pool = -1.0) {
    if (block_length < 0 || block_length % 2 != 0)
        throw std::invalid_argument("block_bounds: block length must be even and nonnegative");
    if (!(n_z > 0.0) || static_cast<double>(block_length) / 2.0 > n_z)
        throw std::invalid_argument("block_bounds: block half must fit in the sifted key");
    if (n_pool >= 0.0 && static_cast<double>(block_length) / 2.0 > n_pool)
        throw std::invalid_argument("block_bounds: block too large for the key pool");

    BlockBounds bb;
    bb.eps_n_l1 = kEpsCountUses * eps_sf;
    bb.eps_e_l1 = kEpsErrorUses * eps_sf;
    bb.clamp_events = zb.clamp_events;
    if (!zb.usable || block_length == 0) return bb;

    const double half = static_cast<double>(block_length) / 2.0;
    double n_l1 = zb.n_z1_lower * half / n_z - serfling_lambda(n_z, half, eps_sf);
    if (n_l1 > half) {
        n_l1 = half;
        ++bb.clamp_events;
    }
    if (!(n_l1 > 0.0)) {
        bb.n_l1_lower = 0.0;
        ++bb.clamp_events;
        return bb;
    }
    bb.n_l1_lower = n_l1;
    // The block half is itself a subsample of the Z single-photon events.
    const double lam = serfling_lambda(zb.n_z1_lower, std::min(n_l1, zb.n_z1_lower), eps_sf);
    bb.e_l1_upper = std::clamp(zb.e_z1_upper + lam / n_l1, 0.0, 1.0);
    bb.usable = true;
    return bb;
}

// Error-test extrapolation to the kept half of a block (capped at 1/2). In
// the symmetric model both recipient channels share one test estimate, so
// the max over recipients is the single value computed here.
inline double keep_half_error_bound(double e_test, long long block_length, double n_test,
                                    double eps_pe) {
    if (!(n_test > 0.0))
        throw std::domain_error("keep_half_error_bound: n_test must be positive");
    if (block_length < 2)
        throw std::domain_error("keep_half_error_bound: block length must be at least 2");
    const double half = static_cast<double>(block_length) / 2.0;
    const double log_term = detail::check_eps(eps_pe, "keep_half_error_bound");
    const double dev = (2.0 / static_cast<double>(block_length)) *
                       std::sqrt((half + 1.0) * (half + n_test) * log_term / (2.0 * n_test));
    return std::min(e_test + dev, 0.5);
}

}  // namespace tfqds
