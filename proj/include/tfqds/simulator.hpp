#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "tfqds/channel.hpp"
#include "tfqds/params.hpp"
#include "tfqds/rng.hpp"

// Monte Carlo realization of the distribution and messaging stages:
// category-level binomial sampling around the linear-model expectations,
// concrete key pools, the Bob-Charlie key symmetrization, threshold
// verification, and scripted adversaries. Sampling happens per event
// category rather than per pulse so that N = 1e13 runs stay cheap.

namespace tfqds {

namespace detail {

inline long long sample_binomial(std::mt19937_64& rng, long long population, double p) {
    if (population < 0) throw std::overflow_error("sample_binomial: negative population");
    if (population == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return population;
    std::binomial_distribution<long long> dist(population, p);
    return dist(rng);
}

inline long long round_population(double x) {
    if (!(x >= 0.0) || x > 9.1e18)
        throw std::overflow_error("category population out of 64-bit range");
    return static_cast<long long>(std::llround(x));
}

}  // namespace detail

// Integer counts for one sender-receiver pair.
struct PairSample {
    // X-window one-detector heralded counts and category populations
    long long n_00 = 0, n_0w = 0, n_w0 = 0, n_0v = 0, n_v0 = 0;
    long long pop_00 = 0, pop_0w = 0, pop_w0 = 0, pop_0v = 0, pop_v0 = 0;
    // effective events: total one-detector clicks and wrong clicks
    long long eff_ww = 0, m_ww = 0, pop_eff_ww = 0;
    long long eff_vv = 0, m_vv = 0, pop_eff_vv = 0;
    // Z windows by sending pattern
    long long pop_z_neither = 0, pop_z_one = 0, pop_z_both = 0;
    long long clicks_z_neither = 0, clicks_z_one = 0, clicks_z_both = 0;
    long long n_z = 0;       // total one-detector heralded Z events
    long long n_z_errors = 0;  // neither-send and both-send clicks are bit errors
};

struct SampledRun {
    PairSample alice_bob;
    PairSample alice_charlie;
    uint64_t seed = 0;
};

namespace detail {

inline PairSample sample_pair(const ProtocolParams& proto, const ClickModel& m,
                              std::mt19937_64& rng) {
    PairSample s;
    const double n = proto.n_pulses;
    const double p0 = proto.p_vacuum();

    s.pop_00 = round_population(p0 * p0 * n);
    s.pop_0w = round_population(p0 * proto.p_w * n);
    s.pop_w0 = s.pop_0w;
    s.pop_0v = round_population(p0 * proto.p_v * n);
    s.pop_v0 = s.pop_0v;
    s.n_00 = sample_binomial(rng, s.pop_00, m.q_00);
    s.n_0w = sample_binomial(rng, s.pop_0w, m.q_w);
    s.n_w0 = sample_binomial(rng, s.pop_w0, m.q_w);
    s.n_0v = sample_binomial(rng, s.pop_0v, m.q_v);
    s.n_v0 = sample_binomial(rng, s.pop_v0, m.q_v);

    const double slice_fraction = m.delta / (2.0 * std::numbers::pi);
    s.pop_eff_ww = round_population(2.0 * proto.p_w * proto.p_w * slice_fraction * n);
    s.pop_eff_vv = round_population(2.0 * proto.p_v * proto.p_v * slice_fraction * n);
    s.eff_ww = sample_binomial(rng, s.pop_eff_ww, m.q_eff_total_w);
    s.eff_vv = sample_binomial(rng, s.pop_eff_vv, m.q_eff_total_v);
    // error clicks are sub-sampled from the clicks
    s.m_ww = sample_binomial(rng, s.eff_ww,
                             m.q_eff_total_w > 0.0 ? m.q_eff_wrong_w / m.q_eff_total_w : 0.0);
    s.m_vv = sample_binomial(rng, s.eff_vv,
                             m.q_eff_total_v > 0.0 ? m.q_eff_wrong_v / m.q_eff_total_v : 0.0);

    const long long pop_z = round_population(proto.p_z * proto.p_z * n);
    const double ps = proto.p_s;
    s.pop_z_neither = round_population((1.0 - ps) * (1.0 - ps) * static_cast<double>(pop_z));
    s.pop_z_one = round_population(2.0 * ps * (1.0 - ps) * static_cast<double>(pop_z));
    s.pop_z_both = std::max(pop_z - s.pop_z_neither - s.pop_z_one, 0LL);
    s.clicks_z_neither = sample_binomial(rng, s.pop_z_neither, m.q_z_neither);
    s.clicks_z_one = sample_binomial(rng, s.pop_z_one, m.q_z_one);
    s.clicks_z_both = sample_binomial(rng, s.pop_z_both, m.q_z_both);
    s.n_z = s.clicks_z_neither + s.clicks_z_one + s.clicks_z_both;
    s.n_z_errors = s.clicks_z_neither + s.clicks_z_both;
    return s;
}

}  // namespace detail

inline SampledRun sample_observables(const SystemParams& sys, const ProtocolParams& proto,
                                     uint64_t seed) {
    const ClickModel m = click_model(sys, proto);
    SampledRun run;
    run.seed = seed;
    auto rng_ab = make_engine(seed, 0xab);
    auto rng_ac = make_engine(seed, 0xac);
    run.alice_bob = detail::sample_pair(proto, m, rng_ab);
    run.alice_charlie = detail::sample_pair(proto, m, rng_ac);
    return run;
}

// View of a sampled pair in the shape the estimation chain consumes.
inline ChannelObservables to_observables(const PairSample& s, const ProtocolParams& proto) {
    ChannelObservables obs;
    const double n = proto.n_pulses;
    const std::array<double, 3> pick = {proto.p_vacuum(), proto.p_w, proto.p_v};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) obs.population_x[a][b] = pick[a] * pick[b] * n;
    obs.n_00 = static_cast<double>(s.n_00);
    obs.n_0w = static_cast<double>(s.n_0w);
    obs.n_w0 = static_cast<double>(s.n_w0);
    obs.n_0v = static_cast<double>(s.n_0v);
    obs.n_v0 = static_cast<double>(s.n_v0);
    obs.m_ww = static_cast<double>(s.m_ww);
    obs.m_vv = static_cast<double>(s.m_vv);
    const double slice_fraction = proto.slice_width() / (2.0 * std::numbers::pi);
    obs.p_eff_ww = 2.0 * proto.p_w * proto.p_w * slice_fraction;
    obs.p_eff_vv = 2.0 * proto.p_v * proto.p_v * slice_fraction;
    obs.population_eff_ww = obs.p_eff_ww * n;
    obs.population_eff_vv = obs.p_eff_vv * n;
    obs.population_z = proto.p_z * proto.p_z * n;
    obs.n_z = static_cast<double>(s.n_z);
    obs.e_z = s.n_z > 0 ? static_cast<double>(s.n_z_errors) / static_cast<double>(s.n_z) : 0.5;
    return obs;
}

// Concrete key strings for one pair: Alice's string, the recipient's string
// with the sampled number of errors placed uniformly at random, the error
// test subset, and the remaining pool.
struct PairKeys {
    std::vector<uint8_t> alice;       // Z_s
    std::vector<uint8_t> recipient;   // Z_s'
    std::vector<uint8_t> is_test;     // test-set mask
    std::vector<uint32_t> pool_index; // positions outside the test set
    long long n_z = 0, n_test = 0, n_pool = 0;
    long long test_errors = 0;
    double test_error_rate = 0;
};

struct KeyPool {
    PairKeys alice_bob;
    PairKeys alice_charlie;
    uint64_t seed = 0;
};

namespace detail {

inline constexpr long long kMaxSiftBits = 1LL << 24;

inline PairKeys build_pair_keys(const PairSample& s, const ProtocolParams& proto,
                                std::mt19937_64& rng) {
    if (s.n_z <= 0) throw std::runtime_error("empty sift: no Z-window events to build keys from");
    if (s.n_z > kMaxSiftBits)
        throw std::runtime_error(
            "sifted key too large for transcript simulation; reduce n_pulses");
    PairKeys k;
    k.n_z = s.n_z;
    const auto n = static_cast<std::size_t>(s.n_z);
    k.alice.resize(n);
    for (auto& bit : k.alice) bit = static_cast<uint8_t>(rng() & 1u);
    k.recipient = k.alice;

    // exactly the sampled number of errors, uniform positions
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto errors = static_cast<std::size_t>(std::min(s.n_z_errors, s.n_z));
    for (std::size_t i = 0; i < errors; ++i) k.recipient[idx[i]] ^= 1u;

    k.n_test = std::llround(proto.r_et * static_cast<double>(s.n_z));
    k.n_pool = k.n_z - k.n_test;
    k.is_test.assign(n, 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (long long i = 0; i < k.n_test; ++i) k.is_test[idx[static_cast<std::size_t>(i)]] = 1;

    k.pool_index.reserve(static_cast<std::size_t>(std::max(k.n_pool, 0LL)));
    for (uint32_t pos = 0; pos < n; ++pos) {
        if (k.is_test[pos]) {
            if (k.alice[pos] != k.recipient[pos]) ++k.test_errors;
        } else {
            k.pool_index.push_back(pos);
        }
    }
    k.test_error_rate = k.n_test > 0
                            ? static_cast<double>(k.test_errors) / static_cast<double>(k.n_test)
                            : 0.0;
    return k;
}

}  // namespace detail

inline KeyPool build_key_pools(const SampledRun& run, const ProtocolParams& proto) {
    KeyPool pool;
    pool.seed = run.seed;
    auto rng_ab = make_engine(run.seed, 0x9ab);
    auto rng_ac = make_engine(run.seed, 0x9ac);
    pool.alice_bob = detail::build_pair_keys(run.alice_bob, proto, rng_ab);
    pool.alice_charlie = detail::build_pair_keys(run.alice_charlie, proto, rng_ac);
    return pool;
}

// One signing round: Alice sends (m, Sig_m); Bob authenticates with s_a and
// forwards; Charlie verifies with s_v. Mismatch counts are compared against
// the real-valued products s * L/2 with strict less-than.
struct SignatureTranscript {
    int message = 0;
    long long block_length = 0;  // L
    std::vector<uint32_t> bob_keep, bob_forward;          // indices into [0, L)
    std::vector<uint32_t> charlie_keep, charlie_forward;  // indices into [0, L)
    long long bob_mismatch_keep = 0, bob_mismatch_forward = 0;
    long long charlie_mismatch_keep = 0, charlie_mismatch_forward = 0;
    bool bob_accepts = false;
    bool charlie_accepts = false;
};

inline SignatureTranscript sign_and_verify(const KeyPool& pool, int message, long long block_length,
                                           double s_a, double s_v, uint64_t seed) {
    if (message != 0 && message != 1)
        throw std::invalid_argument("sign_and_verify: message must be 0 or 1");
    if (block_length < 2 || block_length % 2 != 0)
        throw std::invalid_argument("sign_and_verify: block length must be even and >= 2");
    const long long need = 2 * block_length;  // both possible messages reserve a block
    if (need > pool.alice_bob.n_pool || need > pool.alice_charlie.n_pool)
        throw std::runtime_error("pool exhausted: key pool cannot supply the signature block");

    SignatureTranscript t;
    t.message = message;
    t.block_length = block_length;
    const auto l = static_cast<std::size_t>(block_length);
    const std::size_t offset = static_cast<std::size_t>(message) * l;

    auto rng = make_engine(seed, 0x516);
    auto split_half = [&](std::vector<uint32_t>& keep, std::vector<uint32_t>& forward) {
        std::vector<uint32_t> order(l);
        std::iota(order.begin(), order.end(), 0u);
        std::shuffle(order.begin(), order.end(), rng);
        keep.assign(order.begin(), order.begin() + l / 2);
        forward.assign(order.begin() + l / 2, order.end());
    };
    split_half(t.bob_keep, t.bob_forward);
    split_half(t.charlie_keep, t.charlie_forward);

    auto mismatches = [&](const PairKeys& keys, const std::vector<uint32_t>& half) {
        long long count = 0;
        for (uint32_t i : half) {
            const uint32_t pos = keys.pool_index[offset + i];
            count += keys.alice[pos] != keys.recipient[pos];
        }
        return count;
    };
    t.bob_mismatch_keep = mismatches(pool.alice_bob, t.bob_keep);
    t.charlie_mismatch_keep = mismatches(pool.alice_charlie, t.charlie_keep);
    t.bob_mismatch_forward = mismatches(pool.alice_charlie, t.charlie_forward);
    t.charlie_mismatch_forward = mismatches(pool.alice_bob, t.bob_forward);

    const double half = static_cast<double>(block_length) / 2.0;
    t.bob_accepts = static_cast<double>(t.bob_mismatch_keep) < s_a * half &&
                    static_cast<double>(t.bob_mismatch_forward) < s_a * half;
    t.charlie_accepts = static_cast<double>(t.charlie_mismatch_keep) < s_v * half &&
                        static_cast<double>(t.charlie_mismatch_forward) < s_v * half;
    return t;
}

struct WilsonInterval {
    double p_hat = 0, lo = 0, hi = 0, half_width = 0;
};

inline WilsonInterval wilson_interval(long long successes, long long trials, double z = 1.96) {
    WilsonInterval w;
    if (trials <= 0) return w;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    w.p_hat = p;
    w.lo = std::max(center - spread, 0.0);
    w.hi = std::min(center + spread, 1.0);
    w.half_width = spread;
    return w;
}

struct AdversaryStats {
    long long trials = 0;
    long long successes = 0;
    WilsonInterval interval;
    double analytic_bound = 1.0;
};

// Optimal repudiation strategy: Alice injects i.i.d. mismatches at rate
// (s_a + s_v)/2 into both recipients' keys. Success means Bob accepts while
// Charlie rejects. The analytic bound is 2 exp(-(s_v - s_a)^2 L / 4).
inline AdversaryStats adversary_repudiation(long long trials, long long block_length, double s_a,
                                            double s_v, uint64_t seed) {
    if (!(s_a < s_v)) throw std::invalid_argument("adversary_repudiation: requires s_a < s_v");
    if (block_length < 2 || block_length % 2 != 0)
        throw std::invalid_argument("adversary_repudiation: block length must be even and >= 2");
    AdversaryStats stats;
    stats.trials = trials;
    const double gap = s_v - s_a;
    stats.analytic_bound =
        std::min(2.0 * std::exp(-0.25 * gap * gap * static_cast<double>(block_length)), 1.0);

    const double rate = 0.5 * (s_a + s_v);
    const double half = static_cast<double>(block_length) / 2.0;
    const auto l = static_cast<std::size_t>(block_length);
    const auto threshold =
        static_cast<uint64_t>(rate * 18446744073709551615.0);  // rate * (2^64 - 1)

    std::vector<uint8_t> bob_mis(l), charlie_mis(l);
    for (long long trial = 0; trial < trials; ++trial) {
        auto rng = make_engine(seed, 0x2e9 + static_cast<uint64_t>(trial));
        for (auto& bit : bob_mis) bit = rng() < threshold;
        for (auto& bit : charlie_mis) bit = rng() < threshold;
        // random halves: shuffle, first half kept, second half forwarded
        std::shuffle(bob_mis.begin(), bob_mis.end(), rng);
        std::shuffle(charlie_mis.begin(), charlie_mis.end(), rng);
        long long bob_keep = 0, bob_fwd = 0, cha_keep = 0, cha_fwd = 0;
        for (std::size_t i = 0; i < l / 2; ++i) {
            bob_keep += bob_mis[i];
            cha_keep += charlie_mis[i];
        }
        for (std::size_t i = l / 2; i < l; ++i) {
            bob_fwd += bob_mis[i];
            cha_fwd += charlie_mis[i];
        }
        // S_m^B = (B_keep, C_forward); S_m^C = (C_keep, B_forward)
        const bool bob_accepts = static_cast<double>(bob_keep) < s_a * half &&
                                 static_cast<double>(cha_fwd) < s_a * half;
        const bool charlie_accepts = static_cast<double>(cha_keep) < s_v * half &&
                                     static_cast<double>(bob_fwd) < s_v * half;
        stats.successes += bob_accepts && !charlie_accepts;
    }
    stats.interval = wilson_interval(stats.successes, trials);
    return stats;
}

namespace detail {

// P[Bin(n, p) < cutoff] with the strict-inequality convention, summed in
// log space to stay stable for large n.
inline double binomial_tail_below(long long n, double p, double cutoff) {
    if (cutoff <= 0.0) return 0.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return static_cast<double>(n) < cutoff ? 1.0 : 0.0;
    long long kmax = static_cast<long long>(std::ceil(cutoff)) - 1;
    if (std::ceil(cutoff) == cutoff) kmax = static_cast<long long>(cutoff) - 1;
    if (kmax < 0) return 0.0;
    if (kmax >= n) return 1.0;
    const double logp = std::log(p), logq = std::log1p(-p);
    double sum = 0.0;
    for (long long k = 0; k <= kmax; ++k) {
        const double nd = static_cast<double>(n), kd = static_cast<double>(k);
        const double log_pmf = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
                               std::lgamma(nd - kd + 1.0) + kd * logp + (nd - kd) * logq;
        sum += std::exp(log_pmf);
    }
    return std::min(sum, 1.0);
}

}  // namespace detail

// Guessing-only forger: Bob guesses each of the L/2 unknown bits of
// Charlie's kept half independently with per-bit correctness p_guess.
// Success means the mismatch count stays strictly below s_v L/2; the exact
// binomial tail is returned alongside the empirical frequency.
inline AdversaryStats adversary_forge(long long trials, long long block_length, double s_v,
                                      double p_guess, uint64_t seed) {
    if (block_length < 2 || block_length % 2 != 0)
        throw std::invalid_argument("adversary_forge: block length must be even and >= 2");
    if (!(p_guess >= 0.0 && p_guess <= 1.0))
        throw std::invalid_argument("adversary_forge: p_guess must lie in [0, 1]");
    AdversaryStats stats;
    stats.trials = trials;
    const long long half = block_length / 2;
    const double cutoff = s_v * static_cast<double>(half);
    stats.analytic_bound = detail::binomial_tail_below(half, 1.0 - p_guess, cutoff);

    auto rng = make_engine(seed, 0xf04);
    for (long long trial = 0; trial < trials; ++trial) {
        const long long mism = detail::sample_binomial(rng, half, 1.0 - p_guess);
        stats.successes += static_cast<double>(mism) < cutoff;
    }
    stats.interval = wilson_interval(stats.successes, trials);
    return stats;
}

}  // namespace tfqds
