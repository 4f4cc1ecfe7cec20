// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Covers the published anchors (maximum secure distance,
// misalignment tolerance, block-length growth), soundness of the estimation
// chain against the single-photon oracle, concentration coverage, the
// scripted adversaries, the math-core spot values, and equivalence of the
// block-length search with an exhaustive scan.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "tfqds/optimizer.hpp"
#include "tfqds/pipeline.hpp"
#include "tfqds/simulator.hpp"

using namespace tfqds;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", index, name,
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

SystemParams table1_system(double distance_km, double e_d = 0.03) {
    SystemParams sys;
    sys.distance_km = distance_km;
    sys.e_d = e_d;
    return sys;
}

struct SweepOutcome {
    std::vector<SweepRow> rows;
    double last_feasible = -1.0;
    ProtocolParams last_feasible_proto;
    bool any_feasible = false;
};

SweepOutcome optimized_sweep(SweepVariable variable, const std::vector<double>& grid,
                             double n_pulses, double eps_target, uint64_t seed) {
    const SystemParams sys = table1_system(50.0);
    SecurityBudget budget;
    budget.eps_target = eps_target;
    ProtocolParams base;
    base.n_pulses = n_pulses;
    SweepSpec spec;
    spec.variable = variable;
    spec.grid = grid;
    OptimizeSettings settings;
    settings.seed = seed;
    settings.effort = 1;
    settings.extra_starts = {base};
    SweepOutcome out;
    out.rows = sweep(sys, budget, SearchSpace{}, base, spec, settings);
    for (const SweepRow& row : out.rows) {
        if (row.report.feasible) {
            out.any_feasible = true;
            out.last_feasible = row.grid_value;
            out.last_feasible_proto = row.proto;
        }
    }
    return out;
}

void criterion_1_robustness() {
    SecurityBudget budget;
    budget.eps_pe = 1e-12;
    const bool pass = p_robust(budget) == 2e-12;
    report(1, "robustness bound is exactly 2 eps_PE", pass,
           fmt("p_robust = %.17g", p_robust(budget)));
}

void criterion_2_distance_anchor() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> grid;
    for (int i = 0; i <= 39; ++i) grid.push_back(10.0 * i);
    const SweepOutcome at13 =
        optimized_sweep(SweepVariable::distance_km, grid, 1e13, 1e-5, 20240801);
    const double sweep_seconds = seconds_since(t0);

    bool pass = at13.any_feasible && at13.last_feasible >= 280.0 && at13.last_feasible <= 330.0;
    std::string detail = fmt("max feasible distance at N=1e13: %.0f km (sweep %.1f s)",
                             at13.last_feasible, sweep_seconds);

    // a larger data size must strictly extend the reach
    bool extended = false;
    if (pass) {
        const SystemParams sys = table1_system(at13.last_feasible + 10.0);
        const SecurityBudget budget;
        ProtocolParams base;
        base.n_pulses = 1e15;
        OptimizeSettings settings;
        settings.seed = 20240802;
        settings.effort = 1;
        ProtocolParams warm = at13.last_feasible_proto;
        warm.n_pulses = 1e15;
        settings.extra_starts = {warm};
        const OptimizeResult res = optimize(sys, budget, SearchSpace{}, base, settings);
        extended = res.report.feasible;
        detail += fmt("; N=1e15 feasible at %.0f km: %s", sys.distance_km,
                      extended ? "yes" : "no");
    }
    pass = pass && extended && sweep_seconds < 300.0;
    report(2, "secure distance anchor (280..330 km at N=1e13, grows with N)", pass, detail);
}

void criterion_3_misalignment_anchor() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> grid;
    for (int i = 1; i <= 12; ++i) grid.push_back(0.02 * i);

    const SweepOutcome loose = optimized_sweep(SweepVariable::e_d, grid, 1e13, 1e-5, 20240803);
    const SweepOutcome tight = optimized_sweep(SweepVariable::e_d, grid, 1e13, 1e-10, 20240804);

    bool pass = loose.any_feasible && loose.last_feasible >= 0.14 - 1e-9 &&
                loose.last_feasible <= 0.22 + 1e-9;
    std::string detail =
        fmt("max feasible e_d at eps=1e-5: %.2f", loose.any_feasible ? loose.last_feasible : -1.0);

    // every point still feasible at the tighter level pays signature rate
    int compared = 0;
    bool strictly_lower = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SignatureReport& tight_report = tight.rows[i].report;
        if (!tight_report.feasible) continue;
        // the tight optimum evaluated at the loose target floors the loose
        // optimum, so the comparison cannot be spoiled by optimizer luck
        const SystemParams sys = table1_system(50.0, grid[i]);
        SecurityBudget budget;
        budget.eps_target = 1e-5;
        const double floor_rate =
            evaluate_signature_rate(sys, tight.rows[i].proto, budget).rate;
        const double best_loose = std::max(loose.rows[i].report.rate, floor_rate);
        ++compared;
        if (!(tight_report.rate < best_loose)) strictly_lower = false;
    }
    const double elapsed = seconds_since(t0);
    pass = pass && compared > 0 && strictly_lower && elapsed < 120.0;
    detail += fmt("; rate strictly lower at eps=1e-10 on %d feasible points: %s (%.1f s)",
                  compared, strictly_lower ? "yes" : "no", elapsed);
    report(3, "misalignment tolerance anchor (0.14..0.22, tighter eps costs rate)", pass, detail);
}

void criterion_4_block_length_shape() {
    std::vector<double> grid;
    for (int i = 0; i <= 7; ++i) grid.push_back(50.0 * i);
    const SweepOutcome out =
        optimized_sweep(SweepVariable::distance_km, grid, 1e13, 1e-5, 20240805);

    bool monotone = true;
    long long prev_block = 0;
    double prev_bits = 1e300;
    long long block200 = 0, block300 = 0;
    for (const SweepRow& row : out.rows) {
        if (!row.report.feasible) break;  // monotonicity over the feasible prefix
        if (row.report.block_length < prev_block) monotone = false;
        if (row.report.n_bits > prev_bits) monotone = false;
        prev_block = row.report.block_length;
        prev_bits = row.report.n_bits;
        if (row.grid_value == 200.0) block200 = row.report.block_length;
        if (row.grid_value == 300.0) block300 = row.report.block_length;
    }
    const bool knee = block200 > 0 && block300 > 0 &&
                      static_cast<double>(block300) > 2.0 * static_cast<double>(block200);
    report(4, "block length grows and signed bits shrink with distance", monotone && knee,
           fmt("monotone over feasible prefix: %s; L(300)/L(200) = %.2f", monotone ? "yes" : "no",
               block200 > 0 && block300 > 0 ? static_cast<double>(block300) / block200 : 0.0));
}

void criterion_5_oracle_soundness() {
    auto rng = make_engine(20240806, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int tested = 0, violations = 0;
    while (tested < 100) {
        SystemParams sys;
        sys.eta_d = 0.3 + 0.6 * unit(rng);
        sys.p_dc = std::pow(10.0, -8.0 + 2.0 * unit(rng));
        sys.e_d = 0.1 * unit(rng);
        sys.distance_km = 400.0 * unit(rng);
        ProtocolParams proto;
        proto.w = std::exp(std::log(1e-3) + unit(rng) * std::log(0.3 / 1e-3));
        proto.v = std::min(proto.w * (1.5 + 2.0 * unit(rng)), 0.999);
        proto.u = 0.1 + 0.9 * unit(rng);
        proto.p_z = 0.2 + 0.7 * unit(rng);
        const double rem = 1.0 - proto.p_z;
        proto.p_w = rem * (0.05 + 0.55 * unit(rng));
        proto.p_v = (rem - proto.p_w) * (0.05 + 0.45 * unit(rng));
        proto.p_s = 0.01 + 0.49 * unit(rng);
        if (proto.w >= proto.v || proto.p_w < 1e-4 || proto.p_v < 1e-4) continue;

        const ChannelObservables obs = expected_observables(sys, proto);
        const XWindowBounds xb = decoy_bounds_x(obs, proto, 1.0);
        const PopulationBounds pb = population_bounds(proto, 1.0);
        const ZWindowBounds zb = z_single_photon_bounds(xb, pb, 1.0);
        if (!zb.usable || obs.n_z < 4.0) continue;
        const long long block = 2 * static_cast<long long>(std::floor(obs.n_z / 4.0));
        if (block < 2) continue;
        const BlockBounds bb = block_bounds(zb, obs.n_z, block, 1.0);
        if (!bb.usable) continue;
        ++tested;
        const SinglePhotonTruth truth = true_single_photon_oracle(sys, proto);
        const double bound_fraction = bb.n_l1_lower / (static_cast<double>(block) / 2.0);
        if (bound_fraction > truth.n_z1 / obs.n_z * (1.0 + 1e-9)) ++violations;
        if (bb.e_l1_upper < truth.error_rate * (1.0 - 1e-9)) ++violations;
    }
    report(5, "estimation chain is sound against the single-photon oracle", violations == 0,
           fmt("%d violations over %d valid draws", violations, tested));
}

void criterion_6_concentration_coverage() {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps = 0.01;
    const long long trials = 100000;
    const long long threshold = oracles::binomial_quantile(trials, eps, 0.99L);

    // Upsilon form: how many of the marked events land on the Z side
    const long long n_x_pop = 20000, n_z_pop = 10000, marked = 9000;
    oracles::HypergeometricSampler upsilon_sampler(n_x_pop + n_z_pop, marked, n_z_pop);
    auto rng = make_engine(20240807, 0);
    long long upsilon_violations = 0;
    for (long long t = 0; t < trials; ++t) {
        const long long in_z = upsilon_sampler(rng);
        const long long in_x = marked - in_z;
        const double bound =
            static_cast<double>(in_x) * n_z_pop / static_cast<double>(n_x_pop) -
            serfling_upsilon(static_cast<double>(n_z_pop), static_cast<double>(n_x_pop), eps);
        upsilon_violations += static_cast<double>(in_z) < bound;
    }

    // Lambda form: block half sampled from the sifted key
    const long long n_z = 30000, n_z1 = 9000, half = 5000;
    oracles::HypergeometricSampler lambda_sampler(n_z, n_z1, half);
    long long lambda_violations = 0;
    const double lambda_bound =
        static_cast<double>(n_z1) * half / static_cast<double>(n_z) -
        serfling_lambda(static_cast<double>(n_z), static_cast<double>(half), eps);
    for (long long t = 0; t < trials; ++t)
        lambda_violations += static_cast<double>(lambda_sampler(rng)) < lambda_bound;

    const double elapsed = seconds_since(t0);
    const bool pass =
        upsilon_violations <= threshold && lambda_violations <= threshold && elapsed < 60.0;
    report(6, "Serfling bounds hold at the stated confidence", pass,
           fmt("violations %lld (Upsilon) and %lld (Lambda) of %lld trials, limit %lld (%.1f s)",
               upsilon_violations, lambda_violations, trials, threshold, elapsed));
}

void criterion_7_adversary_bounds() {
    const auto t0 = std::chrono::steady_clock::now();
    bool repudiation_ok = true;
    std::string detail;
    for (long long block : {1000LL, 10000LL}) {
        for (double gap : {0.02, 0.04}) {
            const double s_a = 0.10, s_v = 0.10 + gap;
            const AdversaryStats stats = adversary_repudiation(20000, block, s_a, s_v, 20240808);
            const double limit = stats.analytic_bound + 3.0 * stats.interval.half_width;
            if (stats.interval.p_hat > limit) repudiation_ok = false;
            detail += fmt("L=%lld gap=%.2f: %.4f<=%.4f; ", block, gap, stats.interval.p_hat,
                          limit);
        }
    }

    bool forge_ok = true;
    const std::vector<std::pair<long long, double>> forge_grid = {{200, 0.45}, {1000, 0.48}};
    for (const auto& [block, s_v] : forge_grid) {
        const long long trials = 200000;
        const AdversaryStats stats = adversary_forge(trials, block, s_v, 0.5, 20240809);
        const long long cutoff = static_cast<long long>(std::ceil(s_v * block / 2.0)) - 1;
        const double exact =
            static_cast<double>(oracles::binomial_cdf(block / 2, 0.5L, cutoff));
        const double sigma = std::sqrt(exact * (1.0 - exact) / trials);
        if (std::abs(stats.interval.p_hat - exact) > 3.0 * sigma) forge_ok = false;
        if (std::abs(stats.analytic_bound - exact) > 1e-9 * exact) forge_ok = false;
    }
    const double elapsed = seconds_since(t0);
    report(7, "adversary statistics respect the analytic bounds",
           repudiation_ok && forge_ok && elapsed < 120.0,
           detail + fmt("forge tail match: %s (%.1f s)", forge_ok ? "yes" : "no", elapsed));
}

void criterion_8_mathcore() {
    bool pass = true;
    for (int i = 0; i <= 1000; ++i) {
        const double h = i / 1000.0;
        if (std::abs(binary_entropy(inverse_binary_entropy(h)) - h) > 1e-12) pass = false;
    }
    const double ring = ring_integral(1.0);
    if (std::abs(ring - 1.26607) > 1e-4) pass = false;
    if (std::abs(ring - static_cast<double>(oracles::ring_integral_ld(1.0L))) > 1e-9) pass = false;

    const auto rel = [](double a, long double b) {
        return std::abs(a - static_cast<double>(b)) / std::abs(static_cast<double>(b));
    };
    const long double ln12 = std::log(1e12L);
    if (rel(hoeffding_delta(1e6, 1e-12), std::sqrt(1e6L * ln12 / 2.0L)) > 1e-9) pass = false;
    if (rel(serfling_upsilon(100, 100, 1e-12), std::sqrt(101.0L * 200.0L * ln12 / 200.0L)) > 1e-9)
        pass = false;
    if (rel(serfling_lambda(1000, 100, 1e-12), std::sqrt(901.0L * 100.0L * ln12 / 2000.0L)) > 1e-9)
        pass = false;
    report(8, "math-core round trips and spot values", pass, fmt("ring_integral(1) = %.8f", ring));
}

void criterion_9_search_equivalence() {
    auto rng = make_engine(20240810, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0, feasible_cases = 0, tested = 0;
    while (tested < 50) {
        // pools capped at 1e4 keys; a pool that small can only sign with a
        // large error-test share, clean keys and a loose target, so half the
        // draws aim at that pocket and half roam wider
        const bool pocket = tested % 2 == 0;
        const double n_z = pocket ? 12000.0 + 10000.0 * unit(rng) : 4000.0 + 12000.0 * unit(rng);
        const double r_et = pocket ? 0.4 + 0.15 * unit(rng) : 0.1 + 0.3 * unit(rng);
        const double e_test = pocket ? 0.002 + 0.01 * unit(rng) : 0.002 + 0.06 * unit(rng);
        const KeyAccounting ka = make_key_accounting(n_z, r_et, e_test);
        if (ka.n_pool > 10000.0 || ka.n_pool < 4.0) continue;
        ++tested;
        ZWindowBounds zb;
        zb.n_z1_lower = n_z * (pocket ? 0.88 + 0.09 * unit(rng) : 0.4 + 0.55 * unit(rng));
        zb.e_z1_upper = pocket ? 0.004 + 0.016 * unit(rng) : 0.01 + 0.09 * unit(rng);
        zb.m_z1_upper = zb.n_z1_lower * zb.e_z1_upper;
        zb.usable = true;
        SecurityBudget budget;
        budget.eps_target = unit(rng) < 0.5 ? 1e-2 : 3e-3;
        budget.eps_sf = 1e-6;
        budget.eps_pe = 1e-6;
        budget.g = 1e-6;

        const SignatureReport found = signature_length(ka, zb, budget);
        long long brute = 0;
        const long long max_l = static_cast<long long>(std::floor(ka.n_pool)) / 2 * 2;
        for (long long l = 2; l <= max_l; l += 2) {
            if (detail::evaluate_block_length(zb, ka, budget, l, false).feasible) {
                brute = l;
                break;
            }
        }
        if (brute == 0) {
            if (found.feasible) ++mismatches;
        } else {
            ++feasible_cases;
            if (!found.feasible || found.block_length != brute) ++mismatches;
        }
    }
    // a run where nothing is feasible would prove nothing
    report(9, "block-length search equals the exhaustive scan",
           mismatches == 0 && feasible_cases >= 10,
           fmt("%d mismatches over 50 instances (%d feasible)", mismatches, feasible_cases));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1_robustness();
    criterion_2_distance_anchor();
    criterion_3_misalignment_anchor();
    criterion_4_block_length_shape();
    criterion_5_oracle_soundness();
    criterion_6_concentration_coverage();
    criterion_7_adversary_bounds();
    criterion_8_mathcore();
    criterion_9_search_equivalence();
    std::printf("%d/9 criteria passed (%.1f s total)\n", 9 - failures, seconds_since(t0));
    return failures;
}
