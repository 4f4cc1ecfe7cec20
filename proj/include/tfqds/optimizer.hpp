#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tfqds/pipeline.hpp"
#include "tfqds/rng.hpp"

// Multi-start coordinate-descent optimization of the signature rate over
// the seven free protocol parameters (w, v, u, p_z, p_s, p_w, p_v), plus
// sweep campaigns over distance or misalignment. The objective is the
// closed-form pipeline: cheap, deterministic and noise-free, so a
// gradient-free local search with Latin-hypercube restarts is enough.

namespace tfqds {

struct SearchSpace {
    struct Interval {
        double lo = 0, hi = 0;
    };
    Interval w{1e-4, 1.0};
    Interval v{1e-4, 1.0};
    Interval u{1e-4, 1.0};
    Interval p_z{1e-4, 0.999};
    Interval p_s{1e-4, 0.999};
    Interval p_w{1e-4, 0.999};
    Interval p_v{1e-4, 0.999};

    std::array<Interval, 7> as_array() const { return {w, v, u, p_z, p_s, p_w, p_v}; }

    void validate() const {
        for (const Interval& iv : as_array())
            detail::require(iv.lo > 0.0 && iv.lo <= iv.hi, "search intervals must be nonempty and positive");
    }
};

inline constexpr double kDecoyOrderMargin = 1e-6;  // enforced gap v - w

namespace detail {

using ParamVector = std::array<double, 7>;

inline ParamVector to_vector(const ProtocolParams& p) {
    return {p.w, p.v, p.u, p.p_z, p.p_s, p.p_w, p.p_v};
}

inline ProtocolParams to_proto(const ParamVector& x, const ProtocolParams& base) {
    ProtocolParams p = base;
    p.w = x[0];
    p.v = x[1];
    p.u = x[2];
    p.p_z = x[3];
    p.p_s = x[4];
    p.p_w = x[5];
    p.p_v = x[6];
    return p;
}

// Projects a candidate onto the constraint set: interval bounds, the decoy
// ordering w < v, and p_0 = 1 - p_w - p_v - p_z >= 0 via rescaling of the
// three window probabilities.
inline ParamVector project(ParamVector x, const SearchSpace& space) {
    const auto box = space.as_array();
    for (int i = 0; i < 7; ++i) x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
    if (x[0] > x[1] - kDecoyOrderMargin) {
        x[1] = std::clamp(x[1], box[0].lo + kDecoyOrderMargin, box[1].hi);
        x[0] = std::clamp(std::min(x[0], x[1] - kDecoyOrderMargin), box[0].lo, box[0].hi);
    }
    const double window_sum = x[3] + x[5] + x[6];
    if (window_sum > 1.0) {
        const double scale = (1.0 - 1e-9) / window_sum;
        x[3] = std::max(x[3] * scale, box[3].lo);
        x[5] = std::max(x[5] * scale, box[5].lo);
        x[6] = std::max(x[6] * scale, box[6].lo);
    }
    return x;
}

}  // namespace detail

struct OptimizeTraceEntry {
    int start_index = 0;
    int evaluations = 0;
    ProtocolParams point;
    double rate = 0;
};

struct OptimizeResult {
    ProtocolParams best;
    SignatureReport report;
    int evaluations = 0;
    std::vector<OptimizeTraceEntry> trace;
};

struct OptimizeSettings {
    uint64_t seed = 1;
    int effort = 2;  // fresh Latin-hypercube starts = 4 * effort
    std::vector<ProtocolParams> extra_starts;
    bool as_printed = false;
};

// Pipeline rate at a point; invalid or infeasible points score 0 so the
// search can traverse them.
inline double objective(const SystemParams& sys, const ProtocolParams& proto,
                        const SecurityBudget& budget, const PipelineOptions& opt = {}) {
    try {
        return evaluate_signature_rate(sys, proto, budget, opt).rate;
    } catch (const std::exception&) {
        return 0.0;
    }
}

namespace detail {

struct CoordinateDescent {
    const SystemParams& sys;
    const SecurityBudget& budget;
    const SearchSpace& space;
    const ProtocolParams& base;
    PipelineOptions opt;
    int evaluations = 0;

    double eval(const ParamVector& x) {
        ++evaluations;
        return objective(sys, to_proto(x, base), budget, opt);
    }

    // Log-space steps: intensities span decades, so multiplicative moves
    // resolve every coordinate to the same relative precision.
    std::pair<ParamVector, double> run(ParamVector x0) {
        ParamVector x = project(x0, space);
        double best = eval(x);
        const auto box = space.as_array();
        std::array<double, 7> width{}, step{};
        for (int i = 0; i < 7; ++i) {
            width[i] = std::log(box[i].hi) - std::log(box[i].lo);
            step[i] = 0.2 * width[i];
        }
        const int max_evaluations = 40000;
        while (evaluations < max_evaluations) {
            bool improved = false;
            for (int i = 0; i < 7; ++i) {
                if (width[i] <= 0.0) continue;
                for (double sign : {1.0, -1.0}) {
                    while (true) {
                        ParamVector cand = x;
                        cand[i] *= std::exp(sign * step[i]);
                        cand = project(cand, space);
                        const double val = eval(cand);
                        if (val > best) {
                            x = cand;
                            best = val;
                            improved = true;
                        } else {
                            break;
                        }
                    }
                }
            }
            if (!improved) {
                bool any_live = false;
                for (int i = 0; i < 7; ++i) {
                    step[i] *= 0.5;
                    if (width[i] > 0.0 && step[i] >= 1e-3 * width[i]) any_live = true;
                }
                if (!any_live) break;
            }
        }
        return {x, best};
    }
};

}  // namespace detail

inline OptimizeResult optimize(const SystemParams& sys, const SecurityBudget& budget,
                               const SearchSpace& space, const ProtocolParams& base,
                               const OptimizeSettings& settings = {}) {
    space.validate();
    OptimizeResult result;
    result.best = base;

    const int fresh = std::max(1, 4 * settings.effort);
    const auto box = space.as_array();

    // Latin-hypercube starts in log space, stratified per coordinate.
    std::vector<detail::ParamVector> starts;
    for (const ProtocolParams& p : settings.extra_starts)
        starts.push_back(detail::project(detail::to_vector(p), space));
    {
        auto rng = make_engine(settings.seed, 0x1a7c5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::array<std::vector<int>, 7> strata;
        for (int i = 0; i < 7; ++i) {
            strata[i].resize(fresh);
            for (int k = 0; k < fresh; ++k) strata[i][k] = k;
            std::shuffle(strata[i].begin(), strata[i].end(), rng);
        }
        for (int k = 0; k < fresh; ++k) {
            detail::ParamVector x;
            for (int i = 0; i < 7; ++i) {
                const double cell = (strata[i][k] + unit(rng)) / fresh;
                const double lo = std::log(box[i].lo), hi = std::log(box[i].hi);
                x[i] = std::exp(lo + cell * (hi - lo));
            }
            starts.push_back(detail::project(x, space));
        }
    }

    double best_rate = -1.0;
    detail::ParamVector best_x{};
    int start_index = 0;
    for (const detail::ParamVector& x0 : starts) {
        detail::CoordinateDescent cd{sys, budget, space, base, PipelineOptions{settings.as_printed}};
        auto [x, rate] = cd.run(x0);
        result.evaluations += cd.evaluations;
        result.trace.push_back({start_index++, cd.evaluations, detail::to_proto(x, base), rate});
        if (rate > best_rate) {
            best_rate = rate;
            best_x = x;
        }
    }
    result.best = detail::to_proto(best_x, base);
    try {
        result.report = evaluate_signature_rate(sys, result.best, budget,
                                                PipelineOptions{settings.as_printed});
    } catch (const std::exception& e) {
        result.report = SignatureReport{};
        result.report.diagnostics = e.what();
    }
    return result;
}

enum class SweepVariable { distance_km, e_d };

struct SweepSpec {
    SweepVariable variable = SweepVariable::distance_km;
    std::vector<double> grid;     // strictly increasing
    bool optimize_per_point = true;

    void validate() const {
        detail::require(!grid.empty(), "sweep grid must be nonempty");
        for (std::size_t i = 1; i < grid.size(); ++i)
            detail::require(grid[i] > grid[i - 1], "sweep grid must be strictly increasing");
    }
};

struct SweepRow {
    double grid_value = 0;
    ProtocolParams proto;
    SignatureReport report;
    bool error = false;
    std::string error_message;
};

// Runs the grid left to right, warm-starting each optimization from the
// previous optimum plus fresh random starts. Per-point failures are
// recorded and the sweep continues.
template <class RowCallback>
std::vector<SweepRow> sweep(const SystemParams& sys, const SecurityBudget& budget,
                            const SearchSpace& space, const ProtocolParams& base,
                            const SweepSpec& spec, const OptimizeSettings& settings,
                            RowCallback&& on_row) {
    spec.validate();
    std::vector<SweepRow> rows;
    std::vector<ProtocolParams> warm = settings.extra_starts;
    int point_index = 0;
    for (double value : spec.grid) {
        SystemParams point_sys = sys;
        if (spec.variable == SweepVariable::distance_km)
            point_sys.distance_km = value;
        else
            point_sys.e_d = value;
        SweepRow row;
        row.grid_value = value;
        try {
            if (spec.optimize_per_point) {
                OptimizeSettings point_settings = settings;
                point_settings.seed = splitmix64(settings.seed) ^
                                      static_cast<uint64_t>(point_index + 1);
                point_settings.extra_starts = warm;
                OptimizeResult res = optimize(point_sys, budget, space, base, point_settings);
                row.proto = res.best;
                row.report = res.report;
                if (res.report.feasible) warm = {res.best};
            } else {
                row.proto = base;
                row.report = evaluate_signature_rate(point_sys, base, budget,
                                                     PipelineOptions{settings.as_printed});
            }
        } catch (const std::exception& e) {
            row.error = true;
            row.error_message = e.what();
        }
        on_row(row);
        rows.push_back(std::move(row));
        ++point_index;
    }
    return rows;
}

inline std::vector<SweepRow> sweep(const SystemParams& sys, const SecurityBudget& budget,
                                   const SearchSpace& space, const ProtocolParams& base,
                                   const SweepSpec& spec, const OptimizeSettings& settings = {}) {
    return sweep(sys, budget, space, base, spec, settings, [](const SweepRow&) {});
}

}  // namespace tfqds
