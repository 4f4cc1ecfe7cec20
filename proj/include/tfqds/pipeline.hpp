#pragma once

#include "tfqds/channel.hpp"
#include "tfqds/estimation.hpp"
#include "tfqds/security.hpp"

// End-to-end analytic evaluation: expected observables -> estimation chain
// -> security calculus -> signature rate.

namespace tfqds {

struct PipelineOptions {
    bool as_printed = false;
};

inline SignatureReport evaluate_signature_rate(const SystemParams& sys,
                                               const ProtocolParams& proto,
                                               const SecurityBudget& budget,
                                               const PipelineOptions& opt = {}) {
    const ChannelObservables obs = expected_observables(sys, proto);
    const EstimationOptions est_opt{opt.as_printed};
    const XWindowBounds xb = decoy_bounds_x(obs, proto, budget.eps_sf, est_opt);
    const PopulationBounds pb = population_bounds(proto, budget.eps_sf);
    const ZWindowBounds zb = z_single_photon_bounds(xb, pb, budget.eps_sf);
    const KeyAccounting ka = make_key_accounting(obs.n_z, proto.r_et, obs.e_z);
    SignatureReport report = signature_length(ka, zb, budget, opt.as_printed);
    return signature_rate(report, proto.n_pulses);
}

}  // namespace tfqds
