// Minimal library usage: evaluate the signature rate of a fixed parameter
// set over a short distance grid and print one line per point.

#include <cstdio>

#include "tfqds/pipeline.hpp"

int main() {
    tfqds::SystemParams sys;
    tfqds::ProtocolParams proto;
    tfqds::SecurityBudget budget;

    for (double distance = 0.0; distance <= 150.0; distance += 25.0) {
        sys.distance_km = distance;
        const tfqds::SignatureReport report =
            tfqds::evaluate_signature_rate(sys, proto, budget);
        if (report.feasible)
            std::printf("%6.1f km  L=%-9lld n_bits=%-12.1f R=%.3e\n", distance,
                        report.block_length, report.n_bits, report.rate);
        else
            std::printf("%6.1f km  infeasible (%s)\n", distance, report.diagnostics.c_str());
    }
    return 0;
}
