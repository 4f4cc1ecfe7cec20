#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "tfqds/optimizer.hpp"
#include "tfqds/security.hpp"

// Emission helpers: JSON reports with stable key order and deterministic
// CSV with 17-significant-digit numeric formatting.

namespace tfqds {

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline nlohmann::ordered_json report_to_json(const SignatureReport& r) {
    nlohmann::ordered_json j;
    j["feasible"] = r.feasible;
    j["L"] = r.block_length;
    j["n_l1_lower"] = r.n_l1_lower;
    j["e_l1_upper"] = r.e_l1_upper;
    j["p_e"] = r.p_e;
    j["e_keep"] = r.e_keep;
    j["s_a"] = r.s_a;
    j["s_v"] = r.s_v;
    j["p_robust"] = r.p_robust;
    j["p_repudiation"] = r.p_repudiation;
    j["p_forge"] = r.p_forge;
    j["n_bits"] = r.n_bits;
    j["rate"] = r.rate;
    j["n_z"] = r.n_z;
    j["n_test"] = r.n_test;
    j["n_pool"] = r.n_pool;
    j["e_test"] = r.e_test;
    j["eps_n_l1"] = r.eps_n_l1;
    j["eps_e_l1"] = r.eps_e_l1;
    j["clamp_events"] = r.clamp_events;
    j["diagnostics"] = r.diagnostics;
    return j;
}

inline nlohmann::ordered_json proto_to_json(const ProtocolParams& p) {
    nlohmann::ordered_json j;
    j["w"] = p.w;
    j["v"] = p.v;
    j["u"] = p.u;
    j["p_w"] = p.p_w;
    j["p_v"] = p.p_v;
    j["p_z"] = p.p_z;
    j["p_s"] = p.p_s;
    j["m_slices"] = p.m_slices;
    j["n_pulses"] = p.n_pulses;
    j["r_et"] = p.r_et;
    return j;
}

inline const char* sweep_csv_header() {
    return "grid_value,w,v,u,p_Z,p_s,p_w,p_v,L,n_pool,n_bits,R,"
           "P_robust,P_repudiation,P_forge,feasible";
}

inline std::string sweep_csv_row(const SweepRow& row) {
    const ProtocolParams& p = row.proto;
    const SignatureReport& r = row.report;
    std::string line;
    line += format_g17(row.grid_value);
    for (double x : {p.w, p.v, p.u, p.p_z, p.p_s, p.p_w, p.p_v}) line += "," + format_g17(x);
    line += "," + std::to_string(r.block_length);
    for (double x : {r.n_pool, r.n_bits, r.rate, r.p_robust, r.p_repudiation, r.p_forge})
        line += "," + format_g17(x);
    line += r.feasible ? ",1" : ",0";
    return line;
}

inline const char* trace_csv_header() {
    return "start,evaluations,w,v,u,p_Z,p_s,p_w,p_v,R";
}

inline std::string trace_csv_row(const OptimizeTraceEntry& t) {
    std::string line = std::to_string(t.start_index) + "," + std::to_string(t.evaluations);
    const ProtocolParams& p = t.point;
    for (double x : {p.w, p.v, p.u, p.p_z, p.p_s, p.p_w, p.p_v}) line += "," + format_g17(x);
    line += "," + format_g17(t.rate);
    return line;
}

}  // namespace tfqds
