#pragma once

#include "cocyclelab/lds.hpp"

namespace cocy::harness::detail {

enum class FlowboxKind { mix, saddle };

// Worst-case violations of the flowbox contracts over sampled points.
struct FlowboxAudit {
    double endpoint = 0.0;  // angle (mix) or relative error (saddle), inner ball
    double trace = 0.0;     // max |Tr H| over the whole box
    double det = 0.0;       // max relative |det Phi_B - det Phi_A|
    int endpoint_samples = 0;
    int trace_samples = 0;
};

FlowboxAudit audit_flowbox(const Generator& a, const FlowBase& base, const FlowboxResult& r, FlowboxKind kind,
                           const DirectionField& first, const DirectionField& second, double delta,
                           int endpoint_samples, int trace_samples, std::uint64_t seed);

// uniform point of the transversal ball scaled by `shrink` (sigma for the inner ball)
BasePoint ball_sample(const FlowboxSpec& spec, const DiscreteBase& map, double shrink, Rng& rng);

}  // namespace cocy::harness::detail
