#pragma once

#include "cocyclelab/lds.hpp"

namespace cocy::detail {

// One integration pass over [0, T] in renormalization steps: QR of a frame
// plus an optional tracked vector.
struct PassResult {
    SpectrumEstimate spectrum;
    double dir_value = 0.0, dir_stderr = 0.0;
    double trace_integral = 0.0;
    double T = 0.0;
};

PassResult lds_pass(const Generator& a, const FlowBase& base, const BasePoint& x0, double T_total, double renorm,
                    const LdsSpectrumOptions& opts, const Vec* v0, bool want_spectrum);

}  // namespace cocy::detail
