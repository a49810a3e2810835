#pragma once

#include "cocyclelab/base.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/lyapunov.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cocy {

// ---------------------------------------------------------------- direction mixing

struct MixOptions {
    double p = 1.0;
    double max_measure = 0.05;  // upper cap on mu(V_eps)
    bool allow_parallel = false;  // caller bypass: parallel E, F return A unchanged
};

struct MixResult {
    MatrixCocycle B;
    RegionSet region;
    Mat R;                 // steering map with R u = v
    double measure = 0.0;  // mu(V_eps)
    LpEstimate distance;
    double alignment_error = 0.0;  // angle between B(y) E and A(y) F
};

MixResult mix_directions(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& y, const Vec& e_dir,
                         const Vec& f_dir, double eps, const MixOptions& opts = {});

// ---------------------------------------------------------------- splitting

struct SplitPlan {
    RegionSet V = RegionSet::interval(0.5, 0.1);
    Vec e;                   // empty: first basis vector
    double delta = 1.0;
    double M = 0.0;          // 0: measured over V ∪ T(V)
    long return_cap = 10000000;
    long check_n = 20000;    // orbit length of the one-point precheck, 0 skips it
    SpectrumOptions spectrum;
    std::vector<double> ps{1.0, 2.0, 4.0};
    long verify_n = 0;       // orbit length for exponent verification, 0 skips it
    long line_check_n = 10000;
    std::uint64_t seed = 1;
};

struct DistanceCheck {
    double p = 1.0;
    LpEstimate c1;
    double bound_c1 = 0.0;
    LpEstimate d;
    double bound_d = 0.0;
};

struct SplitReport {
    double mu_V = 0.0;
    double M = 0.0;
    double K = 1.0;
    double delta = 0.0;
    std::vector<double> precheck_exponents;
    std::vector<DistanceCheck> distances;
    bool verified = false;
    long n = 0;
    double exponent_D = 0.0, stderr_D = 0.0;    // along v(x)
    double exponent_C1 = 0.0, stderr_C1 = 0.0;
    double visit_frequency = 0.0;
    double predicted = 0.0;                     // exponent_C1 + log(1+delta) mu(V)
    SpectrumEstimate spectrum_D;
    double sum_rule_lhs = 0.0;                  // sum of D exponents
    double sum_rule_rhs = 0.0;                  // d * lambda_A = Birkhoff average of log|det A|
    double line_field_error = 0.0;              // max angle of D(x)E(x) vs E(Tx)
    double det_residual = 0.0;                  // max |det D - det A| / |det A|
};

// v(x): normalized transport of e from the last visit to T(V).
class LineField {
public:
    LineField(MatrixCocycle a, DiscreteBase base, RegionSet V, Vec e, long cap);
    // k(x) = min{n >= 1 : T^-n x in T(V)}; -1 past the cap
    long return_time(const BasePoint& x) const;
    bool in_image(const BasePoint& x) const;  // x in T(V)
    Vec at(const BasePoint& x) const;

private:
    MatrixCocycle a_;
    DiscreteBase base_;
    RegionSet V_;
    Vec e_;
    long cap_;
};

struct SplitResult {
    MatrixCocycle C1, C2, D;
    LineField field;
    SplitReport report;
};

SplitResult split_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const SplitPlan& plan);

// Measured exponent of `c` along `v` from x0, with block standard error.
struct DirectionEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};
DirectionEstimate direction_exponent_field(const MatrixCocycle& c, const DiscreteBase& base, const BasePoint& x0,
                                           const Vec& v, long n, int blocks = 20);

// ---------------------------------------------------------------- scaling

struct ScaleResult {
    MatrixCocycle B;
    RegionSet U;           // realized region (shrunk when the budget demanded it)
    bool shrunk = false;
    LpEstimate distance;
};

ScaleResult scale_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const RegionSet& U, double delta,
                           double eps, double p = 1.0);

// ---------------------------------------------------------------- densification

struct DensifyOptions {
    double delta = 1.718281828459045;
    double p = 1.0;
    long n = 200000;
    SpectrumOptions spectrum;
    std::uint64_t seed = 1;
};

struct DensifyReport {
    int steps = 0;
    std::vector<double> exponents;
    std::vector<double> stderrs;
    std::vector<int> multiplicities;
    double tolerance = 0.0;   // grouping tolerance used for the final structure
    double distance = 0.0;    // accumulated d_p over steps
    bool simple = false;
};

struct DensifyResult {
    MatrixCocycle B;
    DensifyReport report;
};

DensifyResult densify_simple(const MatrixCocycle& a, const DiscreteBase& base, double eps,
                             const DensifyOptions& opts = {});

// A region of measure mu with V ∩ T(V) = ∅, or nullopt when none is found.
std::optional<RegionSet> choose_split_region(const DiscreteBase& base, double mu);

// ---------------------------------------------------------------- collapse

struct CollapsePlan {
    int k = 1;
    double delta = 0.1;
    long horizon = 200;
    RegionSet W = RegionSet::interval(0.5, 0.003);
    bool strict = false;      // raise DegenerateGap instead of the no-op
    long lambda_n = 20000;    // orbit length for the lambda-hat values on the right side
};

struct CollapseStep {
    Mat B_mid;
    Mat R;
    bool degenerate = false;
    double lhs = 0.0;            // (1/n) log ||wedge^k(product with the swap)||
    double rhs = 0.0;            // delta + (lambda_hat_{k-1} + lambda_hat_{k+1}) / 2
    double lhs_unswapped = 0.0;  // same product without the swap
    double swap_error = 0.0;     // angle between R u_k and the contracting continuation
};

// Swap at the midpoint of the horizon-length orbit segment starting at x.
CollapseStep collapse_step(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x,
                           const CollapsePlan& plan);

// Swap map at y from the incoming block P = A^m(T^-m y) and the outgoing
// block G = A^m(y). Returns Id when the k-th gap of P is degenerate.
Mat midpoint_swap(const Mat& incoming, const Mat& outgoing, int k, const GroupFamily& family, bool* degenerate,
                  double* swap_error = nullptr);

struct CollapseParams {
    long horizon = 200;
    long n = 100000;
    int points = 8;
    double p = 1.0;
    double min_coverage = 0.05;   // mu(S) * horizon must reach this
    std::uint64_t seed = 1;
};

struct CollapseReport {
    int k = 1;
    double eps = 0.0, delta = 0.0, p = 1.0;
    Estimate lambda_A, lambda_B;           // Lambda_k
    Estimate lambda_prev_A, lambda_next_A; // Lambda_{k-1}, Lambda_{k+1}
    Estimate jump_A;
    double p3_target = 0.0;   // delta - J_k(A) + Lambda_k(A)
    double p2_target = 0.0;   // delta + (Lambda_{k-1}(A) + Lambda_{k+1}(A)) / 2
    LpEstimate distance;
    RegionSet S;
    double measure = 0.0;
    long first_return = 0;
    bool trivial = false;     // one-point spectrum, B = A
};

struct CollapseResult {
    MatrixCocycle B;
    CollapseReport report;
};

CollapseResult collapse(const MatrixCocycle& a, const DiscreteBase& base, int k, double eps, double delta,
                        const CollapseParams& params = {});

// Replace a constructed patch rule by a constant rule when it does not vary
// over the region (sampled), so distances become exact.
RulePtr freeze_if_constant(const RulePtr& rule, const RegionSet& region, const DiscreteBase& base,
                           std::uint64_t seed);

}  // namespace cocy
