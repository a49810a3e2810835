#pragma once

#include "cocyclelab/base.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/groups.hpp"
#include "cocyclelab/lyapunov.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cocy {

enum class AlgebraKind { gl, sl, sp };

struct Algebra {
    AlgebraKind kind = AlgebraKind::gl;
    int d = 2;

    static Algebra gl(int d) { return {AlgebraKind::gl, d}; }
    static Algebra sl(int d) { return {AlgebraKind::sl, d}; }
    static Algebra sp(int d);

    // |Tr| for sl, ||M^T J + J M|| for sp, 0 for gl
    double residual(const Mat& m) const;
    bool contains(const Mat& m) const;
    std::string name() const;
    GroupFamily group() const;
};

std::optional<Algebra> parse_algebra(const std::string& name, int d);

// Transversal ball B(center, r) in the section of a suspension flow. With
// lift = 1 the box sits over the image ball {s : T^-1 s ∈ B(center, r)}.
struct FlowboxSpec {
    BasePoint center;
    double r = 0.05;
    double sigma = 0.95;
    int lift = 0;

    // distance of the (lifted back) section point to the center, or +inf
    double radial(const DiscreteBase& section_map, const BasePoint& s) const;
    // 1 - rho(|x - y| / r): 1 on the inner ball, 0 outside the ball
    double taper(double dist) const;
    double section_measure(int section_dim) const;
};

// Local law of one flowbox: the perturbation at flowbox time t over the base
// point y (a section point at height 0).
class FlowboxLaw {
public:
    virtual ~FlowboxLaw() = default;
    virtual Mat H(const BasePoint& y, double t) const = 0;
    virtual std::string label() const = 0;
};

struct FlowboxPatch {
    FlowboxSpec spec;
    std::shared_ptr<const FlowboxLaw> law;
};

// A(z) plus tapered flowbox perturbations. Points are suspension points
// (section coordinates then height) or torus points for the linear flow.
class Generator {
public:
    Generator(Algebra algebra, RulePtr rule, bool height_independent = true);
    static Generator constant(Algebra algebra, const Mat& m);

    const Algebra& algebra() const { return algebra_; }
    int dim() const { return algebra_.d; }
    const RulePtr& rule() const { return rule_; }
    const std::vector<FlowboxPatch>& patches() const { return patches_; }
    bool height_independent() const { return height_independent_; }
    // the constant matrix when the rule is constant
    const std::optional<Mat>& constant_matrix() const { return constant_; }

    Generator with_patch(FlowboxPatch patch, const FlowBase& base) const;

    Mat base_at(const BasePoint& z) const { return rule_->eval(z); }
    Mat eval(const FlowBase& base, const BasePoint& z) const;
    // index of the patch whose column contains the section point, or -1
    int patch_at(const FlowBase& base, const BasePoint& section) const;
    // perturbation part only (sum of tapered H)
    Mat perturbation(const FlowBase& base, const BasePoint& z) const;

private:
    Algebra algebra_;
    RulePtr rule_;
    bool height_independent_ = true;
    std::optional<Mat> constant_;
    std::vector<FlowboxPatch> patches_;
};

struct IntegrateOptions {
    double h = 1e-3;
    bool verify = true;   // step-halving check
    double tol = 1e-6;
};

struct MatriciantInfo {
    double halving_error = 0.0;  // relative disagreement with step h/2
    double trace_integral = 0.0; // Simpson quadrature of Tr A along the orbit
    long rk4_steps = 0;
};

// Phi_A^t(x); t < 0 via the inverse of the forward matriciant from phi^t(x).
Mat integrate_matriciant(const Generator& a, const FlowBase& base, const BasePoint& x, double t,
                         const IntegrateOptions& opts = {}, MatriciantInfo* info = nullptr);

double liouville_residual(const Generator& a, const FlowBase& base, const BasePoint& x, double t, double h = 1e-3);

struct GronwallResult {
    double lhs = 0.0, rhs = 0.0;
    double stderr_lhs = 0.0, stderr_rhs = 0.0;
    double sigma() const { return stderr_lhs + stderr_rhs; }
    bool holds() const { return lhs <= rhs + 3.0 * sigma(); }
};

GronwallResult gronwall_check(const Generator& a, const Generator& b, const FlowBase& base, double t, int samples,
                              std::uint64_t seed, double h = 1e-3);

struct LdsSpectrumOptions {
    double h = 1e-3;
    double group_tol = 0.05;
    int blocks = 20;
    bool verify_first = true;  // step-halving check on the first interval
};

SpectrumEstimate lds_spectrum(const Generator& a, const FlowBase& base, const BasePoint& x0, double T_total,
                              double renorm_interval, const LdsSpectrumOptions& opts = {});

// ---------------------------------------------------------------- flowbox constructions

// direction field over base points y of the flowbox
using DirectionField = std::function<Vec(const BasePoint&)>;

struct FlowboxBudget {
    double K = 0.0, L = 0.0, kappa = 0.0;  // measured with the 1.1 safety factor
    double bound_factor = 0.0;             // kappa^-2 + K^2 L, or L K^2
    double r_requested = 0.0, r_used = 0.0;
    double measure = 0.0;                  // section measure of B(x, r)
    double limit = 0.0;                    // (eps / bound_factor)^p
    double h_norm = 0.0, h_norm_stderr = 0.0;  // Monte Carlo ||H||_p
};

struct FlowboxResult {
    Generator B;
    FlowboxPatch patch;
    FlowboxBudget budget;
};

struct FlowboxOptions {
    double p = 1.0;
    bool preimage = false;  // targets given in the fiber over phi^1(y)
    int budget_samples = 64;
    int norm_samples = 4000;
    std::uint64_t seed = 1;
    double h = 1e-3;
};

FlowboxResult flowbox_mix(const Generator& a, const FlowBase& base, FlowboxSpec spec, DirectionField u_field,
                          DirectionField v_field, double eps, const FlowboxOptions& opts = {});
FlowboxResult flowbox_saddle(const Generator& a, const FlowBase& base, FlowboxSpec spec, DirectionField e_field,
                             double delta, double eps, const FlowboxOptions& opts = {});

// Monte Carlo ||perturbation||_p over the flowbox of a patch
std::pair<double, double> perturbation_norm(const Generator& b, const FlowBase& base, const FlowboxPatch& patch,
                                            double p, int samples, std::uint64_t seed);

struct FlowSplitParams {
    BasePoint center;             // center of Sigma at height 0
    double r = 0.05;              // Sigma = B(center, r)
    double sigma = 0.95;
    Vec e;                        // empty: first basis vector
    double delta = 1.718281828459045;
    double eps = 1.0;
    double p = 1.0;
    double T_total = 0.0;         // 0 skips verification
    double renorm = 1.0;
    double h = 1e-3;
    long return_cap = 10000000;
    std::uint64_t seed = 1;
};

struct FlowSplitReport {
    double mu_V = 0.0;
    double effective_measure = 0.0;  // taper-weighted measure of the saddle box
    FlowboxBudget mix_budget, saddle_budget;
    bool verified = false;
    double T = 0.0;
    double exponent_D = 0.0, stderr_D = 0.0;
    double exponent_AH = 0.0, stderr_AH = 0.0;
    double predicted = 0.0;          // exponent_AH + log(1+delta) * effective_measure
    double predicted_plain = 0.0;    // exponent_AH + log(1+delta) * mu(V)
    SpectrumEstimate spectrum_D;
    double sum_rule_rhs = 0.0;       // time average of Tr A
};

struct FlowSplitResult {
    Generator D;
    Generator AH;                    // A + H_q only
    FlowSplitReport report;
};

FlowSplitResult split_spectrum_flow(const Generator& a, const FlowBase& base, const FlowSplitParams& params);

// Time-one map Phi_A^1 over the section point s (height 0) of a suspension.
Mat time_one(const Generator& a, const FlowBase& base, const BasePoint& s, double h = 1e-3);

}  // namespace cocy
