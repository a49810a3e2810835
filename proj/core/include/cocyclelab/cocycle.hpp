#pragma once

#include "cocyclelab/base.hpp"
#include "cocyclelab/linalg.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cocy {

enum class FamilyKind { GL, SL, Sp, SO };

struct GroupFamily {
    FamilyKind kind = FamilyKind::GL;
    int d = 2;

    static GroupFamily gl(int d) { return {FamilyKind::GL, d}; }
    static GroupFamily sl(int d) { return {FamilyKind::SL, d}; }
    static GroupFamily sp(int d);
    static GroupFamily so(int d) { return {FamilyKind::SO, d}; }

    // membership residual: |det|^-1 style measure for GL, |det-1| for SL,
    // ||M^T J M - J|| for Sp, ||M^T M - I|| + |det-1| for SO
    double residual(const Mat& m) const;
    bool contains(const Mat& m, double tol = 1e-9) const;
    bool saddle_conservative() const { return kind != FamilyKind::SO; }
    bool volume_preserving() const { return kind != FamilyKind::GL; }
    std::string name() const;
};

std::optional<GroupFamily> parse_family(const std::string& name, int d);

// A closed-form or constructed rule x -> matrix.
class Rule {
public:
    virtual ~Rule() = default;
    virtual Mat eval(const BasePoint& x) const = 0;
    // text form for the config format; empty when the rule was produced by a
    // construction and can only be rebuilt by re-running it
    virtual std::string describe() const = 0;
    // if the rule is piecewise constant in coordinate `coord`, its breakpoints
    // in [0,1); std::nullopt otherwise
    virtual std::optional<std::vector<double>> breaks(int coord) const;
};
using RulePtr = std::shared_ptr<const Rule>;

RulePtr constant_rule(const Mat& m);
// cells [i/m, (i+1)/m) of the first coordinate
RulePtr piecewise_rule(const std::vector<Mat>& cells);
// rotation in the (e1, e2) plane by angle 2*pi*(theta0 + k*x0)
RulePtr rotation_field(int d, double theta0, double k);
RulePtr product_rule(const std::vector<RulePtr>& factors);
RulePtr scaled_rule(const RulePtr& inner, double s);
RulePtr function_rule(std::function<Mat(const BasePoint&)> f, std::string label,
                      bool piecewise_constant = false);

RulePtr parse_rule(const std::string& text, int d);

struct Patch {
    RegionSet region;
    RulePtr rule;
};

class MatrixCocycle {
public:
    MatrixCocycle(GroupFamily family, RulePtr generator, std::vector<Patch> patches = {});

    static MatrixCocycle constant(GroupFamily family, const Mat& m);

    const GroupFamily& family() const { return family_; }
    int dim() const { return family_.d; }
    const RulePtr& generator() const { return generator_; }
    const std::vector<Patch>& patches() const { return patches_; }

    // new cocycle with one more patch; throws if the region meets an existing one
    MatrixCocycle with_patch(const RegionSet& region, RulePtr rule) const;

    // checked evaluation, raises FamilyViolation
    Mat evaluate(const BasePoint& x) const;
    // unchecked, for hot loops
    Mat raw(const BasePoint& x) const;
    const Rule& rule_at(const BasePoint& x) const;

private:
    GroupFamily family_;
    RulePtr generator_;
    std::vector<Patch> patches_;
};

Mat compose_n(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x, long n);

struct LpParams {
    double p = 1.0;  // use infinity() for the ess-sup
    int samples = 20000;
    std::uint64_t seed = 1;
};

struct LpEstimate {
    double d = 0.0;
    double delta = 0.0;
    double norm_direct = 0.0;   // ||A - B||_p
    double norm_inverse = 0.0;  // ||A^-1 - B^-1||_p
    double stderr_delta = 0.0;
    double stderr_d = 0.0;
    bool exact = false;
    std::string method;
};

LpEstimate lp_estimate(const MatrixCocycle& a, const MatrixCocycle& b, const DiscreteBase& base,
                       const LpParams& params);
double lp_distance(const MatrixCocycle& a, const MatrixCocycle& b, const DiscreteBase& base,
                   const LpParams& params);

struct IntegrabilityReport {
    double log_plus = 0.0;      // ∫ log+ ||A||
    double log_plus_inv = 0.0;  // ∫ log+ ||A^-1||
    double stderr_plus = 0.0;
    double stderr_inv = 0.0;
    bool finite = true;
};

IntegrabilityReport check_integrability(const MatrixCocycle& a, const DiscreteBase& base,
                                        const LpParams& params);

}  // namespace cocy
