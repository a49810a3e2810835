#include "cocyclelab/perturb.hpp"

#include "cocyclelab/errors.hpp"
#include "cocyclelab/groups.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cocy {

namespace {

Vec unit_or_default(const Vec& e, int d) {
    if (e.size() == 0) return Vec::Unit(d, 0);
    if (e.size() != d) throw InvalidArgument("direction has the wrong dimension");
    if (!(e.norm() > 0.0)) throw InvalidArgument("direction must be nonzero");
    return e / e.norm();
}

// region of measure mu around y (interval on the circle, square on the torus)
RegionSet region_around(const DiscreteBase& base, const BasePoint& y, double mu) {
    if (base.dim() == 2) {
        const double s = std::sqrt(mu);
        return RegionSet::box(frac(y[0] - 0.5 * s), s, frac(y[1] - 0.5 * s), s);
    }
    return RegionSet::interval(frac(y[0] - 0.5 * mu), mu);
}

// same position, measure scaled down to mu
RegionSet shrink_to(const RegionSet& r, double mu) {
    RegionSet out = r;
    if (r.kind == RegionSet::Kind::Box) {
        const double f = std::sqrt(mu / r.measure());
        out.len = r.len * f;
        out.wid = r.wid * f;
    } else if (r.kind == RegionSet::Kind::Interval) {
        out.len = mu;
    } else if (r.kind == RegionSet::Kind::Whole) {
        out = RegionSet::interval(0.0, mu);
    }
    return out;
}

// sup over sampled points of a pointwise quantity
template <class F>
double sampled_sup(const RegionSet& region, const DiscreteBase& base, std::uint64_t seed, int count, F&& f) {
    Rng rng(seed);
    double m = 0.0;
    for (int i = 0; i < count; ++i) m = std::max(m, f(sample_in(region, base, rng)));
    return m;
}

double delta_budget(double eps) { return eps >= 1.0 ? std::numeric_limits<double>::infinity() : eps / (1.0 - eps); }

}  // namespace

RulePtr freeze_if_constant(const RulePtr& rule, const RegionSet& region, const DiscreteBase& base,
                           std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Mat m0 = rule->eval(sample_in(region, base, rng));
    const double tol = 1e-13 * (1.0 + m0.cwiseAbs().maxCoeff());
    for (int i = 0; i < 64; ++i) {
        const Mat m = rule->eval(sample_in(region, base, rng));
        if ((m - m0).cwiseAbs().maxCoeff() > tol) return rule;
    }
    return constant_rule(m0);
}

// ---------------------------------------------------------------- mixing

MixResult mix_directions(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& y, const Vec& e_dir,
                         const Vec& f_dir, double eps, const MixOptions& opts) {
    const int d = a.dim();
    if (e_dir.size() != d || f_dir.size() != d) throw InvalidArgument("direction has the wrong dimension");
    if (!(e_dir.norm() > 0.0) || !(f_dir.norm() > 0.0)) throw InvalidArgument("directions must be nonzero");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const Vec u = e_dir / e_dir.norm();
    const Vec v = f_dir / f_dir.norm();
    if (projective_angle(u, v) < 1e-12) {
        if (!opts.allow_parallel) throw DegenerateDirections("E and F directions are parallel");
        RegionSet none = RegionSet::interval(y[0], 1.0);
        none.len = 0.0;  // empty window at y
        MixResult r{a, none, Mat::Identity(d, d), 0.0, {}, 0.0};
        r.distance.exact = true;
        r.distance.method = "identical";
        return r;
    }
    // ||u|| = 1, so the 1/||u|| factor is 1 and B stays in the family
    const Mat R = rotation_to(u, v, a.family());
    const Mat Rinv = R.inverse();
    RegionSet probe = region_around(base, y, opts.max_measure);
    const double c = sampled_sup(probe, base, 7, 256, [&](const BasePoint& x) {
        const Mat m = a.raw(x);
        const Mat mi = m.inverse();
        return spectral_norm(m * R - m) + spectral_norm(Rinv * mi - mi);
    });
    double mu = opts.max_measure;
    const double budget = delta_budget(eps);
    if (c > 0.0 && std::isfinite(budget)) mu = std::min(mu, std::pow(0.5 * budget / c, opts.p));
    const RegionSet region = region_around(base, y, mu);
    RulePtr rule;
    if (a.patches().empty()) {
        rule = product_rule({a.generator(), constant_rule(R)});
    } else {
        const MatrixCocycle ac = a;
        rule = freeze_if_constant(function_rule([ac, R](const BasePoint& x) { return Mat(ac.raw(x) * R); }, "mix"),
                                  region, base, 3);
    }
    MatrixCocycle b = a.with_patch(region, rule);
    LpParams lp;
    lp.p = opts.p;
    MixResult r{b, region, R, mu, lp_estimate(a, b, base, lp), 0.0};
    r.alignment_error = projective_angle(b.raw(y) * u, a.raw(y) * v);
    return r;
}

// ---------------------------------------------------------------- line field

LineField::LineField(MatrixCocycle a, DiscreteBase base, RegionSet V, Vec e, long cap)
    : a_(std::move(a)), base_(base), V_(V), e_(std::move(e)), cap_(cap) {}

bool LineField::in_image(const BasePoint& x) const { return V_.contains(base_.backward(x)); }

long LineField::return_time(const BasePoint& x) const {
    // T^-n x ∈ T(V)  <=>  T^-(n+1) x ∈ V
    BasePoint q = base_.backward(x);
    for (long n = 1; n <= cap_; ++n) {
        q = base_.backward(q);
        if (V_.contains(q)) return n;
    }
    return -1;
}

Vec LineField::at(const BasePoint& x) const {
    if (in_image(x)) return e_;
    const long k = return_time(x);
    if (k < 0) return Vec::Constant(e_.size(), std::numeric_limits<double>::quiet_NaN());
    BasePoint z = iterate(base_, x, -k);
    Vec v = e_;
    for (long i = 0; i < k; ++i) {
        v = a_.raw(z) * v;
        v /= v.norm();
        z = base_.forward(z);
    }
    return v;
}

// ---------------------------------------------------------------- splitting

DirectionEstimate direction_exponent_field(const MatrixCocycle& c, const DiscreteBase& base, const BasePoint& x0,
                                           const Vec& v0, long n, int blocks) {
    if (n < blocks) throw InvalidArgument("orbit shorter than the block count");
    Vec v = v0 / v0.norm();
    BasePoint x = x0;
    std::vector<double> sums(static_cast<std::size_t>(blocks), 0.0);
    std::vector<long> lens(static_cast<std::size_t>(blocks), 0);
    double total = 0.0;
    for (long j = 0; j < n; ++j) {
        v = c.raw(x) * v;
        const double nv = v.norm();
        const double l = std::log(nv);
        v /= nv;
        const auto b = static_cast<std::size_t>(j * blocks / n);
        sums[b] += l;
        lens[b] += 1;
        total += l;
        x = base.forward(x);
    }
    DirectionEstimate e;
    e.value = total / static_cast<double>(n);
    double m = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        const double r = sums[b] / static_cast<double>(lens[b]);
        m += r;
        m2 += r * r;
    }
    const double nb = static_cast<double>(blocks);
    m /= nb;
    if (blocks > 1) e.stderr_ = std::sqrt(std::max(0.0, m2 / nb - m * m) / (nb - 1.0));
    return e;
}

SplitResult split_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const SplitPlan& plan) {
    const int d = a.dim();
    if (d < 2) throw InvalidArgument("splitting needs d >= 2");
    if (!a.family().saddle_conservative())
        throw NotSaddleConservative(a.family().name() + " has no saddle matrices");
    if (!(plan.V.measure() > 0.0)) throw InvalidArgument("V must have positive measure");
    if (!disjoint_from_image(base, plan.V)) throw InvalidArgument("V meets T(V): " + plan.V.describe());
    if (plan.delta < 0.0) throw InvalidArgument("delta must be nonnegative");
    const Vec e = unit_or_default(plan.e, d);

    SplitReport rep;
    rep.mu_V = plan.V.measure();
    rep.K = steering_constant(a.family());
    rep.delta = plan.delta;

    if (plan.check_n > 0) {
        const SpectrumEstimate s = full_spectrum(a, base, sample_measure(base, plan.seed), plan.check_n, plan.spectrum);
        rep.precheck_exponents = s.exponents;
        if (!s.one_point()) {
            std::string ex;
            for (double x : s.exponents) ex += " " + std::to_string(x);
            throw NotOnePoint("spectrum already has a gap above the grouping tolerance:" + ex);
        }
    }

    rep.M = plan.M;
    if (rep.M <= 0.0) {
        rep.M = 1.0;
        rep.M = std::max(rep.M, sampled_sup(plan.V, base, plan.seed + 11, 2000, [&](const BasePoint& x) {
            const Mat m0 = a.raw(x), m1 = a.raw(base.forward(x));
            return std::max({spectral_norm(m0), spectral_norm(m0.inverse()), spectral_norm(m1),
                             spectral_norm(m1.inverse())});
        }));
    }

    LineField field(a, base, plan.V, e, plan.return_cap);
    const Mat A_delta = saddle(e, plan.delta, a.family());
    const MatrixCocycle ac = a;
    const GroupFamily fam = a.family();
    const auto c1_at = [ac, field, e, fam](const BasePoint& x) -> Mat {
        const Mat m = ac.raw(x);
        Vec v = field.at(x);
        if (!v.allFinite()) return m;  // past the return cap: leave A alone
        const Vec q = m * v;
        if (projective_angle(q, e) < 1e-15 && q.dot(e) > 0.0) return m;
        return rotation_to(q, e, fam) * m;
    };
    const RulePtr c1_fn = function_rule(c1_at, "split-c1");
    RulePtr c1_rule = freeze_if_constant(c1_fn, plan.V, base, plan.seed);
    RulePtr d_rule;
    if (c1_rule != c1_fn) {
        d_rule = constant_rule(A_delta * c1_rule->eval(base.point(plan.V.a)));
    } else {
        const RulePtr c1r = c1_rule;
        d_rule = function_rule([c1r, A_delta](const BasePoint& x) { return Mat(A_delta * c1r->eval(x)); }, "split-d");
    }
    MatrixCocycle C1 = a.with_patch(plan.V, c1_rule);
    MatrixCocycle C2(a.family(), constant_rule(Mat::Identity(d, d)), {Patch{plan.V, constant_rule(A_delta)}});
    MatrixCocycle D = a.with_patch(plan.V, d_rule);

    for (double p : plan.ps) {
        DistanceCheck dc;
        dc.p = p;
        LpParams lp;
        lp.p = p;
        lp.seed = plan.seed;
        dc.c1 = lp_estimate(a, C1, base, lp);
        dc.d = lp_estimate(a, D, base, lp);
        const double root = std::pow(rep.mu_V, 1.0 / p);
        dc.bound_c1 = 2.0 * rep.M * rep.K * root;
        dc.bound_d = 2.0 * (2.0 + rep.K) * rep.M * root;
        rep.distances.push_back(dc);
    }

    SplitResult res{C1, C2, D, field, rep};
    if (plan.verify_n <= 0) return res;

    // exponent checks along v(x) from one typical point
    BasePoint x0 = sample_measure(base, plan.seed + 101);
    for (std::uint64_t s = 0; field.return_time(x0) < 0 && !field.in_image(x0); ++s)
        x0 = sample_measure(base, plan.seed + 202 + s);
    const Vec v0 = field.at(x0);
    SplitReport& r = res.report;
    r.verified = true;
    r.n = plan.verify_n;
    const DirectionEstimate ed = direction_exponent_field(D, base, x0, v0, plan.verify_n);
    const DirectionEstimate ec = direction_exponent_field(C1, base, x0, v0, plan.verify_n);
    r.exponent_D = ed.value;
    r.stderr_D = ed.stderr_;
    r.exponent_C1 = ec.value;
    r.stderr_C1 = ec.stderr_;
    r.visit_frequency = visit_frequency(base, plan.V, x0, plan.verify_n);
    r.predicted = ec.value + std::log1p(plan.delta) * rep.mu_V;
    r.spectrum_D = full_spectrum(D, base, x0, plan.verify_n, plan.spectrum);
    r.sum_rule_lhs = r.spectrum_D.sum();
    r.sum_rule_rhs = birkhoff_log_det(a, base, x0, plan.verify_n);

    BasePoint x = x0;
    Vec vx = field.at(x);
    for (long j = 0; j < plan.line_check_n; ++j) {
        const Mat dx = D.raw(x);
        const Mat ax = a.raw(x);
        const double da = ax.determinant();
        r.det_residual = std::max(r.det_residual, std::abs(dx.determinant() - da) / std::abs(da));
        const BasePoint nx = base.forward(x);
        const Vec vn = field.at(nx);
        if (vx.allFinite() && vn.allFinite()) r.line_field_error = std::max(r.line_field_error, projective_angle(dx * vx, vn));
        x = nx;
        vx = vn;
    }
    return res;
}

// ---------------------------------------------------------------- scaling

ScaleResult scale_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const RegionSet& U, double delta,
                           double eps, double p) {
    if (a.family().kind != FamilyKind::GL)
        throw FamilyViolation("scaling by 1+delta leaves " + a.family().name() + "(" + std::to_string(a.dim()) + ")");
    if (!(U.measure() > 0.0)) throw InvalidArgument("U must have positive measure");
    if (delta < 0.0) throw InvalidArgument("delta must be nonnegative");
    if (delta == 0.0) {
        ScaleResult r{a, U, false, {}};
        r.distance.exact = true;
        r.distance.method = "identical";
        return r;
    }
    const double c = sampled_sup(U, base, 5, 512, [&](const BasePoint& x) {
        const Mat m = a.raw(x);
        return delta * spectral_norm(m) + (delta / (1.0 + delta)) * spectral_norm(m.inverse());
    });
    RegionSet u = U;
    bool shrunk = false;
    const double budget = delta_budget(eps);
    if (std::isfinite(budget) && c * std::pow(U.measure(), 1.0 / p) >= 0.9 * budget) {
        u = shrink_to(U, std::pow(0.9 * budget / c, p));
        shrunk = true;
    }
    RulePtr rule;
    if (a.patches().empty()) {
        rule = scaled_rule(a.generator(), 1.0 + delta);
    } else {
        const MatrixCocycle ac = a;
        rule = freeze_if_constant(
            function_rule([ac, delta](const BasePoint& x) { return Mat((1.0 + delta) * ac.raw(x)); }, "scale"), u,
            base, 5);
    }
    MatrixCocycle b = a.with_patch(u, rule);
    LpParams lp;
    lp.p = p;
    return ScaleResult{b, u, shrunk, lp_estimate(a, b, base, lp)};
}

// ---------------------------------------------------------------- densification

namespace {

std::optional<RegionSet> pick_region(const DiscreteBase& base, double mu, const std::vector<RegionSet>& avoid) {
    const auto ok = [&](const RegionSet& r) {
        if (!disjoint_from_image(base, r)) return false;
        for (const auto& q : avoid)
            if (q.overlaps(r)) return false;
        return true;
    };
    for (int i = 0; i < 64; ++i) {
        // start at 1/2 and walk outwards
        const double a = frac(0.5 + ((i % 2) ? -1.0 : 1.0) * (i / 2) / 64.0);
        if (base.dim() == 2) {
            const double s = std::sqrt(mu);
            for (int j = 0; j < 8; ++j) {
                const RegionSet r = RegionSet::box(a, s, frac(0.3 + j / 8.0), s);
                if (ok(r)) return r;
            }
        } else {
            const RegionSet r = RegionSet::interval(a, mu);
            if (ok(r)) return r;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<RegionSet> choose_split_region(const DiscreteBase& base, double mu) { return pick_region(base, mu, {}); }

DensifyResult densify_simple(const MatrixCocycle& a, const DiscreteBase& base, double eps,
                             const DensifyOptions& opts) {
    const int d = a.dim();
    if (!a.family().saddle_conservative())
        throw NotSaddleConservative(a.family().name() + " has no saddle matrices");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
    const BasePoint x0 = sample_measure(base, opts.seed);

    // global sup of ||A^{±1}|| sizes every step
    double M = 1.0;
    for (const auto& x : sample_points(base, opts.seed + 3, 2048)) {
        const Mat m = a.raw(x);
        M = std::max({M, spectral_norm(m), spectral_norm(m.inverse())});
    }
    const double K = steering_constant(a.family());
    const double step_eps = eps / d;
    const double step_budget = delta_budget(step_eps);
    // measured distances use the actual saddle size, which can exceed the 2+K of the bound when delta > 1
    const double c = 2.0 * (1.0 + (1.0 + opts.delta) * K) * M;
    double mu = std::min(0.1, 0.9 * std::pow(step_budget / c, opts.p));

    SpectrumOptions so = opts.spectrum;
    so.group_tol = std::min(so.group_tol, 0.25 * std::log1p(opts.delta) * mu / std::pow(2.0, d - 2));
    DensifyResult res{a, {}};
    DensifyReport& rep = res.report;
    rep.tolerance = so.group_tol;
    SpectrumEstimate s = full_spectrum(a, base, x0, opts.n, so);
    std::vector<RegionSet> used;
    for (const auto& p : a.patches()) used.push_back(p.region);
    MatrixCocycle cur = a;
    for (int step = 0; step < d - 1 && !s.simple(); ++step) {
        const double m = mu / std::pow(2.0, step);
        const auto V = pick_region(base, m, used);
        if (!V) throw BudgetExceeded("no free region of measure " + std::to_string(m) + " with V ∩ T(V) = ∅");
        SplitPlan plan;
        plan.V = *V;
        plan.e = Vec::Unit(d, step % d);
        plan.delta = opts.delta;
        plan.M = M;
        plan.check_n = 0;
        plan.ps = {opts.p};
        plan.seed = opts.seed + 17 * static_cast<std::uint64_t>(step);
        SplitResult sr = split_spectrum(cur, base, plan);
        rep.distance += sr.report.distances.front().d.d;
        used.push_back(*V);
        cur = sr.D;
        ++rep.steps;
        s = full_spectrum(cur, base, x0, opts.n, so);
    }
    res.B = cur;
    rep.exponents = s.exponents;
    rep.stderrs = s.stderrs;
    rep.multiplicities = s.multiplicities();
    rep.simple = s.simple();
    return res;
}

}  // namespace cocy
