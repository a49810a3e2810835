#include "cocyclelab/errors.hpp"
#include "cocyclelab/lds.hpp"
#include "lds_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cocy {

namespace {

bool same_point(const BasePoint& a, const BasePoint& b) {
    return a.c == b.c && a.window == b.window && a.pos == b.pos && a.stream == b.stream && a.anchor == b.anchor;
}

// Phi_A^t(y) for t in [0, 1] over a base point at height 0, tabulated on a
// half-step grid; off-grid times take one RK4 sub-step from the grid.
class PhiTable {
public:
    PhiTable(const Generator& a, const FlowBase& base, double h) : a_(a), base_(base), dt_(0.5 * h) {}

    void build(const BasePoint& y) {
        y_ = y;
        const int d = a_.dim();
        identity_ = a_.constant_matrix() && a_.constant_matrix()->isZero(0.0);
        if (identity_) return;
        const long n = static_cast<long>(std::ceil(1.0 / dt_ - 1e-9));
        step_ = 1.0 / static_cast<double>(n);
        fwd_.assign(static_cast<std::size_t>(n + 1), Mat::Identity(d, d));
        if (a_.constant_matrix()) {
            const Mat e = expm(step_ * *a_.constant_matrix());
            for (long j = 1; j <= n; ++j) fwd_[static_cast<std::size_t>(j)] = e * fwd_[static_cast<std::size_t>(j - 1)];
        } else {
            for (long j = 1; j <= n; ++j)
                fwd_[static_cast<std::size_t>(j)] = sub_step(fwd_[static_cast<std::size_t>(j - 1)], (j - 1) * step_, step_);
        }
        inv_.resize(fwd_.size());
        for (std::size_t j = 0; j < fwd_.size(); ++j) inv_[j] = fwd_[j].inverse();
    }

    bool identity() const { return identity_; }
    const BasePoint& point() const { return y_; }

    // (Phi, Phi^-1) at time t
    std::pair<Mat, Mat> at(double t) const {
        const int d = a_.dim();
        if (identity_) return {Mat::Identity(d, d), Mat::Identity(d, d)};
        t = std::clamp(t, 0.0, 1.0);
        const double u = t / step_;
        const long j = std::clamp(static_cast<long>(std::floor(u + 1e-9)), 0L, static_cast<long>(fwd_.size()) - 1);
        const double rem = t - static_cast<double>(j) * step_;
        if (std::abs(rem) < 1e-12) return {fwd_[static_cast<std::size_t>(j)], inv_[static_cast<std::size_t>(j)]};
        const Mat p = sub_step(fwd_[static_cast<std::size_t>(j)], static_cast<double>(j) * step_, rem);
        return {p, p.inverse()};
    }

private:
    Mat base_at(double t) const {
        if (a_.constant_matrix()) return *a_.constant_matrix();
        return a_.base_at(base_.point(y_, std::min(t, std::nextafter(1.0, 0.0))));
    }
    Mat sub_step(const Mat& y, double t, double dt) const {
        const Mat f0 = base_at(t), fm = base_at(t + 0.5 * dt), f1 = base_at(t + dt);
        const Mat k1 = f0 * y;
        const Mat k2 = fm * (y + 0.5 * dt * k1);
        const Mat k3 = fm * (y + 0.5 * dt * k2);
        const Mat k4 = f1 * (y + dt * k3);
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    Generator a_;
    FlowBase base_;
    double dt_;
    double step_ = 0.0;
    bool identity_ = false;
    BasePoint y_;
    std::vector<Mat> fwd_, inv_;
};

// Steering law: H = (zeta'/zeta) Id + Phi (R' R^-1) Phi^-1 with R = s Rot.
class MixLaw final : public FlowboxLaw {
public:
    MixLaw(const Generator& a, const FlowBase& base, DirectionField u, DirectionField v, bool preimage, double h)
        : a_(a), base_(base), u_(std::move(u)), v_(std::move(v)), preimage_(preimage), table_(a, base, h) {}

    Mat H(const BasePoint& y, double t) const override {
        refresh(y);
        const int d = a_.dim();
        if (path_.trivial) return Mat::Zero(d, d);
        const double sr = path_.scale_rate(t);
        const Mat x = sr * Mat::Identity(d, d) + path_.rotation_rate(t);
        const auto [phi, phi_inv] = table_.at(t);
        return Mat(-sr * Mat::Identity(d, d) + phi * x * phi_inv);
    }
    std::string label() const override { return "mix"; }

    const SteeringPath& path_at(const BasePoint& y) const {
        refresh(y);
        return path_;
    }
    const PhiTable& table_at(const BasePoint& y) const {
        refresh(y);
        return table_;
    }
    std::pair<Vec, Vec> endpoints(const BasePoint& y) const {
        refresh(y);
        return {uy_, vy_};
    }

private:
    void refresh(const BasePoint& y) const {
        if (valid_ && same_point(table_.point(), y)) return;
        table_.build(y);
        uy_ = u_(y);
        vy_ = v_(y);
        if (preimage_) {
            const auto phi1 = table_.at(1.0).second;
            uy_ = phi1 * uy_;
            vy_ = phi1 * vy_;
        }
        path_ = steering_path(uy_, vy_, a_.algebra().group());
        valid_ = true;
    }

    Generator a_;
    FlowBase base_;
    DirectionField u_, v_;
    bool preimage_;
    mutable PhiTable table_;
    mutable SteeringPath path_;
    mutable Vec uy_, vy_;
    mutable bool valid_ = false;
};

// Saddle law: H = Phi (E' E^-1) Phi^-1 with E^t the saddle isotopy.
class SaddleLaw final : public FlowboxLaw {
public:
    SaddleLaw(const Generator& a, const FlowBase& base, DirectionField e, double delta, double h)
        : a_(a), base_(base), e_(std::move(e)), delta_(delta), table_(a, base, h) {}

    Mat H(const BasePoint& y, double t) const override {
        refresh(y);
        const int d = a_.dim();
        if (delta_ == 0.0) return Mat::Zero(d, d);
        const double s = 1.0 + delta_ * bump(t);
        const Mat g = (delta_ * bump_dot(t) / s) * dir_;
        if (table_.identity()) return g;
        const auto [phi, phi_inv] = table_.at(t);
        return Mat(phi * g * phi_inv);
    }
    std::string label() const override { return "saddle"; }

    Vec direction(const BasePoint& y) const {
        refresh(y);
        return eh_;
    }

private:
    void refresh(const BasePoint& y) const {
        if (valid_ && same_point(table_.point(), y)) return;
        table_.build(y);
        const Vec e = e_(y);
        eh_ = e / e.norm();
        const Vec f = saddle_partner(eh_, a_.algebra().group());
        dir_ = eh_ * eh_.transpose() - f * f.transpose();
        valid_ = true;
    }

    Generator a_;
    FlowBase base_;
    DirectionField e_;
    double delta_;
    mutable PhiTable table_;
    mutable Vec eh_;
    mutable Mat dir_;
    mutable bool valid_ = false;
};

// uniform point of the transversal ball, lifted to the box's base point
BasePoint ball_point(const FlowboxSpec& spec, const DiscreteBase& map, Rng& rng) {
    BasePoint q;
    if (map.dim() == 2) {
        const double rad = spec.r * std::sqrt(rng.uniform());
        const double th = 2.0 * std::numbers::pi * rng.uniform();
        q = map.point(frac(spec.center[0] + rad * std::cos(th)), frac(spec.center[1] + rad * std::sin(th)));
    } else {
        q = map.point(frac(spec.center[0] + spec.r * (2.0 * rng.uniform() - 1.0)));
    }
    for (int l = 0; l < spec.lift; ++l) q = map.forward(q);
    return q;
}

void check_flowbox_base(const FlowBase& base, const FlowboxSpec& spec) {
    if (base.kind() != FlowKind::Suspension) throw InvalidArgument("flowbox constructions need a suspension flow");
    if (spec.center.dim != base.section_map().dim())
        throw InvalidArgument("flowbox center must be a section point");
}

double shrink_radius(double limit, int sd) {
    return sd == 2 ? std::sqrt(0.99 * limit / std::numbers::pi) : 0.99 * limit / 2.0;
}

// sup of ||Phi^{±t}|| over sampled base points and a time grid
double measure_K(const Generator& a, const FlowBase& base, const FlowboxSpec& spec, int samples, std::uint64_t seed,
                 double h) {
    if (a.constant_matrix() && a.constant_matrix()->isZero(0.0)) return 1.0;
    PhiTable tab(a, base, h);
    Rng rng(seed);
    double K = 1.0;
    for (int i = 0; i < samples; ++i) {
        tab.build(ball_point(spec, base.section_map(), rng));
        for (int j = 0; j <= 20; ++j) {
            const auto [p, pi] = tab.at(j / 20.0);
            K = std::max({K, spectral_norm(p), spectral_norm(pi)});
        }
    }
    return K;
}

}  // namespace

std::pair<double, double> perturbation_norm(const Generator& b, const FlowBase& base, const FlowboxPatch& patch,
                                            double p, int samples, std::uint64_t seed) {
    const DiscreteBase& map = base.section_map();
    Rng rng(seed);
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        // stratify the flowbox time
        const double t = (i + rng.uniform()) / samples;
        const BasePoint s = ball_point(patch.spec, map, rng);
        const double w = patch.spec.taper(patch.spec.radial(map, s));
        f.push_back(std::pow(w * spectral_norm(patch.law->H(s, t)), p));
    }
    (void)b;
    double m = 0.0, m2 = 0.0;
    for (double x : f) m += x;
    m /= samples;
    for (double x : f) m2 += (x - m) * (x - m);
    const double se_mean = std::sqrt(m2 / (samples - 1.0) / samples);
    const double meas = patch.spec.section_measure(map.dim());
    const double integral = meas * m;
    const double norm = std::pow(integral, 1.0 / p);
    const double se = integral > 0.0 ? norm / (p * integral) * meas * se_mean : 0.0;
    return {norm, se};
}

FlowboxResult flowbox_mix(const Generator& a, const FlowBase& base, FlowboxSpec spec, DirectionField u_field,
                          DirectionField v_field, double eps, const FlowboxOptions& opts) {
    check_flowbox_base(base, spec);
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const int sd = base.section_map().dim();
    auto law = std::make_shared<MixLaw>(a, base, u_field, v_field, opts.preimage, opts.h);

    FlowboxBudget bud;
    bud.r_requested = spec.r;
    {
        Rng rng(opts.seed + 5);
        double L = 0.0, zmin = std::numeric_limits<double>::infinity(), zdot = 0.0;
        for (int i = 0; i < opts.budget_samples; ++i) {
            const SteeringPath& path = law->path_at(ball_point(spec, base.section_map(), rng));
            for (int j = 0; j <= 100; ++j) {
                const double t = j / 100.0;
                const double sr = path.scale_rate(t), s = path.scale(t);
                L = std::max(L, spectral_norm(sr * Mat::Identity(a.dim(), a.dim()) + path.rotation_rate(t)));
                zmin = std::min(zmin, 1.0 / s);
                zdot = std::max(zdot, -sr / s);  // d(1/s)/dt
            }
        }
        bud.K = 1.1 * measure_K(a, base, spec, std::min(opts.budget_samples, 16), opts.seed + 6, opts.h);
        bud.L = 1.1 * L;
        double kappa = zmin;
        if (zdot > 0.0) kappa = std::min(kappa, 1.0 / zdot);
        bud.kappa = kappa / 1.1;
        bud.bound_factor = 1.0 / (bud.kappa * bud.kappa) + bud.K * bud.K * bud.L;
    }
    bud.limit = std::pow(eps / bud.bound_factor, opts.p);
    if (spec.section_measure(sd) >= bud.limit) spec.r = shrink_radius(bud.limit, sd);
    bud.r_used = spec.r;
    bud.measure = spec.section_measure(sd);

    FlowboxPatch patch{spec, law};
    Generator b = a.with_patch(patch, base);
    std::tie(bud.h_norm, bud.h_norm_stderr) = perturbation_norm(b, base, patch, opts.p, opts.norm_samples, opts.seed + 7);
    return FlowboxResult{b, patch, bud};
}

FlowboxResult flowbox_saddle(const Generator& a, const FlowBase& base, FlowboxSpec spec, DirectionField e_field,
                             double delta, double eps, const FlowboxOptions& opts) {
    check_flowbox_base(base, spec);
    if (!a.algebra().group().saddle_conservative())
        throw NotSaddleConservative(a.algebra().name() + " has no saddle generators");
    if (delta < 0.0) throw InvalidArgument("delta must be nonnegative");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const int sd = base.section_map().dim();
    auto law = std::make_shared<SaddleLaw>(a, base, e_field, delta, opts.h);

    FlowboxBudget bud;
    bud.r_requested = spec.r;
    double L = 0.0;
    for (int j = 0; j <= 1000; ++j) {
        const double t = j / 1000.0;
        L = std::max(L, delta * bump_dot(t) / (1.0 + delta * bump(t)));
    }
    // ||e e^T - f f^T|| = 1 for orthonormal e, f
    bud.L = 1.1 * L;
    bud.K = 1.1 * measure_K(a, base, spec, 16, opts.seed + 6, opts.h);
    bud.kappa = 0.0;
    bud.bound_factor = bud.L * bud.K * bud.K;
    bud.limit = bud.bound_factor > 0.0 ? std::pow(eps / bud.bound_factor, opts.p) : std::numeric_limits<double>::infinity();
    if (spec.section_measure(sd) >= bud.limit) spec.r = shrink_radius(bud.limit, sd);
    bud.r_used = spec.r;
    bud.measure = spec.section_measure(sd);

    FlowboxPatch patch{spec, law};
    Generator b = a.with_patch(patch, base);
    std::tie(bud.h_norm, bud.h_norm_stderr) = perturbation_norm(b, base, patch, opts.p, opts.norm_samples, opts.seed + 7);
    return FlowboxResult{b, patch, bud};
}

// ---------------------------------------------------------------- continuous split

FlowSplitResult split_spectrum_flow(const Generator& a, const FlowBase& base, const FlowSplitParams& params) {
    if (base.kind() != FlowKind::Suspension) throw InvalidArgument("the continuous split needs a suspension flow");
    const DiscreteBase& map = base.section_map();
    const int d = a.dim();
    const int sd = map.dim();
    if (d < 2) throw InvalidArgument("splitting needs d >= 2");
    Vec e = params.e.size() == 0 ? Vec(Vec::Unit(d, 0)) : Vec(params.e / params.e.norm());
    if (e.size() != d) throw InvalidArgument("direction has the wrong dimension");

    FlowboxSpec sigma_spec;
    sigma_spec.center = params.center;
    sigma_spec.r = params.r;
    sigma_spec.sigma = params.sigma;
    const RegionSet sigma_box = sd == 2 ? RegionSet::box(frac(params.center[0] - params.r), 2 * params.r,
                                                         frac(params.center[1] - params.r), 2 * params.r)
                                        : RegionSet::interval(frac(params.center[0] - params.r), 2 * params.r);
    if (!disjoint_from_image(map, sigma_box)) throw InvalidArgument("Sigma meets its image under the section map");

    // time-one maps of A; constant generators reduce to one exponential
    std::optional<Mat> phi1_const;
    if (a.constant_matrix()) phi1_const = expm(*a.constant_matrix());
    const Generator ac = a;
    const FlowBase fb = base;
    const double h = params.h;
    const auto phi1 = [phi1_const, ac, fb, h](const BasePoint& s) -> Mat {
        return phi1_const ? *phi1_const : time_one(ac, fb, s, h);
    };
    // v(y): transport of e from the last passage through phi^1(Sigma)
    const FlowboxSpec sig = sigma_spec;
    const long cap = params.return_cap;
    const auto in_sigma = [sig, map](const BasePoint& s) { return sig.radial(map, s) < sig.r; };
    const DirectionField v_field = [=](const BasePoint& y) -> Vec {
        if (in_sigma(map.backward(y))) return e;
        BasePoint q = map.backward(y);
        long k = -1;
        for (long n = 1; n <= cap; ++n) {
            q = map.backward(q);
            if (in_sigma(q)) {
                k = n;
                break;
            }
        }
        if (k < 0) return e;
        BasePoint z = iterate(map, y, -k);
        Vec v = e;
        for (long i = 0; i < k; ++i) {
            v = phi1(z) * v;
            v /= v.norm();
            z = map.forward(z);
        }
        return v;
    };
    const DirectionField w_field = [=](const BasePoint& y) -> Vec {
        return Vec(phi1(y).inverse() * e);
    };

    FlowboxOptions fo;
    fo.p = params.p;
    fo.seed = params.seed;
    fo.h = params.h;
    FlowboxResult mix = flowbox_mix(a, base, sigma_spec, v_field, w_field, params.eps, fo);
    FlowboxSpec image_spec = sigma_spec;
    image_spec.lift = 1;
    FlowboxResult sad = flowbox_saddle(a, base, image_spec, [e](const BasePoint&) { return e; }, params.delta,
                                       params.eps, fo);
    Generator D = mix.B.with_patch(sad.patch, base);

    FlowSplitReport rep;
    rep.mu_V = sigma_spec.section_measure(sd);
    rep.mix_budget = mix.budget;
    rep.saddle_budget = sad.budget;
    {
        const FlowboxSpec& s = sad.patch.spec;
        const int n = 20000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double rho = s.r * (i + 0.5) / n;
            acc += s.taper(rho) * (sd == 2 ? 2.0 * std::numbers::pi * rho : 2.0);
        }
        rep.effective_measure = acc * s.r / n;
    }

    if (params.T_total > 0.0) {
        BasePoint s0 = sample_measure(map, params.seed + 97);
        const BasePoint x0 = base.point(s0, 0.0);
        const Vec v0 = v_field(s0);
        LdsSpectrumOptions lo;
        lo.h = params.h;
        const detail::PassResult pd = detail::lds_pass(D, base, x0, params.T_total, params.renorm, lo, &v0, true);
        const detail::PassResult pa = detail::lds_pass(mix.B, base, x0, params.T_total, params.renorm, lo, &v0, false);
        rep.verified = true;
        rep.T = pd.T;
        rep.exponent_D = pd.dir_value;
        rep.stderr_D = pd.dir_stderr;
        rep.exponent_AH = pa.dir_value;
        rep.stderr_AH = pa.dir_stderr;
        rep.predicted = pa.dir_value + std::log1p(params.delta) * rep.effective_measure;
        rep.predicted_plain = pa.dir_value + std::log1p(params.delta) * rep.mu_V;
        rep.spectrum_D = pd.spectrum;
        rep.sum_rule_rhs = pd.trace_integral / pd.T;
    }
    return FlowSplitResult{D, mix.B, rep};
}

}  // namespace cocy
