#include "cocyclelab/lds.hpp"

#include "cocyclelab/errors.hpp"
#include "lds_internal.hpp"
#include "qr_accum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace cocy {

// ---------------------------------------------------------------- algebras

Algebra Algebra::sp(int d) {
    if (d % 2 != 0) throw InvalidArgument("sp needs an even dimension");
    return {AlgebraKind::sp, d};
}

double Algebra::residual(const Mat& m) const {
    if (m.rows() != d || m.cols() != d) return std::numeric_limits<double>::infinity();
    switch (kind) {
        case AlgebraKind::gl: return 0.0;
        case AlgebraKind::sl: return std::abs(m.trace());
        case AlgebraKind::sp: {
            const Mat J = symplectic_J(d);
            return (m.transpose() * J + J * m).norm();
        }
    }
    return 0.0;
}

bool Algebra::contains(const Mat& m) const {
    const double tol = kind == AlgebraKind::sp ? 1e-11 : 1e-12;
    return residual(m) <= tol * std::max(1.0, m.norm());
}

std::string Algebra::name() const {
    switch (kind) {
        case AlgebraKind::gl: return "gl";
        case AlgebraKind::sl: return "sl";
        case AlgebraKind::sp: return "sp";
    }
    return "?";
}

GroupFamily Algebra::group() const {
    switch (kind) {
        case AlgebraKind::gl: return GroupFamily::gl(d);
        case AlgebraKind::sl: return GroupFamily::sl(d);
        case AlgebraKind::sp: return GroupFamily::sp(d);
    }
    return GroupFamily::gl(d);
}

std::optional<Algebra> parse_algebra(const std::string& name, int d) {
    if (d < 1 || d > 6) return std::nullopt;
    std::string n;
    for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (n == "gl") return Algebra::gl(d);
    if (n == "sl") return Algebra::sl(d);
    if (n == "sp" && d % 2 == 0) return Algebra::sp(d);
    return std::nullopt;
}

// ---------------------------------------------------------------- flowbox geometry

double FlowboxSpec::radial(const DiscreteBase& map, const BasePoint& s) const {
    BasePoint q = s;
    for (int i = 0; i < lift; ++i) q = map.backward(q);
    if (map.dim() == 2) {
        const double dx = circle_dist(q[0], center[0]), dy = circle_dist(q[1], center[1]);
        return std::sqrt(dx * dx + dy * dy);
    }
    return circle_dist(q[0], center[0]);
}

double FlowboxSpec::taper(double dist) const {
    if (!(dist < r)) return 0.0;
    const double u = dist / r;
    if (u <= sigma) return 1.0;
    return 1.0 - bump((u - sigma) / (1.0 - sigma));
}

double FlowboxSpec::section_measure(int section_dim) const {
    return section_dim == 2 ? std::numbers::pi * r * r : 2.0 * r;
}

// ---------------------------------------------------------------- generators

Generator::Generator(Algebra algebra, RulePtr rule, bool height_independent)
    : algebra_(algebra), rule_(std::move(rule)), height_independent_(height_independent) {
    if (!rule_) throw InvalidArgument("generator needs a rule");
    if (rule_->describe().rfind("constant", 0) == 0) {
        constant_ = rule_->eval(BasePoint{});
        height_independent_ = true;
        if (constant_->rows() != algebra_.d) throw InvalidArgument("generator matrix has the wrong size");
        if (!algebra_.contains(*constant_))
            throw FamilyViolation("generator leaves " + algebra_.name() + "(" + std::to_string(algebra_.d) + ")");
    }
}

Generator Generator::constant(Algebra algebra, const Mat& m) { return Generator(algebra, constant_rule(m)); }

Generator Generator::with_patch(FlowboxPatch patch, const FlowBase& base) const {
    if (base.kind() != FlowKind::Suspension) throw InvalidArgument("flowbox patches need a suspension flow");
    const DiscreteBase& map = base.section_map();
    if (!(patch.spec.r > 0.0)) throw InvalidArgument("flowbox radius must be positive");
    if (!(patch.spec.sigma > 0.0 && patch.spec.sigma < 1.0)) throw InvalidArgument("sigma must lie in (0, 1)");
    if (patch.spec.r >= 0.5) throw FlowboxOverlap("transversal ball of radius " + std::to_string(patch.spec.r) + " wraps around the section");
    // sampled injectivity against the existing boxes
    Rng rng(0x5eedULL + patches_.size());
    for (int i = 0; i < 2000; ++i) {
        const double rad = patch.spec.r * rng.uniform();
        BasePoint q;
        if (map.dim() == 2) {
            const double th = 2.0 * std::numbers::pi * rng.uniform();
            q = map.point(frac(patch.spec.center[0] + rad * std::cos(th)), frac(patch.spec.center[1] + rad * std::sin(th)));
        } else {
            q = map.point(frac(patch.spec.center[0] + (rng.uniform() < 0.5 ? -rad : rad)));
        }
        BasePoint s = q;
        for (int l = 0; l < patch.spec.lift; ++l) s = map.forward(s);
        for (const auto& other : patches_)
            if (other.spec.radial(map, s) < other.spec.r)
                throw FlowboxOverlap("flowbox around " + std::to_string(patch.spec.center[0]) + " meets an existing flowbox");
    }
    Generator g = *this;
    g.patches_.push_back(std::move(patch));
    return g;
}

int Generator::patch_at(const FlowBase& base, const BasePoint& s) const {
    if (patches_.empty() || base.kind() != FlowKind::Suspension) return -1;
    for (std::size_t i = 0; i < patches_.size(); ++i)
        if (patches_[i].spec.radial(base.section_map(), s) < patches_[i].spec.r) return static_cast<int>(i);
    return -1;
}

Mat Generator::perturbation(const FlowBase& base, const BasePoint& z) const {
    const int d = algebra_.d;
    if (patches_.empty() || base.kind() != FlowKind::Suspension) return Mat::Zero(d, d);
    const BasePoint s = base.section_of(z);
    const int i = patch_at(base, s);
    if (i < 0) return Mat::Zero(d, d);
    const auto& p = patches_[static_cast<std::size_t>(i)];
    const double w = p.spec.taper(p.spec.radial(base.section_map(), s));
    if (w == 0.0) return Mat::Zero(d, d);
    return w * p.law->H(s, base.height_of(z));
}

Mat Generator::eval(const FlowBase& base, const BasePoint& z) const { return base_at(z) + perturbation(base, z); }

// ---------------------------------------------------------------- integration

namespace {

struct ExpmCache {
    Mat m;
    double dt = -1.0;
    Mat value;
    const Mat& get(const Mat& a, double t) {
        if (dt != t || m.rows() != a.rows() || m != a) {
            m = a;
            dt = t;
            value = a.isZero(0.0) ? Mat::Identity(a.rows(), a.cols()) : expm(t * a);
        }
        return value;
    }
};

struct Integrator {
    const Generator& g;
    const FlowBase& base;
    double h;
    ExpmCache cache;
    double trace = 0.0;
    long steps = 0;

    // RK4 of Y' = f(tau) Y on [t0, t1] with about h-sized steps; Simpson on the trace
    template <class F>
    Mat rk4(F&& f, double t0, double t1) {
        const int d = g.dim();
        const double span = t1 - t0;
        const long n = std::max(1L, static_cast<long>(std::ceil(span / h - 1e-9)));
        const double dt = span / static_cast<double>(n);
        Mat y = Mat::Identity(d, d);
        for (long i = 0; i < n; ++i) {
            const double t = t0 + dt * static_cast<double>(i);
            const Mat f0 = f(t), fm = f(t + 0.5 * dt), f1 = f(t + dt);
            const Mat k1 = f0 * y;
            const Mat k2 = fm * (y + 0.5 * dt * k1);
            const Mat k3 = fm * (y + 0.5 * dt * k2);
            const Mat k4 = f1 * (y + dt * k3);
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            trace += (dt / 6.0) * (f0.trace() + 4.0 * fm.trace() + f1.trace());
        }
        steps += n;
        return y;
    }

    // matriciant over heights [h0, h1] of the column above section point s
    Mat column(const BasePoint& s, double h0, double h1) {
        const int pi = g.patch_at(base, s);
        const FlowboxPatch* patch = pi >= 0 ? &g.patches()[static_cast<std::size_t>(pi)] : nullptr;
        double w = 0.0;
        if (patch) w = patch->spec.taper(patch->spec.radial(base.section_map(), s));
        if (w == 0.0) patch = nullptr;
        if (!patch && g.height_independent()) {
            const Mat a = g.constant_matrix() ? *g.constant_matrix() : g.base_at(base.point(s, h0));
            trace += a.trace() * (h1 - h0);
            return cache.get(a, h1 - h0);
        }
        if (g.height_independent()) {
            const Mat a = g.constant_matrix() ? *g.constant_matrix() : g.base_at(base.point(s, h0));
            return rk4([&](double t) { return Mat(a + w * patch->law->H(s, t)); }, h0, h1);
        }
        return rk4(
            [&](double t) {
                Mat a = g.base_at(base.point(s, std::min(t, std::nextafter(1.0, 0.0))));
                if (patch) a += w * patch->law->H(s, t);
                return a;
            },
            h0, h1);
    }

    Mat run(const BasePoint& x, double t) {
        const int d = g.dim();
        if (base.kind() == FlowKind::LinearTorus) {
            if (g.constant_matrix()) {
                trace += g.constant_matrix()->trace() * t;
                return cache.get(*g.constant_matrix(), t);
            }
            return rk4([&](double tau) { return g.base_at(flow(base, x, tau)); }, 0.0, t);
        }
        Mat phi = Mat::Identity(d, d);
        BasePoint s = base.section_of(x);
        double h = base.height_of(x);
        double left = t;
        while (left > 1e-13) {
            const double end = std::min(1.0, h + left);
            phi = column(s, h, end) * phi;
            left -= end - h;
            if (end >= 1.0) {
                s = base.section_map().forward(s);
                h = 0.0;
            } else {
                h = end;
            }
        }
        return phi;
    }
};

}  // namespace

Mat integrate_matriciant(const Generator& a, const FlowBase& base, const BasePoint& x, double t,
                         const IntegrateOptions& opts, MatriciantInfo* info) {
    if (!(opts.h > 0.0)) throw InvalidArgument("step must be positive");
    if (t < 0.0) {
        const BasePoint x0 = flow(base, x, t);
        return integrate_matriciant(a, base, x0, -t, opts, info).inverse();
    }
    if (t == 0.0) return Mat::Identity(a.dim(), a.dim());
    Integrator it{a, base, opts.h, {}, 0.0, 0};
    Mat phi = it.run(x, t);
    if (info) {
        info->trace_integral = it.trace;
        info->rk4_steps = it.steps;
    }
    if (opts.verify && it.steps > 0) {
        Integrator fine{a, base, 0.5 * opts.h, {}, 0.0, 0};
        const Mat phi2 = fine.run(x, t);
        const double err = (phi - phi2).norm() / std::max(phi2.norm(), 1e-300);
        if (info) info->halving_error = err;
        if (err > opts.tol)
            throw StepTooCoarse("step-halving disagreement " + std::to_string(err) + " at h=" + std::to_string(opts.h));
    }
    return phi;
}

double liouville_residual(const Generator& a, const FlowBase& base, const BasePoint& x, double t, double h) {
    MatriciantInfo info;
    IntegrateOptions o;
    o.h = h;
    const Mat phi = integrate_matriciant(a, base, x, t, o, &info);
    const double det = phi.determinant();
    return std::abs(det - std::exp(info.trace_integral)) / std::abs(det);
}

GronwallResult gronwall_check(const Generator& a, const Generator& b, const FlowBase& base, double t, int samples,
                              std::uint64_t seed, double h) {
    if (!(t > 0.0)) throw InvalidArgument("gronwall_check needs t > 0");
    if (samples < 2) throw InvalidArgument("gronwall_check needs at least two samples");
    IntegrateOptions o;
    o.h = h;
    o.verify = false;
    const auto lp = [](const Mat& m) { return std::max(0.0, std::log(spectral_norm(m))); };
    std::vector<double> l, r;
    for (const auto& x : sample_points(base, seed, samples))
        l.push_back(std::abs(lp(integrate_matriciant(a, base, x, t, o)) - lp(integrate_matriciant(b, base, x, t, o))));
    for (const auto& z : sample_points(base, seed + 1, samples * 4))
        r.push_back(spectral_norm(a.eval(base, z) - b.eval(base, z)));
    const auto stats = [](const std::vector<double>& v) {
        double m = 0.0, m2 = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double x : v) m2 += (x - m) * (x - m);
        return std::pair{m, std::sqrt(m2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
    };
    GronwallResult g;
    std::tie(g.lhs, g.stderr_lhs) = stats(l);
    auto [rm, rs] = stats(r);
    g.rhs = t * rm;
    g.stderr_rhs = t * rs;
    return g;
}

namespace detail {

PassResult lds_pass(const Generator& a, const FlowBase& base, const BasePoint& x0, double T_total, double renorm,
                    const LdsSpectrumOptions& opts, const Vec* v0, bool want_spectrum) {
    if (!(renorm > 0.0) || !(T_total >= 10.0 * renorm))
        throw InvalidArgument("lds_spectrum needs T_total >= 10 * renorm_interval > 0");
    const int d = a.dim();
    const long n = static_cast<long>(std::llround(T_total / renorm));
    const int blocks = static_cast<int>(std::min<long>(opts.blocks, n));
    QrAccumulator acc(d, blocks);
    Mat q = Mat::Identity(d, d);
    Vec v;
    if (v0) v = *v0 / v0->norm();
    std::vector<double> dsum(static_cast<std::size_t>(blocks), 0.0);
    std::vector<double> dlen(static_cast<std::size_t>(blocks), 0.0);
    double dtotal = 0.0;
    PassResult out;
    BasePoint x = x0;
    for (long j = 0; j < n; ++j) {
        IntegrateOptions io;
        io.h = opts.h;
        io.verify = opts.verify_first && j == 0;
        MatriciantInfo info;
        const Mat phi = integrate_matriciant(a, base, x, renorm, io, &info);
        out.trace_integral += info.trace_integral;
        const int b = static_cast<int>(j * blocks / n);
        if (want_spectrum) {
            q = phi * q;
            acc.reduce(q, b, renorm);
        }
        if (v0) {
            v = phi * v;
            const double nv = v.norm();
            const double l = std::log(nv);
            v /= nv;
            dsum[static_cast<std::size_t>(b)] += l;
            dlen[static_cast<std::size_t>(b)] += renorm;
            dtotal += l;
        }
        x = flow(base, x, renorm);
    }
    out.T = static_cast<double>(n) * renorm;
    if (want_spectrum) {
        out.spectrum = acc.finish(opts.group_tol);
        out.spectrum.n = n;
        out.spectrum.time_unit = renorm;
    }
    if (v0) {
        out.dir_value = dtotal / out.T;
        double m = 0.0, m2 = 0.0;
        for (int b = 0; b < blocks; ++b) {
            const double r = dsum[static_cast<std::size_t>(b)] / dlen[static_cast<std::size_t>(b)];
            m += r;
            m2 += r * r;
        }
        const double nb = blocks;
        m /= nb;
        if (blocks > 1) out.dir_stderr = std::sqrt(std::max(0.0, m2 / nb - m * m) / (nb - 1.0));
    }
    return out;
}

}  // namespace detail

SpectrumEstimate lds_spectrum(const Generator& a, const FlowBase& base, const BasePoint& x0, double T_total,
                              double renorm_interval, const LdsSpectrumOptions& opts) {
    return detail::lds_pass(a, base, x0, T_total, renorm_interval, opts, nullptr, true).spectrum;
}

Mat time_one(const Generator& a, const FlowBase& base, const BasePoint& s, double h) {
    IntegrateOptions o;
    o.h = h;
    o.verify = false;
    return integrate_matriciant(a, base, base.point(s, 0.0), 1.0, o);
}

}  // namespace cocy
