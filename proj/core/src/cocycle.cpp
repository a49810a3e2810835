#include "cocyclelab/cocycle.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace cocy {

// ---------------------------------------------------------------- families

GroupFamily GroupFamily::sp(int d) {
    if (d % 2 != 0) throw InvalidArgument("Sp needs an even dimension");
    return {FamilyKind::Sp, d};
}

double GroupFamily::residual(const Mat& m) const {
    if (m.rows() != d || m.cols() != d) return std::numeric_limits<double>::infinity();
    switch (kind) {
        case FamilyKind::GL: {
            const double det = m.determinant();
            return (std::isfinite(det) && det != 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        }
        case FamilyKind::SL: return std::abs(m.determinant() - 1.0);
        case FamilyKind::Sp: {
            const Mat J = symplectic_J(d);
            return spectral_norm(m.transpose() * J * m - J);
        }
        case FamilyKind::SO:
            return spectral_norm(m.transpose() * m - Mat::Identity(d, d)) + std::abs(m.determinant() - 1.0);
    }
    return std::numeric_limits<double>::infinity();
}

bool GroupFamily::contains(const Mat& m, double tol) const {
    const double r = residual(m);
    return std::isfinite(r) && r <= tol;
}

std::string GroupFamily::name() const {
    switch (kind) {
        case FamilyKind::GL: return "GL";
        case FamilyKind::SL: return "SL";
        case FamilyKind::Sp: return "Sp";
        case FamilyKind::SO: return "SO";
    }
    return "?";
}

std::optional<GroupFamily> parse_family(const std::string& name, int d) {
    if (d < 1 || d > 6) return std::nullopt;
    std::string n;
    for (char c : name) n += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (n == "GL") return GroupFamily::gl(d);
    if (n == "SL") return GroupFamily::sl(d);
    if (n == "SO") return GroupFamily::so(d);
    if (n == "SP" && d % 2 == 0) return GroupFamily::sp(d);
    return std::nullopt;
}

// ---------------------------------------------------------------- rules

std::optional<std::vector<double>> Rule::breaks(int) const { return std::nullopt; }

namespace {

std::string matrix_text(const Mat& m) {
    std::ostringstream s;
    s.precision(17);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s << ' ' << m(i, j);
    return s.str();
}

class ConstantRule final : public Rule {
public:
    explicit ConstantRule(Mat m) : m_(std::move(m)) {}
    Mat eval(const BasePoint&) const override { return m_; }
    std::string describe() const override { return "constant" + matrix_text(m_); }
    std::optional<std::vector<double>> breaks(int) const override { return std::vector<double>{}; }

private:
    Mat m_;
};

class PiecewiseRule final : public Rule {
public:
    explicit PiecewiseRule(std::vector<Mat> cells) : cells_(std::move(cells)) {}
    Mat eval(const BasePoint& x) const override {
        const int m = static_cast<int>(cells_.size());
        int i = static_cast<int>(std::floor(x.c[0] * m));
        i = std::clamp(i, 0, m - 1);
        return cells_[static_cast<std::size_t>(i)];
    }
    std::string describe() const override {
        std::string s = "piecewise " + std::to_string(cells_.size());
        for (const auto& c : cells_) s += matrix_text(c);
        return s;
    }
    std::optional<std::vector<double>> breaks(int coord) const override {
        std::vector<double> b;
        if (coord == 0)
            for (std::size_t i = 1; i < cells_.size(); ++i)
                b.push_back(static_cast<double>(i) / static_cast<double>(cells_.size()));
        return b;
    }

private:
    std::vector<Mat> cells_;
};

class RotationField final : public Rule {
public:
    RotationField(int d, double theta0, double k) : d_(d), theta0_(theta0), k_(k) {}
    Mat eval(const BasePoint& x) const override {
        const double th = 2.0 * std::numbers::pi * (theta0_ + k_ * x.c[0]);
        Mat r = Mat::Identity(d_, d_);
        r(0, 0) = std::cos(th);
        r(0, 1) = -std::sin(th);
        r(1, 0) = std::sin(th);
        r(1, 1) = std::cos(th);
        return r;
    }
    std::string describe() const override {
        std::ostringstream s;
        s.precision(17);
        s << "rotation " << theta0_ << ' ' << k_;
        return s.str();
    }
    std::optional<std::vector<double>> breaks(int) const override {
        if (k_ == 0.0) return std::vector<double>{};
        return std::nullopt;
    }

private:
    int d_;
    double theta0_, k_;
};

class ProductRule final : public Rule {
public:
    explicit ProductRule(std::vector<RulePtr> f) : f_(std::move(f)) {}
    Mat eval(const BasePoint& x) const override {
        Mat m = f_.front()->eval(x);
        for (std::size_t i = 1; i < f_.size(); ++i) m = m * f_[i]->eval(x);
        return m;
    }
    std::string describe() const override {
        std::string s = "product";
        for (const auto& r : f_) {
            const std::string inner = r->describe();
            if (inner.empty()) return {};
            s += " (" + inner + ")";
        }
        return s;
    }
    std::optional<std::vector<double>> breaks(int coord) const override {
        std::vector<double> all;
        for (const auto& r : f_) {
            auto b = r->breaks(coord);
            if (!b) return std::nullopt;
            all.insert(all.end(), b->begin(), b->end());
        }
        return all;
    }

private:
    std::vector<RulePtr> f_;
};

class ScaledRule final : public Rule {
public:
    ScaledRule(RulePtr inner, double s) : inner_(std::move(inner)), s_(s) {}
    Mat eval(const BasePoint& x) const override { return s_ * inner_->eval(x); }
    std::string describe() const override {
        const std::string inner = inner_->describe();
        if (inner.empty()) return {};
        std::ostringstream s;
        s.precision(17);
        s << "scaled " << s_ << " (" << inner << ")";
        return s.str();
    }
    std::optional<std::vector<double>> breaks(int coord) const override { return inner_->breaks(coord); }

private:
    RulePtr inner_;
    double s_;
};

class FunctionRule final : public Rule {
public:
    FunctionRule(std::function<Mat(const BasePoint&)> f, std::string label, bool pc)
        : f_(std::move(f)), label_(std::move(label)), pc_(pc) {}
    Mat eval(const BasePoint& x) const override { return f_(x); }
    std::string describe() const override { return {}; }
    std::optional<std::vector<double>> breaks(int) const override {
        if (pc_) return std::vector<double>{};
        return std::nullopt;
    }
    const std::string& label() const { return label_; }

private:
    std::function<Mat(const BasePoint&)> f_;
    std::string label_;
    bool pc_;
};

}  // namespace

RulePtr constant_rule(const Mat& m) { return std::make_shared<ConstantRule>(m); }

RulePtr piecewise_rule(const std::vector<Mat>& cells) {
    if (cells.empty()) throw InvalidArgument("piecewise rule needs at least one cell");
    return std::make_shared<PiecewiseRule>(cells);
}

RulePtr rotation_field(int d, double theta0, double k) {
    if (d < 2) throw InvalidArgument("rotation field needs d >= 2");
    return std::make_shared<RotationField>(d, theta0, k);
}

RulePtr product_rule(const std::vector<RulePtr>& factors) {
    if (factors.empty()) throw InvalidArgument("empty product");
    return std::make_shared<ProductRule>(factors);
}

RulePtr scaled_rule(const RulePtr& inner, double s) { return std::make_shared<ScaledRule>(inner, s); }

RulePtr function_rule(std::function<Mat(const BasePoint&)> f, std::string label, bool piecewise_constant) {
    return std::make_shared<FunctionRule>(std::move(f), std::move(label), piecewise_constant);
}

// ---------------------------------------------------------------- cocycles

MatrixCocycle::MatrixCocycle(GroupFamily family, RulePtr generator, std::vector<Patch> patches)
    : family_(family), generator_(std::move(generator)), patches_() {
    if (!generator_) throw InvalidArgument("cocycle needs a generator");
    for (auto& p : patches) {
        for (const auto& q : patches_)
            if (q.region.overlaps(p.region))
                throw InvalidArgument("patch regions must be disjoint: " + p.region.describe() + " meets " +
                                      q.region.describe());
        patches_.push_back(std::move(p));
    }
}

MatrixCocycle MatrixCocycle::constant(GroupFamily family, const Mat& m) {
    return MatrixCocycle(family, constant_rule(m));
}

MatrixCocycle MatrixCocycle::with_patch(const RegionSet& region, RulePtr rule) const {
    std::vector<Patch> p = patches_;
    p.push_back({region, std::move(rule)});
    return MatrixCocycle(family_, generator_, std::move(p));
}

const Rule& MatrixCocycle::rule_at(const BasePoint& x) const {
    for (const auto& p : patches_)
        if (p.region.contains(x)) return *p.rule;
    return *generator_;
}

Mat MatrixCocycle::raw(const BasePoint& x) const { return rule_at(x).eval(x); }

Mat MatrixCocycle::evaluate(const BasePoint& x) const {
    Mat m = raw(x);
    if (!family_.contains(m)) {
        std::ostringstream s;
        s << family_.name() << "(" << family_.d << ") membership residual " << family_.residual(m)
          << " at x=" << x.c[0];
        throw FamilyViolation(s.str());
    }
    return m;
}

Mat compose_n(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x, long n) {
    const int d = a.dim();
    Mat prod = Mat::Identity(d, d);
    BasePoint p = x;
    const auto guard = [&](long step) {
        if (prod.cwiseAbs().maxCoeff() > 1e299 && !(spectral_norm(prod) <= 1e300)) {
            throw OverflowEscape("partial product norm passed 1e300 after " + std::to_string(step) +
                                 " steps; use the QR path");
        }
    };
    if (n >= 0) {
        for (long i = 0; i < n; ++i) {
            prod = a.raw(p) * prod;
            guard(i + 1);
            p = base.forward(p);
        }
    } else {
        for (long i = 0; i < -n; ++i) {
            p = base.backward(p);
            prod = a.raw(p).inverse() * prod;
            guard(i + 1);
        }
    }
    return prod;
}

// ---------------------------------------------------------------- L^p

namespace {

struct Quadrature {
    std::vector<BasePoint> pts;
    std::vector<double> w;
    bool exact = false;
    std::string method;
};

std::vector<double> region_breaks(const RegionSet& r, int coord) {
    std::vector<double> b;
    const auto pieces = coord == 0 ? r.pieces() : r.pieces_second();
    for (const auto& [p0, p1] : pieces) {
        b.push_back(p0);
        b.push_back(p1);
    }
    return b;
}

Quadrature build_quadrature(const std::vector<const Rule*>& rules, const std::vector<RegionSet>& support,
                            const DiscreteBase& base, int samples, std::uint64_t seed) {
    Quadrature q;
    if (support.empty()) {
        q.exact = true;
        q.method = "identical";
        return q;
    }
    const int dim = base.dim();
    bool piecewise = true;
    std::vector<std::set<double>> cuts(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        cuts[static_cast<std::size_t>(c)] = {0.0, 1.0};
        for (const Rule* r : rules) {
            auto b = r->breaks(c);
            if (!b) {
                piecewise = false;
                break;
            }
            cuts[static_cast<std::size_t>(c)].insert(b->begin(), b->end());
        }
        for (const auto& s : support) {
            auto b = region_breaks(s, c);
            cuts[static_cast<std::size_t>(c)].insert(b.begin(), b.end());
        }
    }
    if (piecewise) {
        q.exact = true;
        q.method = "exact-piecewise";
        const std::vector<double> xs(cuts[0].begin(), cuts[0].end());
        const std::vector<double> ys = dim == 2 ? std::vector<double>(cuts[1].begin(), cuts[1].end())
                                                : std::vector<double>{0.0, 1.0};
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double wx = xs[i + 1] - xs[i];
            if (wx <= 0.0) continue;
            for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
                const double wy = ys[j + 1] - ys[j];
                if (wy <= 0.0) continue;
                const double mx = 0.5 * (xs[i] + xs[i + 1]);
                const double my = 0.5 * (ys[j] + ys[j + 1]);
                const BasePoint p = dim == 2 ? base.point(mx, my) : base.point(mx);
                bool inside = false;
                for (const auto& s : support) inside = inside || s.contains(p);
                if (!inside) continue;
                q.pts.push_back(p);
                q.w.push_back(wx * wy);
            }
        }
        return q;
    }
    // stratified sampling inside each support region; points covered by
    // several regions are down-weighted so the union is counted once
    q.method = "stratified";
    Rng rng(seed);
    double total = 0.0;
    for (const auto& s : support) total += s.measure();
    for (const auto& s : support) {
        const int n = std::max(16, static_cast<int>(std::lround(samples * s.measure() / total)));
        for (int i = 0; i < n; ++i) {
            BasePoint p;
            if (s.kind == RegionSet::Kind::Whole) {
                p = base.sample(rng);
                // stratify the first coordinate
                const double x = (i + rng.uniform()) / n;
                if (base.kind() == MapKind::Doubling) {
                    RegionSet cell = RegionSet::interval(static_cast<double>(i) / n, 1.0 / n);
                    p = sample_in(cell, base, rng);
                } else {
                    p.c[0] = x;
                }
            } else {
                RegionSet cell = s;
                cell.a = frac(s.a + s.len * i / n);
                cell.len = s.len / n;
                p = sample_in(cell, base, rng);
            }
            int cover = 0;
            for (const auto& t : support) cover += t.contains(p) ? 1 : 0;
            q.pts.push_back(p);
            q.w.push_back(s.measure() / n / std::max(cover, 1));
        }
    }
    return q;
}

Quadrature difference_quadrature(const MatrixCocycle& a, const MatrixCocycle& b, const DiscreteBase& base,
                                 int samples, std::uint64_t seed) {
    std::vector<RegionSet> support;
    std::vector<const Rule*> rules;
    if (a.generator() == b.generator()) {
        for (const auto& p : a.patches()) support.push_back(p.region);
        for (const auto& p : b.patches()) support.push_back(p.region);
    } else {
        support.push_back(RegionSet::whole());
    }
    rules.push_back(a.generator().get());
    rules.push_back(b.generator().get());
    for (const auto& p : a.patches()) rules.push_back(p.rule.get());
    for (const auto& p : b.patches()) rules.push_back(p.rule.get());
    return build_quadrature(rules, support, base, samples, seed);
}

struct NormAcc {
    double value = 0.0;
    double se = 0.0;
};

NormAcc lp_norm(const std::vector<double>& f, const std::vector<double>& w, double p, bool exact) {
    NormAcc out;
    if (f.empty()) return out;
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (w[i] > 0.0) m = std::max(m, f[i]);
        out.value = m;
        return out;
    }
    double integral = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        integral += w[i] * std::pow(f[i], p);
        wsum += w[i];
    }
    out.value = std::pow(integral, 1.0 / p);
    if (!exact && integral > 0.0) {
        const double mean = integral / wsum;
        double var = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double dev = std::pow(f[i], p) - mean;
            var += w[i] * w[i] * dev * dev;
        }
        const double se_int = std::sqrt(var);
        out.se = std::pow(integral, 1.0 / p - 1.0) * se_int / p;
    }
    return out;
}

}  // namespace

LpEstimate lp_estimate(const MatrixCocycle& a, const MatrixCocycle& b, const DiscreteBase& base,
                       const LpParams& params) {
    if (a.dim() != b.dim()) throw InvalidArgument("lp_distance needs equal dimensions");
    if (!(params.p >= 1.0)) throw InvalidArgument("p must be >= 1");
    const Quadrature q = difference_quadrature(a, b, base, params.samples, params.seed);
    std::vector<double> f, g;
    f.reserve(q.pts.size());
    g.reserve(q.pts.size());
    for (const auto& x : q.pts) {
        const Mat ma = a.raw(x), mb = b.raw(x);
        f.push_back(spectral_norm(ma - mb));
        g.push_back(spectral_norm(ma.inverse() - mb.inverse()));
    }
    const NormAcc nf = lp_norm(f, q.w, params.p, q.exact);
    const NormAcc ng = lp_norm(g, q.w, params.p, q.exact);
    LpEstimate e;
    e.exact = q.exact;
    e.method = q.method;
    e.norm_direct = nf.value;
    e.norm_inverse = ng.value;
    e.delta = nf.value + ng.value;
    e.stderr_delta = nf.se + ng.se;
    if (!std::isfinite(e.delta) || e.delta > 1e300) {
        e.d = 1.0;
        e.stderr_d = 0.0;
    } else {
        e.d = e.delta / (1.0 + e.delta);
        e.stderr_d = e.stderr_delta / ((1.0 + e.delta) * (1.0 + e.delta));
    }
    return e;
}

double lp_distance(const MatrixCocycle& a, const MatrixCocycle& b, const DiscreteBase& base,
                   const LpParams& params) {
    return lp_estimate(a, b, base, params).d;
}

IntegrabilityReport check_integrability(const MatrixCocycle& a, const DiscreteBase& base,
                                        const LpParams& params) {
    std::vector<const Rule*> rules{a.generator().get()};
    for (const auto& p : a.patches()) rules.push_back(p.rule.get());
    const Quadrature q = build_quadrature(rules, {RegionSet::whole()}, base, params.samples, params.seed);
    std::vector<double> f, g;
    for (const auto& x : q.pts) {
        const Mat m = a.raw(x);
        f.push_back(std::max(0.0, std::log(spectral_norm(m))));
        g.push_back(std::max(0.0, std::log(spectral_norm(m.inverse()))));
    }
    const NormAcc nf = lp_norm(f, q.w, 1.0, q.exact);
    const NormAcc ng = lp_norm(g, q.w, 1.0, q.exact);
    IntegrabilityReport r;
    r.log_plus = nf.value;
    r.log_plus_inv = ng.value;
    r.stderr_plus = nf.se;
    r.stderr_inv = ng.se;
    r.finite = std::isfinite(r.log_plus) && std::isfinite(r.log_plus_inv);
    return r;
}

}  // namespace cocy
