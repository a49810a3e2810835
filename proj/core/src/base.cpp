#include "cocyclelab/base.hpp"

#include "cocyclelab/errors.hpp"

#include <cmath>
#include <numbers>

namespace cocy {

double frac(double v) {
    double f = v - std::floor(v);
    if (f >= 1.0) f = 0.0;  // v a tiny negative number
    return f;
}

double circle_dist(double a, double b) {
    const double d = frac(a - b);
    return std::min(d, 1.0 - d);
}

namespace {

int stream_bit(const BasePoint& p, std::int64_t i) {
    if (i >= 0 && i < 64) return static_cast<int>((p.anchor >> (63 - i)) & 1U);
    const std::uint64_t word = mix64(p.stream ^ mix64(static_cast<std::uint64_t>(i >> 6)));
    return static_cast<int>((word >> (63 - (i & 63))) & 1U);
}

double window_coord(std::uint64_t w) {
    double v = static_cast<double>(w) * 0x1.0p-64;
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    return v;
}

BasePoint doubling_point(std::uint64_t window, std::uint64_t stream) {
    BasePoint p;
    p.dim = 1;
    p.window = window;
    p.anchor = window;
    p.stream = stream;
    p.pos = 0;
    p.c[0] = window_coord(window);
    return p;
}

std::uint64_t coord_window(double x) {
    x = frac(x);
    // x has at most 53 significant bits, so this product is exact
    const long double scaled = std::ldexp(static_cast<long double>(x), 64);
    if (scaled >= 18446744073709551615.0L) return ~std::uint64_t{0};
    return static_cast<std::uint64_t>(scaled);
}

}  // namespace

DiscreteBase DiscreteBase::rotation(double alpha) {
    DiscreteBase b;
    b.kind_ = MapKind::Rotation;
    b.alpha_ = frac(alpha);
    return b;
}

DiscreteBase DiscreteBase::golden_rotation() { return rotation((std::sqrt(5.0) - 1.0) / 2.0); }

DiscreteBase DiscreteBase::doubling() {
    DiscreteBase b;
    b.kind_ = MapKind::Doubling;
    return b;
}

DiscreteBase DiscreteBase::cat() {
    DiscreteBase b;
    b.kind_ = MapKind::Cat;
    return b;
}

std::string DiscreteBase::name() const {
    switch (kind_) {
        case MapKind::Rotation: return "rotation";
        case MapKind::Doubling: return "doubling";
        case MapKind::Cat: return "cat";
    }
    return "?";
}

BasePoint DiscreteBase::point(double x) const {
    if (dim() != 1) throw InvalidArgument("cat map points need two coordinates");
    if (kind_ == MapKind::Doubling) {
        const std::uint64_t w = coord_window(x);
        return doubling_point(w, mix64(w ^ 0x5bd1e995ULL));
    }
    BasePoint p;
    p.dim = 1;
    p.c[0] = frac(x);
    return p;
}

BasePoint DiscreteBase::point(double x, double y) const {
    if (dim() != 2) throw InvalidArgument("circle maps take one coordinate");
    BasePoint p;
    p.dim = 2;
    p.c[0] = frac(x);
    p.c[1] = frac(y);
    return p;
}

BasePoint DiscreteBase::point(const std::vector<double>& coords) const {
    if (static_cast<int>(coords.size()) != dim())
        throw InvalidArgument("point has " + std::to_string(coords.size()) + " coordinates, " +
                              name() + " needs " + std::to_string(dim()));
    return dim() == 1 ? point(coords[0]) : point(coords[0], coords[1]);
}

BasePoint DiscreteBase::forward(const BasePoint& p) const {
    BasePoint q = p;
    switch (kind_) {
        case MapKind::Rotation:
            q.c[0] = frac(p.c[0] + alpha_);
            break;
        case MapKind::Doubling:
            q.window = (p.window << 1) | static_cast<std::uint64_t>(stream_bit(p, p.pos + 64));
            q.pos = p.pos + 1;
            q.c[0] = window_coord(q.window);
            break;
        case MapKind::Cat:
            q.c[0] = frac(p.c[0] + p.c[1]);
            q.c[1] = frac(p.c[0] + 2.0 * p.c[1]);
            break;
    }
    return q;
}

BasePoint DiscreteBase::backward(const BasePoint& p) const {
    BasePoint q = p;
    switch (kind_) {
        case MapKind::Rotation:
            q.c[0] = frac(p.c[0] - alpha_);
            break;
        case MapKind::Doubling:
            q.pos = p.pos - 1;
            q.window = (p.window >> 1) | (static_cast<std::uint64_t>(stream_bit(p, q.pos)) << 63);
            q.c[0] = window_coord(q.window);
            break;
        case MapKind::Cat:
            q.c[0] = frac(2.0 * p.c[0] - p.c[1]);
            q.c[1] = frac(p.c[1] - p.c[0]);
            break;
    }
    return q;
}

BasePoint DiscreteBase::sample(Rng& rng) const {
    switch (kind_) {
        case MapKind::Doubling: {
            const std::uint64_t w = rng.next();
            return doubling_point(w, rng.next());
        }
        case MapKind::Cat: {
            const double x = rng.uniform();
            return point(x, rng.uniform());
        }
        case MapKind::Rotation:
        default:
            return point(rng.uniform());
    }
}

BasePoint iterate(const DiscreteBase& base, const BasePoint& x, long n) {
    if (base.kind() == MapKind::Rotation) {
        BasePoint q = x;
        const long double shift = std::fmod(static_cast<long double>(n) * base.alpha(), 1.0L);
        q.c[0] = frac(static_cast<double>(static_cast<long double>(x.c[0]) + shift));
        return q;
    }
    BasePoint q = x;
    if (n >= 0)
        for (long i = 0; i < n; ++i) q = base.forward(q);
    else
        for (long i = 0; i < -n; ++i) q = base.backward(q);
    return q;
}

// ---------------------------------------------------------------- flows

FlowBase FlowBase::linear_torus(double gamma) {
    FlowBase f;
    f.kind_ = FlowKind::LinearTorus;
    f.gamma_ = gamma;
    return f;
}

FlowBase FlowBase::suspension(const DiscreteBase& base) {
    FlowBase f;
    f.kind_ = FlowKind::Suspension;
    f.base_ = base;
    return f;
}

int FlowBase::dim() const { return kind_ == FlowKind::LinearTorus ? 2 : base_.dim() + 1; }

std::string FlowBase::name() const {
    return kind_ == FlowKind::LinearTorus ? "torus-flow" : "suspension(" + base_.name() + ")";
}

BasePoint FlowBase::point(const BasePoint& section, double height) const {
    if (kind_ != FlowKind::Suspension) throw InvalidArgument("section points only exist for suspensions");
    BasePoint p = section;
    p.c[static_cast<std::size_t>(section.dim)] = frac(height);
    p.dim = section.dim + 1;
    return p;
}

BasePoint FlowBase::point(double x, double y) const {
    if (kind_ == FlowKind::LinearTorus) {
        BasePoint p;
        p.dim = 2;
        p.c[0] = frac(x);
        p.c[1] = frac(y);
        return p;
    }
    if (base_.dim() != 1) throw InvalidArgument("suspension of the cat map needs three coordinates");
    return point(base_.point(x), y);
}

BasePoint FlowBase::section_of(const BasePoint& p) const {
    BasePoint s = p;
    s.dim = p.dim - 1;
    s.c[static_cast<std::size_t>(s.dim)] = 0.0;
    return s;
}

double FlowBase::height_of(const BasePoint& p) const { return p.c[static_cast<std::size_t>(p.dim - 1)]; }

BasePoint FlowBase::sample(Rng& rng) const {
    if (kind_ == FlowKind::LinearTorus) {
        const double x = rng.uniform();
        return point(x, rng.uniform());
    }
    const BasePoint s = base_.sample(rng);
    return point(s, rng.uniform());
}

BasePoint flow(const FlowBase& base, const BasePoint& x, double t) {
    if (base.kind() == FlowKind::LinearTorus) {
        BasePoint q = x;
        q.c[0] = frac(x.c[0] + t);
        q.c[1] = frac(x.c[1] + t * base.gamma());
        return q;
    }
    double h = base.height_of(x) + t;
    double m = std::floor(h);
    h -= m;
    if (h >= 1.0) {
        h -= 1.0;
        m += 1.0;
    }
    BasePoint s = iterate(base.section_map(), base.section_of(x), static_cast<long>(m));
    return base.point(s, h);
}

// ---------------------------------------------------------------- sampling

BasePoint sample_measure(const DiscreteBase& base, std::uint64_t seed) {
    Rng rng(seed);
    return base.sample(rng);
}

BasePoint sample_measure(const FlowBase& base, std::uint64_t seed) {
    Rng rng(seed);
    return base.sample(rng);
}

std::vector<BasePoint> sample_points(const DiscreteBase& base, std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<BasePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(base.sample(rng));
    return out;
}

std::vector<BasePoint> sample_points(const FlowBase& base, std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<BasePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(base.sample(rng));
    return out;
}

BasePoint sample_in(const RegionSet& region, const DiscreteBase& base, Rng& rng) {
    switch (region.kind) {
        case RegionSet::Kind::Interval: {
            const double x = frac(region.a + region.len * rng.uniform());
            if (base.kind() == MapKind::Doubling) {
                BasePoint p = base.point(x);
                // refill the bits below double precision
                p.window |= rng.next() >> 53;
                p.anchor = p.window;
                p.stream = rng.next();
                p.c[0] = static_cast<double>(p.window) * 0x1.0p-64;
                if (p.c[0] >= 1.0) p.c[0] = std::nextafter(1.0, 0.0);
                return p;
            }
            if (base.dim() == 2) return base.point(x, rng.uniform());
            return base.point(x);
        }
        case RegionSet::Kind::Box: {
            const double x = frac(region.a + region.len * rng.uniform());
            const double y = frac(region.b + region.wid * rng.uniform());
            return base.point(x, y);
        }
        default:
            return base.sample(rng);
    }
}

double visit_frequency(const DiscreteBase& base, const RegionSet& region, const BasePoint& x, long n) {
    if (n < 1) throw InvalidArgument("visit_frequency needs n >= 1");
    long hits = 0;
    BasePoint p = x;
    for (long j = 0; j < n; ++j) {
        if (region.contains(p)) ++hits;
        p = base.forward(p);
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double visit_frequency(const FlowBase& base, const RegionSet& region, const BasePoint& x, double T,
                       double dt) {
    if (T <= 0.0 || dt <= 0.0) throw InvalidArgument("visit_frequency needs T, dt > 0");
    const long steps = static_cast<long>(std::llround(T / dt));
    long hits = 0;
    BasePoint p = x;
    for (long j = 0; j < steps; ++j) {
        if (region.contains(p)) ++hits;
        p = flow(base, p, dt);
    }
    return static_cast<double>(hits) / static_cast<double>(steps);
}

}  // namespace cocy
