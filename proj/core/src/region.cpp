#include "cocyclelab/base.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cocy {

namespace {

bool in_window(double x, double a, double len) {
    if (len >= 1.0) return true;
    return frac(x - a) < len;
}

std::vector<std::pair<double, double>> window_pieces(double a, double len) {
    if (len >= 1.0) return {{0.0, 1.0}};
    a = frac(a);
    if (a + len <= 1.0) return {{a, a + len}};
    return {{a, 1.0}, {0.0, a + len - 1.0}};
}

bool pieces_overlap(const std::vector<std::pair<double, double>>& p,
                    const std::vector<std::pair<double, double>>& q) {
    for (const auto& [a0, a1] : p)
        for (const auto& [b0, b1] : q)
            if (std::max(a0, b0) < std::min(a1, b1)) return true;
    return false;
}

}  // namespace

RegionSet RegionSet::whole() { return {}; }

RegionSet RegionSet::interval(double a, double len) {
    if (len <= 0.0) throw InvalidArgument("interval length must be positive");
    RegionSet r;
    r.kind = Kind::Interval;
    r.a = frac(a);
    r.len = std::min(len, 1.0);
    return r;
}

RegionSet RegionSet::box(double a, double len, double b, double wid) {
    if (len <= 0.0 || wid <= 0.0) throw InvalidArgument("box sides must be positive");
    RegionSet r;
    r.kind = Kind::Box;
    r.a = frac(a);
    r.len = std::min(len, 1.0);
    r.b = frac(b);
    r.wid = std::min(wid, 1.0);
    return r;
}

RegionSet RegionSet::flowbox(const RegionSet& section, double h0, double h1) {
    if (!(h0 >= 0.0 && h1 <= 1.0 && h0 < h1)) throw InvalidArgument("flowbox height window must sit in [0,1]");
    RegionSet r = section;
    r.section_dim = section.kind == Kind::Box ? 2 : 1;
    r.kind = Kind::Flowbox;
    r.h0 = h0;
    r.h1 = h1;
    return r;
}

bool RegionSet::contains(const BasePoint& p) const {
    switch (kind) {
        case Kind::Whole: return true;
        case Kind::Interval: return in_window(p.c[0], a, len);
        case Kind::Box: return in_window(p.c[0], a, len) && in_window(p.c[1], b, wid);
        case Kind::Flowbox: {
            const double h = p.c[static_cast<std::size_t>(section_dim)];
            if (h < h0 || h >= h1) return false;
            if (!in_window(p.c[0], a, len)) return false;
            return section_dim == 1 || in_window(p.c[1], b, wid);
        }
    }
    return false;
}

double RegionSet::measure() const {
    switch (kind) {
        case Kind::Whole: return 1.0;
        case Kind::Interval: return len;
        case Kind::Box: return len * wid;
        case Kind::Flowbox: return len * (section_dim == 2 ? wid : 1.0) * (h1 - h0);
    }
    return 0.0;
}

std::vector<std::pair<double, double>> RegionSet::pieces() const {
    if (kind == Kind::Whole) return {{0.0, 1.0}};
    return window_pieces(a, len);
}

std::vector<std::pair<double, double>> RegionSet::pieces_second() const {
    if (kind == Kind::Box || (kind == Kind::Flowbox && section_dim == 2)) return window_pieces(b, wid);
    return {{0.0, 1.0}};
}

bool RegionSet::overlaps(const RegionSet& o) const {
    if (kind == Kind::Whole || o.kind == Kind::Whole) return true;
    if (!pieces_overlap(pieces(), o.pieces())) return false;
    if (!pieces_overlap(pieces_second(), o.pieces_second())) return false;
    if (kind == Kind::Flowbox && o.kind == Kind::Flowbox)
        return std::max(h0, o.h0) < std::min(h1, o.h1);
    return true;
}

std::string RegionSet::describe() const {
    std::ostringstream s;
    s.precision(17);
    switch (kind) {
        case Kind::Whole: s << "whole"; break;
        case Kind::Interval: s << "interval " << a << ' ' << len; break;
        case Kind::Box: s << "box " << a << ' ' << len << ' ' << b << ' ' << wid; break;
        case Kind::Flowbox:
            if (section_dim == 1)
                s << "flowbox " << a << ' ' << len << ' ' << h0 << ' ' << h1;
            else
                s << "flowbox2 " << a << ' ' << len << ' ' << b << ' ' << wid << ' ' << h0 << ' ' << h1;
            break;
    }
    return s.str();
}

std::optional<RegionSet> image_region(const DiscreteBase& base, const RegionSet& v) {
    if (v.kind == RegionSet::Kind::Whole) return v;
    switch (base.kind()) {
        case MapKind::Rotation:
            if (v.kind != RegionSet::Kind::Interval) return std::nullopt;
            return RegionSet::interval(v.a + base.alpha(), v.len);
        case MapKind::Doubling:
            if (v.kind != RegionSet::Kind::Interval) return std::nullopt;
            if (v.len >= 0.5) return RegionSet::whole();
            return RegionSet::interval(2.0 * v.a, 2.0 * v.len);
        case MapKind::Cat:
            return std::nullopt;
    }
    return std::nullopt;
}

double preimage_measure(const DiscreteBase& base, const RegionSet& v) {
    if (v.kind == RegionSet::Kind::Whole) return 1.0;
    switch (base.kind()) {
        case MapKind::Rotation: {
            double m = 0.0;
            for (const auto& [p0, p1] : window_pieces(v.a - base.alpha(), v.len)) m += p1 - p0;
            return m;
        }
        case MapKind::Doubling: {
            // two branches x/2 and (x+1)/2, each piece halves
            double m = 0.0;
            for (const auto& [p0, p1] : v.pieces()) {
                m += (p1 / 2.0 - p0 / 2.0);
                m += ((p1 + 1.0) / 2.0 - (p0 + 1.0) / 2.0);
            }
            return m;
        }
        case MapKind::Cat: {
            if (v.kind != RegionSet::Kind::Box) throw InvalidArgument("cat-map regions are boxes");
            // the preimage of a box is the parallelogram T^{-1}(box), shoelace area
            const double xs[4] = {v.a, v.a + v.len, v.a + v.len, v.a};
            const double ys[4] = {v.b, v.b, v.b + v.wid, v.b + v.wid};
            double px[4], py[4];
            for (int i = 0; i < 4; ++i) {
                px[i] = 2.0 * xs[i] - ys[i];
                py[i] = -xs[i] + ys[i];
            }
            double area = 0.0;
            for (int i = 0; i < 4; ++i) {
                const int j = (i + 1) % 4;
                area += px[i] * py[j] - px[j] * py[i];
            }
            return std::abs(area) / 2.0;
        }
    }
    return 0.0;
}

bool disjoint_from_image(const DiscreteBase& base, const RegionSet& v) {
    if (v.kind == RegionSet::Kind::Whole) return false;
    if (const auto img = image_region(base, v)) return !img->overlaps(v);
    // cat map: scan a grid of V and test whether any image point lands in V
    const int n = 300;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = v.a + v.len * (i + 0.5) / n;
            const double y = v.b + v.wid * (j + 0.5) / n;
            if (v.contains(base.forward(base.point(x, y)))) return false;
        }
    return true;
}

}  // namespace cocy
