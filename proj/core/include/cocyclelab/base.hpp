#pragma once

#include "cocyclelab/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cocy {

// A point of a phase space: circle [0,1), torus [0,1)^2, or a suspension
// point (section coordinates followed by the height in [0,1)).
// The doubling map carries extra state: a 64-bit window on a bi-infinite
// bit stream (its natural extension), see DiscreteBase.
struct BasePoint {
    std::array<double, 3> c{};
    int dim = 1;

    std::uint64_t window = 0;   // bits pos..pos+63 of the binary expansion
    std::int64_t pos = 0;
    std::uint64_t stream = 0;   // bits outside the anchor window come from here
    std::uint64_t anchor = 0;   // bits 0..63 as given at construction

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
};

double frac(double v);
// distance on R/Z
double circle_dist(double a, double b);

enum class MapKind { Rotation, Doubling, Cat };

class DiscreteBase {
public:
    static DiscreteBase rotation(double alpha);
    static DiscreteBase golden_rotation();
    static DiscreteBase doubling();
    static DiscreteBase cat();

    MapKind kind() const { return kind_; }
    int dim() const { return kind_ == MapKind::Cat ? 2 : 1; }
    double alpha() const { return alpha_; }
    std::string name() const;

    BasePoint point(double x) const;
    BasePoint point(double x, double y) const;
    BasePoint point(const std::vector<double>& coords) const;

    BasePoint forward(const BasePoint& p) const;
    BasePoint backward(const BasePoint& p) const;
    BasePoint sample(Rng& rng) const;

private:
    MapKind kind_ = MapKind::Rotation;
    double alpha_ = 0.0;
};

enum class FlowKind { LinearTorus, Suspension };

class FlowBase {
public:
    static FlowBase linear_torus(double gamma);
    static FlowBase suspension(const DiscreteBase& base);

    FlowKind kind() const { return kind_; }
    int dim() const;
    double gamma() const { return gamma_; }
    const DiscreteBase& section_map() const { return base_; }
    std::string name() const;

    // for suspensions: section point and height
    BasePoint point(const BasePoint& section, double height) const;
    BasePoint point(double x, double y) const;
    BasePoint section_of(const BasePoint& p) const;
    double height_of(const BasePoint& p) const;

    BasePoint sample(Rng& rng) const;

private:
    FlowKind kind_ = FlowKind::LinearTorus;
    double gamma_ = 0.0;
    DiscreteBase base_ = DiscreteBase::golden_rotation();
};

struct RegionSet {
    enum class Kind { Whole, Interval, Box, Flowbox };
    Kind kind = Kind::Whole;
    double a = 0.0, len = 1.0;   // first coordinate window [a, a+len) mod 1
    double b = 0.0, wid = 1.0;   // second coordinate window (Box, or Flowbox over a torus section)
    double h0 = 0.0, h1 = 1.0;   // height window (Flowbox)
    int section_dim = 1;         // Flowbox only

    static RegionSet whole();
    static RegionSet interval(double a, double len);
    static RegionSet box(double a, double len, double b, double wid);
    static RegionSet flowbox(const RegionSet& section, double h0, double h1);

    bool contains(const BasePoint& p) const;
    double measure() const;
    // first-coordinate window split into non-wrapping pieces
    std::vector<std::pair<double, double>> pieces() const;
    std::vector<std::pair<double, double>> pieces_second() const;
    bool overlaps(const RegionSet& other) const;
    std::string describe() const;
};

BasePoint iterate(const DiscreteBase& base, const BasePoint& x, long n);
BasePoint flow(const FlowBase& base, const BasePoint& x, double t);

BasePoint sample_measure(const DiscreteBase& base, std::uint64_t seed);
BasePoint sample_measure(const FlowBase& base, std::uint64_t seed);
// i.i.d. samples of the invariant measure, deterministic in the seed
std::vector<BasePoint> sample_points(const DiscreteBase& base, std::uint64_t seed, int count);
std::vector<BasePoint> sample_points(const FlowBase& base, std::uint64_t seed, int count);
// uniform sample restricted to a region (for stratified integrals)
BasePoint sample_in(const RegionSet& region, const DiscreteBase& base, Rng& rng);

double visit_frequency(const DiscreteBase& base, const RegionSet& region, const BasePoint& x, long n);
// time average of the indicator sampled every dt time units
double visit_frequency(const FlowBase& base, const RegionSet& region, const BasePoint& x, double T,
                       double dt);

// Analytic images / preimages of interval and box regions.
std::optional<RegionSet> image_region(const DiscreteBase& base, const RegionSet& v);
double preimage_measure(const DiscreteBase& base, const RegionSet& v);
// V ∩ T(V) = ∅; analytic for circle bases, sampled for the cat map
bool disjoint_from_image(const DiscreteBase& base, const RegionSet& v);

}  // namespace cocy
