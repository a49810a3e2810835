#pragma once

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/linalg.hpp"

#include <functional>

namespace cocy {

// t -> zeta(t) with zeta(0) = Id, and its generator zeta'(t) zeta(t)^-1.
struct IsotopyPath {
    std::function<Mat(double)> zeta;
    std::function<Mat(double)> generator;
    double K = 0.0;  // sampled sup of ||generator||

    // zeta is Id for t <= 0 and the endpoint for t >= 1; the generator vanishes there
    Mat at(double t) const { return zeta(t); }
    Mat gen(double t) const { return generator(t); }
};

// bound on ||R^{±1}|| for rotation_to in this family
double steering_constant(const GroupFamily& family);

Mat rotation_to(const Vec& u, const Vec& v, const GroupFamily& family);
Mat saddle(const Vec& e, double delta, const GroupFamily& family);
IsotopyPath isotopy_to(const Vec& u, const Vec& v, const GroupFamily& family);
IsotopyPath saddle_isotopy(const Vec& e, double delta, const GroupFamily& family);

// Path R(t) with R(t) u = u_t = (1 - bump(t)) u + bump(t) v, written as
// R(t) = s(t) Rot(t) where Rot(t) lies in the family and s(t) = |u_t|/|u|.
// v is flipped when <u, v> < 0 so u_t never vanishes.
struct SteeringPath {
    Vec u, v;
    GroupFamily family;
    Vec plane_a, plane_b;  // GL/SL/SO: orthonormal basis of span{u, v}
    bool planar = true;
    bool trivial = false;  // v parallel to u

    Vec target(double t) const;          // u_t
    double scale(double t) const;        // s(t)
    double scale_rate(double t) const;   // s'(t)/s(t)
    Mat rotation(double t) const;        // Rot(t)
    Mat rotation_rate(double t) const;   // Rot'(t) Rot(t)^-1
};

SteeringPath steering_path(const Vec& u, const Vec& v, const GroupFamily& family);

// Orthonormal partner of e used by the saddle constructions (J^T e for Sp).
Vec saddle_partner(const Vec& e, const GroupFamily& family);

}  // namespace cocy
