#include "cocyclelab/groups.hpp"

#include "cocyclelab/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace cocy {

namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cd = std::complex<double>;

void check_nonzero(const Vec& u, const char* what) {
    if (!(u.norm() > 0.0) || !u.allFinite()) throw InvalidArgument(std::string(what) + " must be a nonzero vector");
}

// unit vector orthogonal to a, built from the coordinate axis least aligned with it
Vec orthogonal_partner(const Vec& a) {
    Eigen::Index j = 0;
    a.cwiseAbs().minCoeff(&j);
    Vec w = Vec::Unit(a.size(), j);
    w -= a.dot(w) * a;
    return w / w.norm();
}

Mat plane_rotation(const Vec& a, const Vec& b, double theta) {
    const int d = static_cast<int>(a.size());
    return Mat::Identity(d, d) + std::sin(theta) * (b * a.transpose() - a * b.transpose()) +
           (std::cos(theta) - 1.0) * (a * a.transpose() + b * b.transpose());
}

struct Plane {
    Vec a, b;
    double theta = 0.0;
};

// plane and angle of the rotation taking direction u to direction v
Plane rotation_plane(const Vec& u, const Vec& v) {
    Plane p;
    p.a = u / u.norm();
    const Vec vh = v / v.norm();
    const double c = p.a.dot(vh);
    Vec w = vh - c * p.a;
    const double s = w.norm();
    if (s < 1e-15) {
        p.b = orthogonal_partner(p.a);
        p.theta = c > 0 ? 0.0 : std::numbers::pi;
        return p;
    }
    p.b = w / s;
    // second pass: w loses orthogonality when u and v are nearly parallel
    p.b -= p.a.dot(p.b) * p.a;
    p.b /= p.b.norm();
    p.theta = std::atan2(s, c);
    return p;
}

CVec complexify(const Vec& x) {
    const int q = static_cast<int>(x.size()) / 2;
    CVec z(q);
    for (int i = 0; i < q; ++i) z(i) = cd(x(i), x(i + q));
    return z;
}

Mat realify(const CMat& z) {
    const int q = static_cast<int>(z.rows());
    Mat m(2 * q, 2 * q);
    m.block(0, 0, q, q) = z.real();
    m.block(0, q, q, q) = -z.imag();
    m.block(q, 0, q, q) = z.imag();
    m.block(q, q, q, q) = z.real();
    return m;
}

// Unitary steering on C^q: phase rotation of zu, then a rotation in the
// complex plane span{w1, w2}. Both factors are symplectic orthogonal once
// realified.
struct UnitarySteer {
    CVec zu, w1, w2;
    double psi = 0.0, phi = 0.0;

    CMat phase(double frac) const {
        const int q = static_cast<int>(zu.size());
        return CMat::Identity(q, q) + (std::exp(cd(0.0, frac * psi)) - 1.0) * zu * zu.adjoint();
    }
    CMat turn(double frac) const {
        const int q = static_cast<int>(zu.size());
        if (phi == 0.0) return CMat::Identity(q, q);
        const double a = frac * phi;
        return CMat::Identity(q, q) + (std::cos(a) - 1.0) * (w1 * w1.adjoint() + w2 * w2.adjoint()) +
               std::sin(a) * (w2 * w1.adjoint() - w1 * w2.adjoint());
    }
    CMat at(double frac) const { return turn(frac) * phase(frac); }
};

UnitarySteer unitary_steer(const Vec& u, const Vec& v) {
    UnitarySteer s;
    s.zu = complexify(u / u.norm());
    const CVec zv = complexify(v / v.norm());
    const cd c = s.zu.dot(zv);  // conjugate-linear in the first slot
    s.psi = std::abs(c) > 1e-300 ? std::arg(c) : 0.0;
    s.w1 = std::exp(cd(0.0, s.psi)) * s.zu;
    const double cr = std::abs(c);
    CVec w = zv - cr * s.w1;
    const double sn = w.norm();
    if (sn < 1e-15) {
        s.phi = 0.0;
        s.w2 = CVec::Zero(s.zu.size());
    } else {
        s.w2 = w / sn;
        s.phi = std::atan2(sn, cr);
    }
    return s;
}

double sampled_sup(const std::function<Mat(double)>& g) {
    double k = 0.0;
    const int n = 400;
    for (int i = 0; i <= n; ++i) k = std::max(k, spectral_norm(g(static_cast<double>(i) / n)));
    return k;
}

}  // namespace

double steering_constant(const GroupFamily&) {
    // every construction below is orthogonal
    return 1.0;
}

Mat rotation_to(const Vec& u, const Vec& v, const GroupFamily& family) {
    check_nonzero(u, "u");
    check_nonzero(v, "v");
    const int d = family.d;
    if (u.size() != d || v.size() != d) throw InvalidArgument("direction has the wrong dimension");
    if (family.kind == FamilyKind::Sp) return realify(unitary_steer(u, v).at(1.0));
    const Plane p = rotation_plane(u, v);
    if (p.theta == std::numbers::pi) {
        // two quarter turns through the auxiliary direction
        const Mat q = plane_rotation(p.a, p.b, std::numbers::pi / 2);
        return q * q;
    }
    return plane_rotation(p.a, p.b, p.theta);
}

Vec saddle_partner(const Vec& e, const GroupFamily& family) {
    const Vec eh = e / e.norm();
    if (family.kind == FamilyKind::Sp) return symplectic_J(family.d).transpose() * eh;
    return orthogonal_partner(eh);
}

Mat saddle(const Vec& e, double delta, const GroupFamily& family) {
    if (!family.saddle_conservative())
        throw NotSaddleConservative(family.name() + "(" + std::to_string(family.d) + ") has no saddles");
    check_nonzero(e, "e");
    if (delta < 0.0) throw InvalidArgument("delta must be nonnegative");
    const int d = family.d;
    if (d < 2) throw InvalidArgument("saddles need d >= 2");
    const Vec eh = e / e.norm();
    const Vec f = saddle_partner(eh, family);
    const double s = 1.0 + delta;
    return Mat::Identity(d, d) + (s - 1.0) * eh * eh.transpose() + (1.0 / s - 1.0) * f * f.transpose();
}

IsotopyPath isotopy_to(const Vec& u, const Vec& v, const GroupFamily& family) {
    check_nonzero(u, "u");
    check_nonzero(v, "v");
    const int d = family.d;
    IsotopyPath path;
    if (family.kind == FamilyKind::Sp) {
        const UnitarySteer s = unitary_steer(u, v);
        const CMat g_turn = s.w2 * s.w1.adjoint() - s.w1 * s.w2.adjoint();
        const CMat g_phase = cd(0.0, 1.0) * s.zu * s.zu.adjoint();
        path.zeta = [s](double t) { return realify(s.at(bump(t))); };
        path.generator = [s, g_turn, g_phase](double t) {
            const double e = bump(t), ed = bump_dot(t);
            const CMat turn = s.turn(e);
            const CMat g = s.phi * g_turn + s.psi * (turn * g_phase * turn.adjoint());
            return Mat(ed * realify(g));
        };
    } else {
        const Plane p = rotation_plane(u, v);
        const Mat g = p.b * p.a.transpose() - p.a * p.b.transpose();
        path.zeta = [p](double t) { return plane_rotation(p.a, p.b, bump(t) * p.theta); };
        path.generator = [p, g](double t) { return Mat(bump_dot(t) * p.theta * g); };
        (void)d;
    }
    path.K = sampled_sup(path.generator);
    return path;
}

IsotopyPath saddle_isotopy(const Vec& e, double delta, const GroupFamily& family) {
    if (!family.saddle_conservative())
        throw NotSaddleConservative(family.name() + "(" + std::to_string(family.d) + ") has no saddles");
    check_nonzero(e, "e");
    const Vec eh = e / e.norm();
    const Vec f = saddle_partner(eh, family);
    const Mat pe = eh * eh.transpose();
    const Mat pf = f * f.transpose();
    const Mat gen_dir = pe - pf;
    IsotopyPath path;
    path.zeta = [eh, family, delta](double t) { return saddle(eh, delta * bump(t), family); };
    path.generator = [gen_dir, delta](double t) {
        const double s = 1.0 + delta * bump(t);
        return Mat((delta * bump_dot(t) / s) * gen_dir);
    };
    path.K = sampled_sup(path.generator);
    return path;
}

// ---------------------------------------------------------------- steering path

SteeringPath steering_path(const Vec& u, const Vec& v, const GroupFamily& family) {
    check_nonzero(u, "u");
    check_nonzero(v, "v");
    SteeringPath p;
    p.family = family;
    p.u = u;
    p.v = u.dot(v) < 0.0 ? Vec(-v) : v;
    p.planar = family.kind != FamilyKind::Sp;
    p.plane_a = u / u.norm();
    Vec w = p.v - p.v.dot(p.plane_a) * p.plane_a;
    const double wn = w.norm();
    p.trivial = wn <= 1e-15 * p.v.norm();
    p.plane_b = p.trivial ? orthogonal_partner(p.plane_a) : Vec(w / wn);
    return p;
}

Vec SteeringPath::target(double t) const {
    const double e = bump(t);
    return (1.0 - e) * u + e * v;
}

double SteeringPath::scale(double t) const { return target(t).norm() / u.norm(); }

double SteeringPath::scale_rate(double t) const {
    const Vec ut = target(t);
    const Vec dut = bump_dot(t) * (v - u);
    return ut.dot(dut) / ut.squaredNorm();
}

Mat SteeringPath::rotation(double t) const {
    const int d = family.d;
    if (trivial) return Mat::Identity(d, d);
    const Vec ut = target(t);
    if (!planar) return rotation_to(u, ut, family);
    const double x = ut.dot(plane_a), y = ut.dot(plane_b);
    return plane_rotation(plane_a, plane_b, std::atan2(y, x));
}

Mat SteeringPath::rotation_rate(double t) const {
    const int d = family.d;
    if (trivial || bump_dot(t) == 0.0) return Mat::Zero(d, d);
    if (planar) {
        const Vec ut = target(t);
        const Vec dut = bump_dot(t) * (v - u);
        const double x = ut.dot(plane_a), y = ut.dot(plane_b);
        const double dx = dut.dot(plane_a), dy = dut.dot(plane_b);
        const double rate = (x * dy - y * dx) / (x * x + y * y);
        return rate * (plane_b * plane_a.transpose() - plane_a * plane_b.transpose());
    }
    // symplectic case: central difference, projected back onto the
    // skew-symmetric J-commuting matrices (so the trace is exactly zero)
    const double h = 1e-5;
    const double t0 = std::max(0.0, t - h), t1 = std::min(1.0, t + h);
    const Mat dR = (rotation(t1) - rotation(t0)) / (t1 - t0);
    Mat x = dR * rotation(t).transpose();
    x = (0.5 * (x - x.transpose())).eval();
    const Mat J = symplectic_J(d);
    x = 0.5 * (x - J * x * J);
    for (int i = 0; i < d; ++i) x(i, i) = 0.0;
    return x;
}

}  // namespace cocy
