#include "cocyclelab/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cocy {

double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    if (m.rows() == 2 && m.cols() == 2) {
        // closed form for the 2x2 case, it sits on every hot path
        const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        // sigma_max = (|(a+d, b-c)| + |(a-d, b+c)|) / 2, no cancellation near orthogonal m
        return 0.5 * (std::hypot(a + d, b - c) + std::hypot(a - d, b + c));
    }
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double projective_angle(const Vec& u, const Vec& v) {
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return std::numbers::pi / 2;
    const Vec a = u / nu, b = v / nv;
    const double c = std::abs(a.dot(b));
    // sin via the rejection is accurate for tiny angles, acos is not
    const double s = (b - a.dot(b) * a).norm();
    return std::atan2(s, c);
}

Mat symplectic_J(int d) {
    const int q = d / 2;
    Mat J = Mat::Zero(d, d);
    J.block(0, q, q, q) = Mat::Identity(q, q);
    J.block(q, 0, q, q) = -Mat::Identity(q, q);
    return J;
}

long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<std::vector<int>> index_subsets(int d, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    if (k == 0) return {{}};
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == d - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

namespace {

double small_det(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    const int k = static_cast<int>(rows.size());
    if (k == 1) return m(rows[0], cols[0]);
    if (k == 2)
        return m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
    Mat sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = m(rows[i], cols[j]);
    return sub.partialPivLu().determinant();
}

}  // namespace

Mat compound(const Mat& m, int k) {
    const int d = static_cast<int>(m.rows());
    const auto subsets = index_subsets(d, k);
    const int n = static_cast<int>(subsets.size());
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = small_det(m, subsets[i], subsets[j]);
    return out;
}

double bump(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double bump_dot(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double s = t * (1.0 - t);
    return 30.0 * s * s;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

Vec Rng::unit_vector(int d) {
    Vec v(d);
    do {
        for (int i = 0; i < d; ++i) v(i) = normal();
    } while (v.norm() < 1e-8);
    return v / v.norm();
}

Mat Rng::gaussian(int rows, int cols) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
}

Mat random_orthogonal(Rng& rng, int d) {
    Eigen::HouseholderQR<Mat> qr(rng.gaussian(d, d));
    Mat q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

Mat random_sl(Rng& rng, int d, double spread) {
    Mat a = spread * rng.gaussian(d, d);
    a -= (a.trace() / d) * Mat::Identity(d, d);
    return expm(a);
}

Mat random_sp(Rng& rng, int d, double spread) {
    // exp of a Hamiltonian matrix J S with S symmetric
    Mat s = rng.gaussian(d, d);
    s = (0.5 * spread * (s + s.transpose())).eval();
    return expm(symplectic_J(d) * s);
}

Mat expm(const Mat& a) { return a.exp(); }

}  // namespace cocy
