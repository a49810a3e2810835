#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace cocy {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Largest singular value.
double spectral_norm(const Mat& m);

// Unsigned angle between the lines spanned by u and v, in [0, pi/2].
double projective_angle(const Vec& u, const Vec& v);

// Standard symplectic form [[0, I], [-I, 0]] of size 2q.
Mat symplectic_J(int d);

// k-th compound matrix: all k×k minors, rows and columns in lexicographic
// order of the index subsets.
Mat compound(const Mat& m, int k);
std::vector<std::vector<int>> index_subsets(int d, int k);
long binomial(int n, int k);

// Quintic smoothstep on [0,1], clamped outside.
double bump(double t);
double bump_dot(double t);

// SplitMix64 finalizer, used for seed splitting and the bit streams of the
// doubling map.
std::uint64_t mix64(std::uint64_t x);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
    double uniform();  // [0, 1)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal();
    std::uint64_t next() { return eng_(); }
    Vec unit_vector(int d);
    Mat gaussian(int rows, int cols);

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Random bounded matrices in each family, used by tests and the acceptance
// suite.
Mat random_sl(Rng& rng, int d, double spread);
Mat random_sp(Rng& rng, int d, double spread);
Mat random_orthogonal(Rng& rng, int d);

Mat expm(const Mat& a);

}  // namespace cocy
