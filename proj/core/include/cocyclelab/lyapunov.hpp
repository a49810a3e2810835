#pragma once

#include "cocyclelab/base.hpp"
#include "cocyclelab/cocycle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cocy {

struct SpectrumOptions {
    int qr_interval = 10;
    double group_tol = 0.05;
    int blocks = 20;
    int history_points = 0;  // finite-time exponents recorded at this many checkpoints
};

struct SpectrumEstimate {
    std::vector<double> exponents;  // descending
    std::vector<double> stderrs;    // block-averaged, same order
    long n = 0;
    double time_unit = 1.0;         // 1 for maps, renormalization interval for flows
    std::vector<std::vector<int>> groups;
    std::vector<std::pair<double, std::vector<double>>> history;  // (n or t, exponents)

    std::vector<int> multiplicities() const;
    bool one_point() const { return groups.size() == 1; }
    bool simple() const { return groups.size() == exponents.size(); }
    double sum() const;
    double sum_stderr() const;
    double top_sum(int k) const;
};

std::vector<std::vector<int>> group_exponents(const std::vector<double>& sorted_desc, double tol);

SpectrumEstimate full_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n,
                               const SpectrumOptions& opts = {});

class ExteriorCocycle {
public:
    ExteriorCocycle(MatrixCocycle a, int k);
    int order() const { return k_; }
    int dim() const { return dim_; }
    const MatrixCocycle& underlying() const { return a_; }
    Mat evaluate(const BasePoint& x) const;
    // the same object as a plain GL cocycle of dimension C(d,k)
    MatrixCocycle as_cocycle() const;

private:
    MatrixCocycle a_;
    int k_;
    int dim_;
};

ExteriorCocycle exterior_power(const MatrixCocycle& a, int k);

// top exponent of the k-th exterior power; the first n/10 steps align the
// test vector and are excluded from the average
double lambda_hat_k(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n, int k);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    int points = 0;
};

Estimate Lambda_k(const MatrixCocycle& a, const DiscreteBase& base, int k, long n_orbit, int n_points,
                  std::uint64_t seed);
Estimate jump_k(const MatrixCocycle& a, const DiscreteBase& base, int k, long n_orbit, int n_points,
                std::uint64_t seed, const SpectrumOptions& opts = {});

double direction_exponent(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, const Vec& v,
                          long n);

// Birkhoff average of log|det A| along the orbit
double birkhoff_log_det(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n);

std::string to_json(const SpectrumEstimate& s, std::uint64_t seed);

}  // namespace cocy
