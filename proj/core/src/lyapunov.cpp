#include "cocyclelab/lyapunov.hpp"

#include "cocyclelab/errors.hpp"
#include "qr_accum.hpp"

#include <json.hpp>

#include <cmath>

namespace cocy {

std::vector<int> SpectrumEstimate::multiplicities() const {
    std::vector<int> m;
    for (const auto& g : groups) m.push_back(static_cast<int>(g.size()));
    return m;
}

double SpectrumEstimate::sum() const {
    double s = 0.0;
    for (double e : exponents) s += e;
    return s;
}

double SpectrumEstimate::sum_stderr() const {
    double s = 0.0;
    for (double e : stderrs) s += e;
    return s;
}

double SpectrumEstimate::top_sum(int k) const {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += exponents[static_cast<std::size_t>(i)];
    return s;
}

std::vector<std::vector<int>> group_exponents(const std::vector<double>& sorted_desc, double tol) {
    std::vector<std::vector<int>> groups;
    for (std::size_t i = 0; i < sorted_desc.size(); ++i) {
        if (i == 0 || sorted_desc[i - 1] - sorted_desc[i] >= tol)
            groups.push_back({static_cast<int>(i)});
        else
            groups.back().push_back(static_cast<int>(i));
    }
    return groups;
}

SpectrumEstimate full_spectrum(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n,
                               const SpectrumOptions& opts) {
    if (opts.qr_interval < 1) throw InvalidArgument("qr_interval must be positive");
    if (n < 10L * opts.qr_interval)
        throw InvalidArgument("full_spectrum needs n >= 10 * qr_interval (n=" + std::to_string(n) + ")");
    const int d = a.dim();
    const int blocks = std::max(1, static_cast<int>(std::min<long>(opts.blocks, n / opts.qr_interval)));
    detail::QrAccumulator acc(d, blocks);
    Mat q = Mat::Identity(d, d);
    BasePoint x = x0;
    SpectrumEstimate hist_holder;
    long since = 0;
    long next_hist = opts.history_points > 0 ? std::max(1L, n / opts.history_points) : n + 1;
    for (long j = 0; j < n; ++j) {
        q = a.raw(x) * q;
        x = base.forward(x);
        ++since;
        const int block = static_cast<int>(j * blocks / n);
        const bool block_end = ((j + 1) * blocks / n) != block || j + 1 == n;
        if (since == opts.qr_interval || block_end) {
            acc.reduce(q, block, static_cast<double>(since));
            since = 0;
            if (j + 1 >= next_hist) {
                hist_holder.history.emplace_back(static_cast<double>(j + 1), acc.current());
                next_hist += std::max(1L, n / opts.history_points);
            }
        }
    }
    SpectrumEstimate s = acc.finish(opts.group_tol);
    s.n = n;
    s.history = std::move(hist_holder.history);
    return s;
}

// ---------------------------------------------------------------- exterior powers

ExteriorCocycle::ExteriorCocycle(MatrixCocycle a, int k) : a_(std::move(a)), k_(k), dim_(0) {
    if (k < 1 || k > a_.dim()) throw InvalidArgument("exterior power order must be in 1..d");
    if (a_.dim() > 6) throw InvalidArgument("exterior powers are capped at d = 6");
    dim_ = static_cast<int>(binomial(a_.dim(), k));
}

Mat ExteriorCocycle::evaluate(const BasePoint& x) const { return compound(a_.raw(x), k_); }

MatrixCocycle ExteriorCocycle::as_cocycle() const {
    const MatrixCocycle a = a_;
    const int k = k_;
    return MatrixCocycle(GroupFamily::gl(dim_),
                         function_rule([a, k](const BasePoint& x) { return compound(a.raw(x), k); },
                                       "exterior " + std::to_string(k)));
}

ExteriorCocycle exterior_power(const MatrixCocycle& a, int k) { return ExteriorCocycle(a, k); }

double lambda_hat_k(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n, int k) {
    const int d = a.dim();
    if (k == 0) return 0.0;
    if (k < 1 || k > d) throw InvalidArgument("lambda_hat_k needs 1 <= k <= d");
    if (n < 10) throw InvalidArgument("lambda_hat_k needs n >= 10");
    const long burn = n / 10;
    BasePoint x = x0;
    if (k == d) {
        double s = 0.0;
        for (long j = 0; j < n; ++j) {
            if (j >= burn) s += std::log(std::abs(a.raw(x).determinant()));
            x = base.forward(x);
        }
        return s / static_cast<double>(n - burn);
    }
    const int m = static_cast<int>(binomial(d, k));
    Rng rng(0x2545f4914f6cdd1dULL + static_cast<std::uint64_t>(m));
    Vec v = rng.unit_vector(m);
    double s = 0.0;
    for (long j = 0; j < n; ++j) {
        const Mat ak = k == 1 ? a.raw(x) : compound(a.raw(x), k);
        v = ak * v;
        const double nv = v.norm();
        if (j >= burn) s += std::log(nv);
        v /= nv;
        x = base.forward(x);
    }
    return s / static_cast<double>(n - burn);
}

namespace {

Estimate mean_estimate(const std::vector<double>& xs) {
    Estimate e;
    e.points = static_cast<int>(xs.size());
    if (xs.empty()) return e;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    e.value = m;
    if (xs.size() > 1) {
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        v /= static_cast<double>(xs.size() - 1);
        e.stderr_ = std::sqrt(v / static_cast<double>(xs.size()));
    }
    return e;
}

}  // namespace

Estimate Lambda_k(const MatrixCocycle& a, const DiscreteBase& base, int k, long n_orbit, int n_points,
                  std::uint64_t seed) {
    if (k == 0) return Estimate{0.0, 0.0, n_points};
    std::vector<double> vals;
    for (const auto& x : sample_points(base, seed, n_points)) vals.push_back(lambda_hat_k(a, base, x, n_orbit, k));
    return mean_estimate(vals);
}

Estimate jump_k(const MatrixCocycle& a, const DiscreteBase& base, int k, long n_orbit, int n_points,
                std::uint64_t seed, const SpectrumOptions& opts) {
    if (k < 1 || k >= a.dim()) throw InvalidArgument("jump_k needs 1 <= k <= d-1");
    std::vector<double> vals;
    for (const auto& x : sample_points(base, seed, n_points)) {
        const SpectrumEstimate s = full_spectrum(a, base, x, n_orbit, opts);
        vals.push_back(0.5 * (s.exponents[static_cast<std::size_t>(k - 1)] - s.exponents[static_cast<std::size_t>(k)]));
    }
    return mean_estimate(vals);
}

double direction_exponent(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, const Vec& v0,
                          long n) {
    if (!(v0.norm() > 0.0)) throw InvalidArgument("direction_exponent needs a nonzero vector");
    if (n < 1) throw InvalidArgument("direction_exponent needs n >= 1");
    Vec v = v0 / v0.norm();
    BasePoint x = x0;
    double s = 0.0;
    for (long j = 0; j < n; ++j) {
        v = a.raw(x) * v;
        const double nv = v.norm();
        s += std::log(nv);
        v /= nv;
        x = base.forward(x);
    }
    return s / static_cast<double>(n);
}

double birkhoff_log_det(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x0, long n) {
    BasePoint x = x0;
    double s = 0.0;
    for (long j = 0; j < n; ++j) {
        s += std::log(std::abs(a.raw(x).determinant()));
        x = base.forward(x);
    }
    return s / static_cast<double>(n);
}

std::string to_json(const SpectrumEstimate& s, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["exponents"] = s.exponents;
    j["stderr"] = s.stderrs;
    j["n"] = s.n;
    j["seed"] = seed;
    j["multiplicities"] = s.multiplicities();
    return j.dump();
}

}  // namespace cocy
