#pragma once

#include "cocyclelab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cocy::detail {

// Accumulates log|R_ii| of repeated QR factorizations, split into equal
// blocks for the standard error.
class QrAccumulator {
public:
    QrAccumulator(int d, int blocks) : d_(d), block_sums_(static_cast<std::size_t>(blocks), std::vector<double>(static_cast<std::size_t>(d), 0.0)),
                                       block_len_(static_cast<std::size_t>(blocks), 0.0), total_(static_cast<std::size_t>(d), 0.0) {}

    // re-orthonormalize q in place, crediting `elapsed` units to block b
    void reduce(Mat& q, int block, double elapsed) {
        Eigen::HouseholderQR<Mat> qr(q);
        const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        Mat qf = qr.householderQ() * Mat::Identity(d_, d_);
        for (int i = 0; i < d_; ++i) {
            const double rii = r(i, i);
            const double l = std::log(std::abs(rii));
            block_sums_[static_cast<std::size_t>(block)][static_cast<std::size_t>(i)] += l;
            total_[static_cast<std::size_t>(i)] += l;
            if (rii < 0) qf.col(i) *= -1.0;
        }
        block_len_[static_cast<std::size_t>(block)] += elapsed;
        elapsed_ += elapsed;
        q = qf;
    }

    std::vector<double> current() const {
        std::vector<double> e(total_);
        for (double& x : e) x /= elapsed_;
        return e;
    }

    SpectrumEstimate finish(double group_tol) const {
        SpectrumEstimate s;
        const std::size_t d = static_cast<std::size_t>(d_);
        std::vector<double> ex(d), se(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) ex[i] = total_[i] / elapsed_;
        std::size_t used = 0;
        for (double l : block_len_) used += l > 0 ? 1 : 0;
        if (used > 1) {
            for (std::size_t i = 0; i < d; ++i) {
                double m = 0.0, m2 = 0.0;
                for (std::size_t b = 0; b < block_len_.size(); ++b) {
                    if (block_len_[b] <= 0) continue;
                    const double x = block_sums_[b][i] / block_len_[b];
                    m += x;
                    m2 += x * x;
                }
                m /= static_cast<double>(used);
                const double var = std::max(0.0, m2 / static_cast<double>(used) - m * m) *
                                   static_cast<double>(used) / static_cast<double>(used - 1);
                se[i] = std::sqrt(var / static_cast<double>(used));
            }
        }
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ex[a] > ex[b]; });
        for (std::size_t i : order) {
            s.exponents.push_back(ex[i]);
            s.stderrs.push_back(se[i]);
        }
        s.groups = group_exponents(s.exponents, group_tol);
        return s;
    }

private:
    int d_;
    std::vector<std::vector<double>> block_sums_;
    std::vector<double> block_len_;
    std::vector<double> total_;
    double elapsed_ = 0.0;
};

}  // namespace cocy::detail
