#include "cocyclelab/errors.hpp"
#include "cocyclelab/groups.hpp"
#include "cocyclelab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cocy {

Mat midpoint_swap(const Mat& incoming, const Mat& outgoing, int k, const GroupFamily& family, bool* degenerate,
                  double* swap_error) {
    const int d = static_cast<int>(incoming.rows());
    if (k < 1 || k > d - 1) throw InvalidArgument("swap index must satisfy 1 <= k <= d-1");
    Eigen::JacobiSVD<Mat> sp(incoming, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sv = sp.singularValues();
    const bool degen = std::abs(sv(k - 1) - sv(k)) <= 1e-9 * sv(k - 1);
    if (degenerate) *degenerate = degen;
    if (degen) {
        if (swap_error) *swap_error = 0.0;
        return Mat::Identity(d, d);
    }
    Eigen::JacobiSVD<Mat> sg(outgoing, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat& Up = sp.matrixU();
    const Mat& Vg = sg.matrixV();
    const Vec u = Up.col(k - 1);   // k-th incoming singular direction (pushed forward)
    const Vec v = Vg.col(k);       // (k+1)-th input direction of the outgoing block
    Mat R;
    if (family.kind == FamilyKind::Sp) {
        R = rotation_to(u, v, family);
    } else {
        Mat target = Vg;
        target.col(k - 1) = Vg.col(k);
        target.col(k) = Vg.col(k - 1);
        R = target * Up.transpose();
        if (R.determinant() < 0.0) {
            target.col(k - 1) *= -1.0;
            R = target * Up.transpose();
        }
    }
    if (swap_error) *swap_error = projective_angle(R * u, v);
    return R;
}

namespace {

double log_wedge_norm(const Mat& m, int k) {
    if (k == 0) return 0.0;
    return std::log(spectral_norm(k == 1 ? m : compound(m, k)));
}

double lambda_hat_any(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x, long n, int j) {
    if (j <= 0) return 0.0;
    return lambda_hat_k(a, base, x, n, j);
}

}  // namespace

CollapseStep collapse_step(const MatrixCocycle& a, const DiscreteBase& base, const BasePoint& x,
                           const CollapsePlan& plan) {
    const int d = a.dim();
    const int k = plan.k;
    if (k < 1 || k > d - 1) throw InvalidArgument("collapse needs 1 <= k <= d-1");
    if (plan.horizon < 2) throw InvalidArgument("horizon must be at least 2");
    const long n = plan.horizon;
    const long half = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
    const Mat P = compose_n(a, base, x, half);
    const BasePoint y = iterate(base, x, half);
    const Mat G = compose_n(a, base, y, n - half);
    CollapseStep st;
    st.R = midpoint_swap(P, G, k, a.family(), &st.degenerate, &st.swap_error);
    if (st.degenerate && plan.strict)
        throw DegenerateGap("singular values " + std::to_string(k) + " and " + std::to_string(k + 1) +
                            " of the incoming block coincide");
    st.B_mid = a.raw(y) * st.R;
    const double nn = static_cast<double>(n);
    st.lhs = log_wedge_norm(G * st.R * P, k) / nn;
    st.lhs_unswapped = log_wedge_norm(G * P, k) / nn;
    st.rhs = plan.delta + 0.5 * (lambda_hat_any(a, base, x, plan.lambda_n, k - 1) +
                                 lambda_hat_any(a, base, x, plan.lambda_n, k + 1));
    return st;
}

CollapseResult collapse(const MatrixCocycle& a, const DiscreteBase& base, int k, double eps, double delta,
                        const CollapseParams& params) {
    const int d = a.dim();
    if (k < 1 || k > d - 1) throw InvalidArgument("collapse needs 1 <= k <= d-1");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
    if (params.horizon < 2) throw InvalidArgument("horizon must be at least 2");

    CollapseReport rep;
    rep.k = k;
    rep.eps = eps;
    rep.delta = delta;
    rep.p = params.p;
    rep.lambda_A = Lambda_k(a, base, k, params.n, params.points, params.seed);
    rep.lambda_prev_A = Lambda_k(a, base, k - 1, params.n, params.points, params.seed);
    rep.lambda_next_A = Lambda_k(a, base, k + 1, params.n, params.points, params.seed);
    rep.jump_A = jump_k(a, base, k, params.n, params.points, params.seed);
    rep.p3_target = delta - rep.jump_A.value + rep.lambda_A.value;
    rep.p2_target = delta + 0.5 * (rep.lambda_prev_A.value + rep.lambda_next_A.value);

    SpectrumOptions so;
    if (rep.jump_A.value < 0.5 * so.group_tol) {
        // one-point spectrum already; nothing to collapse
        rep.trivial = true;
        rep.lambda_B = rep.lambda_A;
        rep.distance.exact = true;
        rep.distance.method = "identical";
        return CollapseResult{a, rep};
    }

    const long m = params.horizon / 2;
    const GroupFamily fam = a.family();
    const MatrixCocycle ac = a;
    const auto swap_at = [ac, base, m, k, fam](const BasePoint& y) -> Mat {
        const Mat P = compose_n(ac, base, iterate(base, y, -m), m);
        const Mat G = compose_n(ac, base, y, m);
        bool degen = false;
        return midpoint_swap(P, G, k, fam, &degen);
    };

    // pointwise size of the patch near the chosen center, over a generous neighborhood
    const BasePoint center = base.dim() == 2 ? base.point(0.5, 0.5) : base.point(0.5);
    const RegionSet probe = base.dim() == 2 ? RegionSet::box(0.45, 0.1, 0.45, 0.1) : RegionSet::interval(0.45, 0.1);
    double c = 0.0;
    {
        Rng rng(params.seed + 31);
        for (int i = 0; i < 32; ++i) {
            const BasePoint y = i == 0 ? center : sample_in(probe, base, rng);
            const Mat R = swap_at(y);
            const Mat ay = a.raw(y), ai = ay.inverse();
            c = std::max(c, spectral_norm(ay * R - ay) + spectral_norm(R.inverse() * ai - ai));
        }
    }
    const double budget = eps / (1.0 - eps);
    double mu = c > 0.0 ? std::pow(0.9 * budget / c, params.p) : 0.05;
    mu = std::min(mu, 0.05);

    // first return to S must not come before the horizon
    long first_return = std::numeric_limits<long>::max();
    if (base.kind() == MapKind::Rotation) {
        double gap = 1.0;
        for (long j = 1; j < params.horizon; ++j)
            gap = std::min(gap, circle_dist(frac(static_cast<double>(j) * base.alpha()), 0.0));
        mu = std::min(mu, 0.999 * gap);
    } else {
        mu = std::min(mu, 0.5 / static_cast<double>(params.horizon));
    }
    auto make_region = [&](double w) {
        if (base.dim() == 2) {
            const double s = std::sqrt(w);
            return RegionSet::box(0.5 - 0.5 * s, s, 0.5 - 0.5 * s, s);
        }
        return RegionSet::interval(0.5 - 0.5 * w, w);
    };
    const RegionSet S = make_region(mu);
    {
        Rng rng(params.seed + 41);
        for (int i = 0; i < 512; ++i) {
            BasePoint y = sample_in(S, base, rng);
            for (long j = 1; j <= 4 * params.horizon; ++j) {
                y = base.forward(y);
                if (S.contains(y)) {
                    first_return = std::min(first_return, j);
                    break;
                }
            }
        }
    }
    rep.S = S;
    rep.measure = S.measure();
    rep.first_return = first_return == std::numeric_limits<long>::max() ? -1 : first_return;
    if (rep.measure * static_cast<double>(params.horizon) < params.min_coverage)
        throw BudgetExceeded("tower base of measure " + std::to_string(rep.measure) + " covers only " +
                             std::to_string(rep.measure * static_cast<double>(params.horizon)) +
                             " of the orbit mass at horizon " + std::to_string(params.horizon));

    const RulePtr fn = function_rule(
        [ac, swap_at](const BasePoint& y) { return Mat(ac.raw(y) * swap_at(y)); }, "collapse-swap");
    const RulePtr rule = freeze_if_constant(fn, S, base, params.seed);
    MatrixCocycle b = a.with_patch(S, rule);
    LpParams lp;
    lp.p = params.p;
    lp.seed = params.seed;
    rep.distance = lp_estimate(a, b, base, lp);
    rep.lambda_B = Lambda_k(b, base, k, params.n, params.points, params.seed);
    return CollapseResult{b, rep};
}

}  // namespace cocy
