#include "audit.hpp"

#include "cocyclelab/errors.hpp"
#include "cocyclelab/harness.hpp"
#include "cocyclelab/perturb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

namespace cocy::harness {

namespace detail {

BasePoint ball_sample(const FlowboxSpec& spec, const DiscreteBase& map, double shrink, Rng& rng) {
    const double r = spec.r * shrink;
    BasePoint q;
    if (map.dim() == 2) {
        const double rad = r * std::sqrt(rng.uniform());
        const double th = 2.0 * std::numbers::pi * rng.uniform();
        q = map.point(frac(spec.center[0] + rad * std::cos(th)), frac(spec.center[1] + rad * std::sin(th)));
    } else {
        q = map.point(frac(spec.center[0] + r * (2.0 * rng.uniform() - 1.0)));
    }
    for (int l = 0; l < spec.lift; ++l) q = map.forward(q);
    return q;
}

FlowboxAudit audit_flowbox(const Generator& a, const FlowBase& base, const FlowboxResult& r, FlowboxKind kind,
                           const DirectionField& first, const DirectionField& second, double delta,
                           int endpoint_samples, int trace_samples, std::uint64_t seed) {
    FlowboxAudit out;
    const DiscreteBase& map = base.section_map();
    Rng rng(seed);
    for (int i = 0; i < endpoint_samples; ++i) {
        // stay a hair inside the inner ball so the taper is exactly 1
        const BasePoint s = ball_sample(r.patch.spec, map, r.patch.spec.sigma * 0.999, rng);
        const Mat pb = time_one(r.B, base, s), pa = time_one(a, base, s);
        const Vec u = first(s);
        if (kind == FlowboxKind::mix) {
            out.endpoint = std::max(out.endpoint, projective_angle(pb * u, pa * second(s)));
        } else {
            const Vec want = (1.0 + delta) * (pa * u);
            out.endpoint = std::max(out.endpoint, (pb * u - want).norm() / want.norm());
        }
        const double da = pa.determinant();
        out.det = std::max(out.det, std::abs(pb.determinant() - da) / std::abs(da));
        ++out.endpoint_samples;
    }
    for (int i = 0; i < trace_samples; ++i) {
        const BasePoint s = ball_sample(r.patch.spec, map, 1.0, rng);
        const BasePoint z = base.point(s, rng.uniform());
        out.trace = std::max(out.trace, std::abs(r.B.perturbation(base, z).trace()));
        ++out.trace_samples;
    }
    return out;
}

}  // namespace detail

namespace {

constexpr double kE = 2.718281828459045;

const DiscreteBase& need_map(const BaseSpec& b, const std::string& op) {
    if (!b.map) throw ConfigError("base.kind: " + op + " needs a discrete base (doubling, golden, rotation, cat)");
    return *b.map;
}

const FlowBase& need_flow(const BaseSpec& b, const std::string& op) {
    if (!b.flow) throw ConfigError("base.kind: " + op + " needs a flow base (suspension, torus)");
    return *b.flow;
}

Vec vector_key(const ExperimentConfig& cfg, const std::string& key, int d, int fallback_axis) {
    const auto v = cfg.numbers("operation", key, {});
    if (v.empty()) return Vec::Unit(d, fallback_axis);
    if (static_cast<int>(v.size()) != d)
        throw ConfigError("operation." + key + ": expected " + std::to_string(d) + " components");
    Vec out(d);
    for (int i = 0; i < d; ++i) out(i) = v[static_cast<std::size_t>(i)];
    if (!(out.norm() > 0.0)) throw ConfigError("operation." + key + ": vector must be nonzero");
    return out;
}

BasePoint start_point(const ExperimentConfig& cfg, const DiscreteBase& map, std::uint64_t seed) {
    if (!cfg.has("operation", "x0")) return sample_measure(map, seed);
    const auto c = cfg.numbers("operation", "x0", {});
    if (static_cast<int>(c.size()) != map.dim()) throw ConfigError("operation.x0: wrong number of coordinates");
    return map.point(c);
}

BasePoint section_point(const ExperimentConfig& cfg, const std::string& key, const DiscreteBase& map, double fallback) {
    const auto c = cfg.numbers("operation", key, std::vector<double>(static_cast<std::size_t>(map.dim()), fallback));
    if (static_cast<int>(c.size()) != map.dim()) throw ConfigError("operation." + key + ": wrong number of coordinates");
    for (double v : c)
        if (v < 0.0 || v >= 1.0) throw ConfigError("operation." + key + ": coordinates must lie in [0, 1)");
    return map.point(c);
}

void spectrum_csv(ResultRecord& rec, const SpectrumEstimate& s) {
    const std::size_t d = s.exponents.size();
    rec.csv_header = {"n"};
    for (std::size_t i = 1; i <= d; ++i) rec.csv_header.push_back("lambda_" + std::to_string(i));
    for (std::size_t i = 1; i <= d; ++i) rec.csv_header.push_back("stderr_" + std::to_string(i));
    for (const auto& [n, ex] : s.history) {
        std::vector<double> row{n};
        row.insert(row.end(), ex.begin(), ex.end());
        row.insert(row.end(), d, std::nan(""));  // errors are only known for the full run
        rec.csv_rows.push_back(row);
    }
    std::vector<double> row{static_cast<double>(s.n) * s.time_unit};
    row.insert(row.end(), s.exponents.begin(), s.exponents.end());
    row.insert(row.end(), s.stderrs.begin(), s.stderrs.end());
    if (s.history.empty() || s.history.back().first != row[0]) rec.csv_rows.push_back(row);
    else rec.csv_rows.back() = row;
}

void quantity_csv(ResultRecord& rec) {
    rec.csv_header = {"index", "value", "stderr"};
    // the JSON measured block, flattened in insertion order; names live in the JSON
    double i = 0;
    for (const auto& [k, v] : rec.measured.items()) {
        const double val = v["value"].is_null() ? std::nan("") : v["value"].get<double>();
        const double se = v["stderr"].is_null() ? std::nan("") : v["stderr"].get<double>();
        rec.csv_rows.push_back({i++, val, se});
    }
}

void measure_spectrum(ResultRecord& rec, const std::string& prefix, const SpectrumEstimate& s) {
    for (std::size_t i = 0; i < s.exponents.size(); ++i)
        rec.measure(prefix + "lambda_" + std::to_string(i + 1), s.exponents[i], s.stderrs[i]);
}

// ---------------------------------------------------------------- operations

void op_spectrum(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const DiscreteBase& map = need_map(b, "spectrum");
    const MatrixCocycle a = make_cocycle(cfg);
    SpectrumOptions o;
    o.qr_interval = static_cast<int>(cfg.integer("operation", "qr_interval", 10, 1, 1000));
    o.group_tol = cfg.num_in("operation", "group_tol", 0.05, 0.0, 10.0);
    o.history_points = static_cast<int>(cfg.integer("operation", "history", 20, 0, 10000));
    const long n = cfg.integer("operation", "n", 100000, 100, 1000000000);
    const BasePoint x0 = start_point(cfg, map, rec.seed);
    cfg.check_consumed();

    const SpectrumEstimate s = full_spectrum(a, map, x0, n, o);
    measure_spectrum(rec, "", s);
    const double det_avg = birkhoff_log_det(a, map, x0, n);
    rec.measure("sum", s.sum(), s.sum_stderr());
    rec.measure("birkhoff_log_det", det_avg);
    rec.measure("groups", static_cast<double>(s.groups.size()));
    const double gap = std::abs(s.sum() - det_avg);
    const double tol = 3.0 * s.sum_stderr() + 1e-6;
    rec.check("sum rule: |sum of exponents - average log|det A|| <= 3 sigma", gap, tol, gap <= tol);
    spectrum_csv(rec, s);
}

void op_lp_distance(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const DiscreteBase& map = need_map(b, "lp-distance");
    const MatrixCocycle a = make_cocycle(cfg, "rule");
    const MatrixCocycle other = make_cocycle(cfg, "other");
    if (a.family().kind != other.family().kind) throw ConfigError("cocycle.other: must share the family");
    std::vector<double> ps = cfg.numbers("operation", "p", {1.0, 2.0, 4.0});
    for (double p : ps)
        if (p < 1.0) throw ConfigError("operation.p: exponents must be >= 1");
    std::sort(ps.begin(), ps.end());
    const int samples = static_cast<int>(cfg.integer("operation", "samples", 20000, 16, 100000000));
    cfg.check_consumed();

    rec.csv_header = {"p", "d", "stderr_d", "delta", "stderr_delta"};
    std::vector<LpEstimate> est;
    for (double p : ps) {
        const LpEstimate e = lp_estimate(a, other, map, {p, samples, rec.seed});
        est.push_back(e);
        std::string tag = std::to_string(p);
        tag.erase(tag.find_last_not_of('0') + 1);
        if (tag.back() == '.') tag.pop_back();
        rec.measure("d_" + tag, e.d, e.stderr_d);
        rec.measure("Delta_" + tag, e.delta, e.stderr_delta);
        rec.csv_rows.push_back({p, e.d, e.stderr_d, e.delta, e.stderr_delta});
        rec.check("d_p < 1 (p = " + tag + ")", e.d, 1.0, e.d < 1.0);
    }
    for (std::size_t i = 1; i < est.size(); ++i) {
        const double slack = 3.0 * (est[i - 1].stderr_d + est[i].stderr_d);
        rec.check("Hoelder monotonicity: d_p <= d_q + 3 sigma for p < q", est[i - 1].d, est[i].d + slack,
                  est[i - 1].d <= est[i].d + slack + 1e-12);
    }
}

void op_split(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const DiscreteBase& map = need_map(b, "split");
    const MatrixCocycle a = make_cocycle(cfg);
    SplitPlan plan;
    const double v0 = cfg.num_in("operation", "v_start", 0.5, 0.0, 1.0);
    const double vl = cfg.num_in("operation", "v_length", 0.1, 1e-9, 1.0);
    plan.V = RegionSet::interval(v0, vl);
    plan.e = vector_key(cfg, "e", a.dim(), 0);
    plan.delta = cfg.num_in("operation", "delta", kE - 1.0, 0.0, 1e6);
    plan.M = cfg.num_in("operation", "M", 0.0, 0.0, 1e12);
    plan.check_n = cfg.integer("operation", "check_n", 20000, 0, 1000000000);
    plan.verify_n = cfg.integer("operation", "verify_n", 1000000, 0, 1000000000);
    plan.ps = cfg.numbers("operation", "p", {1.0, 2.0, 4.0});
    plan.spectrum.history_points = static_cast<int>(cfg.integer("operation", "history", 20, 0, 10000));
    plan.seed = rec.seed;
    const double tol = cfg.num_in("operation", "tolerance", 0.005, 0.0, 10.0);
    cfg.check_consumed();

    const SplitResult r = split_spectrum(a, map, plan);
    const SplitReport& s = r.report;
    rec.measure("mu_V", s.mu_V);
    rec.measure("M", s.M);
    rec.measure("K", s.K);
    for (std::size_t i = 0; i < s.distances.size(); ++i) {
        const auto& dc = s.distances[i];
        std::string tag = std::to_string(dc.p);
        tag.erase(tag.find_last_not_of('0') + 1);
        if (tag.back() == '.') tag.pop_back();
        rec.measure("Delta_" + tag + "(A,C1)", dc.c1.delta, dc.c1.stderr_delta);
        rec.measure("Delta_" + tag + "(A,D)", dc.d.delta, dc.d.stderr_delta);
        rec.check("distance budget Delta_p(A,C1) <= 2 M K mu(V)^(1/p), p = " + tag, dc.c1.delta, dc.bound_c1,
                  dc.c1.delta <= dc.bound_c1 + 3.0 * dc.c1.stderr_delta + 1e-12);
        rec.check("distance budget Delta_p(A,D) <= 2 (2+K) M mu(V)^(1/p), p = " + tag, dc.d.delta, dc.bound_d,
                  dc.d.delta <= dc.bound_d + 3.0 * dc.d.stderr_delta + 1e-12);
    }
    rec.measure("line_field_error", s.line_field_error);
    rec.measure("det_residual", s.det_residual);
    rec.check("line field invariance D(x) E(x) = E(Tx) (angle)", s.line_field_error, 1e-9, s.line_field_error <= 1e-9);
    rec.check("det D = det A (relative)", s.det_residual, 1e-9, s.det_residual <= 1e-9);
    if (s.verified) {
        rec.measure("exponent_D", s.exponent_D, s.stderr_D);
        rec.measure("exponent_C1", s.exponent_C1, s.stderr_C1);
        rec.measure("visit_frequency", s.visit_frequency);
        rec.measure("predicted", s.predicted);
        measure_spectrum(rec, "D.", s.spectrum_D);
        rec.measure("sum_rule_lhs", s.sum_rule_lhs, s.spectrum_D.sum_stderr());
        rec.measure("sum_rule_rhs", s.sum_rule_rhs);
        const double err = std::abs(s.exponent_D - s.predicted);
        const double allow = std::max(3.0 * s.stderr_D, tol);
        rec.check("exponent shift: exponent of D along v = exponent of C1 + log(1+delta) mu(V)", err, allow, err <= allow);
        const double sr = std::abs(s.sum_rule_lhs - s.sum_rule_rhs);
        const double sr_allow = 3.0 * s.spectrum_D.sum_stderr() + 1e-6;
        rec.check("sum rule: sum of D exponents = d lambda_A", sr, sr_allow, sr <= sr_allow);
        spectrum_csv(rec, s.spectrum_D);
    } else {
        quantity_csv(rec);
    }
}

void op_scale(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const DiscreteBase& map = need_map(b, "scale");
    const MatrixCocycle a = make_cocycle(cfg);
    const double u0 = cfg.num_in("operation", "u_start", 0.0, 0.0, 1.0);
    const double ul = cfg.num_in("operation", "u_length", 0.1, 1e-9, 1.0);
    const double delta = cfg.num_in("operation", "delta", 0.5, 0.0, 1e6);
    const double eps = cfg.num_in("operation", "eps", 0.5, 1e-12, 1.0);
    const double p = cfg.num_in("operation", "p", 1.0, 1.0, 1e6);
    const long n = cfg.integer("operation", "verify_n", 200000, 0, 1000000000);
    const double tol = cfg.num_in("operation", "tolerance", 0.005, 0.0, 10.0);
    cfg.check_consumed();

    const ScaleResult r = scale_spectrum(a, map, RegionSet::interval(u0, ul), delta, eps, p);
    rec.measure("mu_U", r.U.measure());
    rec.measure("shrunk", r.shrunk ? 1.0 : 0.0);
    rec.measure("d_p", r.distance.d, r.distance.stderr_d);
    rec.check("d_p(A,B) < eps", r.distance.d, eps, r.distance.d < eps);
    if (n > 0) {
        const BasePoint x0 = sample_measure(map, rec.seed);
        const SpectrumEstimate sa = full_spectrum(a, map, x0, n), sb = full_spectrum(r.B, map, x0, n);
        measure_spectrum(rec, "A.", sa);
        measure_spectrum(rec, "B.", sb);
        const double shift = std::log1p(delta) * r.U.measure();
        rec.measure("predicted_shift", shift);
        for (std::size_t i = 0; i < sa.exponents.size(); ++i) {
            const double err = std::abs(sb.exponents[i] - sa.exponents[i] - shift);
            const double allow = std::max(3.0 * (sa.stderrs[i] + sb.stderrs[i]), tol);
            rec.check("uniform shift lambda_i(B) = lambda_i(A) + log(1+delta) mu(U), i = " + std::to_string(i + 1), err,
                      allow, err <= allow);
        }
        spectrum_csv(rec, sb);
    } else {
        quantity_csv(rec);
    }
}

void op_collapse(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const DiscreteBase& map = need_map(b, "collapse");
    const MatrixCocycle a = make_cocycle(cfg);
    const int k = static_cast<int>(cfg.integer("operation", "k", 1, 1, 5));
    const double eps = cfg.num_in("operation", "eps", 0.1, 1e-12, 0.999999);
    const double delta = cfg.num_in("operation", "delta", 0.1, 1e-12, 1e6);
    CollapseParams cp;
    cp.horizon = cfg.integer("operation", "horizon", 200, 2, 100000000);
    cp.n = cfg.integer("operation", "n", 100000, 100, 1000000000);
    cp.points = static_cast<int>(cfg.integer("operation", "points", 8, 1, 100000));
    cp.p = cfg.num_in("operation", "p", 1.0, 1.0, 1e6);
    cp.min_coverage = cfg.num_in("operation", "min_coverage", 0.05, 0.0, 1.0);
    cp.seed = rec.seed;
    cfg.check_consumed();

    const CollapseResult r = collapse(a, map, k, eps, delta, cp);
    const CollapseReport& s = r.report;
    rec.measure("Lambda_k(A)", s.lambda_A.value, s.lambda_A.stderr_);
    rec.measure("Lambda_k(B)", s.lambda_B.value, s.lambda_B.stderr_);
    rec.measure("Lambda_k-1(A)", s.lambda_prev_A.value, s.lambda_prev_A.stderr_);
    rec.measure("Lambda_k+1(A)", s.lambda_next_A.value, s.lambda_next_A.stderr_);
    rec.measure("J_k(A)", s.jump_A.value, s.jump_A.stderr_);
    rec.measure("d_p", s.distance.d, s.distance.stderr_d);
    rec.measure("mu_S", s.measure);
    rec.measure("first_return", static_cast<double>(s.first_return));
    rec.measure("trivial", s.trivial ? 1.0 : 0.0);
    rec.check("d_p(A,B) < eps", s.distance.d, eps, s.distance.d < eps);
    const double usc = s.lambda_A.value + 3.0 * (s.lambda_A.stderr_ + s.lambda_B.stderr_);
    rec.check("upper semicontinuity: Lambda_k(B) <= Lambda_k(A) + 3 sigma", s.lambda_B.value, usc,
              s.lambda_B.value <= usc + 1e-12);
    // asymptotic targets; a finite horizon need not reach them
    rec.check("midpoint target: Lambda_k(B) < delta + (Lambda_k-1(A) + Lambda_k+1(A)) / 2", s.lambda_B.value,
              s.p2_target, s.lambda_B.value < s.p2_target, false);
    rec.check("jump target: Lambda_k(B) < delta - J_k(A) + Lambda_k(A)", s.lambda_B.value, s.p3_target,
              s.lambda_B.value < s.p3_target, false);
    quantity_csv(rec);
}

void op_lds_spectrum(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const FlowBase& fb = need_flow(b, "lds-spectrum");
    const Generator g = make_generator(cfg);
    const double T = cfg.num_in("operation", "T", 1000.0, 1e-6, 1e9);
    const double renorm = cfg.num_in("operation", "renorm", 1.0, 1e-6, 1e6);
    LdsSpectrumOptions o;
    o.h = cfg.num_in("operation", "h", 1e-3, 1e-7, 1.0);
    o.group_tol = cfg.num_in("operation", "group_tol", 0.05, 0.0, 10.0);
    const BasePoint x0 = sample_measure(fb, rec.seed);
    cfg.check_consumed();

    const SpectrumEstimate s = lds_spectrum(g, fb, x0, T, renorm, o);
    measure_spectrum(rec, "", s);
    rec.measure("sum", s.sum(), s.sum_stderr());
    const double t = std::min(T, 10.0);
    const double res = liouville_residual(g, fb, x0, t, o.h);
    rec.measure("liouville_residual", res);
    rec.check("Liouville identity det Phi^t = exp(int Tr A), relative residual", res, 1e-6, res <= 1e-6);
    if (g.constant_matrix()) {
        const double tr = g.constant_matrix()->trace();
        const double err = std::abs(s.sum() - tr);
        const double allow = 3.0 * s.sum_stderr() + 1e-6;
        rec.check("sum rule: sum of exponents = Tr A", err, allow, err <= allow);
    }
    spectrum_csv(rec, s);
}

void op_lds_split(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const FlowBase& fb = need_flow(b, "lds-split");
    if (fb.kind() != FlowKind::Suspension) throw ConfigError("base.kind: lds-split needs a suspension");
    const Generator g = make_generator(cfg);
    FlowSplitParams p;
    p.center = section_point(cfg, "center", fb.section_map(), 0.55);
    p.r = cfg.num_in("operation", "r", 0.05, 1e-9, 0.49);
    p.sigma = cfg.num_in("operation", "sigma", 0.95, 1e-6, 1.0 - 1e-9);
    p.e = vector_key(cfg, "e", g.dim(), 0);
    p.delta = cfg.num_in("operation", "delta", kE - 1.0, 0.0, 1e6);
    p.eps = cfg.num_in("operation", "eps", 1.0, 1e-12, 1e6);
    p.p = cfg.num_in("operation", "p", 1.0, 1.0, 1e6);
    p.T_total = cfg.num_in("operation", "T", 20000.0, 0.0, 1e9);
    p.renorm = cfg.num_in("operation", "renorm", 1.0, 1e-6, 1e6);
    p.h = cfg.num_in("operation", "h", 1e-3, 1e-7, 1.0);
    p.seed = rec.seed;
    const double tol = cfg.num_in("operation", "tolerance", 0.01, 0.0, 10.0);
    cfg.check_consumed();

    const FlowSplitResult r = split_spectrum_flow(g, fb, p);
    const FlowSplitReport& s = r.report;
    rec.measure("mu_V", s.mu_V);
    rec.measure("effective_measure", s.effective_measure);
    rec.measure("mix.r_used", s.mix_budget.r_used);
    rec.measure("mix.h_norm", s.mix_budget.h_norm, s.mix_budget.h_norm_stderr);
    rec.measure("saddle.r_used", s.saddle_budget.r_used);
    rec.measure("saddle.h_norm", s.saddle_budget.h_norm, s.saddle_budget.h_norm_stderr);
    rec.check("mix perturbation norm ||H||_p <= eps", s.mix_budget.h_norm, p.eps,
              s.mix_budget.h_norm <= p.eps + 3.0 * s.mix_budget.h_norm_stderr);
    rec.check("saddle perturbation norm ||H||_p <= eps", s.saddle_budget.h_norm, p.eps,
              s.saddle_budget.h_norm <= p.eps + 3.0 * s.saddle_budget.h_norm_stderr);
    if (s.verified) {
        rec.measure("exponent_D", s.exponent_D, s.stderr_D);
        rec.measure("exponent_AH", s.exponent_AH, s.stderr_AH);
        rec.measure("predicted", s.predicted);
        rec.measure("predicted_plain", s.predicted_plain);
        measure_spectrum(rec, "D.", s.spectrum_D);
        const double err = std::abs(s.exponent_D - s.predicted);
        const double allow = std::max(3.0 * s.stderr_D, tol);
        rec.check("exponent shift: exponent of D along v = exponent of A+H + log(1+delta) mu_eff", err, allow, err <= allow);
        const double sr = std::abs(s.spectrum_D.sum() - s.sum_rule_rhs);
        const double sr_allow = 3.0 * s.spectrum_D.sum_stderr() + 1e-6;
        rec.check("sum rule: sum of D exponents = time average of Tr A", sr, sr_allow, sr <= sr_allow);
        spectrum_csv(rec, s.spectrum_D);
    } else {
        quantity_csv(rec);
    }
}

DirectionField constant_field(const Vec& v) {
    return [v](const BasePoint&) { return v; };
}

void op_flowbox(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BaseSpec b = make_base(cfg);
    const FlowBase& fb = need_flow(b, "flowbox");
    if (fb.kind() != FlowKind::Suspension) throw ConfigError("base.kind: flowboxes need a suspension");
    const Generator g = make_generator(cfg);
    const std::string kind = cfg.str("operation", "kind", "mix");
    if (kind != "mix" && kind != "saddle") throw ConfigError("operation.kind: expected mix or saddle, got '" + kind + "'");
    FlowboxSpec spec;
    spec.center = section_point(cfg, "center", fb.section_map(), 0.5);
    spec.r = cfg.num_in("operation", "r", 0.05, 1e-9, 10.0);
    spec.sigma = cfg.num_in("operation", "sigma", 0.95, 1e-6, 1.0 - 1e-9);
    const double eps = cfg.num_in("operation", "eps", 1.0, 1e-12, 1e6);
    FlowboxOptions o;
    o.p = cfg.num_in("operation", "p", 1.0, 1.0, 1e6);
    o.h = cfg.num_in("operation", "h", 1e-3, 1e-7, 1.0);
    o.seed = rec.seed;
    const int samples = static_cast<int>(cfg.integer("operation", "samples", 50, 1, 100000));
    const int trace_samples = static_cast<int>(cfg.integer("operation", "trace_samples", 1000, 1, 10000000));
    Vec u, v;
    double delta = 0.0;
    if (kind == "mix") {
        u = vector_key(cfg, "u", g.dim(), 0);
        v = vector_key(cfg, "v", g.dim(), std::min(1, g.dim() - 1));
    } else {
        u = vector_key(cfg, "e", g.dim(), 0);
        delta = cfg.num_in("operation", "delta", 1.0, 0.0, 1e6);
    }
    cfg.check_consumed();

    const FlowboxResult r = kind == "mix" ? flowbox_mix(g, fb, spec, constant_field(u), constant_field(v), eps, o)
                                          : flowbox_saddle(g, fb, spec, constant_field(u), delta, eps, o);
    const auto audit = detail::audit_flowbox(g, fb, r, kind == "mix" ? detail::FlowboxKind::mix : detail::FlowboxKind::saddle,
                                             constant_field(u), constant_field(v), delta, samples, trace_samples,
                                             rec.seed + 1);
    rec.measure("K", r.budget.K);
    rec.measure("L", r.budget.L);
    rec.measure("kappa", r.budget.kappa);
    rec.measure("r_used", r.budget.r_used);
    rec.measure("measure", r.budget.measure);
    rec.measure("h_norm", r.budget.h_norm, r.budget.h_norm_stderr);
    rec.measure("endpoint_error", audit.endpoint);
    rec.measure("max_abs_trace", audit.trace);
    rec.measure("det_error", audit.det);
    rec.check(kind == "mix" ? "endpoint contract Phi_B u parallel to Phi_A v (angle, inner ball)"
                            : "endpoint contract Phi_B e = (1+delta) Phi_A e (relative, inner ball)",
              audit.endpoint, 1e-7, audit.endpoint <= 1e-7);
    rec.check("traceless perturbation |Tr H|", audit.trace, 1e-11, audit.trace <= 1e-11);
    rec.check("det Phi_B = det Phi_A (relative)", audit.det, 1e-9, audit.det <= 1e-9);
    rec.check("perturbation norm ||H||_p <= eps", r.budget.h_norm, eps, r.budget.h_norm <= eps + 3.0 * r.budget.h_norm_stderr);
    quantity_csv(rec);
}

}  // namespace

ResultRecord run(ExperimentConfig cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ResultRecord rec;
    rec.operation = cfg.str("operation", "name");
    const auto& ops = operations();
    if (std::find(ops.begin(), ops.end(), rec.operation) == ops.end())
        throw ConfigError("operation.name: unknown operation '" + rec.operation + "'");
    rec.seed = cfg.seed();
    // the output section belongs to the caller
    cfg.str("output", "dir", "");
    cfg.str("output", "format", "");
    cfg.str("output", "name", "");
    rec.config = cfg.echo();
    try {
        if (rec.operation == "spectrum") op_spectrum(cfg, rec);
        else if (rec.operation == "lp-distance") op_lp_distance(cfg, rec);
        else if (rec.operation == "split") op_split(cfg, rec);
        else if (rec.operation == "scale") op_scale(cfg, rec);
        else if (rec.operation == "collapse") op_collapse(cfg, rec);
        else if (rec.operation == "lds-spectrum") op_lds_spectrum(cfg, rec);
        else if (rec.operation == "lds-split") op_lds_split(cfg, rec);
        else op_flowbox(cfg, rec);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        rec.error = std::pair{e.kind(), std::string(e.what())};
    }
    rec.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

SuiteSummary suite(const std::vector<std::string>& config_paths, const std::optional<std::uint64_t>& seed,
                   const std::string& out_dir) {
    SuiteSummary s;
    for (const auto& path : config_paths) {
        SuiteRow row;
        row.name = path;
        try {
            ExperimentConfig cfg = ExperimentConfig::load(path);
            if (seed) cfg.set("operation", "seed", std::to_string(*seed));
            const ResultRecord rec = run(cfg);
            if (!out_dir.empty()) write_record(rec, out_dir, std::filesystem::path(path).stem().string(), "json");
            row.pass = rec.pass();
            if (rec.error) row.note = rec.error->first + ": " + rec.error->second;
            for (const auto& c : rec.checks)
                if (c.required && !c.pass) row.note += (row.note.empty() ? "" : "; ") + c.invariant;
        } catch (const ConfigError& e) {
            row.config_error = true;
            row.note = e.what();
        }
        s.rows.push_back(row);
    }
    return s;
}

}  // namespace cocy::harness
