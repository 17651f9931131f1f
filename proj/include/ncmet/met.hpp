#pragma once

// Estimators for the multiplicative ergodic data of a cocycle system: drift,
// limit operator Lambda = lim |c(n,x)|^{1/n}, Lyapunov distribution
// mu_{log Lambda}, Oseledets projections 1_{(-inf,t]}(log Lambda), determinant
// convergence (Delta|c(n,x)|)^{1/n} -> Delta(Lambda), and raw / smoothed
// exponential growth rates of vectors under the cocycle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncmet/cone.hpp"
#include "ncmet/dynamics.hpp"
#include "ncmet/product.hpp"
#include "ncmet/spectral.hpp"

namespace ncmet {

struct DiagnosticsRow {
    long n = 0;
    double drift_n = 0.0;        // ||log(c(n,x)* c(n,x))||_2 / n
    double dp_rate_n = 0.0;      // (1/n) d_P(|c(n,x)|, Lambda^n)
    double l2_log_rate_n = 0.0;  // ||(1/n) log|c(n,x)| - log Lambda||_2
    double fk_gap_n = 0.0;       // |(Delta|c(n,x)|)^{1/n} - Delta(Lambda)|
    double raw_growth_n = 0.0;   // ||c(n,x) xi||_2^{1/n} (0 without a vector)
};

struct METEstimate {
    double drift = 0.0;
    bool zero_drift = false;  // drift below tol::zero_drift; Lambda reported as id
    PositivePoint limit_operator;
    AlgebraElement log_limit;
    SpectralMeasure lyapunov_distribution;  // = spectral_measure(log_limit)
    std::optional<AlgebraElement> ray_direction;  // log Lambda / ||log Lambda||_2
    std::vector<DiagnosticsRow> diagnostics;
    long horizon = 0;
    BasePoint start;
};

struct METOptions {
    std::optional<AlgebraElement> growth_vector;  // xi for the raw-growth column
    int rebalance_every = 32;
};

inline void require_horizons(const std::vector<long>& horizons) {
    if (horizons.empty()) throw UsageError("horizons must be non-empty");
    long prev = 0;
    for (long n : horizons) {
        if (n <= prev) throw UsageError("horizons must be strictly ascending and positive");
        prev = n;
    }
}

namespace detail {

// Walks the path from x and snapshots the accumulator at each horizon.
inline std::vector<CocycleAccumulator> accumulate_snapshots(const CocycleSystem& sys,
                                                            const BasePoint& x,
                                                            const std::vector<long>& horizons,
                                                            int rebalance_every = 32) {
    require_horizons(horizons);
    std::vector<CocycleAccumulator> snaps;
    snaps.reserve(horizons.size());
    CocycleAccumulator acc(sys.algebra(), rebalance_every);
    BasePoint y = x;
    std::size_t next = 0;
    const long last = horizons.back();
    for (long k = 0; k < last; ++k) {
        acc.advance(sys.generator(y));
        y = sys.base().step(y);
        if (next < horizons.size() && acc.n() == horizons[next]) {
            snaps.push_back(acc);
            ++next;
        }
    }
    return snaps;
}

}  // namespace detail

// Lambda_hat = |c(N,x)|^{1/N} at the largest horizon, with per-horizon
// convergence diagnostics against it.
inline METEstimate estimate_met(const CocycleSystem& sys, const BasePoint& x,
                                const std::vector<long>& horizons, METOptions opts = {}) {
    auto snaps = detail::accumulate_snapshots(sys, x, horizons, opts.rebalance_every);
    const CocycleAccumulator& last = snaps.back();
    const long n_last = last.n();

    METEstimate est;
    est.start = x;
    est.horizon = n_last;
    est.drift = last.drift_norm() / static_cast<double>(n_last);
    est.zero_drift = est.drift < tol::zero_drift;

    HermitianEig log_eig = last.log_abs_eig();
    for (auto& v : log_eig.values) v /= static_cast<double>(n_last);
    est.log_limit = est.zero_drift ? AlgebraElement::zero(sys.algebra())
                                   : log_eig.assemble([](double t) { return t; });
    est.limit_operator =
        est.zero_drift
            ? PositivePoint::identity(sys.algebra())
            : PositivePoint::from_element(log_eig.assemble([](double t) { return std::exp(t); }));
    est.lyapunov_distribution = spectral_measure(est.zero_drift
                                                     ? hermitian_eig(est.log_limit)
                                                     : log_eig);
    if (!est.zero_drift)
        est.ray_direction = (1.0 / l2_norm(est.log_limit)) * est.log_limit;

    const double fk_limit = std::exp(trace(est.log_limit).real());
    HermitianEig ref = est.zero_drift ? hermitian_eig(est.log_limit) : log_eig;
    for (const CocycleAccumulator& acc : snaps) {
        DiagnosticsRow row;
        row.n = acc.n();
        const double nn = static_cast<double>(acc.n());
        row.drift_n = acc.drift_norm() / nn;
        row.dp_rate_n = acc.dp_rate(ref);
        row.l2_log_rate_n = acc.l2_log_rate(est.log_limit);
        row.fk_gap_n = std::abs(std::exp(acc.fk_log() / nn) - fk_limit);
        if (opts.growth_vector)
            row.raw_growth_n = std::exp(acc.apply_log_norm(*opts.growth_vector) / nn);
        est.diagnostics.push_back(row);
    }
    return est;
}

inline std::vector<std::pair<long, double>> drift_series(const CocycleSystem& sys,
                                                         const BasePoint& x,
                                                         const std::vector<long>& horizons) {
    auto snaps = detail::accumulate_snapshots(sys, x, horizons);
    std::vector<std::pair<long, double>> out;
    out.reserve(snaps.size());
    for (const auto& acc : snaps)
        out.emplace_back(acc.n(), acc.drift_norm() / static_cast<double>(acc.n()));
    return out;
}

// ---------------------------------------------------------------------------
// Oseledets flags

struct OseledetsFlag {
    std::vector<double> thresholds;
    std::vector<AlgebraElement> projections;  // 1_{(-inf, t]}(log Lambda), nested
    std::vector<double> dimensions;           // tau(p_t), non-decreasing
    std::vector<std::string> warnings;        // thresholds at eigenvalue boundaries
};

inline OseledetsFlag oseledets_flag(const METEstimate& est, const std::vector<double>& thresholds) {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i - 1] < thresholds[i]))
            throw UsageError("oseledets thresholds must be sorted ascending");
    OseledetsFlag flag;
    flag.thresholds = thresholds;
    const SpectralMeasure& mu = est.lyapunov_distribution;
    for (double t : thresholds) {
        flag.projections.push_back(indicator_below(est.log_limit, t));
        flag.dimensions.push_back(vn_dimension(flag.projections.back()));
        for (const auto& atom : mu.atoms())
            if (std::abs(atom.location - t) <= tol::atom_coalesce * (1.0 + std::abs(t)))
                flag.warnings.push_back("threshold " + std::to_string(t) +
                                        " touches an eigenvalue of log Lambda");
    }
    return flag;
}

// ---------------------------------------------------------------------------
// Invariance: c(1,x) H_t(x) = H_t(f x) and mu_{log Lambda(x)} = mu_{log Lambda(f x)}

struct InvarianceCheck {
    double subspace_defect = 0.0;  // || proj(c(1,x) range p_t(x)) - p_t(f x) ||_2
    double measure_defect = 0.0;   // bounded-Lipschitz distance of the Lyapunov laws
};

inline InvarianceCheck invariance_check(const CocycleSystem& sys, const BasePoint& x,
                                        const METEstimate& est_at_x,
                                        const METEstimate& est_at_fx, double t) {
    if (est_at_x.horizon != est_at_fx.horizon)
        throw UsageError("invariance_check: estimates use different horizons");
    const AlgebraElement p = indicator_below(est_at_x.log_limit, t);
    const AlgebraElement pf = indicator_below(est_at_fx.log_limit, t);
    const AlgebraElement moved = sys.generator(x) * p;
    const AlgebraElement q = range_projection(moved);
    InvarianceCheck out;
    out.subspace_defect = l2_norm(q - pf);
    out.measure_defect = bounded_lipschitz_distance(est_at_x.lyapunov_distribution,
                                                    est_at_fx.lyapunov_distribution);
    return out;
}

// ---------------------------------------------------------------------------
// Determinants: (Delta|c(n,x)|)^{1/n} series and Delta(Lambda_hat)

struct DeterminantSeries {
    std::vector<std::pair<long, double>> values;  // (n, (Delta|c(n,x)|)^{1/n})
    double fk_of_limit = 0.0;                     // Delta(Lambda_hat) at the largest horizon
    double last_gap = 0.0;
};

inline DeterminantSeries determinant_convergence(const CocycleSystem& sys, const BasePoint& x,
                                                 const std::vector<long>& horizons) {
    auto snaps = detail::accumulate_snapshots(sys, x, horizons);
    DeterminantSeries out;
    for (const auto& acc : snaps)
        out.values.emplace_back(acc.n(), std::exp(acc.fk_log() / static_cast<double>(acc.n())));
    out.fk_of_limit = out.values.back().second;  // Delta commutes with the 1/n power
    out.last_gap = std::abs(out.values.back().second - out.fk_of_limit);
    return out;
}

// ---------------------------------------------------------------------------
// Growth rates

// rho(nu) for nu the spectral measure of a with respect to xi: the largest
// eigenvalue of a whose eigenprojection does not annihilate xi; 0 for xi = 0.
inline double limit_growth(const PositivePoint& a, const AlgebraElement& xi) {
    const SpectralMeasure nu = vector_spectral_measure(a.element(), xi);
    if (nu.empty()) return 0.0;
    return nu.max_location();
}

inline std::vector<std::pair<long, double>> raw_growth(const CocycleSystem& sys,
                                                       const BasePoint& x,
                                                       const AlgebraElement& xi,
                                                       const std::vector<long>& horizons) {
    if (l2_norm(xi) == 0.0) throw UsageError("raw_growth: xi must be nonzero");
    auto snaps = detail::accumulate_snapshots(sys, x, horizons);
    std::vector<std::pair<long, double>> out;
    for (const auto& acc : snaps)
        out.emplace_back(acc.n(), std::exp(acc.apply_log_norm(xi) / static_cast<double>(acc.n())));
    return out;
}

struct SmoothGrowth {
    double value = 0.0;  // sup over the horizon list of ||c(n,x) xi_n||^{1/n}
    double rho = 0.0;    // limit growth of the reference operator
    std::vector<std::pair<long, double>> series;
    std::vector<std::pair<long, double>> vector_gap;  // ||xi_n - xi||_2 per horizon
};

// Cutoff construction: b_n = |c(n,x)|^{1/n}, f = 1 on [0, rho], 0 above
// rho + eps (piecewise linear), xi_n = f(b_n) xi.  The reference operator for
// rho defaults to the last-horizon estimate; a known limit operator can be
// supplied instead.
inline SmoothGrowth smooth_growth(const CocycleSystem& sys, const BasePoint& x,
                                  const AlgebraElement& xi, const std::vector<long>& horizons,
                                  double eps,
                                  std::optional<PositivePoint> reference_limit = std::nullopt) {
    if (!(eps > 0.0)) throw UsageError("smooth_growth: eps must be > 0");
    auto snaps = detail::accumulate_snapshots(sys, x, horizons);

    PositivePoint ref;
    if (reference_limit) {
        ref = *reference_limit;
    } else {
        HermitianEig log_eig = snaps.back().log_abs_eig();
        for (auto& v : log_eig.values) v /= static_cast<double>(snaps.back().n());
        ref = PositivePoint::from_element(
            log_eig.assemble([](double t) { return std::exp(t); }));
    }

    SmoothGrowth out;
    out.rho = limit_growth(ref, xi);
    const double rho = out.rho;
    auto cutoff = [rho, eps](double t) {
        if (t <= rho) return 1.0;
        if (t >= rho + eps) return 0.0;
        return (rho + eps - t) / eps;
    };
    out.value = 0.0;
    for (const auto& acc : snaps) {
        const double nn = static_cast<double>(acc.n());
        HermitianEig log_eig = acc.log_abs_eig();
        for (auto& v : log_eig.values) v /= nn;
        const AlgebraElement fbn =
            log_eig.assemble([&](double t) { return cutoff(std::exp(t)); });
        const AlgebraElement xin = fbn * xi;
        const double val = std::exp(acc.apply_log_norm(xin) / nn);
        out.series.emplace_back(acc.n(), val);
        out.vector_gap.emplace_back(acc.n(), l2_distance(xin, xi));
        out.value = std::max(out.value, val);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Egorov-style almost-uniform convergence probe (abelian cocycles only):
// selects coordinates with the smallest |(1/n) log c(n,x)(y) - log Lambda(y)|
// until the excluded trace mass drops below eps, and reports the sup deviation
// on the selected block.  Diagnostic only.

struct EgorovProbe {
    double selected_mass = 0.0;
    double excluded_mass = 0.0;
    double sup_deviation_on_selected = 0.0;
};

inline EgorovProbe egorov_probe(const CocycleSystem& sys, const BasePoint& x, long n,
                                double eps) {
    if (sys.algebra()->block_count() != 1 || sys.algebra()->is_factor(0))
        throw UsageError("egorov_probe: abelian cocycles only");
    std::vector<long> hz{n};
    auto snaps = detail::accumulate_snapshots(sys, x, hz);
    const AlgebraElement log_abs = snaps.back().log_abs();
    AlgebraElement ref;
    if (sys.known_limit)
        ref = log_element(*sys.known_limit);
    else {
        ref = (1.0 / static_cast<double>(n)) * log_abs;
    }
    const auto& wts = std::get<AbelianBlock>(sys.algebra()->blocks()[0]).weights;
    std::vector<std::pair<double, double>> dev_mass;  // (deviation, weight)
    for (Eigen::Index i = 0; i < wts.size(); ++i) {
        const double d = std::abs(log_abs.block(0)(i, 0).real() / static_cast<double>(n) -
                                  ref.block(0)(i, 0).real());
        dev_mass.emplace_back(d, wts[i]);
    }
    std::sort(dev_mass.begin(), dev_mass.end());
    const double total = wts.sum();
    EgorovProbe probe;
    double kept = 0.0;
    for (const auto& [d, w] : dev_mass) {
        if (total - kept <= eps) {
            probe.excluded_mass += w;
            continue;
        }
        kept += w;
        probe.sup_deviation_on_selected = d;
    }
    probe.selected_mass = kept;
    probe.excluded_mass = total - kept;
    return probe;
}

}  // namespace ncmet
