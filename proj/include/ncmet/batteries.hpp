#pragma once

// Randomized property suites over the core invariants: metric axioms and the
// isometric action, CAT(0) comparison geometry, spectral-distribution
// inequalities, determinant identities, and growth-rate laws.  Each suite is
// deterministic given (trials, seed) and reports the worst violation per
// invariant against its pinned bound.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ncmet/algebra.hpp"
#include "ncmet/cone.hpp"
#include "ncmet/dynamics.hpp"
#include "ncmet/met.hpp"
#include "ncmet/spectral.hpp"

namespace ncmet {

struct InvariantResult {
    std::string name;
    double worst = 0.0;  // max violation; pass iff worst <= bound
    double bound = 0.0;
    long checks = 0;
    bool pass = true;
};

struct SuiteResult {
    std::string name;
    int trials = 0;
    std::vector<InvariantResult> invariants;
    bool pass = true;

    void finish() {
        pass = true;
        for (auto& inv : invariants) {
            inv.pass = inv.worst <= inv.bound;
            pass = pass && inv.pass;
        }
    }
};

namespace battery_detail {

class Tracker {
  public:
    // pointers into the suite stay valid: capacity is fixed up front
    InvariantResult* add(SuiteResult& suite, const std::string& name, double bound) {
        if (suite.invariants.capacity() < 32) suite.invariants.reserve(32);
        suite.invariants.push_back({name, 0.0, bound, 0, true});
        return &suite.invariants.back();
    }
};

inline void record(InvariantResult* inv, double violation) {
    inv->worst = std::max(inv->worst, violation);
    ++inv->checks;
}

inline AlgebraElement random_invertible(const AlgebraPtr& alg, Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        AlgebraElement x = random_element(alg, rng);
        if (smallest_singular_value(x) > 0.05 * op_norm(x)) return x;
    }
    throw ConfigError("random_invertible: sampler failed to find a well-conditioned element");
}

inline AlgebraElement random_unitary(const AlgebraPtr& alg, Rng& rng) {
    return polar_decompose(random_invertible(alg, rng)).unitary_part;
}

// level grid for distribution inequalities, kept away from the atoms of the
// listed measures so counting is stable under rounding
inline std::vector<double> safe_levels(const std::vector<const SpectralMeasure*>& measures,
                                       double lo, double hi, int count) {
    std::vector<double> out;
    const double ratio = std::pow(hi / lo, 1.0 / (count - 1));
    double lev = lo;
    for (int i = 0; i < count; ++i, lev *= ratio) {
        bool safe = true;
        for (const SpectralMeasure* m : measures)
            for (const auto& a : m->atoms())
                if (std::abs(a.location - lev) <= 1e-7 * (1.0 + lev)) safe = false;
        if (safe) out.push_back(lev);
    }
    return out;
}

inline bool level_safe(const SpectralMeasure& m, double lev) {
    for (const auto& a : m.atoms())
        if (std::abs(a.location - lev) <= 1e-7 * (1.0 + lev)) return false;
    return true;
}

// atom-wise discrepancy between two measures (after coalescing); large when
// the atom counts disagree
inline double measure_mismatch(const SpectralMeasure& mu, const SpectralMeasure& nu) {
    if (mu.atoms().size() != nu.atoms().size()) return 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
        const auto& a = mu.atoms()[i];
        const auto& b = nu.atoms()[i];
        worst = std::max(worst, std::abs(a.location - b.location) / (1.0 + std::abs(a.location)));
        worst = std::max(worst, std::abs(a.mass - b.mass));
    }
    return worst;
}

}  // namespace battery_detail

// ---------------------------------------------------------------------------

inline SuiteResult metric_battery(int trials, std::uint64_t seed) {
    using namespace battery_detail;
    SuiteResult suite{"metric", trials, {}, true};
    Tracker tk;
    auto* identity_axiom = tk.add(suite, "d(a,a) = 0", 1e-10);
    auto* symmetry = tk.add(suite, "d(a,b) = d(b,a)", 1e-9);
    auto* triangle = tk.add(suite, "triangle inequality", 1e-9);
    auto* log_lower = tk.add(suite, "d >= ||log a - log b||_2", 1e-9);
    auto* isometry = tk.add(suite, "G-action isometry", 1e-8);
    auto* unitary_conj = tk.add(suite, "unitary conjugation", 1e-10);
    auto* transitivity = tk.add(suite, "transitivity witness", 1e-8);
    auto* roundtrip = tk.add(suite, "exp/log round trip", 1e-9);
    auto* base_dist = tk.add(suite, "d(id, exp h) = ||h||_2", 1e-9);
    auto* commuting = tk.add(suite, "commuting pairs: d = ||h - k||_2", 1e-10);
    auto* midpoint = tk.add(suite, "midpoint symmetry", 1e-8);

    AlgebraPtr alg = TracialAlgebra::normalized_matrix(4);
    Rng rng(seed);
    const PositivePoint id = PositivePoint::identity(alg);
    for (int t = 0; t < trials; ++t) {
        const AlgebraElement h1 = 0.8 * random_hermitian(alg, rng);
        const AlgebraElement h2 = 0.8 * random_hermitian(alg, rng);
        const AlgebraElement h3 = 0.8 * random_hermitian(alg, rng);
        const PositivePoint a = exp_point(h1), b = exp_point(h2), c = exp_point(h3);

        record(identity_axiom, dP(a, a));
        record(symmetry, std::abs(dP(a, b) - dP(b, a)));
        record(triangle, dP(a, c) - dP(a, b) - dP(b, c));
        record(log_lower, l2_norm(h1 - h2) - dP(a, b));

        const AlgebraElement g = random_invertible(alg, rng);
        record(isometry, std::abs(dP(act(g, a), act(g, b)) - dP(a, b)));
        const AlgebraElement u = random_unitary(alg, rng);
        record(unitary_conj, std::abs(dP(act(u, a), act(u, b)) - dP(a, b)));

        const AlgebraElement mover = b.sqrt() * a.inverse_sqrt();
        record(transitivity, dP(act(mover, a), b));

        record(roundtrip, l2_norm(log_point(exp_point(h1)) - h1));
        record(base_dist, std::abs(dP(id, a) - l2_norm(h1)));
        const double s = 0.3 + rng.uniform();
        record(commuting, std::abs(dP(a, exp_point(s * h1)) - std::abs(1.0 - s) * l2_norm(h1)));
        record(midpoint, dP(geodesic_midpoint(a, b), geodesic_midpoint(b, a)));
    }
    suite.finish();
    return suite;
}

inline SuiteResult cat0_battery(int trials, std::uint64_t seed) {
    using namespace battery_detail;
    SuiteResult suite{"cat0", trials, {}, true};
    Tracker tk;
    auto* cn = tk.add(suite, "CN midpoint inequality", 1e-8);
    auto* contraction = tk.add(suite, "power contraction sigma in {1.5,2,4}", 1e-9);
    auto* geo_start = tk.add(suite, "geodesic start", 1e-10);
    auto* geo_end = tk.add(suite, "geodesic endpoint", 1e-8);
    auto* geo_mid = tk.add(suite, "geodesic midpoint split", 1e-8);
    auto* geo_speed = tk.add(suite, "unit speed", 1e-8);
    auto* flat = tk.add(suite, "abelian CN equality", 1e-10);

    AlgebraPtr alg = TracialAlgebra::normalized_matrix(4);
    RealVector w(4);
    w << 0.25, 0.25, 0.25, 0.25;
    AlgebraPtr flat_alg = TracialAlgebra::abelian(w);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const PositivePoint x = random_positive_point(alg, rng, 0.8);
        const PositivePoint y = random_positive_point(alg, rng, 0.8);
        const PositivePoint z = random_positive_point(alg, rng, 0.8);
        record(cn, -cn_inequality_check(x, y, z));
        for (double sigma : {1.5, 2.0, 4.0}) {
            const ContractionCheck cc = contraction_check(x, y, sigma);
            record(contraction, cc.rhs - cc.lhs);
        }
        const GeodesicSegment seg = geodesic(x, y);
        record(geo_start, dP(evaluate(seg, 0.0), x));
        record(geo_end, dP(evaluate(seg, seg.length), y));
        const PositivePoint m = evaluate(seg, 0.5 * seg.length);
        record(geo_mid, std::abs(dP(x, m) - 0.5 * seg.length));
        record(geo_mid, std::abs(dP(m, y) - 0.5 * seg.length));
        const double t1 = 0.2 * seg.length, t2 = 0.7 * seg.length;
        if (seg.length > 1e-6)
            record(geo_speed, std::abs(dP(evaluate(seg, t1), evaluate(seg, t2)) / (t2 - t1) - 1.0));

        const PositivePoint fx = random_positive_point(flat_alg, rng);
        const PositivePoint fy = random_positive_point(flat_alg, rng);
        const PositivePoint fz = random_positive_point(flat_alg, rng);
        record(flat, std::abs(cn_inequality_check(fx, fy, fz)));
    }
    suite.finish();
    return suite;
}

inline SuiteResult spectral_inequality_battery(int trials, std::uint64_t seed) {
    using namespace battery_detail;
    SuiteResult suite{"spectral_inequalities", trials, {}, true};
    Tracker tk;
    auto* trace_prop = tk.add(suite, "tau(xy) = tau(yx)", 1e-12);
    auto* submult = tk.add(suite, "submultiplicative distribution bound", 1e-12);
    auto* subadd = tk.add(suite, "subadditive distribution bound", 1e-12);
    auto* star_inv = tk.add(suite, "mu_|a| = mu_|a*|", 1e-8);
    auto* reciprocal = tk.add(suite, "mu_|a^-1| = r_* mu_|a|", 1e-8);
    auto* log_subgroup = tk.add(suite, "log subgroup inequality", 1e-9);
    auto* log_norms = tk.add(suite, "||log|a||| = ||log|a*||| = ||log|a^-1|||", 1e-10);
    auto* two_ways = tk.add(suite, "log-norm integral identity", 1e-9);
    auto* snumber = tk.add(suite, "s-number submultiplicativity", 1e-9);
    auto* moments = tk.add(suite, "moment identity deg <= 6", 1e-9);
    auto* dist_mono = tk.add(suite, "distribution function monotone", 1e-12);

    AlgebraPtr alg = TracialAlgebra::normalized_matrix(4);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        {
            const AlgebraElement x = random_element(alg, rng);
            const AlgebraElement y = random_element(alg, rng);
            const Complex d = trace(x * y) - trace(y * x);
            record(trace_prop, std::abs(d) / (1.0 + std::abs(trace(x * y))));
        }
        const AlgebraElement a = random_invertible(alg, rng);
        const AlgebraElement b = random_invertible(alg, rng);
        const SpectralMeasure mu_a = spectral_measure(abs_element(a));
        const SpectralMeasure mu_b = spectral_measure(abs_element(b));
        const SpectralMeasure mu_ab = spectral_measure(abs_element(a * b));
        const SpectralMeasure mu_sum = spectral_measure(abs_element(a + b));

        const auto l1s = safe_levels({&mu_a}, 0.5 * mu_a.min_location(), 2.0 * mu_a.max_location(), 7);
        const auto l2s = safe_levels({&mu_b}, 0.5 * mu_b.min_location(), 2.0 * mu_b.max_location(), 7);
        for (double l1 : l1s)
            for (double l2 : l2s) {
                if (level_safe(mu_ab, l1 * l2))
                    record(submult,
                           mu_ab.mass_above(l1 * l2) - mu_a.mass_above(l1) - mu_b.mass_above(l2));
                if (level_safe(mu_sum, l1 + l2))
                    record(subadd,
                           mu_sum.mass_above(l1 + l2) - mu_a.mass_above(l1) - mu_b.mass_above(l2));
            }

        record(star_inv, measure_mismatch(mu_a, spectral_measure(abs_element(a.adjoint()))));
        record(reciprocal,
               measure_mismatch(spectral_measure(abs_element(inverse(a))),
                                mu_a.map([](double s) { return 1.0 / s; })));

        const double la = log_norm_two_ways(a).direct;
        const double lb = log_norm_two_ways(b).direct;
        const double lab = log_norm_two_ways(a * b).direct;
        record(log_subgroup, lab * lab - 2.0 * (la * la + lb * lb));
        record(log_norms, std::abs(la - log_norm_two_ways(a.adjoint()).direct));
        record(log_norms, std::abs(la - log_norm_two_ways(inverse(a)).direct));
        const LogNormPair ln = log_norm_two_ways(a);
        record(two_ways, std::abs(ln.direct - ln.integral) / (1.0 + ln.direct));

        for (double tt : {0.0, 0.1, 0.2, 0.35})
            for (double ss : {0.05, 0.15, 0.3}) {
                if (tt + ss >= alg->trace_of_identity()) continue;
                const double lhs = s_number(a * b, tt + ss);
                const double rhs = s_number(a, tt) * s_number(b, ss);
                record(snumber, (lhs - rhs) / (1.0 + rhs));
            }

        {
            const AlgebraElement x = random_hermitian(alg, rng);
            AlgebraElement p = AlgebraElement::zero(alg);
            AlgebraElement xpow = AlgebraElement::identity(alg);
            double coeffs[7];
            for (double& cf : coeffs) cf = rng.uniform(-1.0, 1.0);
            double integral = 0.0;
            const SpectralMeasure mu_x = spectral_measure(x);
            for (int k = 0; k <= 6; ++k) {
                p = p + coeffs[k] * xpow;
                integral += coeffs[k] * mu_x.integrate([k](double s) { return std::pow(s, k); });
                xpow = xpow * x;
            }
            record(moments, std::abs(trace(p).real() - integral));
        }

        double prev = std::numeric_limits<double>::infinity();
        for (double lev = 0.0; lev <= 2.0 * mu_a.max_location(); lev += 0.13 * mu_a.max_location()) {
            const double val = mu_a.mass_above(lev);
            record(dist_mono, val - prev);
            prev = val;
        }
    }
    suite.finish();
    return suite;
}

inline SuiteResult determinant_battery(int trials, std::uint64_t seed) {
    using namespace battery_detail;
    SuiteResult suite{"determinant", trials, {}, true};
    Tracker tk;
    auto* mult = tk.add(suite, "Delta(ab) = Delta(a) Delta(b)", 1e-10);
    auto* inv = tk.add(suite, "Delta(a^-1) Delta(a) = 1", 1e-10);
    auto* abelian_example = tk.add(suite, "abelian closed form", 1e-12);
    auto* constant_series = tk.add(suite, "constant cocycle determinant series", 1e-10);

    AlgebraPtr alg = TracialAlgebra::normalized_matrix(4);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const AlgebraElement a = random_invertible(alg, rng);
        const AlgebraElement b = random_invertible(alg, rng);
        const double dab = fk_determinant(a * b);
        const double da = fk_determinant(a), db = fk_determinant(b);
        record(mult, std::abs(dab - da * db) / (da * db));
        record(inv, std::abs(fk_determinant(inverse(a)) * da - 1.0));
    }
    {
        RealVector w(2);
        w << 0.5, 0.5;
        AlgebraPtr ab = TracialAlgebra::abelian(w);
        AlgebraElement phi = AlgebraElement::zero(ab);
        phi.block(0)(0, 0) = 4.0;
        phi.block(0)(1, 0) = 1.0;
        record(abelian_example, std::abs(fk_determinant(phi) - 2.0));
    }
    {
        AlgebraPtr m2 = TracialAlgebra::normalized_matrix(2);
        AlgebraElement tmat = AlgebraElement::zero(m2);
        tmat.block(0) << 2.0, 0.0, 0.0, 0.5;
        RealVector probs(1);
        CocycleSystem sys(BaseSystem(RotationSystem{0.37}), m2, ConstantGenerator{tmat});
        const BasePoint x0 = sys.base().initial_point(7);
        DeterminantSeries ds = determinant_convergence(sys, x0, {8, 16, 64, 128});
        const double ref = fk_determinant(tmat);
        for (const auto& [n, v] : ds.values) record(constant_series, std::abs(v - ref));
    }
    suite.finish();
    return suite;
}

inline SuiteResult growth_battery(int trials, std::uint64_t seed) {
    using namespace battery_detail;
    SuiteResult suite{"growth", trials, {}, true};
    Tracker tk;
    auto* oracle = tk.add(suite, "power-iteration oracle at n = 200", 1e-3);
    auto* membership = tk.add(suite, "1_{[0,t]} membership equivalence", 0.0);
    auto* smooth_const = tk.add(suite, "constant cocycle smooth growth window", 1e-2);

    AlgebraPtr alg = TracialAlgebra::normalized_matrix(3);
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        // positive operator with a definite relative spectral gap, paired with
        // a vector whose measure puts real mass on every eigenvalue; keeps the
        // ratio estimator's geometric error term far below the 1e-3 bound
        PositivePoint a;
        AlgebraElement xi;
        for (int attempt = 0;; ++attempt) {
            a = random_positive_point(alg, rng, 0.7);
            xi = random_element(alg, rng);
            const SpectralMeasure mu = spectral_measure(a.element());
            bool ok = mu.atoms().size() >= 2;
            for (std::size_t i = 0; i + 1 < mu.atoms().size(); ++i)
                ok = ok && mu.atoms()[i + 1].location > 1.04 * mu.atoms()[i].location;
            const SpectralMeasure nu = vector_spectral_measure(a.element(), xi);
            ok = ok && nu.atoms().size() == mu.atoms().size();
            for (const auto& atom : nu.atoms())
                ok = ok && atom.mass >= 1e-3 * nu.total_mass();
            if (ok || attempt > 512) break;
        }
        const double rho = limit_growth(a, xi);

        // independent oracle: literally apply a 200 times, renormalizing
        AlgebraElement v = xi;
        double lognorm = std::log(l2_norm(v));
        double last_ratio = 0.0;
        for (int k = 0; k < 201; ++k) {
            v = a.element() * v;
            const double nn = l2_norm(v);
            last_ratio = nn;
            lognorm += std::log(nn);
            v = (1.0 / nn) * v;
        }
        record(oracle, std::abs(rho - last_ratio));

        // membership both directions one atom-gap away from rho
        const SpectralMeasure nu = vector_spectral_measure(a.element(), xi);
        if (nu.atoms().size() >= 2) {
            const double below = nu.atoms()[nu.atoms().size() - 2].location;
            const double gap = rho - below;
            for (double tt : {rho + gap, rho - gap}) {
                const AlgebraElement q = functional_calculus(
                    a.element(), [tt](double s) { return s <= tt ? 1.0 : 0.0; });
                const bool member = l2_distance(q * xi, xi) <= 1e-8 * l2_norm(xi);
                const bool expected = rho <= tt + 1e-12;
                record(membership, member == expected ? 0.0 : 1.0);
            }
        }
    }
    {
        // constant positive generator: xi inside one eigenspace gives the exact
        // limit at every horizon
        AlgebraPtr m2 = TracialAlgebra::normalized_matrix(2);
        AlgebraElement tmat = AlgebraElement::zero(m2);
        tmat.block(0) << 3.0, 0.0, 0.0, 1.0;
        CocycleSystem sys(BaseSystem(RotationSystem{0.41}), m2, ConstantGenerator{tmat});
        AlgebraElement xi = AlgebraElement::zero(m2);
        xi.block(0)(0, 0) = std::sqrt(2.0);  // unit vector in the top eigenspace
        const BasePoint x0 = sys.base().initial_point(11);
        const SmoothGrowth sg = smooth_growth(sys, x0, xi, {16, 64, 256}, 0.05);
        record(smooth_const, std::abs(sg.value - sg.rho));
        record(smooth_const, std::abs(sg.value - 3.0));
    }
    suite.finish();
    return suite;
}

inline SuiteResult property_battery(const std::string& name, int trials, std::uint64_t seed) {
    if (name == "metric") return metric_battery(trials, seed);
    if (name == "cat0") return cat0_battery(trials, seed);
    if (name == "spectral_inequalities") return spectral_inequality_battery(trials, seed);
    if (name == "determinant") return determinant_battery(trials, seed);
    if (name == "growth") return growth_battery(trials, seed);
    throw UsageError("unknown property suite '" + name + "'");
}

}  // namespace ncmet
