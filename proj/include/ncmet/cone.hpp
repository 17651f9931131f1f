#pragma once

// The metric space (P, d_P) of positive invertible elements:
//   d_P(x, y) = || log(x^{-1/2} y x^{-1/2}) ||_2.
// exp/log between the Hermitian L2 space and P, the isometric action
// g.a = g a g*, geodesics a^{1/2} exp(t xi) a^{1/2}, the power contraction
// inequality and the CAT(0) comparison (CN) inequality at midpoints.
// Square roots, powers and logs always go through the Hermitian
// eigendecomposition, never series.

#include <cmath>
#include <optional>
#include <utility>

#include "ncmet/algebra.hpp"
#include "ncmet/errors.hpp"
#include "ncmet/spectral.hpp"

namespace ncmet {

class PositivePoint {
  public:
    PositivePoint() = default;

    // Validates Hermitian-ness and positivity above the singularity floor.
    static PositivePoint from_element(const AlgebraElement& a) {
        HermitianEig e = hermitian_eig(a);  // throws DomainError if not Hermitian
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const RealVector& lam : e.values)
            for (Eigen::Index i = 0; i < lam.size(); ++i) {
                lo = std::min(lo, lam[i]);
                hi = std::max(hi, std::abs(lam[i]));
            }
        if (!(lo > tol::singularity_floor * hi))
            throw ConditioningError("positive point: eigenvalue at or below the floor", lo);
        PositivePoint p;
        p.element_ = hermitian_part(a);
        p.eig_ = std::move(e);
        return p;
    }

    static PositivePoint identity(const AlgebraPtr& alg) {
        return from_element(AlgebraElement::identity(alg));
    }

    const AlgebraElement& element() const { return element_; }
    const AlgebraPtr& algebra() const { return element_.algebra(); }

    // cached spectral data; every derived operator shares it
    const HermitianEig& eig() const { return *eig_; }

    AlgebraElement log() const {
        if (!log_) log_ = eig_->assemble([](double lam) { return std::log(lam); });
        return *log_;
    }

    AlgebraElement power(double s) const {
        return eig_->assemble([s](double lam) { return std::pow(lam, s); });
    }

    AlgebraElement inverse_sqrt() const { return power(-0.5); }
    AlgebraElement sqrt() const { return power(0.5); }

  private:
    AlgebraElement element_;
    std::optional<HermitianEig> eig_;
    mutable std::optional<AlgebraElement> log_;
};

// exp: L2(M,tau)_sa -> P
inline PositivePoint exp_point(const AlgebraElement& h) {
    if (hermitian_defect(h) > tol::hermitian_check)
        throw DomainError("exp_point: direction is not Hermitian");
    return PositivePoint::from_element(exp_element(hermitian_part(h)));
}

inline AlgebraElement log_point(const PositivePoint& a) { return a.log(); }

// d_P(a, b) = ||log(a^{-1/2} b a^{-1/2})||_2; the conjugation is symmetrized
// before eigendecomposition to absorb rounding asymmetry.
inline double dP(const PositivePoint& a, const PositivePoint& b) {
    a.element().require_same_algebra(b.element());
    const AlgebraElement r = a.inverse_sqrt();
    const AlgebraElement c = hermitian_part(r * b.element() * r);
    const AlgebraElement lg = functional_calculus(
        c, [](double lam) { return std::log(lam); },
        [](double lam) { return lam > 0.0; });
    return l2_norm(lg);
}

inline bool points_equal(const PositivePoint& a, const PositivePoint& b) {
    return dP(a, b) < tol::point_equality;
}

// g.a = g a g*; isometric and transitive
inline PositivePoint act(const AlgebraElement& g, const PositivePoint& a) {
    const double smin = smallest_singular_value(g);
    if (smin <= tol::singularity_floor * op_norm(g))
        throw ConditioningError("act: near-singular group element", smin);
    return PositivePoint::from_element(hermitian_part(g * a.element() * g.adjoint()));
}

// unit-speed geodesic segment from `start`, gamma(t) = a^{1/2} exp(t xi) a^{1/2}
struct GeodesicSegment {
    PositivePoint start;
    AlgebraElement direction;  // Hermitian; unit ||.||_2 unless zero-length
    double length = 0.0;
};

inline GeodesicSegment geodesic(const PositivePoint& a, const PositivePoint& b) {
    const AlgebraElement r = a.inverse_sqrt();
    const AlgebraElement c = hermitian_part(r * b.element() * r);
    const AlgebraElement lg = functional_calculus(
        c, [](double lam) { return std::log(lam); },
        [](double lam) { return lam > 0.0; });
    const double len = l2_norm(lg);
    GeodesicSegment seg;
    seg.start = a;
    seg.length = len;
    seg.direction = len < tol::point_equality ? AlgebraElement::zero(a.algebra())
                                              : (1.0 / len) * lg;
    return seg;
}

inline PositivePoint evaluate(const GeodesicSegment& seg, double t) {
    const AlgebraElement s = seg.start.sqrt();
    const AlgebraElement inner = exp_element(hermitian_part(t * seg.direction));
    return PositivePoint::from_element(hermitian_part(s * inner * s));
}

inline PositivePoint geodesic_midpoint(const PositivePoint& a, const PositivePoint& b) {
    GeodesicSegment seg = geodesic(a, b);
    return evaluate(seg, 0.5 * seg.length);
}

// d_P(a^sigma, b^sigma) >= sigma d_P(a, b) for sigma >= 1
struct ContractionCheck {
    double lhs;  // d_P(a^sigma, b^sigma)
    double rhs;  // sigma * d_P(a, b)
};

inline ContractionCheck contraction_check(const PositivePoint& a, const PositivePoint& b,
                                          double sigma) {
    if (sigma < 1.0) throw DomainError("contraction_check: sigma must be >= 1");
    const PositivePoint as = PositivePoint::from_element(a.power(sigma));
    const PositivePoint bs = PositivePoint::from_element(b.power(sigma));
    return {dP(as, bs), sigma * dP(a, b)};
}

// CN comparison inequality at the geodesic midpoint m of x,y:
//   d(z,m)^2 <= (d(z,x)^2 + d(z,y)^2)/2 - d(x,y)^2/4.
// Returns the slack (>= 0 up to tolerance in a CAT(0) space).
inline double cn_inequality_check(const PositivePoint& x, const PositivePoint& y,
                                  const PositivePoint& z) {
    const PositivePoint m = geodesic_midpoint(x, y);
    const double dzx = dP(z, x), dzy = dP(z, y), dxy = dP(x, y), dzm = dP(z, m);
    return 0.5 * (dzx * dzx + dzy * dzy) - 0.25 * dxy * dxy - dzm * dzm;
}

inline PositivePoint random_positive_point(const AlgebraPtr& alg, Rng& rng, double scale = 1.0) {
    return exp_point(scale * random_hermitian(alg, rng));
}

}  // namespace ncmet
