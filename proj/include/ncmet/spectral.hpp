#pragma once

// Spectral calculus on algebra elements: Hermitian eigendecompositions,
// functional calculus, spectral measures (tau o E_x and vector measures),
// polar decomposition, distribution functions and generalized s-numbers,
// the two-route log-norm identity and the Fuglede-Kadison determinant.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ncmet/algebra.hpp"
#include "ncmet/errors.hpp"

namespace ncmet {

// ---------------------------------------------------------------------------
// SpectralMeasure: a finite atomic measure on the real line.

class SpectralMeasure {
  public:
    struct Atom {
        double location;
        double mass;
    };

    SpectralMeasure() = default;

    // Builds from unsorted (location, mass) pairs; atoms closer than
    // tol::atom_coalesce * (1 + |location|) are merged by mass addition;
    // atoms with mass below mass_floor (relative to total) are dropped.
    static SpectralMeasure from_pairs(std::vector<Atom> pairs, double mass_floor_rel = 0.0) {
        SpectralMeasure m;
        std::sort(pairs.begin(), pairs.end(),
                  [](const Atom& a, const Atom& b) { return a.location < b.location; });
        double total = 0.0;
        for (const Atom& a : pairs) total += a.mass;
        const double floor = mass_floor_rel * total;
        for (const Atom& a : pairs) {
            if (a.mass <= floor || a.mass <= 0.0) continue;
            if (!m.atoms_.empty() &&
                a.location - m.atoms_.back().location <=
                    tol::atom_coalesce * (1.0 + std::abs(a.location))) {
                // merge; keep the mass-weighted location
                Atom& last = m.atoms_.back();
                const double w = last.mass + a.mass;
                last.location = (last.location * last.mass + a.location * a.mass) / w;
                last.mass = w;
            } else {
                m.atoms_.push_back(a);
            }
        }
        for (const Atom& a : m.atoms_) m.total_mass_ += a.mass;
        return m;
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const { return total_mass_; }
    bool empty() const { return atoms_.empty(); }

    double min_location() const { return atoms_.empty() ? 0.0 : atoms_.front().location; }
    double max_location() const { return atoms_.empty() ? 0.0 : atoms_.back().location; }

    // mu((t, inf)), open interval
    double mass_above(double t) const {
        double s = 0.0;
        for (auto it = atoms_.rbegin(); it != atoms_.rend() && it->location > t; ++it) s += it->mass;
        return s;
    }

    // mu((-inf, t]), closed
    double mass_upto(double t) const { return total_mass_ - mass_above(t); }

    double integrate(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (const Atom& a : atoms_) s += a.mass * f(a.location);
        return s;
    }

    // pushforward under a monotone-or-not map; re-coalesces
    SpectralMeasure map(const std::function<double(double)>& f) const {
        std::vector<Atom> pairs;
        pairs.reserve(atoms_.size());
        for (const Atom& a : atoms_) pairs.push_back({f(a.location), a.mass});
        return from_pairs(std::move(pairs));
    }

  private:
    std::vector<Atom> atoms_;
    double total_mass_ = 0.0;
};

// Sorted-atom closed form: integral of |F_mu - F_nu| between breakpoints plus
// the total-mass difference.  Equals Wasserstein-1 when masses agree.
inline double bounded_lipschitz_distance(const SpectralMeasure& mu, const SpectralMeasure& nu) {
    std::vector<double> cuts;
    for (const auto& a : mu.atoms()) cuts.push_back(a.location);
    for (const auto& a : nu.atoms()) cuts.push_back(a.location);
    if (cuts.empty()) return std::abs(mu.total_mass() - nu.total_mass());
    std::sort(cuts.begin(), cuts.end());
    double d = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double width = cuts[i + 1] - cuts[i];
        if (width <= 0.0) continue;
        d += width * std::abs(mu.mass_upto(cuts[i]) - nu.mass_upto(cuts[i]));
    }
    return d + std::abs(mu.total_mass() - nu.total_mass());
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition, blockwise.

struct HermitianEig {
    AlgebraPtr algebra;
    // per block: eigenvalues (factor: ascending; abelian: coordinate order)
    std::vector<RealVector> values;
    // per factor block: unitary diagonalizer (empty for abelian blocks)
    std::vector<Matrix> vectors;

    // reassemble f applied to the spectrum
    AlgebraElement assemble(const std::function<double(double)>& f) const {
        AlgebraElement out = AlgebraElement::zero(algebra);
        for (std::size_t b = 0; b < values.size(); ++b) {
            const RealVector& lam = values[b];
            RealVector flam(lam.size());
            for (Eigen::Index i = 0; i < lam.size(); ++i) flam[i] = f(lam[i]);
            if (algebra->is_factor(b)) {
                const Matrix& u = vectors[b];
                out.block(b) = u * flam.cast<Complex>().asDiagonal() * u.adjoint();
            } else {
                out.block(b) = flam.cast<Complex>();
            }
        }
        return out;
    }
};

// Requires x Hermitian within rel_tol (in ||.||_2); the input is symmetrized
// as (x + x*)/2 first so behavior is deterministic under rounding.
inline HermitianEig hermitian_eig(const AlgebraElement& x, double rel_tol = tol::hermitian_check) {
    if (hermitian_defect(x) > rel_tol)
        throw DomainError("hermitian_eig: input is not Hermitian (defect " +
                          std::to_string(hermitian_defect(x)) + ")");
    const AlgebraElement h = hermitian_part(x);
    HermitianEig e;
    e.algebra = x.algebra();
    e.values.resize(h.block_count());
    e.vectors.resize(h.block_count());
    for (std::size_t b = 0; b < h.block_count(); ++b) {
        if (h.algebra()->is_factor(b)) {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(h.block(b));
            if (solver.info() != Eigen::Success)
                throw DomainError("hermitian_eig: eigensolver failed");
            e.values[b] = solver.eigenvalues();
            e.vectors[b] = solver.eigenvectors();
        } else {
            e.values[b] = h.block(b).real();
        }
    }
    return e;
}

// ascending eigenvalues per block (abelian values sorted for presentation)
inline std::vector<RealVector> hermitian_eigenvalues(const AlgebraElement& x) {
    HermitianEig e = hermitian_eig(x);
    std::vector<RealVector> out = e.values;
    for (std::size_t b = 0; b < out.size(); ++b)
        if (!x.algebra()->is_factor(b))
            std::sort(out[b].data(), out[b].data() + out[b].size());
    return out;
}

// f(x) = U f(diag lambda) U* blockwise.  `defined` guards the domain of f and
// names the offending eigenvalue on failure.
inline AlgebraElement functional_calculus(const AlgebraElement& x,
                                          const std::function<double(double)>& f,
                                          const std::function<bool(double)>& defined = nullptr) {
    HermitianEig e = hermitian_eig(x);
    if (defined)
        for (const RealVector& lam : e.values)
            for (Eigen::Index i = 0; i < lam.size(); ++i)
                if (!defined(lam[i]))
                    throw DomainError("functional_calculus: f undefined at eigenvalue " +
                                      std::to_string(lam[i]));
    return e.assemble(f);
}

// 1_{(-inf, t]}(x): an orthogonal projection (Hermitian idempotent)
inline AlgebraElement indicator_below(const AlgebraElement& x, double t) {
    return functional_calculus(x, [t](double lam) { return lam <= t ? 1.0 : 0.0; });
}

// spectral measure mu_x = tau o E_x; total mass tau(id)
inline SpectralMeasure spectral_measure(const AlgebraElement& x) {
    HermitianEig e = hermitian_eig(x);
    std::vector<SpectralMeasure::Atom> pairs;
    for (std::size_t b = 0; b < e.values.size(); ++b)
        for (Eigen::Index i = 0; i < e.values[b].size(); ++i)
            pairs.push_back({e.values[b][i], x.algebra()->direction_weight(b, static_cast<int>(i))});
    return SpectralMeasure::from_pairs(std::move(pairs));
}

inline SpectralMeasure spectral_measure(const HermitianEig& e) {
    std::vector<SpectralMeasure::Atom> pairs;
    for (std::size_t b = 0; b < e.values.size(); ++b)
        for (Eigen::Index i = 0; i < e.values[b].size(); ++i)
            pairs.push_back({e.values[b][i], e.algebra->direction_weight(b, static_cast<int>(i))});
    return SpectralMeasure::from_pairs(std::move(pairs));
}

// von Neumann dimension of the range of a projection
inline double vn_dimension(const AlgebraElement& projection) {
    return trace(projection).real();
}

// ---------------------------------------------------------------------------
// |x|, singular values, polar decomposition.

// |x| = (x* x)^{1/2}
inline AlgebraElement abs_element(const AlgebraElement& x) {
    AlgebraElement g = x.adjoint() * x;
    return functional_calculus(g, [](double lam) { return std::sqrt(std::max(lam, 0.0)); });
}

// log-singular values per block, descending (factor blocks) / coordinate order
// (abelian blocks).  Throws ConditioningError at or below the singularity floor.
inline std::vector<RealVector> log_singular_values(const AlgebraElement& x) {
    std::vector<RealVector> out(x.block_count());
    double top = op_norm(x);
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (x.algebra()->is_factor(b)) {
            Eigen::JacobiSVD<Matrix> svd(x.block(b));
            RealVector s = svd.singularValues();
            out[b].resize(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) {
                if (s[i] <= tol::singularity_floor * top)
                    throw ConditioningError("singular value at the floor", s[i]);
                out[b][i] = std::log(s[i]);
            }
        } else {
            const Matrix& v = x.block(b);
            out[b].resize(v.rows());
            for (Eigen::Index i = 0; i < v.rows(); ++i) {
                const double a = std::abs(v(i, 0));
                if (a <= tol::singularity_floor * top)
                    throw ConditioningError("abelian value at the floor", a);
                out[b][i] = std::log(a);
            }
        }
    }
    return out;
}

inline double smallest_singular_value(const AlgebraElement& x) {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (x.algebra()->is_factor(b)) {
            if (x.block(b).rows() == 1)
                s = std::min(s, std::abs(x.block(b)(0, 0)));
            else {
                Eigen::JacobiSVD<Matrix> svd(x.block(b));
                s = std::min(s, svd.singularValues().minCoeff());
            }
        } else {
            s = std::min(s, x.block(b).cwiseAbs().minCoeff());
        }
    }
    return s;
}

inline bool is_invertible(const AlgebraElement& x) {
    return smallest_singular_value(x) > tol::singularity_floor * op_norm(x);
}

inline AlgebraElement inverse(const AlgebraElement& x) {
    const double floor = tol::singularity_floor * op_norm(x);
    AlgebraElement out = AlgebraElement::zero(x.algebra());
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (x.algebra()->is_factor(b)) {
            Eigen::JacobiSVD<Matrix> svd(x.block(b));
            const double smin = svd.singularValues().minCoeff();
            if (smin <= floor) throw ConditioningError("inverse: block is singular", smin);
            out.block(b) = x.block(b).inverse();
        } else {
            const Matrix& v = x.block(b);
            Matrix w(v.rows(), 1);
            for (Eigen::Index i = 0; i < v.rows(); ++i) {
                if (std::abs(v(i, 0)) <= floor)
                    throw ConditioningError("inverse: abelian value is singular", std::abs(v(i, 0)));
                w(i, 0) = 1.0 / v(i, 0);
            }
            out.block(b) = w;
        }
    }
    return out;
}

struct PolarParts {
    AlgebraElement unitary_part;   // u, unitary per block
    AlgebraElement positive_part;  // |x|
};

// x = u |x| with u unitary; requires all blocks invertible
inline PolarParts polar_decompose(const AlgebraElement& x) {
    const double smin = smallest_singular_value(x);
    if (smin <= tol::singularity_floor * op_norm(x))
        throw ConditioningError("polar_decompose: near-singular block", smin);
    PolarParts p{AlgebraElement::zero(x.algebra()), abs_element(x)};
    AlgebraElement inv_abs = functional_calculus(
        x.adjoint() * x, [](double lam) { return 1.0 / std::sqrt(std::max(lam, 0.0)); },
        [](double lam) { return lam > 0.0; });
    p.unitary_part = x * inv_abs;
    return p;
}

// Orthogonal projection onto the closure of the range of x (left-multiplication
// picture): per factor block the span of left singular vectors with sigma above
// the rank tolerance, per abelian block the support indicator.
inline AlgebraElement range_projection(const AlgebraElement& x, double rank_rel_tol = 1e-10) {
    AlgebraElement out = AlgebraElement::zero(x.algebra());
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (x.algebra()->is_factor(b)) {
            Eigen::JacobiSVD<Matrix> svd(x.block(b), Eigen::ComputeFullU);
            const RealVector s = svd.singularValues();
            const double cut = rank_rel_tol * (s.size() ? s(0) : 0.0);
            Matrix p = Matrix::Zero(x.block(b).rows(), x.block(b).rows());
            for (Eigen::Index i = 0; i < s.size(); ++i)
                if (s(i) > cut) p += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
            out.block(b) = p;
        } else {
            const Matrix& v = x.block(b);
            const double cut = rank_rel_tol * v.cwiseAbs().maxCoeff();
            Matrix p(v.rows(), 1);
            for (Eigen::Index i = 0; i < v.rows(); ++i) p(i, 0) = std::abs(v(i, 0)) > cut ? 1.0 : 0.0;
            out.block(b) = p;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vector spectral measure: nu with <f(a) xi, xi> = int f dnu, for positive a
// and xi in the L2 space, a acting by left multiplication.  Atom masses are
// ||P_lambda xi||_2^2 over the eigenprojections P_lambda.

inline SpectralMeasure vector_spectral_measure(const AlgebraElement& a, const AlgebraElement& xi) {
    a.require_same_algebra(xi);
    HermitianEig e = hermitian_eig(a);
    for (const RealVector& lam : e.values)
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (lam[i] < -tol::hermitian_check * (1.0 + std::abs(lam[i])))
                throw DomainError("vector_spectral_measure: operator is not positive");
    std::vector<SpectralMeasure::Atom> pairs;
    for (std::size_t b = 0; b < e.values.size(); ++b) {
        if (a.algebra()->is_factor(b)) {
            const Matrix& u = e.vectors[b];
            const double w = std::get<FactorBlock>(a.algebra()->blocks()[b]).weight;
            // ||P_i xi||_2^2 = w * ||u_i^* xi_block||_F^2 (left multiplication)
            const Matrix coeff = u.adjoint() * xi.block(b);
            for (Eigen::Index i = 0; i < e.values[b].size(); ++i)
                pairs.push_back({e.values[b][i], w * coeff.row(i).squaredNorm()});
        } else {
            const auto& wts = std::get<AbelianBlock>(a.algebra()->blocks()[b]).weights;
            for (Eigen::Index i = 0; i < e.values[b].size(); ++i)
                pairs.push_back({e.values[b][i], wts[i] * std::norm(xi.block(b)(i, 0))});
        }
    }
    // prune rounding-level masses so supports are meaningful
    return SpectralMeasure::from_pairs(std::move(pairs), 1e-24);
}

// ---------------------------------------------------------------------------
// Distribution function, s-numbers, log-norm identity, FK determinant.

// lambda~_t(x) = tau(1_{(t, inf)}(|x|)); right-continuous, non-increasing
inline double distribution_function(const AlgebraElement& x, double lambda) {
    if (lambda < 0.0) throw DomainError("distribution_function: lambda must be >= 0");
    return spectral_measure(abs_element(x)).mass_above(lambda);
}

// mu~_t(x) = inf{ s >= 0 : lambda~_s(x) <= t }, the t-th generalized s-number
inline double s_number(const AlgebraElement& x, double t) {
    const double tid = x.algebra()->trace_of_identity();
    if (t < 0.0 || t >= tid) throw DomainError("s_number: t must lie in [0, tau(id))");
    const SpectralMeasure mu = spectral_measure(abs_element(x));
    if (mu.mass_above(0.0) <= t) return 0.0;
    // smallest atom location s with mass strictly above s at most t
    for (const auto& atom : mu.atoms())
        if (mu.mass_above(atom.location) <= t) return atom.location;
    return mu.max_location();
}

// ||log|x|||_2 two ways: directly through functional calculus, and by exact
// piecewise integration of 2 int_0^inf t [mu_{|x|}(e^t,inf) + mu_{|x^{-1}|}(e^t,inf)] dt
// between atom breakpoints.
struct LogNormPair {
    double direct;
    double integral;
};

inline LogNormPair log_norm_two_ways(const AlgebraElement& x) {
    const AlgebraElement ax = abs_element(x);
    const double floor = tol::singularity_floor * op_norm(x);
    const SpectralMeasure mu = spectral_measure(ax);
    if (!mu.empty() && mu.min_location() <= floor)
        throw ConditioningError("log_norm_two_ways: singular input", mu.min_location());

    const AlgebraElement lg =
        functional_calculus(ax, [](double lam) { return std::log(lam); },
                            [](double lam) { return lam > 0.0; });
    const double direct = l2_norm(lg);

    const SpectralMeasure mu_inv = mu.map([](double s) { return 1.0 / s; });
    double acc = 0.0;
    for (const SpectralMeasure* m : {&mu, &mu_inv}) {
        // integrand t -> t * m(e^t, inf) is piecewise linear between the
        // breakpoints t_j = log(atom location); integrate each piece exactly
        std::vector<double> cuts{0.0};
        for (const auto& a : m->atoms())
            if (a.location > 1.0) cuts.push_back(std::log(a.location));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = cuts[i], hi = cuts[i + 1];
            if (hi <= lo) continue;
            const double level = m->mass_above(std::exp(0.5 * (lo + hi)));
            acc += level * 0.5 * (hi * hi - lo * lo);
        }
    }
    return {direct, std::sqrt(2.0 * acc)};
}

// Delta(x) = exp( int log lambda dmu_{|x|} ); multiplicative
inline double fk_determinant(const AlgebraElement& x) {
    const SpectralMeasure mu = spectral_measure(abs_element(x));
    const double floor = tol::singularity_floor * op_norm(x);
    double s = 0.0;
    for (const auto& a : mu.atoms()) {
        if (a.location <= floor)
            throw DomainError("fk_determinant: singular block (atom at " +
                              std::to_string(a.location) + ")");
        s += a.mass * std::log(a.location);
    }
    return std::exp(s);
}

// log of a positive-definite element
inline AlgebraElement log_element(const AlgebraElement& x) {
    return functional_calculus(x, [](double lam) { return std::log(lam); },
                               [](double lam) { return lam > 0.0; });
}

inline AlgebraElement exp_element(const AlgebraElement& x) {
    return functional_calculus(x, [](double lam) { return std::exp(lam); });
}

}  // namespace ncmet
