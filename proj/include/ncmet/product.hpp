#pragma once

// Long cocycle products.  A partial product c(n,x) has singular values
// spanning e^{n(lambda_max - lambda_min)}, far outside double range for the
// horizons used here, so per factor block the product is maintained in the
// factored form
//     c_block = Q * diag(e^{ell}) * Z
// with Q unitary, ell per-row log scales, Z bounded (unitary after each
// rebalance).  One step multiplies by a generator value via a modified
// Gram-Schmidt that never mixes scales; every `rebalance_every` steps the
// representation is re-orthogonalized through a scale-aware one-sided Jacobi
// SVD.  Abelian blocks accumulate per-coordinate log magnitudes exactly.
// Everything downstream (drift, limit operators, determinants, growth
// sequences) reads log-space snapshots from here.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ncmet/algebra.hpp"
#include "ncmet/errors.hpp"
#include "ncmet/spectral.hpp"

namespace ncmet {

inline double log_sum_exp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

// SVD of a matrix given by columns with separate log scales:
//   A = [ cols(i) * e^{scale_i} ]  ->  A = U * diag(e^{log_sigma}) * V^*
// via one-sided Jacobi.  All arithmetic sees only scale *ratios* <= 1, so the
// factorization is exact regardless of how graded the scales are.
struct LogSvd {
    RealVector log_sigma;  // descending
    Matrix U;
    Matrix V;
};

inline LogSvd svd_log_scaled(Matrix cols, RealVector scale) {
    const Eigen::Index d = cols.cols();
    Matrix v = Matrix::Identity(d, d);
    // normalize columns into the scales
    for (Eigen::Index j = 0; j < d; ++j) {
        const double nrm = cols.col(j).norm();
        if (!(nrm > 0.0)) throw ConditioningError("svd_log_scaled: zero column", 0.0);
        scale[j] += std::log(nrm);
        cols.col(j) /= nrm;
    }
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (Eigen::Index p = 0; p < d; ++p) {
            for (Eigen::Index q = p + 1; q < d; ++q) {
                // keep the larger scale in position p
                if (scale[q] > scale[p]) {
                    cols.col(p).swap(cols.col(q));
                    v.col(p).swap(v.col(q));
                    std::swap(scale[p], scale[q]);
                }
                Complex g = cols.col(p).dot(cols.col(q));  // <c_p, c_q>, |g| <= 1
                const double ag = std::abs(g);
                worst = std::max(worst, ag);
                if (ag < 1e-15) continue;
                // align the small column's phase so the pair Gram is real >= 0
                const Complex phase = std::conj(g) / ag;
                const double r = std::exp(std::min(scale[q] - scale[p], 0.0));
                // real Jacobi rotation for Gram [[1, ag*r],[ag*r, r^2]];
                // t = tan(theta) and u = t/r evaluated stably down to r = 0
                const double rz = (1.0 - r * r) / (2.0 * ag);  // = r*|zeta|
                const double u = -1.0 / (std::sqrt(r * r + rz * rz) + rz);
                const double t = u * r;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Vector bq = phase * cols.col(q);  // phase-aligned small column
                const Vector new_p = c * cols.col(p) - (s * r) * bq;
                const Vector new_q = (c * u) * cols.col(p) + c * bq;
                const Vector vq = phase * v.col(q);
                const Vector new_vp = c * v.col(p) - s * vq;
                const Vector new_vq = s * v.col(p) + c * vq;
                cols.col(p) = new_p;
                cols.col(q) = new_q;
                v.col(p) = new_vp;
                v.col(q) = new_vq;
                for (Eigen::Index j : {p, q}) {
                    const double nrm = cols.col(j).norm();
                    if (!(nrm > 0.0))
                        throw ConditioningError("svd_log_scaled: column collapsed", 0.0);
                    scale[j] += std::log(nrm);
                    cols.col(j) /= nrm;
                }
            }
        }
        if (worst < 1e-14) break;
    }
    // sort descending by scale
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scale[a] > scale[b]; });
    LogSvd out;
    out.log_sigma.resize(d);
    out.U.resize(d, d);
    out.V.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        out.log_sigma[k] = scale[order[static_cast<std::size_t>(k)]];
        out.U.col(k) = cols.col(order[static_cast<std::size_t>(k)]);
        out.V.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

struct FactorState {
    Matrix q;        // unitary
    RealVector ell;  // log row scales of the middle factor
    Matrix z;        // bounded right factor (unitary right after a rebalance)
};

struct AbelianState {
    RealVector log_mag;  // per-coordinate accumulated log |value|
    Vector phase;        // per-coordinate accumulated unit phase
};

}  // namespace detail

class CocycleAccumulator {
  public:
    explicit CocycleAccumulator(AlgebraPtr algebra, int rebalance_every = 32)
        : algebra_(std::move(algebra)), rebalance_every_(rebalance_every) {
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            auto [rows, colsn] = algebra_->block_shape(b);
            if (algebra_->is_factor(b)) {
                detail::FactorState st;
                st.q = Matrix::Identity(rows, rows);
                st.ell = RealVector::Zero(rows);
                st.z = Matrix::Identity(rows, rows);
                factors_.push_back(std::move(st));
                kind_.push_back(true);
            } else {
                detail::AbelianState st;
                st.log_mag = RealVector::Zero(rows);
                st.phase = Vector::Ones(rows);
                abelians_.push_back(std::move(st));
                kind_.push_back(false);
            }
        }
    }

    const AlgebraPtr& algebra() const { return algebra_; }
    long n() const { return n_; }

    // multiply by the next generator value on the left
    void advance(const AlgebraElement& g) {
        g.require_same_algebra(AlgebraElement::zero(algebra_));
        const double top = op_norm(g);
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (kind_[b]) {
                step_factor(factors_[fi++], g.block(b), top);
            } else {
                detail::AbelianState& st = abelians_[ai++];
                const Matrix& v = g.block(b);
                for (Eigen::Index i = 0; i < v.rows(); ++i) {
                    const double a = std::abs(v(i, 0));
                    if (a <= tol::singularity_floor * top)
                        throw ConditioningError("cocycle generator value at the floor", a);
                    st.log_mag[i] += std::log(a);
                    st.phase[i] *= v(i, 0) / a;
                }
            }
        }
        ++n_;
        if (rebalance_every_ > 0 && n_ % rebalance_every_ == 0) rebalance();
    }

    // SVD of the current product, for factor block index fb (index among
    // factor blocks): c_block = U diag(e^{log_sigma}) V^*
    LogSvd factor_svd(std::size_t fb) const {
        const detail::FactorState& st = factors_[fb];
        // c^* = (Z^* D) Q^*; svd_log_scaled consumes the column-scaled Z^* D
        LogSvd inner = svd_log_scaled(st.z.adjoint(), st.ell);
        LogSvd out;
        out.log_sigma = inner.log_sigma;
        out.U = st.q * inner.V;
        out.V = inner.U;
        return out;
    }

    // log|c_n| assembled as a Hermitian element together with its eigenpairs
    // (factor eigenvalues descending by construction)
    HermitianEig log_abs_eig() const {
        HermitianEig e;
        e.algebra = algebra_;
        e.values.resize(algebra_->block_count());
        e.vectors.resize(algebra_->block_count());
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (kind_[b]) {
                LogSvd s = factor_svd(fi++);
                e.values[b] = s.log_sigma;
                e.vectors[b] = s.V;
            } else {
                e.values[b] = abelians_[ai++].log_mag;
            }
        }
        return e;
    }

    AlgebraElement log_abs() const {
        return log_abs_eig().assemble([](double t) { return t; });
    }

    // ||log(c* c)||_2 = 2 ||log|c|||_2
    double drift_norm() const {
        double s = 0.0;
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (kind_[b]) {
                LogSvd sv = factor_svd(fi++);
                const double w = std::get<FactorBlock>(algebra_->blocks()[b]).weight;
                s += w * sv.log_sigma.squaredNorm();
            } else {
                const auto& wts = std::get<AbelianBlock>(algebra_->blocks()[b]).weights;
                s += (wts.array() * abelians_[ai].log_mag.array().square()).sum();
                ++ai;
            }
        }
        return 2.0 * std::sqrt(s);
    }

    // tau(log|c_n|) = log Delta|c_n|
    double fk_log() const {
        double s = 0.0;
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (kind_[b]) {
                LogSvd sv = factor_svd(fi++);
                s += std::get<FactorBlock>(algebra_->blocks()[b]).weight * sv.log_sigma.sum();
            } else {
                const auto& wts = std::get<AbelianBlock>(algebra_->blocks()[b]).weights;
                s += (wts.array() * abelians_[ai].log_mag.array()).sum();
                ++ai;
            }
        }
        return s;
    }

    // log ||c_n xi||_2 (left multiplication); -inf for xi = 0
    double apply_log_norm(const AlgebraElement& xi) const {
        std::vector<double> terms;
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (kind_[b]) {
                const detail::FactorState& st = factors_[fi++];
                const double w = std::get<FactorBlock>(algebra_->blocks()[b]).weight;
                const Matrix y = st.z * xi.block(b);
                for (Eigen::Index i = 0; i < y.rows(); ++i) {
                    const double rn = y.row(i).squaredNorm();
                    if (rn > 0.0) terms.push_back(2.0 * st.ell[i] + std::log(w * rn));
                }
            } else {
                const detail::AbelianState& st = abelians_[ai++];
                const auto& wts = std::get<AbelianBlock>(algebra_->blocks()[b]).weights;
                for (Eigen::Index i = 0; i < st.log_mag.size(); ++i) {
                    const double an = std::norm(xi.block(b)(i, 0));
                    if (an > 0.0)
                        terms.push_back(2.0 * st.log_mag[i] + std::log(wts[i] * an));
                }
            }
        }
        if (terms.empty()) return -std::numeric_limits<double>::infinity();
        return 0.5 * log_sum_exp(terms);
    }

    // (1/n) d_P(|c_n|, Lambda^n) for a positive reference operator given by its
    // eigendecomposition.  Dense exact evaluation while the common-shifted
    // exponents fit in doubles; beyond that an aligned-frame evaluation whose
    // error vanishes with the frame alignment (exact when the svd frame of
    // c_n coincides with the reference frame, e.g. commuting families).
    double dp_rate(const HermitianEig& log_lambda) const {
        if (n_ == 0) return 0.0;
        const double nn = static_cast<double>(n_);
        double acc = 0.0;
        std::size_t fi = 0, ai = 0;
        for (std::size_t b = 0; b < algebra_->block_count(); ++b) {
            if (!kind_[b]) {
                const auto& wts = std::get<AbelianBlock>(algebra_->blocks()[b]).weights;
                const RealVector diff =
                    abelians_[ai].log_mag - nn * log_lambda.values[b];
                acc += (wts.array() * diff.array().square()).sum();
                ++ai;
                continue;
            }
            const double w = std::get<FactorBlock>(algebra_->blocks()[b]).weight;
            LogSvd sv = factor_svd(fi++);
            // reference eigenvalues descending, frame columns matched
            const RealVector& lamv = log_lambda.values[b];
            std::vector<Eigen::Index> order(static_cast<std::size_t>(lamv.size()));
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](Eigen::Index x, Eigen::Index y) { return lamv[x] > lamv[y]; });
            RealVector e_desc(lamv.size());
            Matrix wmat(lamv.size(), lamv.size());
            for (Eigen::Index k = 0; k < lamv.size(); ++k) {
                e_desc[k] = lamv[order[static_cast<std::size_t>(k)]];
                wmat.col(k) = log_lambda.vectors[b].col(order[static_cast<std::size_t>(k)]);
            }
            const RealVector big = nn * e_desc;
            const double shift =
                0.5 * (sv.log_sigma.mean() + big.mean());
            const RealVector lt = sv.log_sigma.array() - shift;
            const RealVector et = big.array() - shift;
            // dense evaluation is trustworthy only while the conjugation stays
            // well-conditioned; past that the spectra are strongly graded and
            // the aligned-frame evaluation below takes over
            const double spread = (lt.maxCoeff() - lt.minCoeff()) +
                                  (et.maxCoeff() - et.minCoeff());
            if (spread <= 20.0) {
                // dense: d_P(e^{lt in V-frame}, e^{et in W-frame})
                Matrix a = sv.V * lt.array().exp().matrix().asDiagonal() * sv.V.adjoint();
                Matrix ih =
                    wmat * (-0.5 * et).array().exp().matrix().asDiagonal() * wmat.adjoint();
                Matrix conj = ih * a * ih;
                Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (conj + conj.adjoint()));
                for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                    const double lam = es.eigenvalues()[i];
                    if (!(lam > 0.0))
                        throw ConditioningError("dp_rate: conjugation lost positivity", lam);
                    acc += w * std::pow(std::log(lam), 2);
                }
            } else {
                const Matrix u1 = sv.V.adjoint() * wmat;
                for (Eigen::Index i = 0; i < lt.size(); ++i) {
                    std::vector<double> terms;
                    for (Eigen::Index k = 0; k < et.size(); ++k) {
                        const double a2 = std::norm(u1(i, k));
                        if (a2 > 0.0) terms.push_back(std::log(a2) - et[k]);
                    }
                    const double logmu = lt[i] + log_sum_exp(terms);
                    acc += w * logmu * logmu;
                }
            }
        }
        return std::sqrt(acc) / nn;
    }

    // || (1/n) log|c_n| - log Lambda ||_2
    double l2_log_rate(const AlgebraElement& log_lambda) const {
        if (n_ == 0) return 0.0;
        return l2_norm((1.0 / static_cast<double>(n_)) * log_abs() - log_lambda);
    }

    void rebalance() {
        for (std::size_t fb = 0; fb < factors_.size(); ++fb) {
            detail::FactorState& st = factors_[fb];
            LogSvd inner = svd_log_scaled(st.z.adjoint(), st.ell);
            st.q = (st.q * inner.V).eval();
            st.ell = inner.log_sigma;
            st.z = inner.U.adjoint();
        }
    }

  private:
    void step_factor(detail::FactorState& st, const Matrix& a, double top) {
        const Eigen::Index d = a.rows();
        // guard: generator block must clear the singularity floor
        if (d == 1) {
            const double av = std::abs(a(0, 0));
            if (av <= tol::singularity_floor * top)
                throw ConditioningError("cocycle generator block is singular", av);
            st.ell[0] += std::log(av);
            st.q *= a(0, 0) / av;
            return;
        }
        {
            Eigen::JacobiSVD<Matrix> svd(a);
            const double smin = svd.singularValues().minCoeff();
            if (smin <= tol::singularity_floor * top)
                throw ConditioningError("cocycle generator block is singular", smin);
        }
        // c' = (a q) diag(e^ell) z; MGS of the scaled columns of (a q) diag(e^ell)
        Matrix g = a * st.q;
        RealVector scale = st.ell;
        Matrix qn(d, d);
        Matrix rho = Matrix::Zero(d, d);  // r_{ji} = rho(j,i) e^{scale_i}, j < i
        RealVector ellp(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            Vector col = g.col(i);
            for (Eigen::Index j = 0; j < i; ++j) {
                const Complex c = qn.col(j).dot(col);
                rho(j, i) = c;
                col -= c * qn.col(j);
            }
            const double nrm = col.norm();
            if (!(nrm > 0.0)) throw ConditioningError("cocycle product lost rank", 0.0);
            ellp[i] = scale[i] + std::log(nrm);
            qn.col(i) = col / nrm;
        }
        // z'' with z''(j,i) = rho(j,i) e^{scale_i - ellp_j}
        Matrix z2 = Matrix::Identity(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < i; ++j) {
                const double gap = scale[i] - ellp[j];
                z2(j, i) = gap < -745.0 ? Complex(0.0) : rho(j, i) * std::exp(gap);
            }
        st.q = qn;
        st.ell = ellp;
        st.z = (z2 * st.z).eval();
        if (st.z.cwiseAbs().maxCoeff() > 1e6) {
            LogSvd inner = svd_log_scaled(st.z.adjoint(), st.ell);
            st.q = (st.q * inner.V).eval();
            st.ell = inner.log_sigma;
            st.z = inner.U.adjoint();
        }
    }

    AlgebraPtr algebra_;
    int rebalance_every_;
    long n_ = 0;
    std::vector<bool> kind_;  // true = factor
    std::vector<detail::FactorState> factors_;
    std::vector<detail::AbelianState> abelians_;
};

}  // namespace ncmet
