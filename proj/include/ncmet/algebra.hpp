#pragma once

// Finite-dimensional tracial *-algebras: finite direct sums of full matrix
// factors M_n(C) with a block weight, and weighted diagonal (abelian) blocks.
// The trace is tau(x) = sum_factor w * tr(x_block) + sum_abelian sum_j nu_j x_j.
// Elements carry one dense complex matrix per factor block and one complex
// vector per abelian block.  The L2 space of (M, tau) is the algebra itself.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ncmet/errors.hpp"
#include "ncmet/rng.hpp"

namespace ncmet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct FactorBlock {
    int n = 1;           // M_n(C)
    double weight = 1.0; // trace contribution: weight * sum_k x_kk
};

struct AbelianBlock {
    RealVector weights;  // nu_1..nu_m > 0; trace contribution: sum_j nu_j x_j
};

using Block = std::variant<FactorBlock, AbelianBlock>;

class TracialAlgebra {
  public:
    explicit TracialAlgebra(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw ConfigError("algebra needs at least one block");
        for (const Block& b : blocks_) {
            if (const auto* f = std::get_if<FactorBlock>(&b)) {
                if (f->n < 1) throw ConfigError("factor block size must be >= 1");
                if (!(f->weight > 0.0)) throw ConfigError("factor block weight must be > 0");
                trace_id_ += f->weight * f->n;
            } else {
                const auto& a = std::get<AbelianBlock>(b);
                if (a.weights.size() == 0) throw ConfigError("abelian block needs weights");
                for (Eigen::Index j = 0; j < a.weights.size(); ++j)
                    if (!(a.weights[j] > 0.0)) throw ConfigError("abelian weights must be > 0");
                trace_id_ += a.weights.sum();
            }
        }
    }

    static std::shared_ptr<const TracialAlgebra> make(std::vector<Block> blocks) {
        return std::make_shared<const TracialAlgebra>(std::move(blocks));
    }

    // M_n(C) with the normalized trace (weight 1/n), so tau(id) = 1.
    static std::shared_ptr<const TracialAlgebra> normalized_matrix(int n) {
        return make({FactorBlock{n, 1.0 / n}});
    }

    static std::shared_ptr<const TracialAlgebra> matrix(int n, double weight) {
        return make({FactorBlock{n, weight}});
    }

    static std::shared_ptr<const TracialAlgebra> abelian(RealVector weights) {
        return make({AbelianBlock{std::move(weights)}});
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t block_count() const { return blocks_.size(); }
    double trace_of_identity() const { return trace_id_; }

    // rows x cols of the dense storage for block b (abelian blocks are m x 1)
    std::pair<int, int> block_shape(std::size_t b) const {
        if (const auto* f = std::get_if<FactorBlock>(&blocks_[b])) return {f->n, f->n};
        const auto& a = std::get<AbelianBlock>(blocks_[b]);
        return {static_cast<int>(a.weights.size()), 1};
    }

    bool is_factor(std::size_t b) const { return std::holds_alternative<FactorBlock>(blocks_[b]); }

    // weight of eigen-direction i in block b: factor weight, or nu_i
    double direction_weight(std::size_t b, int i) const {
        if (const auto* f = std::get_if<FactorBlock>(&blocks_[b])) return f->weight;
        return std::get<AbelianBlock>(blocks_[b]).weights[i];
    }

    bool same_layout(const TracialAlgebra& other) const {
        if (blocks_.size() != other.blocks_.size()) return false;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (is_factor(b) != other.is_factor(b)) return false;
            if (is_factor(b)) {
                const auto& x = std::get<FactorBlock>(blocks_[b]);
                const auto& y = std::get<FactorBlock>(other.blocks_[b]);
                if (x.n != y.n || x.weight != y.weight) return false;
            } else {
                const auto& x = std::get<AbelianBlock>(blocks_[b]);
                const auto& y = std::get<AbelianBlock>(other.blocks_[b]);
                if (x.weights.size() != y.weights.size()) return false;
                if (x.weights != y.weights) return false;
            }
        }
        return true;
    }

  private:
    std::vector<Block> blocks_;
    double trace_id_ = 0.0;
};

using AlgebraPtr = std::shared_ptr<const TracialAlgebra>;

class AlgebraElement {
  public:
    AlgebraElement() = default;

    AlgebraElement(AlgebraPtr algebra, std::vector<Matrix> data)
        : algebra_(std::move(algebra)), data_(std::move(data)) {
        if (!algebra_) throw StructureError("element without algebra");
        if (data_.size() != algebra_->block_count())
            throw StructureError("element block count does not match algebra");
        for (std::size_t b = 0; b < data_.size(); ++b) {
            auto [r, c] = algebra_->block_shape(b);
            if (data_[b].rows() != r || data_[b].cols() != c)
                throw StructureError("block " + std::to_string(b) + " has wrong shape");
        }
    }

    static AlgebraElement zero(const AlgebraPtr& alg) {
        std::vector<Matrix> d;
        d.reserve(alg->block_count());
        for (std::size_t b = 0; b < alg->block_count(); ++b) {
            auto [r, c] = alg->block_shape(b);
            d.push_back(Matrix::Zero(r, c));
        }
        return AlgebraElement(alg, std::move(d));
    }

    static AlgebraElement identity(const AlgebraPtr& alg) {
        std::vector<Matrix> d;
        d.reserve(alg->block_count());
        for (std::size_t b = 0; b < alg->block_count(); ++b) {
            auto [r, c] = alg->block_shape(b);
            if (alg->is_factor(b))
                d.push_back(Matrix::Identity(r, r));
            else
                d.push_back(Matrix::Ones(r, 1));
        }
        return AlgebraElement(alg, std::move(d));
    }

    // scalar multiple of the identity
    static AlgebraElement scalar(const AlgebraPtr& alg, Complex s) {
        AlgebraElement e = identity(alg);
        for (auto& m : e.data_) m *= s;
        return e;
    }

    const AlgebraPtr& algebra() const { return algebra_; }
    std::size_t block_count() const { return data_.size(); }
    const Matrix& block(std::size_t b) const { return data_[b]; }
    Matrix& block(std::size_t b) { return data_[b]; }

    bool valid() const { return algebra_ != nullptr; }

    AlgebraElement adjoint() const {
        std::vector<Matrix> d;
        d.reserve(data_.size());
        for (std::size_t b = 0; b < data_.size(); ++b) {
            Matrix m;
            if (algebra_->is_factor(b))
                m = data_[b].adjoint();
            else
                m = data_[b].conjugate();
            d.push_back(std::move(m));
        }
        return AlgebraElement(algebra_, std::move(d));
    }

    friend AlgebraElement operator+(const AlgebraElement& x, const AlgebraElement& y) {
        x.require_same_algebra(y);
        std::vector<Matrix> d;
        d.reserve(x.data_.size());
        for (std::size_t b = 0; b < x.data_.size(); ++b) d.push_back(x.data_[b] + y.data_[b]);
        return AlgebraElement(x.algebra_, std::move(d));
    }

    friend AlgebraElement operator-(const AlgebraElement& x, const AlgebraElement& y) {
        x.require_same_algebra(y);
        std::vector<Matrix> d;
        d.reserve(x.data_.size());
        for (std::size_t b = 0; b < x.data_.size(); ++b) d.push_back(x.data_[b] - y.data_[b]);
        return AlgebraElement(x.algebra_, std::move(d));
    }

    friend AlgebraElement operator*(const AlgebraElement& x, const AlgebraElement& y) {
        x.require_same_algebra(y);
        std::vector<Matrix> d;
        d.reserve(x.data_.size());
        for (std::size_t b = 0; b < x.data_.size(); ++b) {
            if (x.algebra_->is_factor(b))
                d.push_back(x.data_[b] * y.data_[b]);
            else
                d.push_back(x.data_[b].cwiseProduct(y.data_[b]));
        }
        return AlgebraElement(x.algebra_, std::move(d));
    }

    friend AlgebraElement operator*(Complex s, const AlgebraElement& x) {
        std::vector<Matrix> d;
        d.reserve(x.data_.size());
        for (const auto& m : x.data_) d.push_back(s * m);
        return AlgebraElement(x.algebra_, std::move(d));
    }

    friend AlgebraElement operator*(double s, const AlgebraElement& x) {
        return Complex(s, 0.0) * x;
    }

    void require_same_algebra(const AlgebraElement& y) const {
        if (algebra_ == y.algebra_) return;
        if (!algebra_ || !y.algebra_ || !algebra_->same_layout(*y.algebra_))
            throw StructureError("operands belong to different algebras");
    }

  private:
    AlgebraPtr algebra_;
    std::vector<Matrix> data_;
};

// tau(x): linear; tau(x* x) real >= 0; tau(xy) = tau(yx)
inline Complex trace(const AlgebraElement& x) {
    if (!x.valid()) throw StructureError("trace of an element without an algebra");
    Complex t = 0.0;
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (const auto* f = std::get_if<FactorBlock>(&x.algebra()->blocks()[b]))
            t += f->weight * x.block(b).trace();
        else {
            const auto& w = std::get<AbelianBlock>(x.algebra()->blocks()[b]).weights;
            t += (w.cast<Complex>().asDiagonal() * x.block(b)).sum();
        }
    }
    return t;
}

// <x,y> = tau(x* y)
inline Complex l2_inner(const AlgebraElement& x, const AlgebraElement& y) {
    x.require_same_algebra(y);
    Complex t = 0.0;
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (const auto* f = std::get_if<FactorBlock>(&x.algebra()->blocks()[b]))
            t += f->weight * (x.block(b).conjugate().cwiseProduct(y.block(b))).sum();
        else {
            const auto& w = std::get<AbelianBlock>(x.algebra()->blocks()[b]).weights;
            t += (w.cast<Complex>().asDiagonal() *
                  x.block(b).conjugate().cwiseProduct(y.block(b)))
                     .sum();
        }
    }
    return t;
}

// ||x||_2 = tau(x* x)^{1/2}
inline double l2_norm(const AlgebraElement& x) {
    double s = 0.0;
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (const auto* f = std::get_if<FactorBlock>(&x.algebra()->blocks()[b]))
            s += f->weight * x.block(b).squaredNorm();
        else {
            const auto& w = std::get<AbelianBlock>(x.algebra()->blocks()[b]).weights;
            s += (w.array() * x.block(b).array().abs2().col(0)).sum();
        }
    }
    return std::sqrt(s);
}

inline double l2_distance(const AlgebraElement& x, const AlgebraElement& y) {
    return l2_norm(x - y);
}

// operator norm: max over blocks of the largest singular value
inline double op_norm(const AlgebraElement& x) {
    double s = 0.0;
    for (std::size_t b = 0; b < x.block_count(); ++b) {
        if (x.algebra()->is_factor(b)) {
            if (x.block(b).rows() == 1)
                s = std::max(s, std::abs(x.block(b)(0, 0)));
            else
                s = std::max(s, x.block(b).jacobiSvd().singularValues()(0));
        } else {
            s = std::max(s, x.block(b).cwiseAbs().maxCoeff());
        }
    }
    return s;
}

inline AlgebraElement hermitian_part(const AlgebraElement& x) {
    return 0.5 * (x + x.adjoint());
}

// relative Hermitian deviation ||x - x*||_2 / (1 + ||x||_2)
inline double hermitian_defect(const AlgebraElement& x) {
    return l2_norm(x - x.adjoint()) / (1.0 + l2_norm(x));
}

inline bool is_hermitian(const AlgebraElement& x, double rel_tol = tol::hermitian_check) {
    return hermitian_defect(x) <= rel_tol;
}

// ---- random elements (deterministic given the Rng state) ----

inline AlgebraElement random_element(const AlgebraPtr& alg, Rng& rng) {
    AlgebraElement e = AlgebraElement::zero(alg);
    for (std::size_t b = 0; b < alg->block_count(); ++b) {
        Matrix& m = e.block(b);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                m(i, j) = Complex(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
    }
    return e;
}

inline AlgebraElement random_hermitian(const AlgebraPtr& alg, Rng& rng) {
    AlgebraElement e = random_element(alg, rng);
    for (std::size_t b = 0; b < alg->block_count(); ++b)
        if (!alg->is_factor(b)) e.block(b) = e.block(b).real().cast<Complex>();
    return hermitian_part(e);
}

}  // namespace ncmet
