#pragma once

// Base measure-preserving systems (odometer, Bernoulli shift, circle
// rotation) and operator-valued cocycles over them: c(0,x) = id,
// c(n+m,x) = c(n, f^m x) c(m,x).  Includes the bounded abelian cocycle over
// the binary odometer whose limit operator is the constant sqrt(2) while
// raw vector growth along witnessed events reaches 2.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ncmet/algebra.hpp"
#include "ncmet/errors.hpp"
#include "ncmet/rng.hpp"
#include "ncmet/spectral.hpp"

namespace ncmet {

// ---------------------------------------------------------------------------
// Base points and systems

struct OdometerState {
    std::vector<std::uint8_t> bits;  // x_0 .. x_{B-1}
};

struct BernoulliState {
    std::uint64_t stream_seed = 0;  // identifies the i.i.d. symbol stream
    std::uint64_t pos = 0;          // shift position
};

struct RotationState {
    double angle = 0.0;  // in [0,1)
};

using BasePoint = std::variant<OdometerState, BernoulliState, RotationState>;

struct OdometerSystem {
    int bits = 16;
};

struct BernoulliSystem {
    std::vector<double> probabilities;  // symbol distribution, sums to 1
};

struct RotationSystem {
    double alpha = 0.6180339887498948482;  // golden-ratio surrogate
};

class BaseSystem {
  public:
    using Spec = std::variant<OdometerSystem, BernoulliSystem, RotationSystem>;

    explicit BaseSystem(Spec spec) : spec_(std::move(spec)) {
        if (const auto* o = std::get_if<OdometerSystem>(&spec_)) {
            if (o->bits < 1 || o->bits > 4096) throw ConfigError("odometer bits out of range");
        } else if (const auto* be = std::get_if<BernoulliSystem>(&spec_)) {
            if (be->probabilities.empty()) throw ConfigError("bernoulli needs probabilities");
            double s = 0.0;
            for (double p : be->probabilities) {
                if (!(p > 0.0)) throw ConfigError("bernoulli probabilities must be > 0");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-12) throw ConfigError("bernoulli probabilities must sum to 1");
        } else {
            const auto& r = std::get<RotationSystem>(spec_);
            if (!(r.alpha > 0.0 && r.alpha < 1.0)) throw ConfigError("rotation alpha in (0,1)");
        }
    }

    const Spec& spec() const { return spec_; }
    bool invertible() const { return !std::holds_alternative<BernoulliSystem>(spec_); }

    BasePoint step(const BasePoint& x) const {
        if (const auto* o = std::get_if<OdometerState>(&x)) {
            OdometerState y = *o;
            for (auto& b : y.bits) {
                if (b == 0) {
                    b = 1;
                    return y;
                }
                b = 0;  // carry
            }
            return y;  // wrap to all-zeros
        }
        if (const auto* s = std::get_if<BernoulliState>(&x)) {
            BernoulliState y = *s;
            ++y.pos;
            return y;
        }
        const auto& r = std::get<RotationState>(x);
        const double a = std::get<RotationSystem>(spec_).alpha;
        double t = r.angle + a;
        if (t >= 1.0) t -= 1.0;
        return RotationState{t};
    }

    BasePoint unstep(const BasePoint& x) const {
        if (!invertible()) throw DomainError("base system is not invertible");
        if (const auto* o = std::get_if<OdometerState>(&x)) {
            OdometerState y = *o;
            for (auto& b : y.bits) {
                if (b == 1) {
                    b = 0;
                    return y;
                }
                b = 1;  // borrow
            }
            return y;
        }
        const auto& r = std::get<RotationState>(x);
        const double a = std::get<RotationSystem>(spec_).alpha;
        double t = r.angle - a;
        if (t < 0.0) t += 1.0;
        return RotationState{t};
    }

    BasePoint iterate(const BasePoint& x, long k) const {
        BasePoint y = x;
        for (; k > 0; --k) y = step(y);
        for (; k < 0; ++k) y = unstep(y);
        return y;
    }

    // initial point drawn from the invariant measure, deterministic per seed
    BasePoint initial_point(std::uint64_t seed) const {
        if (const auto* o = std::get_if<OdometerSystem>(&spec_)) {
            Rng rng(splitmix64(seed ^ 0x6f6d657465726f64ull));
            OdometerState st;
            st.bits.resize(static_cast<std::size_t>(o->bits));
            for (auto& b : st.bits) b = rng.coin() ? 1 : 0;
            return st;
        }
        if (std::holds_alternative<BernoulliSystem>(spec_))
            return BernoulliState{splitmix64(seed ^ 0x6265726e73686674ull), 0};
        Rng rng(splitmix64(seed ^ 0x726f746174696f6eull));
        return RotationState{rng.uniform()};
    }

    // current symbol of a Bernoulli point
    int symbol(const BernoulliState& s) const {
        const auto& probs = std::get<BernoulliSystem>(spec_).probabilities;
        const double u =
            static_cast<double>(splitmix64(s.stream_seed ^
                                           (s.pos * 0x9e3779b97f4a7c15ull + 0x12345ull)) >>
                                11) *
            0x1.0p-53;
        double acc = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    // Birkhoff average of a test observable (measure-preservation diagnostic)
    double birkhoff_average(const std::function<double(const BasePoint&)>& f, BasePoint x,
                            long n) const {
        double s = 0.0;
        for (long k = 0; k < n; ++k) {
            s += f(x);
            x = step(x);
        }
        return s / static_cast<double>(n);
    }

  private:
    Spec spec_;
};

// ---------------------------------------------------------------------------
// Generators and cocycle systems

struct ConstantGenerator {
    AlgebraElement value;
};

struct IidMatrixGenerator {
    std::vector<AlgebraElement> values;  // indexed by the Bernoulli symbol
};

struct OdometerCounterexampleGenerator {
    int cells = 16;             // partition size M; cell j (1-based) reads bit j
    double weight_exponent = 2; // nu(Y_m) proportional to m^{-exponent}
};

struct DiagonalRotationGenerator {
    // value_j(angle) = exp(m_j + a_j cos(2 pi (angle + phi_j)))
    RealVector amplitudes;
    RealVector phases;
    RealVector log_means;  // empty = zeros
};

using GeneratorSpec = std::variant<ConstantGenerator, IidMatrixGenerator,
                                   OdometerCounterexampleGenerator, DiagonalRotationGenerator>;

class CocycleSystem {
  public:
    CocycleSystem(BaseSystem base, AlgebraPtr algebra, GeneratorSpec generator)
        : base_(std::move(base)), algebra_(std::move(algebra)), generator_(std::move(generator)) {
        validate();
    }

    const BaseSystem& base() const { return base_; }
    const AlgebraPtr& algebra() const { return algebra_; }
    const GeneratorSpec& generator_spec() const { return generator_; }

    std::optional<double> moment_bound;            // estimate of int ||log|c(1,x)|||_2 dmu
    std::optional<AlgebraElement> known_limit;     // exact limit operator when known

    // c(1, x)
    AlgebraElement generator(const BasePoint& x) const {
        if (const auto* g = std::get_if<ConstantGenerator>(&generator_)) return g->value;
        if (const auto* g = std::get_if<IidMatrixGenerator>(&generator_)) {
            const auto& st = std::get<BernoulliState>(x);
            return g->values[static_cast<std::size_t>(base_.symbol(st))];
        }
        if (const auto* g = std::get_if<OdometerCounterexampleGenerator>(&generator_)) {
            const auto& st = std::get<OdometerState>(x);
            AlgebraElement e = AlgebraElement::zero(algebra_);
            Matrix& v = e.block(0);
            for (int j = 0; j < g->cells; ++j)
                v(j, 0) = st.bits[static_cast<std::size_t>(j + 1)] == 0 ? 1.0 : 2.0;
            return e;
        }
        const auto& g = std::get<DiagonalRotationGenerator>(generator_);
        const auto& st = std::get<RotationState>(x);
        AlgebraElement e = AlgebraElement::zero(algebra_);
        Matrix& v = e.block(0);
        for (Eigen::Index j = 0; j < g.amplitudes.size(); ++j) {
            const double mean = g.log_means.size() > 0 ? g.log_means[j] : 0.0;
            v(j, 0) = std::exp(mean + g.amplitudes[j] *
                                          std::cos(6.283185307179586 * (st.angle + g.phases[j])));
        }
        return e;
    }

    // crude Monte Carlo estimate of the first-moment integral
    double estimate_moment_bound(int samples, std::uint64_t seed) const {
        double s = 0.0;
        for (int k = 0; k < samples; ++k) {
            BasePoint x = base_.initial_point(splitmix64(seed + static_cast<std::uint64_t>(k)));
            const AlgebraElement g = generator(x);
            const AlgebraElement la = functional_calculus(
                g.adjoint() * g, [](double t) { return 0.5 * std::log(t); },
                [](double t) { return t > 0.0; });
            s += l2_norm(la);
        }
        return s / samples;
    }

  private:
    void validate() const {
        if (const auto* g = std::get_if<IidMatrixGenerator>(&generator_)) {
            if (!std::holds_alternative<BernoulliSystem>(base_.spec()))
                throw ConfigError("iid generator needs a bernoulli base");
            const auto& probs = std::get<BernoulliSystem>(base_.spec()).probabilities;
            if (g->values.size() != probs.size())
                throw ConfigError("iid generator: one value per symbol required");
            for (const auto& v : g->values) {
                v.require_same_algebra(AlgebraElement::zero(algebra_));
                if (!is_invertible(v)) throw ConfigError("iid generator value is singular");
            }
        } else if (const auto* g = std::get_if<OdometerCounterexampleGenerator>(&generator_)) {
            const auto* od = std::get_if<OdometerSystem>(&base_.spec());
            if (!od) throw ConfigError("counterexample generator needs an odometer base");
            if (od->bits < g->cells + 12)
                throw ConfigError("odometer too small: need bits >= cells + 12");
            if (algebra_->block_count() != 1 || algebra_->is_factor(0))
                throw ConfigError("counterexample generator needs one abelian block");
            auto [m, one] = algebra_->block_shape(0);
            if (m != g->cells) throw ConfigError("abelian block size must equal cell count");
        } else if (const auto* g = std::get_if<DiagonalRotationGenerator>(&generator_)) {
            if (!std::holds_alternative<RotationSystem>(base_.spec()))
                throw ConfigError("diagonal_function generator needs a rotation base");
            auto [m, one] = algebra_->block_shape(0);
            if (algebra_->block_count() != 1 || algebra_->is_factor(0) ||
                g->amplitudes.size() != m || g->phases.size() != m ||
                (g->log_means.size() != 0 && g->log_means.size() != m))
                throw ConfigError("diagonal_function generator shape mismatch");
        } else {
            const auto& cg = std::get<ConstantGenerator>(generator_);
            cg.value.require_same_algebra(AlgebraElement::zero(algebra_));
            if (!is_invertible(cg.value)) throw ConfigError("constant generator is singular");
        }
    }

    BaseSystem base_;
    AlgebraPtr algebra_;
    GeneratorSpec generator_;
};

// c(n, x) as a plain element; for n < 0 uses c(-n, f^n x)^{-1} and requires an
// invertible base.  Intended for moderate |n|; long products go through
// CocycleAccumulator.
inline AlgebraElement evaluate_cocycle(const CocycleSystem& sys, long n, const BasePoint& x) {
    if (n == 0) return AlgebraElement::identity(sys.algebra());
    if (n > 0) {
        AlgebraElement p = AlgebraElement::identity(sys.algebra());
        BasePoint y = x;
        for (long k = 0; k < n; ++k) {
            p = sys.generator(y) * p;
            y = sys.base().step(y);
        }
        return p;
    }
    if (!sys.base().invertible())
        throw DomainError("negative cocycle times need an invertible base");
    const BasePoint y = sys.base().iterate(x, n);
    return inverse(evaluate_cocycle(sys, -n, y));
}

// The bounded abelian counterexample cocycle over the B-bit odometer:
// c(1,x)(y) = 1 on cells Y_m with x_m = 0 and 2 elsewhere, nu(Y_m)
// proportional to m^{-weight_exponent} (normalized); its limit operator is the
// constant sqrt(2).
inline CocycleSystem build_counterexample_cocycle(int bits, int cells,
                                                  double weight_exponent = 2.0) {
    if (cells < 1) throw ConfigError("need at least one cell");
    if (bits < cells + 12) throw ConfigError("odometer too small: need bits >= cells + 12");
    RealVector w(cells);
    for (int j = 0; j < cells; ++j) w[j] = std::pow(static_cast<double>(j + 1), -weight_exponent);
    w /= w.sum();
    AlgebraPtr alg = TracialAlgebra::abelian(w);
    CocycleSystem sys(BaseSystem(OdometerSystem{bits}), alg,
                      OdometerCounterexampleGenerator{cells, weight_exponent});
    sys.known_limit = AlgebraElement::scalar(alg, std::sqrt(2.0));
    return sys;
}

// deterministic path iterator: yields (x_k, c(1, x_k)) pairs
class SamplePath {
  public:
    SamplePath(const CocycleSystem& sys, std::uint64_t seed)
        : sys_(&sys), current_(sys.base().initial_point(seed)) {}

    const BasePoint& point() const { return current_; }
    AlgebraElement generator_value() const { return sys_->generator(current_); }

    // returns c(1, x_k) and moves to x_{k+1}
    AlgebraElement next() {
        AlgebraElement g = sys_->generator(current_);
        current_ = sys_->base().step(current_);
        return g;
    }

  private:
    const CocycleSystem* sys_;
    BasePoint current_;
};

}  // namespace ncmet
