#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ncmet/cone.hpp"
#include "ncmet/dynamics.hpp"
#include "ncmet/product.hpp"

using namespace ncmet;

TEST_CASE("svd_log_scaled matches dense SVD at moderate scales") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const int d = 2 + static_cast<int>(rng.below(3));
        Matrix cols(d, d);
        RealVector scale(d);
        for (int j = 0; j < d; ++j) {
            scale[j] = rng.uniform(-2.0, 2.0);
            for (int i = 0; i < d; ++i)
                cols(i, j) = Complex(rng.gaussian(), rng.gaussian());
        }
        Matrix dense = cols * scale.array().exp().matrix().asDiagonal().toDenseMatrix().cast<Complex>();
        Eigen::JacobiSVD<Matrix> ref(dense, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const LogSvd mine = svd_log_scaled(cols, scale);
        for (int i = 0; i < d; ++i)
            CHECK(std::exp(mine.log_sigma[i]) ==
                  Catch::Approx(ref.singularValues()[i]).epsilon(1e-10));
        // reconstruction
        Matrix rec = mine.U * mine.log_sigma.array().exp().matrix().asDiagonal().toDenseMatrix().cast<Complex>() *
                     mine.V.adjoint();
        CHECK((rec - dense).norm() <= 1e-10 * dense.norm());
        CHECK((mine.U.adjoint() * mine.U - Matrix::Identity(d, d)).norm() <= 1e-12);
        CHECK((mine.V.adjoint() * mine.V - Matrix::Identity(d, d)).norm() <= 1e-12);
    }
}

TEST_CASE("svd_log_scaled closed form under extreme grading") {
    // A = [[1, y],[0, 1]] * diag(e^{l1}, e^{l2}) with l1 - l2 far beyond
    // double range; product and sum-of-squares identities pin the answer
    Rng rng(2);
    for (double gap : {10.0, 100.0, 600.0, 4000.0}) {
        const double y = rng.uniform(-2.0, 2.0);
        const double l1 = 0.5 * gap, l2 = -0.5 * gap;
        Matrix cols(2, 2);
        cols << 1.0, y, 0.0, 1.0;
        RealVector scale(2);
        scale << l1, l2;
        const LogSvd s = svd_log_scaled(cols, scale);
        // log sigma_1 = l1 + 0.5 log(1 + (1+y^2) e^{-2 gap} ...) ~ l1
        CHECK(s.log_sigma[0] == Catch::Approx(l1).margin(1e-9 * (1.0 + std::abs(l1))));
        // exact product: sigma_1 sigma_2 = e^{l1 + l2}
        CHECK(s.log_sigma[0] + s.log_sigma[1] ==
              Catch::Approx(l1 + l2).margin(1e-9 * (1.0 + gap)));
    }
    // graded with a nontrivial top 2x2 cluster: compare against the dense
    // answer of the shifted copy (shift = common scalar, exact in log space)
    Matrix cols(3, 3);
    cols << 1.0, 0.3, -0.2, 0.0, 1.0, 0.4, 0.0, 0.0, 1.0;
    RealVector scale(3);
    scale << 800.0, 799.0, -800.0;
    const LogSvd s = svd_log_scaled(cols, scale);
    RealVector shifted = scale.array() - 799.0;
    Matrix dense = cols * shifted.array().exp().matrix().asDiagonal().toDenseMatrix().cast<Complex>();
    Eigen::JacobiSVD<Matrix> ref(dense);
    for (int i = 0; i < 2; ++i)
        CHECK(s.log_sigma[i] - 799.0 ==
              Catch::Approx(std::log(ref.singularValues()[i])).margin(1e-10));
}

namespace {

CocycleSystem random_matrix_cocycle(const AlgebraPtr& alg, std::uint64_t = 0) {
    // two fixed SL-ish matrices over a fair coin
    AlgebraElement a0 = AlgebraElement::zero(alg);
    a0.block(0) << 2.0, 1.0, 1.0, 1.0;
    AlgebraElement a1 = AlgebraElement::zero(alg);
    a1.block(0) << 1.0, 1.0, 1.0, 2.0;
    return CocycleSystem(BaseSystem(BernoulliSystem{{0.5, 0.5}}), alg,
                         IidMatrixGenerator{{a0, a1}});
}

}  // namespace

TEST_CASE("accumulator agrees with direct products at small n") {
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{3, 0.2}, AbelianBlock{(RealVector(2) << 0.2, 0.2).finished()}});
    Rng rng(5);
    // random well-conditioned generator sequence, replayed both ways; the
    // window is kept short enough that the dense reference itself stays valid
    std::vector<AlgebraElement> gens;
    for (int k = 0; k < 12; ++k) {
        AlgebraElement g = random_element(alg, rng);
        while (smallest_singular_value(g) < 0.25 * op_norm(g)) g = random_element(alg, rng);
        gens.push_back(g);
    }
    CocycleAccumulator acc(alg, 8);
    AlgebraElement direct = AlgebraElement::identity(alg);
    for (int k = 0; k < 12; ++k) {
        acc.advance(gens[static_cast<std::size_t>(k)]);
        direct = gens[static_cast<std::size_t>(k)] * direct;
        if (k % 3 != 2) continue;
        // log singular values per factor block
        const LogSvd s = acc.factor_svd(0);
        Eigen::JacobiSVD<Matrix> ref(direct.block(0));
        for (int i = 0; i < 3; ++i)
            CHECK(s.log_sigma[i] ==
                  Catch::Approx(std::log(ref.singularValues()[i])).margin(1e-9));
        // log|c_n| as an element
        const AlgebraElement la = acc.log_abs();
        const AlgebraElement ref_la = log_element(abs_element(direct));
        CHECK(l2_distance(la, ref_la) <= 1e-8 * (1.0 + l2_norm(ref_la)));
        // drift norm
        CHECK(acc.drift_norm() == Catch::Approx(2.0 * l2_norm(ref_la)).margin(1e-8));
        // determinant
        CHECK(acc.fk_log() == Catch::Approx(std::log(fk_determinant(direct))).margin(1e-8));
        // application to a vector
        AlgebraElement xi = random_element(alg, rng);
        CHECK(acc.apply_log_norm(xi) ==
              Catch::Approx(std::log(l2_norm(direct * xi))).margin(1e-8));
    }
}

TEST_CASE("accumulator handles long products without overflow") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(2);
    CocycleSystem sys = random_matrix_cocycle(alg);
    SamplePath path(sys, 99);
    CocycleAccumulator acc(alg);
    for (int k = 0; k < 20000; ++k) acc.advance(path.next());
    const LogSvd s = acc.factor_svd(0);
    // both matrices have determinant 1: log sigma_1 + log sigma_2 = 0 exactly
    CHECK(std::abs(s.log_sigma[0] + s.log_sigma[1]) <= 1e-6 * s.log_sigma[0]);
    CHECK(s.log_sigma[0] > 0.5 * 20000.0 * 0.5);  // strongly hyperbolic product
    CHECK(std::isfinite(acc.drift_norm()));
    CHECK(std::isfinite(acc.apply_log_norm(AlgebraElement::identity(alg))));
}

TEST_CASE("constant diagonal products are exact in log space") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(2);
    AlgebraElement tmat = AlgebraElement::zero(alg);
    tmat.block(0)(0, 0) = 2.0;
    tmat.block(0)(1, 1) = 0.5;
    CocycleAccumulator acc(alg);
    const long n = 2000;
    for (long k = 0; k < n; ++k) acc.advance(tmat);
    const LogSvd s = acc.factor_svd(0);
    CHECK(s.log_sigma[0] == Catch::Approx(n * std::log(2.0)).epsilon(1e-12));
    CHECK(s.log_sigma[1] == Catch::Approx(-n * std::log(2.0)).epsilon(1e-12));

    // dp_rate against the exact limit T is zero at every n
    const HermitianEig ref = hermitian_eig(log_element(tmat));
    CHECK(acc.dp_rate(ref) <= 1e-12);
    CHECK(acc.l2_log_rate(log_element(tmat)) <= 1e-12);
}

TEST_CASE("dp_rate dense evaluation matches a direct cone computation") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(3);
    Rng rng(7);
    CocycleAccumulator acc(alg, 4);
    AlgebraElement direct = AlgebraElement::identity(alg);
    for (int k = 0; k < 8; ++k) {
        AlgebraElement g = random_element(alg, rng);
        while (smallest_singular_value(g) < 0.3 * op_norm(g)) g = random_element(alg, rng);
        acc.advance(g);
        direct = g * direct;
    }
    const AlgebraElement lam = 0.1 * random_hermitian(alg, rng);
    const HermitianEig ref = hermitian_eig(lam);
    const PositivePoint abs_c = PositivePoint::from_element(abs_element(direct));
    const PositivePoint lam_n = exp_point(8.0 * lam);
    CHECK(acc.dp_rate(ref) == Catch::Approx(dP(abs_c, lam_n) / 8.0).margin(1e-9));
}

TEST_CASE("abelian accumulator is exact") {
    RealVector w(3);
    w << 0.3, 0.3, 0.4;
    AlgebraPtr alg = TracialAlgebra::abelian(w);
    CocycleAccumulator acc(alg);
    AlgebraElement g = AlgebraElement::zero(alg);
    g.block(0)(0, 0) = 2.0;
    g.block(0)(1, 0) = Complex(0.0, 0.5);  // modulus 1/2, phase i
    g.block(0)(2, 0) = 1.0;
    for (int k = 0; k < 1000; ++k) acc.advance(g);
    const AlgebraElement la = acc.log_abs();
    CHECK(la.block(0)(0, 0).real() == Catch::Approx(1000.0 * std::log(2.0)));
    CHECK(la.block(0)(1, 0).real() == Catch::Approx(-1000.0 * std::log(2.0)));
    CHECK(la.block(0)(2, 0).real() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("singular generators are rejected") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(2);
    CocycleAccumulator acc(alg);
    AlgebraElement sing = AlgebraElement::zero(alg);
    sing.block(0)(0, 0) = 1.0;
    CHECK_THROWS_AS(acc.advance(sing), ConditioningError);
}
