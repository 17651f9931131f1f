#include <catch2/catch_amalgamated.hpp>

#include "ncmet/algebra.hpp"
#include "ncmet/spectral.hpp"

using namespace ncmet;

namespace {

AlgebraElement diag2(const AlgebraPtr& alg, double a, double b) {
    AlgebraElement x = AlgebraElement::zero(alg);
    x.block(0)(0, 0) = a;
    x.block(0)(1, 1) = b;
    return x;
}

}  // namespace

TEST_CASE("trace on matrix and abelian blocks") {
    AlgebraPtr m2 = TracialAlgebra::matrix(2, 0.5);
    CHECK(trace(AlgebraElement::identity(m2)).real() == Catch::Approx(1.0));
    CHECK(trace(diag2(m2, 2.0, 0.5)).real() == Catch::Approx(1.25));

    RealVector w(2);
    w << 0.5, 0.5;
    AlgebraPtr ab = TracialAlgebra::abelian(w);
    AlgebraElement phi = AlgebraElement::zero(ab);
    phi.block(0)(0, 0) = 4.0;
    phi.block(0)(1, 0) = 1.0;
    CHECK(trace(phi).real() == Catch::Approx(2.5));
}

TEST_CASE("trace is linear and positive on x*x") {
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{3, 0.2}, AbelianBlock{(RealVector(2) << 0.3, 0.7).finished()}});
    Rng rng(42);
    for (int t = 0; t < 50; ++t) {
        AlgebraElement x = random_element(alg, rng);
        AlgebraElement y = random_element(alg, rng);
        const Complex lhs = trace(x + y);
        const Complex rhs = trace(x) + trace(y);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
        CHECK(trace(x.adjoint() * x).real() >= 0.0);
        CHECK(std::abs(trace(x.adjoint() * x).imag()) <= 1e-12);
    }
}

TEST_CASE("trace property tau(xy) = tau(yx) on random pairs") {
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{4, 0.25}, FactorBlock{2, 1.5},
         AbelianBlock{(RealVector(3) << 0.2, 0.5, 1.1).finished()}});
    Rng rng(7);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        AlgebraElement x = random_element(alg, rng);
        AlgebraElement y = random_element(alg, rng);
        const Complex d = trace(x * y) - trace(y * x);
        worst = std::max(worst, std::abs(d) / (1.0 + std::abs(trace(x * y))));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("l2 norm identities") {
    AlgebraPtr m2 = TracialAlgebra::matrix(2, 0.5);
    CHECK(l2_norm(AlgebraElement::identity(m2)) ==
          Catch::Approx(std::sqrt(m2->trace_of_identity())));
    CHECK(l2_norm(diag2(m2, 1.0, -1.0)) == Catch::Approx(1.0));

    // eigenvalue route vs entrywise sums
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{3, 0.4}, AbelianBlock{(RealVector(2) << 0.25, 0.75).finished()}});
    Rng rng(3);
    for (int t = 0; t < 25; ++t) {
        AlgebraElement x = random_element(alg, rng);
        const SpectralMeasure mu = spectral_measure(x.adjoint() * x);
        const double via_eigs = std::sqrt(mu.integrate([](double s) { return s; }));
        CHECK(std::abs(via_eigs - l2_norm(x)) <= 1e-10 * (1.0 + l2_norm(x)));
    }
}

TEST_CASE("l2 inner is sesquilinear and positive definite") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(3);
    Rng rng(11);
    AlgebraElement x = random_element(alg, rng);
    AlgebraElement y = random_element(alg, rng);
    const Complex s(0.3, -1.2);
    CHECK(std::abs(l2_inner(x, s * y) - s * l2_inner(x, y)) <= 1e-12);
    CHECK(std::abs(l2_inner(s * x, y) - std::conj(s) * l2_inner(x, y)) <= 1e-12);
    CHECK(l2_norm(x) > 0.0);
    CHECK(l2_norm(AlgebraElement::zero(alg)) == 0.0);
}

TEST_CASE("operator norm") {
    AlgebraPtr m2 = TracialAlgebra::matrix(2, 0.5);
    CHECK(op_norm(AlgebraElement::identity(m2)) == Catch::Approx(1.0));
    CHECK(op_norm(diag2(m2, 2.0, 0.5)) == Catch::Approx(2.0));

    AlgebraPtr m3 = TracialAlgebra::normalized_matrix(3);
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        AlgebraElement x = random_element(m3, rng);
        const double largest_of_abs = spectral_measure(abs_element(x)).max_location();
        CHECK(op_norm(x) == Catch::Approx(largest_of_abs).margin(1e-10));
        // ||xy||_2 <= ||x||_inf ||y||_2
        AlgebraElement y = random_element(m3, rng);
        CHECK(l2_norm(x * y) <= op_norm(x) * l2_norm(y) + 1e-10);
    }
}

TEST_CASE("structural errors") {
    AlgebraPtr m2 = TracialAlgebra::matrix(2, 0.5);
    AlgebraPtr m3 = TracialAlgebra::normalized_matrix(3);
    AlgebraElement x = AlgebraElement::identity(m2);
    AlgebraElement y = AlgebraElement::identity(m3);
    CHECK_THROWS_AS(x + y, StructureError);
    CHECK_THROWS_AS(trace(AlgebraElement()), std::exception);
    CHECK_THROWS_AS(AlgebraElement(m2, {Matrix::Zero(3, 3)}), StructureError);
}

TEST_CASE("algebra validation") {
    CHECK_THROWS_AS(TracialAlgebra::matrix(2, 0.0), ConfigError);
    CHECK_THROWS_AS(TracialAlgebra::matrix(0, 1.0), ConfigError);
    RealVector bad(2);
    bad << 0.5, -0.5;
    CHECK_THROWS_AS(TracialAlgebra::abelian(bad), ConfigError);
    CHECK_THROWS_AS(TracialAlgebra::make({}), ConfigError);

    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{2, 0.25}, AbelianBlock{(RealVector(2) << 0.25, 0.25).finished()}});
    CHECK(alg->trace_of_identity() == Catch::Approx(1.0));
}
