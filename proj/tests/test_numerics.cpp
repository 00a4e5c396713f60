#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "casimir/numerics.hpp"

using namespace casimir;
using namespace casimir::numerics;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("adaptive quadrature on finite intervals", "[numerics]") {
    const auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK(r.converged);
    CHECK_THAT(r.value, WithinRel(2.0, 1e-12));

    const auto rev = integrate([](double x) { return x * x; }, 1.0, 0.0);
    CHECK_THAT(rev.value, WithinRel(-1.0 / 3.0, 1e-13));

    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);

    QuadratureSpec tight;
    tight.rel_tol = 1e-12;
    const auto peak = integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, tight);
    CHECK_THAT(peak.value, WithinRel(2.0 * std::atan(1.0 / 1e-2) / 1e-2, 1e-10));
}

TEST_CASE("semi-infinite quadrature", "[numerics]") {
    CHECK_THAT(integrate([](double x) { return std::exp(-x); }, 0.0, infinity).value, WithinRel(1.0, 1e-10));
    CHECK_THAT(integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, infinity).value,
               WithinRel(std::numbers::pi / 2.0, 1e-9));
    QuadratureSpec s;
    s.decay_scale = 50.0;
    CHECK_THAT(integrate([](double x) { return x * std::exp(-x / 50.0); }, 0.0, infinity, s).value,
               WithinRel(2500.0, 1e-9));
}

TEST_CASE("quadrature errors", "[numerics]") {
    CHECK_THROWS_AS(integrate([](double x) { return x > 0.5 ? std::nan("") : x; }, 0.0, 1.0), NumericsError);
    QuadratureSpec bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, bad), DomainError);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, -infinity, 1.0), DomainError);

    QuadratureSpec few;
    few.max_subdivisions = 2;
    few.rel_tol = 1e-14;
    const auto r = integrate([](double x) { return std::sqrt(std::abs(std::sin(40.0 * x))); }, 0.0, 3.0, few);
    CHECK_FALSE(r.converged);
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1", "[numerics]") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int n : {1, 2, 3, 5, 8, 12, 16}) {
        const auto rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK_THAT(wsum, WithinRel(2.0, 1e-14));
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> c(2 * n);
            for (auto& v : c) v = coef(rng);
            double exact = 0.0;
            for (int j = 0; j < 2 * n; j += 2) exact += 2.0 * c[j] / (j + 1);
            double approx = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                double p = 0.0;
                for (int j = 2 * n - 1; j >= 0; --j) p = p * rule.nodes[i] + c[j];
                approx += rule.weights[i] * p;
            }
            CHECK_THAT(approx, WithinAbs(exact, 1e-13));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("composite rules cover their panels", "[numerics]") {
    const auto r = composite_rule({0.0, 1.0, 1.0, 4.0}, 4);
    CHECK(r.nodes.size() == 8);
    double len = 0.0, cube = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        len += r.weights[i];
        cube += r.weights[i] * r.nodes[i] * r.nodes[i] * r.nodes[i];
    }
    CHECK_THAT(len, WithinRel(4.0, 1e-14));
    CHECK_THAT(cube, WithinRel(64.0, 1e-13));
}

TEST_CASE("Richardson-extrapolated second derivatives", "[numerics]") {
    DiffSpec spec;
    spec.step = 0.1;
    spec.levels = 4;
    const auto r = second_derivative_at([](double x) { return std::sin(x); }, 1.0, spec);
    CHECK(r.converged);
    CHECK(r.sequence.size() == 4);
    CHECK_THAT(r.value, WithinAbs(-std::sin(1.0), 1e-10));
    CHECK(r.error < 1e-8);

    // Sequences with an h^1 error term need exponents {1, 2}.
    std::vector<double> seq;
    for (double h = 0.1; seq.size() < 3; h *= 0.5) seq.push_back(3.0 + 0.7 * h - 2.0 * h * h);
    DiffSpec lin;
    lin.exponents = {1.0, 2.0};
    CHECK_THAT(richardson(seq, lin).value, WithinAbs(3.0, 1e-13));

    DiffSpec zero;
    zero.step = 0.0;
    CHECK_THROWS_AS(second_derivative_at([](double x) { return x; }, 0.0, zero), DomainError);
    CHECK_THROWS_AS(second_derivative_at([](double x) { return 1.0 / x; }, 0.0), NumericsError);
}

TEST_CASE("a logarithmically divergent sequence is flagged", "[numerics]") {
    std::vector<double> seq;
    for (double h = 0.1; seq.size() < 4; h *= 0.5) seq.push_back(std::log(1.0 / h));
    DiffSpec spec;
    spec.levels = 4;
    CHECK_FALSE(richardson(seq, spec).converged);
}

TEST_CASE("series summation", "[numerics]") {
    const auto g = sum_until([](long n) { return std::pow(0.5, static_cast<double>(n)); }, 1e-12);
    CHECK(g.converged);
    CHECK_THAT(g.value, WithinRel(2.0, 1e-11));

    const auto zeta = sum_until([](long n) { return 1.0 / std::pow(n + 1.0, 3); }, 1e-10);
    CHECK_THAT(zeta.value, WithinRel(1.2020569031595942, 1e-6));

    SumOptions cap;
    cap.max_terms = 10;
    CHECK_FALSE(sum_until([](long) { return 1.0; }, 1e-6, cap).converged);

    // Three zero terms in a row end the sum.
    const auto z = sum_until([](long) { return 0.0; }, 1e-6);
    CHECK(z.terms_used == 3);
    CHECK(z.value == 0.0);

    CHECK_THROWS_AS(sum_until([](long) { return 1.0; }, 0.0), DomainError);
    CHECK_THROWS_AS(sum_until([](long) { return std::nan(""); }, 1e-6), NumericsError);
}
