#include <catch_amalgamated.hpp>

#include <cmath>

#include "casimir/geometry.hpp"

using namespace casimir;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double C = units::pi * units::pi * units::hbar_c / 720.0;
const double beta_em = 2.0 / 3.0 * (1.0 - 15.0 / (units::pi * units::pi));

PlatePair pc() { return {PerfectConductor{}, PerfectConductor{}, 0.0}; }

GeometryOptions light() {
    GeometryOptions o;
    o.cache_nodes = 4;
    o.cache_probes = 1;
    return o;
}

}  // namespace

TEST_CASE("profile heights and validation", "[geometry]") {
    const auto s = AxisymmetricProfile::sphere(100.0, 1e4);
    CHECK(s.height(0.0) == 100.0);
    CHECK(s.grad2(0.0) == 0.0);
    const double rho2 = 2500.0;
    CHECK_THAT(s.height(rho2), WithinRel(100.0 + rho2 / 2e4 + 0.25 * rho2 * rho2 / (2.0 * 1e4 * 1e4 * 1e4), 1e-12));
    CHECK_THAT(s.s_at(s.height(rho2)), WithinRel(rho2, 1e-9));
    CHECK(s.cutoff_height() == 100.0 + 20.0 * 100.0);

    CHECK_THROWS_AS((AxisymmetricProfile{0.0, 1e4, 0.0, {}}).validate(), ValidationError);
    CHECK_THROWS_AS((AxisymmetricProfile{10.0, -1.0, 0.0, {}}).validate(), ValidationError);
    HeightField empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);
}

TEST_CASE("PFA energy of a paraboloid above perfect conductors", "[geometry]") {
    for (double d : {50.0, 100.0, 500.0}) {
        const double R = 1e5;
        const auto e = pfa_free_energy(pc(), AxisymmetricProfile::paraboloid(d, R));
        CHECK(e.converged);
        CHECK_THAT(e.value, WithinRel(-units::pi * R * C / (d * d), 1e-4));
    }
}

TEST_CASE("gradient correction of a paraboloid above perfect conductors", "[geometry]") {
    const PlatePair p = pc();
    const KernelProvider prov(p.material1);
    const double d = 100.0, R = 1e5;
    const auto e = gradient_correction(p, prov, AxisymmetricProfile::paraboloid(d, R), nullptr, light());
    CHECK_THAT(e.value, WithinRel(-2.0 * units::pi * beta_em * C / d, 1e-4));
}

TEST_CASE("a flat height field reduces to the plate energy", "[geometry]") {
    const PlatePair p{gold_drude(), gold_drude(), 300.0};
    HeightField f;
    f.height = [](double, double) { return 120.0; };
    f.gradient = [](double, double) { return Vec2{0.0, 0.0}; };
    f.x0 = -50.0, f.x1 = 50.0, f.y0 = 0.0, f.y1 = 30.0;
    const double area = 100.0 * 30.0;
    CHECK_THAT(pfa_free_energy(p, f).value, WithinRel(area * free_energy_pp(p, 120.0).value, 1e-10));
    const KernelProvider prov(p.material1);
    CHECK(gradient_correction(p, prov, f).value == 0.0);

    f.inside = [](double x, double) { return x < 0.0; };
    CHECK_THAT(pfa_free_energy(p, f).value, WithinRel(0.5 * area * free_energy_pp(p, 120.0).value, 1e-2));
}

TEST_CASE("a transparent body has no energy", "[geometry]") {
    const PlatePair p{Constant{1.0}, gold_drude(), 300.0};
    const KernelProvider prov(p.material1);
    const auto prof = AxisymmetricProfile::sphere(50.0, 1e4);
    CHECK(pfa_free_energy(p, prof).value == 0.0);
    CHECK(gradient_correction(p, prov, prof, nullptr, light()).value == 0.0);
}

TEST_CASE("delta cache range", "[geometry]") {
    const PlatePair p = pc();
    const KernelProvider prov(p.material1);
    const DeltaCache cache(prov, p, 50.0, 200.0, light());
    CHECK_THAT(cache(100.0) * 1e6, WithinRel(gradient_coefficients(prov, p, 100.0).delta * 1e6, 1e-6));
    CHECK(cache.probe_error() < 1e-6);
    CHECK_THROWS_AS(cache(40.0), DomainError);
    CHECK_THROWS_AS(cache(250.0), DomainError);
    CHECK_THROWS_AS(DeltaCache(prov, p, 100.0, 50.0), DomainError);
}

TEST_CASE("theta1 and the force gradient for perfect conductors", "[geometry]") {
    const PlatePair p = pc();
    const KernelProvider prov(p.material1);
    const auto t = theta1(p, prov, 100.0, 0.25);
    CHECK(t.converged);
    CHECK(t.theta1 == t.assemble());
    CHECK_THAT(t.theta1, WithinAbs((2.0 * beta_em - 1.0) / 3.0, 1e-3));

    const double d = 100.0;
    const auto far = force_gradient(p, prov, d, d * 1e6, 0.25);
    CHECK_THAT(far.value / far.pfa, WithinAbs(1.0, 1e-6));
    CHECK(far.warnings.empty());

    const auto near = force_gradient(p, prov, d, d * 100.0, 0.25);
    CHECK_THAT(near.value / near.pfa, WithinAbs(1.0 - 0.564 * 0.01, 1e-4));
    CHECK((near.value > 0.0) == (near.pfa > 0.0));

    CHECK(force_gradient(p, prov, d, 5.0 * d, 0.25).warnings.size() == 1);
    CHECK_THROWS_AS(force_gradient(p, prov, d, 0.0, 0.25), DomainError);
}

TEST_CASE("sphere and paraboloid differ only through c1", "[geometry]") {
    const PlatePair p = pc();
    const KernelProvider prov(p.material1);
    const auto a = theta1(p, prov, 100.0, 0.25), b = theta1(p, prov, 100.0, 0.0);
    CHECK_THAT(a.theta1 - b.theta1, WithinRel(a.free_energy / (100.0 * a.force) * -1.0, 1e-9));
}
