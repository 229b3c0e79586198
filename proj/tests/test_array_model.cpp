#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "trisynth/array_model.hpp"
#include "test_rng.hpp"

using namespace trisynth;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {
constexpr double kDeg = pi / 180.0;
}

TEST_SUITE_BEGIN("array_model");

TEST_CASE("domain types validate their ranges") {
    CHECK_THROWS_AS(Direction(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Direction(pi / 2 + 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Direction(0.5, pi), std::invalid_argument);
    CHECK_THROWS_AS(Polarization(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Polarization(0.5, pi), std::invalid_argument);       // eta < pi
    CHECK_NOTHROW(Polarization(0.5, -pi));                               // -pi allowed
    CHECK_THROWS_AS(CandidateGrid(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(CandidateGrid(3, 0.0), std::invalid_argument);

    const CandidateGrid grid(5, 0.25);
    CHECK(grid.positions().front() == 0.0);
    CHECK(grid.aperture() == doctest::Approx(1.0));
    for (int m = 1; m < grid.num_locations(); ++m) {
        CHECK(grid.positions()[m] > grid.positions()[m - 1]);
    }
}

TEST_CASE("spatial steering matches hand-evaluated phases") {
    SUBCASE("theta = 0 gives all ones") {
        const auto s = spatial_steering(Direction(0.0, 0.3), CandidateGrid(4, 0.5));
        for (int m = 0; m < 4; ++m) {
            CHECK(std::abs(s[m] - cd(1.0, 0.0)) < 1e-15);
        }
    }
    SUBCASE("endfire half-wavelength pair alternates sign") {
        const auto s = spatial_steering(Direction(pi / 2, pi / 2), CandidateGrid(2, 0.5));
        CHECK(std::abs(s[0] - cd(1, 0)) < 1e-15);
        CHECK(std::abs(s[1] - cd(-1, 0)) < 1e-12);
    }
    SUBCASE("30 degrees, three elements") {
        const auto s = spatial_steering(Direction(pi / 6, pi / 2), CandidateGrid(3, 0.5));
        CHECK(std::abs(s[0] - cd(1, 0)) < 1e-15);
        CHECK(std::abs(s[1] - cd(0, -1)) < 1e-12);
        CHECK(std::abs(s[2] - cd(-1, 0)) < 1e-12);
    }
}

TEST_CASE("spatial steering properties") {
    TestRng rng(101);
    SUBCASE("unit modulus") {
        for (int trial = 0; trial < 50; ++trial) {
            const Direction dir(rng.uniform(0, pi / 2), rng.uniform(-pi / 2, pi / 2));
            const auto s = spatial_steering(dir, CandidateGrid(8, rng.uniform(0.05, 1.0)));
            for (int m = 0; m < s.size(); ++m) {
                CHECK(std::abs(std::abs(s[m]) - 1.0) <= 1e-12);
            }
        }
    }
    SUBCASE("phase decreases along the array when sin(theta)sin(phi) > 0") {
        const Direction dir(0.4, 0.7);
        const CandidateGrid grid(6, 0.3);
        const auto s = spatial_steering(dir, grid);
        for (int m = 0; m + 1 < s.size(); ++m) {
            const double increment = std::arg(s[m + 1] / s[m]);
            CHECK(increment < 0.0);
        }
    }
}

TEST_CASE("polarization vector matches the closed forms") {
    SUBCASE("gamma = 90deg, eta = 0, theta = 0, phi = 90deg") {
        const auto sp = polarization_vector(Direction(0.0, pi / 2), Polarization(pi / 2, 0.0));
        CHECK(std::abs(sp[0] - cd(0, 0)) < 1e-15);
        CHECK(std::abs(sp[1] - cd(1, 0)) < 1e-15);
        CHECK(std::abs(sp[2] - cd(0, 0)) < 1e-15);
    }
    SUBCASE("gamma = 0 leaves only the cos(gamma) terms") {
        TestRng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const Direction dir(rng.uniform(0, pi / 2), rng.uniform(-pi / 2, pi / 2));
            const auto sp = polarization_vector(dir, Polarization(0.0, rng.uniform(-pi, pi)));
            CHECK(std::abs(sp[0] - cd(-std::sin(dir.phi), 0)) < 1e-15);
            CHECK(std::abs(sp[1] - cd(-std::cos(dir.phi), 0)) < 1e-15);
            CHECK(std::abs(sp[2]) < 1e-15);
        }
    }
    SUBCASE("the design polarization point, evaluated independently") {
        const double gamma = 55.0 * kDeg, eta = 100.0 * kDeg;
        const auto sp =
            polarization_vector(Direction(0.0, pi / 2), Polarization(gamma, eta));
        // x: sin(g)*cos(0)*cos(90deg)*e^{j eta} - cos(g)*sin(90deg) = -cos(g)
        CHECK(std::abs(sp[0] - cd(-std::cos(gamma), 0)) < 1e-15);
        // y: sin(g)*e^{j eta}
        const cd expected_y = std::sin(gamma) * std::exp(cd(0, eta));
        CHECK(std::abs(sp[1] - expected_y) < 1e-15);
        CHECK(std::abs(sp[1] - std::polar(0.8191520442, 100.0 * kDeg)) < 1e-9);
        CHECK(std::abs(sp[2]) < 1e-15);
    }
}

TEST_CASE("full steering interleaves and factorizes") {
    SUBCASE("theta = 0: every triple equals the polarization vector") {
        const Direction dir(0.0, 0.2);
        const Polarization pol(0.3, 0.4);
        const auto s = full_steering(dir, pol, CandidateGrid(5, 0.5));
        const auto sp = polarization_vector(dir, pol);
        for (int m = 0; m < 5; ++m) {
            for (int axis = 0; axis < 3; ++axis) {
                CHECK(std::abs(s[3 * m + axis] - sp[axis]) < 1e-15);
            }
        }
    }
    SUBCASE("endfire M=2 z-polarized example") {
        const auto s = full_steering(Direction(pi / 2, pi / 2), Polarization(pi / 2, 0.0),
                                     CandidateGrid(2, 0.5));
        const double expected[6] = {0, 0, -1, 0, 0, 1};
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(s[i] - cd(expected[i], 0)) < 1e-12);
        }
    }
    SUBCASE("deinterleaving by axis recovers s_p times s_s") {
        TestRng rng(42);
        for (int trial = 0; trial < 30; ++trial) {
            const Direction dir(rng.uniform(0, pi / 2), rng.uniform(-pi / 2, pi / 2));
            const Polarization pol(rng.uniform(0, pi / 2), rng.uniform(-pi, pi));
            const CandidateGrid grid(6, rng.uniform(0.1, 0.8));
            const auto s = full_steering(dir, pol, grid);
            const auto sp = polarization_vector(dir, pol);
            const auto ss = spatial_steering(dir, grid);
            for (int m = 0; m < grid.num_locations(); ++m) {
                for (int axis = 0; axis < 3; ++axis) {
                    CHECK(std::abs(s[3 * m + axis] - sp[axis] * ss[m]) <=
                          1e-12 * std::max(1.0, std::abs(sp[axis])));
                }
            }
        }
    }
}

TEST_CASE("array response") {
    TestRng rng(55);
    const Direction dir(0.5, 0.6);
    const Polarization pol(0.7, -0.8);
    const CandidateGrid grid(2, 0.5);
    const auto s = full_steering(dir, pol, grid);

    SUBCASE("normalized matched weights give unit response") {
        // response = sum s_i conj(w_i), so w = s / ||s||^2 makes it exactly 1
        const Eigen::VectorXcd w = s / s.squaredNorm();
        CHECK(std::abs(array_response(w, s) - cd(1, 0)) < 1e-14);
    }
    SUBCASE("zero weights give zero") {
        CHECK(array_response(Eigen::VectorXcd::Zero(s.size()), s) == cd(0, 0));
    }
    SUBCASE("matches scalar-by-scalar accumulation") {
        Eigen::VectorXcd w(s.size());
        for (int i = 0; i < w.size(); ++i) w[i] = cd(rng.normal(), rng.normal()) * 0.1;
        cd acc(0, 0);
        for (int i = 0; i < w.size(); ++i) {
            const double re = s[i].real() * w[i].real() + s[i].imag() * w[i].imag();
            const double im = s[i].imag() * w[i].real() - s[i].real() * w[i].imag();
            acc += cd(re, im);
        }
        CHECK(std::abs(array_response(w, s) - acc) < 1e-14);
    }
    SUBCASE("linear in steering, conjugate-linear in weights") {
        Eigen::VectorXcd w(s.size()), s2(s.size());
        for (int i = 0; i < w.size(); ++i) {
            w[i] = cd(rng.normal(), rng.normal());
            s2[i] = cd(rng.normal(), rng.normal());
        }
        const cd a(1.3, -0.4);
        CHECK(std::abs(array_response(w, a * s + s2) -
                       (a * array_response(w, s) + array_response(w, s2))) < 1e-12);
        CHECK(std::abs(array_response((a * w).eval(), s) - std::conj(a) * array_response(w, s)) <
              1e-12);
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(array_response(Eigen::VectorXcd::Zero(4), s), std::invalid_argument);
    }
}

TEST_CASE("weight vector flattening round-trips") {
    TestRng rng(9);
    WeightVector w(4);
    for (int m = 0; m < 4; ++m) {
        w.triples[m] = Eigen::Vector3cd(cd(rng.normal(), rng.normal()),
                                        cd(rng.normal(), rng.normal()),
                                        cd(rng.normal(), rng.normal()));
    }
    const auto flat = w.flatten();
    CHECK(flat.size() == 12);
    CHECK(flat[3] == w.triples[1][0]);
    const auto back = WeightVector::from_flat(flat);
    for (int m = 0; m < 4; ++m) {
        CHECK(back.triples[m] == w.triples[m]);
    }
}

TEST_SUITE_END();
