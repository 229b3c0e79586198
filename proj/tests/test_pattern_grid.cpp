#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trisynth/pattern_grid.hpp"
#include "test_rng.hpp"

using namespace trisynth;
using std::numbers::pi;

namespace {
constexpr double kDeg = pi / 180.0;

DesignSpec broadside_spec(int m, double aperture = 10.0) {
    return DesignSpec{Direction(0.0, pi / 2),
                      Polarization(55.0 * kDeg, 100.0 * kDeg),
                      {{+1, 10.0, 90.0}, {-1, 10.0, 90.0}},
                      0.0,
                      1.0,
                      0.5,
                      CandidateGrid(m, aperture / (m - 1))};
}

DesignSpec offbroadside_spec(double theta_ml_deg, int m) {
    return DesignSpec{Direction(theta_ml_deg * kDeg, pi / 2),
                      Polarization(55.0 * kDeg, 100.0 * kDeg),
                      {{+1, 0.0, 90.0}, {-1, 0.0, 90.0}},
                      10.0,
                      1.0,
                      0.5,
                      CandidateGrid(m, 10.0 / (m - 1))};
}
}  // namespace

TEST_SUITE_BEGIN("pattern_grid");

TEST_CASE("broadside sampling counts") {
    const SampledPattern pattern = build_samples(broadside_spec(101));
    CHECK(pattern.count() == 163);  // 1 mainlobe + 81 per side
    CHECK(pattern.samples[0].signed_theta_deg == 0.0);
    CHECK(pattern.reference[0] == std::complex<double>(1.0, 0.0));
    int nonzero = 0;
    for (int l = 0; l < pattern.count(); ++l) {
        if (pattern.reference[l] != std::complex<double>(0.0, 0.0)) ++nonzero;
    }
    CHECK(nonzero == 1);

    int positive = 0, negative = 0;
    for (int l = 1; l < pattern.count(); ++l) {
        const double s = pattern.samples[l].signed_theta_deg;
        CHECK(std::abs(s) >= 10.0);
        CHECK(std::abs(s) <= 90.0);
        (s > 0 ? positive : negative)++;
    }
    CHECK(positive == 81);
    CHECK(negative == 81);
}

TEST_CASE("single-sample spec gives L = 2") {
    DesignSpec spec = broadside_spec(3, 1.0);
    spec.sidelobe_regions = {{+1, 50.0, 50.0}};
    const SampledPattern pattern = build_samples(spec);
    CHECK(pattern.count() == 2);
}

TEST_CASE("off-broadside transition region is unsampled") {
    const SampledPattern pattern = build_samples(offbroadside_spec(10.0, 11));
    bool saw_zero = false, saw_twenty = false;
    for (int l = 1; l < pattern.count(); ++l) {
        const double s = pattern.samples[l].signed_theta_deg;
        CHECK(!(s > 0.0 && s < 20.0));  // open window (0, 20) excluding mainlobe
        if (s == 0.0) saw_zero = true;
        if (s == 20.0) saw_twenty = true;
    }
    CHECK(saw_zero);
    CHECK(saw_twenty);
    CHECK(pattern.samples[0].signed_theta_deg == 10.0);

    // signed theta = 0 appears exactly once even though both half planes
    // nominally cover it
    int zeros = 0;
    for (const PatternSample& s : pattern.samples) {
        if (s.signed_theta_deg == 0.0) ++zeros;
    }
    CHECK(zeros == 1);
}

TEST_CASE("degenerate region sets are rejected") {
    DesignSpec spec = broadside_spec(3, 1.0);
    spec.sidelobe_regions = {};
    CHECK_THROWS_AS(build_samples(spec), std::invalid_argument);

    DesignSpec all_transition = offbroadside_spec(45.0, 3);
    all_transition.transition_halfwidth_deg = 200.0;  // swallows every sample
    CHECK_THROWS_AS(build_samples(all_transition), std::invalid_argument);
}

TEST_CASE("sampling is deterministic") {
    const SampledPattern a = build_samples(offbroadside_spec(30.0, 21));
    const SampledPattern b = build_samples(offbroadside_spec(30.0, 21));
    REQUIRE(a.count() == b.count());
    for (int l = 0; l < a.count(); ++l) {
        CHECK(a.samples[l].signed_theta_deg == b.samples[l].signed_theta_deg);
        CHECK(a.samples[l].dir.theta == b.samples[l].dir.theta);
        CHECK(a.samples[l].dir.phi == b.samples[l].dir.phi);
    }
}

TEST_CASE("matrix assembly") {
    SUBCASE("single mainlobe sample on a single location") {
        DesignSpec spec = broadside_spec(3, 1.0);
        spec.sidelobe_regions = {{+1, 60.0, 60.0}};
        CandidateGrid grid(1, 0.5);
        const SampledPattern pattern = build_samples(spec);
        Eigen::VectorXcd p_r;
        Eigen::MatrixXcd S;
        assemble_matrices_serial(pattern, grid, p_r, S);
        CHECK(S.rows() == 2);
        CHECK(S.cols() == 3);
        const auto sp = polarization_vector(spec.mainlobe, spec.polarization);
        for (int axis = 0; axis < 3; ++axis) {
            CHECK(std::abs(S(0, axis) - sp[axis]) < 1e-15);
        }
    }
    SUBCASE("rows equal full steering; parallel matches serial bit for bit") {
        const DesignSpec spec = broadside_spec(101);
        const SampledPattern pattern = build_samples(spec);
        Eigen::VectorXcd p1, p2;
        Eigen::MatrixXcd s1, s2;
        assemble_matrices_serial(pattern, spec.grid, p1, s1);
        assemble_matrices(pattern, spec.grid, p2, s2);
        CHECK(s1.rows() == 163);
        CHECK(s1.cols() == 303);
        CHECK(p1 == p2);
        CHECK(s1 == s2);
        for (int l : {0, 1, 80, 162}) {
            const auto row = full_steering(pattern.samples[l].dir, pattern.samples[l].pol,
                                           spec.grid);
            CHECK((s1.row(l).transpose() - row).norm() == 0.0);
        }
    }
}

TEST_CASE("real lifting") {
    TestRng rng(77);
    const DesignSpec spec = broadside_spec(7, 3.0);
    const SampledPattern pattern = build_samples(spec);
    Eigen::VectorXcd p_r;
    Eigen::MatrixXcd S;
    assemble_matrices(pattern, spec.grid, p_r, S);
    const LiftedSystem sys = lift_to_real(p_r, S);
    const int M = spec.grid.num_locations();
    const int L = pattern.count();
    REQUIRE(sys.S_hat.rows() == 2 * L);
    REQUIRE(sys.S_hat.cols() == 7 * M);

    SUBCASE("zero weights leave the reference norm") {
        Eigen::VectorXd w_hat = Eigen::VectorXd::Zero(7 * M);
        w_hat[0] = 0.37;  // arbitrary slack values do not matter
        w_hat[7] = -2.0;
        CHECK((sys.p_hat - sys.S_hat * w_hat).norm() ==
              doctest::Approx(p_r.norm()).epsilon(1e-14));
    }
    SUBCASE("complex and lifted residuals coincide") {
        for (int trial = 0; trial < 100; ++trial) {
            WeightVector w(M);
            Eigen::VectorXd w_hat = Eigen::VectorXd::Zero(7 * M);
            for (int m = 0; m < M; ++m) {
                w_hat[7 * m] = rng.normal();  // slack slots are free
                for (int axis = 0; axis < 3; ++axis) {
                    const std::complex<double> v(rng.normal(), rng.normal());
                    w.triples[m][axis] = v;
                    w_hat[7 * m + 1 + axis] = v.real();
                    w_hat[7 * m + 4 + axis] = -v.imag();
                }
            }
            const double complex_res = (p_r - S * w.flatten().conjugate()).norm();
            const double lifted_res = (sys.p_hat - sys.S_hat * w_hat).norm();
            CHECK(std::abs(complex_res - lifted_res) <= 1e-10);
        }
    }
    SUBCASE("selector picks exactly the slack slots") {
        Eigen::VectorXd w_hat(7 * M);
        for (int i = 0; i < w_hat.size(); ++i) w_hat[i] = rng.normal();
        double t_sum = 0.0;
        for (int m = 0; m < M; ++m) t_sum += w_hat[7 * m];
        CHECK(sys.c_hat.dot(w_hat) == doctest::Approx(t_sum).epsilon(1e-14));
        int nonzero = 0;
        for (int i = 0; i < sys.c_hat.size(); ++i) {
            if (sys.c_hat[i] != 0.0) ++nonzero;
        }
        CHECK(nonzero == M);
    }
    SUBCASE("slack columns are zero") {
        Eigen::VectorXd w_hat(7 * M), w_hat2;
        for (int i = 0; i < w_hat.size(); ++i) w_hat[i] = rng.normal();
        w_hat2 = w_hat;
        for (int m = 0; m < M; ++m) w_hat2[7 * m] = rng.normal();
        CHECK((sys.S_hat * w_hat - sys.S_hat * w_hat2).norm() == 0.0);
    }
    SUBCASE("weights_from_lifted inverts the layout") {
        Eigen::VectorXd w_hat(7 * M);
        for (int i = 0; i < w_hat.size(); ++i) w_hat[i] = rng.normal();
        const WeightVector w = weights_from_lifted(w_hat);
        for (int m = 0; m < M; ++m) {
            for (int axis = 0; axis < 3; ++axis) {
                CHECK(w.triples[m][axis].real() == w_hat[7 * m + 1 + axis]);
                CHECK(w.triples[m][axis].imag() == -w_hat[7 * m + 4 + axis]);
            }
        }
    }
}

TEST_CASE("carved sidelobe intervals") {
    SUBCASE("broadside bands are untouched") {
        const auto intervals = carved_sidelobe_intervals(broadside_spec(11));
        REQUIRE(intervals.size() == 2);
        CHECK(intervals[0].first == 10.0);
        CHECK(intervals[0].second == 90.0);
        CHECK(intervals[1].first == -90.0);
        CHECK(intervals[1].second == -10.0);
    }
    SUBCASE("transition window splits a band") {
        const auto intervals = carved_sidelobe_intervals(offbroadside_spec(30.0, 11));
        // (+): [0,90] minus (20,40) -> [0,20] and [40,90]; (-): [-90,-0]
        REQUIRE(intervals.size() == 3);
        CHECK(intervals[0].first == 0.0);
        CHECK(intervals[0].second == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(intervals[1].first == doctest::Approx(40.0).epsilon(1e-12));
        CHECK(intervals[1].second == 90.0);
        CHECK(intervals[2].first == -90.0);
        CHECK(intervals[2].second == 0.0);
    }
}

TEST_SUITE_END();
