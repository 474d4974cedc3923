#include "catch_amalgamated.hpp"

#include <cmath>

#include "cpes/error.hpp"
#include "cpes/physical/lti.hpp"
#include "cpes/rng.hpp"
#include "gen.hpp"

using namespace cpes::phys;
using cpes::test::Gen;

namespace {

LtiPlant plant(int n, int m, int l) {
    LtiPlant p;
    p.id = "p";
    p.G = Eigen::MatrixXd::Identity(n, n);
    p.B = Eigen::MatrixXd::Zero(n, l);
    p.C = Eigen::MatrixXd::Identity(m, n);
    p.control_matrix = Eigen::MatrixXd::Zero(l, m);
    p.noise_std = Eigen::VectorXd::Zero(m);
    p.x = Eigen::VectorXd::Zero(n);
    p.u = Eigen::VectorXd::Zero(l);
    return p;
}

}  // namespace

TEST_CASE("identity dynamics", "[lti]") {
    auto p = plant(3, 3, 1);
    p.x << 1.0, -2.0, 0.5;
    cpes::Rng rng(1);
    const auto s = lti_step(p, rng);
    CHECK(s.x_next == p.x);
    CHECK(s.y == p.x);
}

TEST_CASE("scalar arithmetic", "[lti]") {
    auto p = plant(1, 1, 1);
    p.G(0, 0) = 0.5;
    p.x(0) = 2.0;
    cpes::Rng rng(1);
    const auto s = lti_step(p, rng);
    CHECK(s.x_next(0) == 1.0);
    CHECK(s.y(0) == 2.0);
}

TEST_CASE("noise-free plant never draws from the stream", "[lti]") {
    auto p = plant(2, 2, 1);
    cpes::Rng a(9), b(9);
    lti_step(p, a);
    CHECK(a() == b());
}

TEST_CASE("trajectory equals the matrix-power closed form", "[lti][property]") {
    Gen g(41);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = plant(3, 2, 1);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) p.G(i, j) = g.uniform(-0.3, 0.3);
        for (int i = 0; i < 3; ++i) {
            p.B(i, 0) = g.uniform(-1.0, 1.0);
            p.x(i) = g.uniform(-1.0, 1.0);
        }
        p.C = Eigen::MatrixXd::Zero(2, 3);
        p.C(0, 0) = 1.0;
        p.C(1, 2) = 1.0;
        p.u(0) = g.uniform(-1.0, 1.0);
        const Eigen::VectorXd x0 = p.x;
        cpes::Rng rng(0);
        const int steps = 1000;
        Eigen::VectorXd x = x0;
        for (int k = 0; k < steps; ++k) x = lti_step(LtiPlant{p.id, p.G, p.B, p.C, p.control_matrix, p.noise_std, x, p.u}, rng).x_next;

        // G^k x0 + sum_{j<k} G^j B u by repeated multiplication.
        Eigen::MatrixXd gk = Eigen::MatrixXd::Identity(3, 3);
        Eigen::VectorXd forced = Eigen::VectorXd::Zero(3);
        for (int j = 0; j < steps; ++j) {
            forced += gk * p.B * p.u;
            gk = gk * p.G;
        }
        const Eigen::VectorXd expect = gk * x0 + forced;
        CHECK((x - expect).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("stable plant decays to zero", "[lti][property]") {
    Gen g(42);
    auto p = plant(3, 3, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.G(i, j) = g.uniform(-0.25, 0.25);
    p.x << 1.0, 1.0, 1.0;
    cpes::Rng rng(0);
    for (int k = 0; k < 1000; ++k) p.x = lti_step(p, rng).x_next;
    CHECK(p.x.norm() < 1e-12);
}

TEST_CASE("feedback and dimension checks", "[lti]") {
    auto p = plant(2, 2, 1);
    p.control_matrix << 0.5, 0.5;
    Eigen::VectorXd y(2);
    y << 1.0, 3.0;
    CHECK(next_control(p, y)(0) == 2.0);
    p.C = Eigen::MatrixXd::Identity(2, 3);
    CHECK_THROWS_AS(check(p), cpes::ValidationError);
    auto q = plant(2, 2, 1);
    q.noise_std(1) = -0.1;
    CHECK_THROWS_AS(check(q), cpes::ValidationError);
}

TEST_CASE("measurement noise has the configured spread", "[lti][property]") {
    auto p = plant(1, 1, 1);
    p.noise_std(0) = 0.5;
    cpes::Rng rng(3);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = lti_step(p, rng).y(0);
        sum += e;
        sq += e * e;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 3.0 * 0.5 / std::sqrt(n));
    CHECK(std::sqrt(sq / n) == Catch::Approx(0.5).epsilon(0.02));
}
