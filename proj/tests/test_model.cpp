#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "rheston/model.hpp"

using namespace rheston;

TEST_CASE("parameter validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.hurst() == Catch::Approx(0.25));

    ModelParams bad = p;
    bad.alpha = 0.4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.alpha = 1.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.alpha = 1.0;  // classical Heston boundary is allowed
    CHECK_NOTHROW(bad.validate());
    bad = p;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.lambda = 1.0;
    bad.theta = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.lambda = 0.0;
    bad.theta = 0.0;  // theta unused when lambda = 0
    CHECK_NOTHROW(bad.validate());
    bad = p;
    bad.nu = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.v0 = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("expected variance") {
    ModelParams p{0.75, 0.0, 0.04, 0.2, -0.1, 0.09};
    // no mean reversion: flat at v0
    CHECK(expected_variance(p, 0.7) == Catch::Approx(0.09).epsilon(1e-14));

    // classical limit: theta + (v0 - theta) e^{-lambda t}
    ModelParams h{1.0, 2.0, 0.05, 0.2, -0.1, 0.09};
    for (double t : {0.1, 1.0, 5.0}) {
        double ref = 0.05 + (0.09 - 0.05) * std::exp(-2.0 * t);
        CHECK(expected_variance(h, t) == Catch::Approx(ref).epsilon(1e-9));
    }

    // rough case: starts at v0, decays monotonically towards theta
    ModelParams r{0.75, 2.0, 0.05, 0.2, -0.1, 0.09};
    CHECK(expected_variance(r, 0.0) == Catch::Approx(0.09));
    double prev = 0.09;
    for (double t : {0.5, 1.0, 2.0, 10.0}) {
        double v = expected_variance(r, t);
        CHECK(v < prev);
        CHECK(v > 0.05);
        prev = v;
    }
    CHECK(expected_variance(r, 500.0) == Catch::Approx(0.05).margin(2e-3));
}

TEST_CASE("resolvent kernel and its antiderivative") {
    ModelParams p{0.75, 2.0, 0.05, 0.4, -0.1, 0.04};
    // lambda = 0 closed forms
    ModelParams q = p;
    q.lambda = 0.0;
    double x = 0.3;
    CHECK(resolvent_kernel(q, x) ==
          Catch::Approx(q.nu * std::pow(x, q.alpha - 1.0) / gamma_fn(q.alpha)).epsilon(1e-10));
    CHECK(resolvent_kernel_integral(q, x) ==
          Catch::Approx(q.nu * std::pow(x, q.alpha) / (q.alpha * gamma_fn(q.alpha)))
              .epsilon(1e-12));

    // the antiderivative differentiates back to the kernel
    for (double lag : {0.05, 0.2, 1.0}) {
        double h = 1e-6 * lag;
        double fd = (resolvent_kernel_integral(p, lag + h) -
                     resolvent_kernel_integral(p, lag - h)) /
                    (2.0 * h);
        CHECK(fd == Catch::Approx(resolvent_kernel(p, lag)).epsilon(1e-6));
    }

    // continuity as lambda -> 0
    ModelParams eps = q;
    eps.lambda = 1e-9;
    CHECK(resolvent_kernel_integral(eps, x) ==
          Catch::Approx(resolvent_kernel_integral(q, x)).epsilon(1e-6));

    CHECK(resolvent_kernel_integral(p, 0.0) == 0.0);
    CHECK_THROWS_AS(resolvent_kernel(p, 0.0), std::domain_error);
}

TEST_CASE("variance curve interpolation and CSV round trip") {
    VarianceCurve c;
    c.u = {0.0, 1.0, 2.0};
    c.xi = {0.04, 0.06, 0.05};
    c.validate();
    CHECK(c(-1.0) == Catch::Approx(0.04));
    CHECK(c(0.5) == Catch::Approx(0.05));
    CHECK(c(1.5) == Catch::Approx(0.055));
    CHECK(c(3.0) == Catch::Approx(0.05));

    VarianceCurve bad = c;
    bad.xi[1] = -0.01;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.u[0] = 0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    std::string path = "test_model_curve.csv";
    {
        std::ofstream out(path);
        out << "u,xi\n0,0.04\n1,0.06\n2,0.05\n";
    }
    VarianceCurve loaded = VarianceCurve::from_csv(path);
    CHECK(loaded.u == c.u);
    CHECK(loaded.xi == c.xi);
    std::remove(path.c_str());
    CHECK_THROWS_AS(VarianceCurve::from_csv("no_such_file.csv"), std::runtime_error);
}

TEST_CASE("theta recovered from a constant-theta variance curve") {
    ModelParams p{0.75, 2.0, 0.05, 0.4, -0.1, 0.09};
    // tabulate E(V_t) densely and back out theta(t); should be flat at theta
    VarianceCurve curve;
    for (int i = 0; i <= 400; ++i) {
        double t = 2.0 * double(i) / 400.0;
        curve.u.push_back(t);
        curve.xi.push_back(expected_variance(p, t));
    }
    FracGrid grid(2.0, 400);
    std::vector<double> th = theta_from_curve(p, curve, grid);
    for (std::size_t k = grid.size() / 4; k < grid.size(); k += 37) {
        CHECK(th[k] == Catch::Approx(0.05).epsilon(2e-2));
    }

    ModelParams nolam = p;
    nolam.lambda = 0.0;
    CHECK_THROWS_AS(theta_from_curve(nolam, curve, grid), std::domain_error);
}
