#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <cstdio>
#include <fstream>

#include "rheston/mgf.hpp"

using namespace rheston;

namespace {

// Closed-form classical Heston cumulant generating function (alpha = 1).
std::complex<double> heston_cgf(const ModelParams& m, std::complex<double> p, double t) {
    std::complex<double> b = m.lambda - p * m.rho * m.nu;
    std::complex<double> d = std::sqrt(b * b - m.nu * m.nu * (p * p - p));
    std::complex<double> g = (b - d) / (b + d);
    std::complex<double> D = (b - d) / (m.nu * m.nu) * (1.0 - std::exp(-d * t)) /
                             (1.0 - g * std::exp(-d * t));
    std::complex<double> C =
        m.lambda * m.theta / (m.nu * m.nu) *
        ((b - d) * t - 2.0 * std::log((1.0 - g * std::exp(-d * t)) / (1.0 - g)));
    return m.v0 * D + C;
}

}  // namespace

TEST_CASE("log mgf matches the classical Heston closed form at alpha = 1") {
    ModelParams h{1.0, 2.0, 0.05, 0.4, -0.5, 0.04};
    for (double p : {-2.0, -0.5, 0.5, 1.0, 2.5}) {
        auto m = log_mgf(h, p, 1.0, 2000);
        REQUIRE(m.finite);
        CHECK(m.log_mgf == Catch::Approx(heston_cgf(h, p, 1.0).real()).margin(1e-6));
    }
    for (double u : {2.0, 10.0, 30.0}) {
        auto m = log_mgf(h, std::complex<double>(0.5, u), 1.0, 2000);
        REQUIRE(m.finite);
        auto ref = heston_cgf(h, std::complex<double>(0.5, u), 1.0);
        CHECK(m.log_mgf.real() == Catch::Approx(ref.real()).margin(1e-6));
        CHECK(m.log_mgf.imag() == Catch::Approx(ref.imag()).margin(1e-6));
    }
}

TEST_CASE("log mgf reports explosion beyond the critical time") {
    ModelParams p{0.75, 0.0, 0.0, 0.3, -0.02, 0.04};
    auto ok = log_mgf(p, 2.0, 1.0, 512);
    CHECK(ok.finite);
    auto gone = log_mgf(p, 2.0, 200.0, 512);
    CHECK_FALSE(gone.finite);
    CHECK(std::isinf(gone.log_mgf));
    CHECK_THROWS_AS(log_mgf(p, 1.0, -1.0, 512), std::domain_error);
    CHECK_THROWS_AS(log_mgf(p, 1.0, 1.0, 8), std::domain_error);
}

TEST_CASE("lambda table reproduces the quoted explosion times") {
    ModelParams p{0.75, 0.0, 0.0, 0.15, -0.02, 0.04};
    LambdaTable t = build_lambda_table(p);
    CHECK(t.t_star_plus == Catch::Approx(34.5).margin(0.5));
    CHECK(t.t_star_minus == Catch::Approx(33.25).margin(0.5));
    CHECK(t.lambda(1, 0.0) == 0.0);
    CHECK(std::isinf(t.lambda(1, t.t_star_plus + 1.0)));
    // monotone growth along each branch
    double prev = 0.0;
    for (double s = 1.0; s < t.s_end_plus; s += 3.0) {
        double v = t.lambda(1, s);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("lambda table matches a direct solve at interior times") {
    ModelParams p{0.75, 0.0, 0.0, 0.15, -0.02, 0.04};
    LambdaTable t = build_lambda_table(p);
    for (int sign : {+1, -1}) {
        double s = 10.0;
        FracGrid grid(s, 4000);
        auto sol = solve_adams(RiccatiRhs<double>::driftless(double(sign), p), p.alpha, grid);
        REQUIRE_FALSE(sol.exploded);
        double direct = frac_integral_at_end(sol.values, grid, 1.0 - p.alpha);
        CHECK(t.lambda(sign, s) == Catch::Approx(direct).epsilon(1e-5));
    }
}

TEST_CASE("table and series routes to the rescaled cgf agree") {
    ModelParams p{0.75, 0.0, 0.0, 0.15, -0.02, 0.04};
    LambdaTable t = build_lambda_table(p);
    for (double mom : {-2.0, -0.5, 0.5, 1.0, 3.0}) {
        double a = lambda_bar(t, p.v0, mom);
        double b = lambda_bar_series(p, mom, 25);
        CHECK(a == Catch::Approx(b).epsilon(2e-4));
    }
    CHECK(lambda_bar(t, p.v0, 0.0) == 0.0);
    CHECK(lambda_bar_series(p, 0.0) == 0.0);
    // beyond the critical moment the table route diverges
    double p_plus = std::pow(t.t_star_plus, t.alpha);
    CHECK(std::isinf(lambda_bar(t, p.v0, 1.01 * p_plus)));
}

TEST_CASE("moment scaling: p T*(p)^alpha is constant") {
    ModelParams p{0.75, 0.0, 0.0, 0.15, -0.02, 0.04};
    double hint = 10.0 / (p.nu * p.nu);
    double base = 0.0;
    for (double mom : {0.5, 1.0, 2.0}) {
        double ts = explosion_time(RiccatiRhs<double>::driftless(mom, p), p.alpha, hint / mom);
        double inv = mom * std::pow(ts, p.alpha);
        if (base == 0.0)
            base = inv;
        else
            CHECK(inv == Catch::Approx(base).epsilon(5e-3));
    }
}

TEST_CASE("monotone interpolation and CSV export") {
    ModelParams p{0.75, 0.0, 0.0, 0.15, -0.02, 0.04};
    LambdaTable t = build_lambda_table(p, 3000);
    std::string path = "test_mgf_lambda.csv";
    t.to_csv(path, 50);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "s,lambda_plus,lambda_minus");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 51);
    in.close();
    std::remove(path.c_str());
}
