#include <catch2/catch_amalgamated.hpp>

#include "rheston/special.hpp"

using namespace rheston;

TEST_CASE("gamma function matches reference values") {
    CHECK(gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_fn(0.5) == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(gamma_fn(5.0) == Catch::Approx(24.0).epsilon(1e-13));
    CHECK(gamma_fn(0.75) == Catch::Approx(1.2254167024651776451).epsilon(1e-12));
    CHECK(gamma_fn(1.75) == Catch::Approx(0.9190625268488832).epsilon(1e-12));
    CHECK(gamma_fn(-0.5) == Catch::Approx(-2.0 * std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(gamma_fn(10.5) == Catch::Approx(1133278.3889487855673).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-3.0), std::domain_error);
}

TEST_CASE("gamma recurrence holds across the reflection boundary") {
    for (double x : {0.1, 0.3, 0.49, 0.51, 0.9, 1.3, 2.7}) {
        CHECK(gamma_fn(x + 1.0) == Catch::Approx(x * gamma_fn(x)).epsilon(1e-12));
    }
}

TEST_CASE("Mittag-Leffler special cases") {
    // E_{1,1}(z) = e^z
    for (double z : {-3.0, -1.0, -0.25, 0.5, 2.0}) {
        CHECK(mittag_leffler(1.0, 1.0, z) == Catch::Approx(std::exp(z)).epsilon(1e-11));
    }
    // E_{2,1}(-z^2) = cos(z)
    for (double z : {0.5, 1.5, 3.0}) {
        CHECK(mittag_leffler(2.0, 1.0, -z * z) == Catch::Approx(std::cos(z)).margin(1e-11));
    }
    // E_{1,2}(z) = (e^z - 1)/z
    CHECK(mittag_leffler(1.0, 2.0, 0.7) ==
          Catch::Approx((std::exp(0.7) - 1.0) / 0.7).epsilon(1e-11));
    // E_{a,b}(0) = 1/Gamma(b)
    CHECK(mittag_leffler(0.75, 0.75, 0.0) == Catch::Approx(1.0 / gamma_fn(0.75)).epsilon(1e-13));
}

// Brute-force oracle: series in quad-double via long double Kahan is not
// enough for deep cancellation, so compare against E_{1,1} and high-precision
// pinned values computed independently (mpmath, 50 digits).
TEST_CASE("Mittag-Leffler pinned high-precision values") {
    struct Ref {
        double a, b, z, val;
    };
    const Ref refs[] = {
        {0.75, 1.0, -1.0, 0.3931083028157540618},
        {0.75, 1.0, -10.0, 0.030643250976059637773},
        {0.75, 1.0, -40.0, 0.0070756747558264278336},
        {0.75, 0.75, -5.0, 0.012140520971468211535},
        {0.5, 1.0, -2.0, 0.25539567631050574387},
        {0.5, 0.5, -3.0, 0.02718613000358643569},
        {0.75, 1.0, 2.0, 16.477360564726636035},
    };
    for (const Ref& r : refs) {
        CHECK(mittag_leffler(r.a, r.b, r.z) == Catch::Approx(r.val).epsilon(1e-10));
    }
}

TEST_CASE("fractional integral of power functions is exact in the limit") {
    // I^r t^m = Gamma(m+1)/Gamma(m+1+r) t^{m+r}; linear integrand is exact
    double r = 0.25;
    FracGrid grid(2.0, 400);
    std::vector<double> lin(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) lin[k] = grid.node(k);
    auto I = frac_integral(lin, grid, r);
    double expect = gamma_fn(2.0) / gamma_fn(2.0 + r) * std::pow(2.0, 1.0 + r);
    CHECK(I.back() == Catch::Approx(expect).epsilon(1e-12));
    CHECK(frac_integral_at_end(lin, grid, r) == Catch::Approx(I.back()).epsilon(1e-14));

    // quadratic integrand converges at O(h^2)
    std::vector<double> quad(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) quad[k] = grid.node(k) * grid.node(k);
    double expect2 = gamma_fn(3.0) / gamma_fn(3.0 + r) * std::pow(2.0, 2.0 + r);
    CHECK(frac_integral_at_end(quad, grid, r) == Catch::Approx(expect2).epsilon(1e-5));

    FracGrid fine(2.0, 1600);
    std::vector<double> quad_f(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) quad_f[k] = fine.node(k) * fine.node(k);
    double err_coarse = std::fabs(frac_integral_at_end(quad, grid, r) - expect2);
    double err_fine = std::fabs(frac_integral_at_end(quad_f, fine, r) - expect2);
    CHECK(err_fine < err_coarse / 8.0);  // better than O(h^2) shrink by 4x
}

TEST_CASE("I^1 reduces to the trapezoid rule") {
    FracGrid grid(1.0, 100);
    std::vector<double> g(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) g[k] = std::sin(grid.node(k));
    double trap = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        trap += 0.5 * (g[k] + g[k + 1]) * grid.step();
    CHECK(frac_integral_at_end(g, grid, 1.0) == Catch::Approx(trap).epsilon(1e-12));
}

TEST_CASE("fractional derivative inverts the fractional integral") {
    // D^r t = t^{1-r}/Gamma(2-r)
    double r = 0.6;
    FracGrid grid(1.0, 800);
    std::vector<double> lin(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) lin[k] = grid.node(k);
    auto d = frac_derivative(lin, grid, r);
    for (std::size_t k = grid.size() / 4; k < grid.size(); k += 97) {
        double t = grid.node(k);
        CHECK(d[k] == Catch::Approx(std::pow(t, 1.0 - r) / gamma_fn(2.0 - r)).epsilon(2e-4));
    }
}

TEST_CASE("semigroup property I^r I^s = I^{r+s}") {
    FracGrid grid(1.0, 1200);
    std::vector<double> g(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) g[k] = std::cos(grid.node(k));
    auto a = frac_integral(frac_integral(g, grid, 0.3), grid, 0.45);
    auto b = frac_integral(g, grid, 0.75);
    for (std::size_t k = grid.size() / 2; k < grid.size(); k += 111) {
        CHECK(a[k] == Catch::Approx(b[k]).margin(5e-5));
    }
}

TEST_CASE("argument validation") {
    FracGrid grid(1.0, 16);
    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(frac_integral(wrong, grid, 0.5), std::domain_error);
    std::vector<double> ok(grid.size(), 1.0);
    CHECK_THROWS_AS(frac_integral(ok, grid, 1.5), std::domain_error);
    CHECK_THROWS_AS(frac_integral(ok, grid, 0.0), std::domain_error);
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(mittag_leffler(2.5, 1.0, 1.0), std::domain_error);
}
