#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "roughfem/estimators1d.hpp"
#include "roughfem/randfield.hpp"

using namespace roughfem;

namespace {

Coefficient random_coefficient(int level, std::uint64_t seed) {
    RngStream rng(seed, 0);
    return lognormal_of(sample_brownian_bridge(level, rng));
}

struct Pair {
    FemSolution u, l;
};

Pair solve(const Coefficient& a, int level, const Observable& g) {
    const auto a_h = average_coefficient(a, level);
    return {solve_primal_explicit(a_h), solve_dual_explicit(a_h, g)};
}

std::vector<Observable> observables() { return {Observable::constant(1.0), Observable::dirac(0.5), Observable::cosine()}; }

}  // namespace

TEST_CASE("single-mesh identity: F = E_est and F_tilde = signed sum") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = random_coefficient(12, s);
        for (const auto& g : observables())
            for (int L = 4; L <= 9; ++L) {
                const auto c = solve(a, L, g), f = solve(a, L + 1, g);
                const auto two = two_level(a, c.u, f.u, c.l, f.l);
                const auto one = single_mesh_estimator(average_coefficient(a, L + 1), f.u, f.l);
                CAPTURE(g.name());
                CAPTURE(L);
                CHECK(std::abs(two.F_abs - one.E_est) <= 1e-12 * one.E_est);
                CHECK(std::abs(two.F_tilde - one.signed_sum) <= 1e-12 * one.E_est);
                CHECK(std::abs(two.F_tilde) <= two.F_abs * (1.0 + 1e-15));
                for (std::size_t e = 0; e < one.terms.size(); ++e)
                    CHECK(std::abs(two.signed_terms[e] - one.terms[e]) <= 1e-12 * std::abs(one.terms[e]) + 1e-300);
            }
    }
}

TEST_CASE("zero cases") {
    SUBCASE("constant coefficient has no second differences") {
        const Coefficient a{10, std::vector<double>(1024, 2.0)};
        const auto f = solve(a, 6, Observable::constant(1.0));
        const auto r = single_mesh_estimator(average_coefficient(a, 6), f.u, f.l);
        CHECK(r.E_est == 0.0);
        const auto c = solve(a, 5, Observable::constant(1.0));
        CHECK(two_level(a, c.u, f.u, c.l, f.l).F_abs == 0.0);
    }
    SUBCASE("zero observable") {
        const auto a = random_coefficient(10, 1);
        const auto f = solve(a, 6, Observable::constant(0.0));
        CHECK(single_mesh_estimator(average_coefficient(a, 6), f.u, f.l).E_est == 0.0);
    }
    SUBCASE("dirac at 1/2: dual derivative vanishes to the right") {
        const auto a = random_coefficient(10, 2);
        const auto f = solve(a, 5, Observable::dirac(0.5));
        const auto r = single_mesh_estimator(average_coefficient(a, 5), f.u, f.l);
        for (std::size_t e = 8; e < 16; ++e) CHECK(r.terms[e] == 0.0);
    }
}

TEST_CASE("single element example") {
    // halves 1 and 3 on [0,1]: a* = 1.5, u' = 1, 1/3 and, for g = 1, l' = G/a
    const Coefficient a{1, {1.0, 3.0}};
    const auto u = solve_primal_explicit(a);
    const auto l = solve_dual_explicit(a, Observable::constant(1.0));
    const auto r = single_mesh_estimator(a, u, l);
    CHECK(r.a_star[0] == doctest::Approx(1.5));
    const double d2u = (1.0 / 3.0 - 1.0) / 0.5;
    const double d2l = (l.deriv[1] - l.deriv[0]) / 0.5;
    CHECK(r.terms[0] == doctest::Approx(1.5 * d2u * d2l / 16.0));
    CHECK(l.deriv[0] == doctest::Approx(-0.75));
    CHECK(l.deriv[1] == doctest::Approx(-0.25 / 3.0));
}

TEST_CASE("input validation") {
    const auto a = random_coefficient(8, 3);
    const auto f = solve(a, 5, Observable::constant(1.0));
    const auto c = solve(a, 4, Observable::constant(1.0));
    CHECK_THROWS_AS(single_mesh_estimator(average_coefficient(a, 4), f.u, f.l), std::invalid_argument);
    CHECK_THROWS_AS(two_level(a, f.u, c.u, f.l, c.l), std::invalid_argument);
    CHECK_THROWS_AS(reference_galerkin_error(c.u, f.u, Observable::constant(1.0)), std::invalid_argument);
}

TEST_CASE("cosine observable cancels in the signed sum") {
    double signed_total = 0.0, abs_total = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto a = random_coefficient(12, 300 + s);
        const auto c = solve(a, 7, Observable::cosine()), f = solve(a, 8, Observable::cosine());
        const auto r = two_level(a, c.u, f.u, c.l, f.l);
        signed_total += std::abs(r.F_tilde);
        abs_total += r.F_abs;
    }
    CHECK(signed_total < 0.5 * abs_total);
}

TEST_CASE("reference error equals the dual-weighted two-level form") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = random_coefficient(13, 50 + s);
        for (const auto& g : observables()) {
            const auto ref = solve(a, 13, g);
            for (int L = 4; L <= 9; ++L) {
                const auto c = solve(a, L, g);
                const double E = reference_galerkin_error(ref.u, c.u, g);
                const double dual_form = two_level(a, c.u, ref.u, c.l, ref.l).F_tilde;
                CAPTURE(g.name());
                CHECK(std::abs(E + dual_form) <= 1e-10 * std::abs(E) + 1e-15);
            }
        }
    }
    SUBCASE("same mesh gives zero") {
        const auto a = random_coefficient(10, 9);
        const auto u = solve(a, 6, Observable::constant(1.0)).u;
        CHECK(reference_galerkin_error(u, u, Observable::constant(1.0)) == 0.0);
    }
}

TEST_CASE("Galerkin orthogonality against coarse hats") {
    const auto a = random_coefficient(12, 11);
    const auto c = solve(a, 5, Observable::constant(1.0)), f = solve(a, 10, Observable::constant(1.0));
    // a(u_f - u_c, phi_j) over each coarse element pair vanishes for interior hats
    const std::size_t per = 1u << 5;
    const auto a_f = average_coefficient(a, 10);
    for (std::size_t j = 1; j < 32; ++j) {
        double s = 0.0;
        for (std::size_t q = (j - 1) * per; q < j * per; ++q) s += a_f.values[q] * (f.u.deriv[q] - c.u.deriv[j - 1]) * 32.0;
        for (std::size_t q = j * per; q < (j + 1) * per; ++q) s -= a_f.values[q] * (f.u.deriv[q] - c.u.deriv[j]) * 32.0;
        CHECK(std::abs(s / 1024.0) <= 1e-12);
    }
}

TEST_CASE("ratio statistics") {
    const std::vector<double> E{1.0, -2.0, 3.0, 4.0}, est{1.0, 1.0, 0.0, 2.0};
    const auto r = ratio_statistics(E, est, 4);
    CHECK(r.excluded == 1);
    CHECK(r.ratios == std::vector<double>{1.0, 2.0, 2.0});
    CHECK(r.stats.mean == doctest::Approx(5.0 / 3.0));
    CHECK(r.bin_edges.size() == 5);
    CHECK(r.bin_edges.back() == 2.0);
    double integral = 0.0;
    for (std::size_t b = 0; b < r.density.size(); ++b) integral += r.density[b] * (r.bin_edges[b + 1] - r.bin_edges[b]);
    CHECK(integral == doctest::Approx(1.0));
    CHECK(r.density.back() == doctest::Approx(2.0 / 3.0 / 0.5));
    CHECK_THROWS(ratio_statistics({1.0}, {1.0, 2.0}));
}

TEST_CASE("level_ratio") {
    CHECK(level_ratio(2.0, 1.0).value() == 2.0);
    CHECK_FALSE(level_ratio(1.0, 0.0).has_value());
    CHECK_FALSE(level_ratio(1.0, std::nan("")).has_value());
}

TEST_CASE("single-path estimator decays at first order") {
    const auto a = random_coefficient(14, 21);
    std::vector<double> h, F;
    for (int L = 5; L <= 10; ++L) {
        const auto f = solve(a, L + 1, Observable::constant(1.0));
        h.push_back(std::ldexp(1.0, -L));
        F.push_back(single_mesh_estimator(average_coefficient(a, L + 1), f.u, f.l).E_est);
    }
    CHECK(fit_loglog(h, F).slope == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("mean level ratio F(2h)/F(h) is near 2") {
    double F2h = 0.0, Fh = 0.0;
    for (std::uint64_t s = 0; s < 500; ++s) {
        const auto a = random_coefficient(11, 1000 + s);
        for (int L : {7, 8}) {
            const auto f = solve(a, L + 1, Observable::constant(1.0));
            (L == 7 ? F2h : Fh) += single_mesh_estimator(average_coefficient(a, L + 1), f.u, f.l).E_est;
        }
    }
    const double ratio = F2h / Fh;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
}
