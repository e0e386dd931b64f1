#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qcm/expsums.hpp"
#include "qcm/numtheory.hpp"
#include "test_helpers.hpp"

using namespace qcm;
using namespace qcm::testing;

namespace {

std::complex<double> root(double num, double den) {
    double ang = 2.0 * std::numbers::pi * num / den;
    return {std::cos(ang), std::sin(ang)};
}

// direct complete sum, the oracle: sum over x mod q of e(a.f(x)/q) e(-a.nu/q)
std::complex<double> complete_sum_direct(const PolySystem& s, const std::vector<i64>& a,
                                         i64 q, const std::vector<i64>& nu) {
    std::complex<double> total(0, 0);
    std::vector<i64> x(static_cast<size_t>(s.n), 0);
    std::vector<Int> xi(static_cast<size_t>(s.n));
    while (true) {
        for (int j = 0; j < s.n; ++j) xi[static_cast<size_t>(j)] = x[static_cast<size_t>(j)];
        double phase = 0;
        std::vector<Int> v = s.evaluate(xi);
        for (int i = 0; i < s.R; ++i)
            phase += static_cast<double>(a[static_cast<size_t>(i)]) *
                     (v[static_cast<size_t>(i)].get_d() -
                      static_cast<double>(nu[static_cast<size_t>(i)])) /
                     static_cast<double>(q);
        total += root(phase, 1.0);
        int j = s.n - 1;
        while (j >= 0) {
            if (++x[static_cast<size_t>(j)] < q) break;
            x[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return total;
}

} // namespace

TEST_CASE("complete sum: Gauss sum at q = 5") {
    PolySystem s = make_system(1, {{{1, {2}}}});
    auto v = exp_sum_complete(s, {1}, 5, {0});
    CHECK(v.real() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    CHECK(std::abs(v.imag()) < 1e-9);

    // exact mode matches 1 + 2 e(1/5) + 2 e(4/5)
    CycValue expected(5);
    expected.add_root(0, 1);
    expected.add_root(1, 2);
    expected.add_root(4, 2);
    CHECK(exp_sum_complete_exact(s, {1}, 5, {0}) == expected);
}

TEST_CASE("complete sum: q = 1 and gcd guard") {
    PolySystem s = x2_plus_1();
    auto v = exp_sum_complete(s, {1}, 1, {0});
    CHECK(v.real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(exp_sum_complete(s, {2}, 4, {0}), input_error);
}

TEST_CASE("complete sum: CRT factorization against direct enumeration") {
    PolySystem s = make_system(1, {{{1, {2}}}});
    for (i64 q : {15, 12, 45, 35}) {
        for (i64 a : {1, 7}) {
            if (gcd_i64(a, q) != 1) continue;
            auto direct = complete_sum_direct(s, {a}, q, {0});
            auto crt = exp_sum_complete(s, {a}, q, {0});
            CHECK(crt.real() == doctest::Approx(direct.real()).epsilon(1e-9));
            CHECK(crt.imag() == doctest::Approx(direct.imag()).epsilon(1e-9));
        }
    }
    // a multivariate system through the same path
    std::mt19937 rng(5);
    PolySystem m = random_system(rng, 2, 1, 2);
    auto direct = complete_sum_direct(m, {1}, 15, {2});
    auto crt = exp_sum_complete(m, {1}, 15, {2});
    CHECK(crt.real() == doctest::Approx(direct.real()).epsilon(1e-9));
    CHECK(crt.imag() == doctest::Approx(direct.imag()).epsilon(1e-9));
}

TEST_CASE("complete sum: exact CRT equals direct cyclotomic sum") {
    PolySystem s = make_system(1, {{{1, {2}}}});
    // direct cyclotomic sum over x mod 15
    CycValue direct(15);
    for (i64 x = 0; x < 15; ++x) direct.add_root(x * x % 15, 1);
    CHECK(exp_sum_complete_exact(s, {1}, 15, {0}) == direct);
}

TEST_CASE("complete sum invariances") {
    std::mt19937 rng(17);
    PolySystem s = random_system(rng, 2, 1, 3);
    for (i64 q : {7, 9, 10}) {
        const i64 a = (q % 3 == 0) ? 4 : 3;
        // |S_{a,q}(nu)| = |S_{a,q}|
        auto plain = exp_sum_complete(s, {a}, q, {0});
        auto twisted = exp_sum_complete(s, {a}, q, {5});
        CHECK(std::abs(plain) == doctest::Approx(std::abs(twisted)).epsilon(1e-9));
        // a -> a + q leaves the sum unchanged
        auto shifted = exp_sum_complete(s, {a + q}, q, {0});
        CHECK(plain.real() == doctest::Approx(shifted.real()).epsilon(1e-9));
        CHECK(plain.imag() == doctest::Approx(shifted.imag()).epsilon(1e-9));
        // conjugation S_{q-a,q} = conj(S_{a,q}), exact
        CHECK(exp_sum_complete_exact(s, {q - a}, q, {0}) ==
              exp_sum_complete_exact(s, {a}, q, {0}).conjugate());
    }
}

TEST_CASE("box sum: zero phase counts lattice points") {
    PolySystem s = make_system(2, {{{1, {2, 0}}, {1, {0, 2}}}});
    auto v = exp_sum_box(s, {0.0}, {0}, Rat(2), Box::symmetric(2));
    CHECK(v.real() == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("box sum: five-term hand sum at alpha = 1/2") {
    // f = x^2 over [-2,2]: 1 + 2 e(1/2) + 2 e(2) = 1 - 2 + 2 = 1
    PolySystem s = make_system(1, {{{1, {2}}}});
    auto v = exp_sum_box(s, {0.5}, {0}, Rat(2), Box::symmetric(1));
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("box sum: serial equals parallel, twist is unimodular") {
    std::mt19937 rng(23);
    PolySystem s = random_system(rng, 2, 1, 2);
    std::vector<double> alpha{0.137};
    auto par = exp_sum_box(s, alpha, {0}, Rat(5), Box::symmetric(2), default_budget,
                           Exec::parallel);
    auto ser = exp_sum_box(s, alpha, {0}, Rat(5), Box::symmetric(2), default_budget,
                           Exec::serial);
    CHECK(par.real() == ser.real());
    CHECK(par.imag() == ser.imag());
    auto tw = exp_sum_box(s, alpha, {4}, Rat(5), Box::symmetric(2));
    CHECK(std::abs(tw) == doctest::Approx(std::abs(par)).epsilon(1e-12));
}

TEST_CASE("weyl count") {
    PolySystem s = make_system(1, {{{1, {2}}}});
    // alpha = 1/2, P^xi = 2: the pinned multilinear form is 2*alpha*y = y,
    // always integral, so every |y| <= 2 qualifies
    double P = 4.0, xi = 0.5, eta = std::log(1.0 / 0.4) / std::log(4.0);
    CHECK(weyl_count(s, {0.5}, xi, eta, P) == 5);

    // alpha = 0 gives the full box
    PolySystem s2 = make_system(2, {{{1, {2, 0}}, {1, {0, 2}}}});
    CHECK(weyl_count(s2, {0.0}, 0.5, 0.3, 4.0) == 25);

    // never exceeds the full box
    std::mt19937 rng(3);
    for (int t = 0; t < 4; ++t) {
        double a = std::uniform_real_distribution<double>(0, 1)(rng);
        CHECK(weyl_count(s2, {a}, 0.5, 0.3, 4.0) <= 25);
    }
}

TEST_CASE("rational approximation") {
    // alpha = 1/2 is found immediately
    auto r = rational_approx({0.5}, 0.5, 100.0, Int(1), 1, 2);
    REQUIRE(r.approx.has_value());
    CHECK(r.approx->q == 2);
    CHECK(r.approx->a[0] == 1);

    // alpha near 1/3: q-bound 10, width 1e-3
    auto r2 = rational_approx({0.333334}, 0.5, 100.0, Int(1), 1, 2);
    CHECK(r2.q_bound == doctest::Approx(10.0));
    CHECK(r2.width == doctest::Approx(1e-3));
    REQUIRE(r2.approx.has_value());
    CHECK(r2.approx->q == 3);
    CHECK(r2.approx->a[0] == 1);

    // golden ratio fractional part admits nothing at a tight width
    auto r3 = rational_approx({0.6180339887498949}, 0.25, 100.0, Int(1), 1, 2);
    CHECK_FALSE(r3.approx.has_value());
    CHECK(r3.certified_absence);
}

TEST_CASE("arc decomposition geometry") {
    // R=1, d=2, theta=0.1, P=100: q-bound 100^{0.1} < 2, single modulus q=1
    auto arcs = arc_decomposition(Rat(1, 10), 100.0, Int(1), 1, 2);
    CHECK(arcs.q_max == 1);
    CHECK(arcs.disjoint);
    CHECK(arcs.arc_count == 1);
    CHECK(arcs.q_sum == Rat(1));
    CHECK(arcs.total_volume == doctest::Approx(std::pow(100.0, -1.9)).epsilon(1e-12));

    // theta = 0.16 brings in q = 2: volume = (1 + 1/2) P^{-1.84}
    auto arcs2 = arc_decomposition(Rat(16, 100), 100.0, Int(1), 1, 2);
    CHECK(arcs2.q_max == 2);
    CHECK(arcs2.arc_count == 2);
    CHECK(arcs2.q_sum == Rat(3, 2));
    CHECK(arcs2.total_volume ==
          doctest::Approx(1.5 * std::pow(100.0, -1.84)).epsilon(1e-12));

    // lemma disjointness flag vs explicit pairwise check (R = 1)
    for (double th : {0.1, 0.16, 0.3, 0.45}) {
        auto a = arc_decomposition(Rat(static_cast<long>(th * 100), 100), 30.0, Int(1), 1, 2);
        // pairwise intersection among materialized arcs
        bool overlap = false;
        for (size_t i = 0; i < a.arcs.size() && !overlap; ++i)
            for (size_t j = i + 1; j < a.arcs.size() && !overlap; ++j) {
                double ci = static_cast<double>(a.arcs[i].a[0]) / static_cast<double>(a.arcs[i].q);
                double cj = static_cast<double>(a.arcs[j].a[0]) / static_cast<double>(a.arcs[j].q);
                double hi = a.width_unit / (2.0 * static_cast<double>(a.arcs[i].q));
                double hj = a.width_unit / (2.0 * static_cast<double>(a.arcs[j].q));
                double dist = std::abs(ci - cj);
                dist = std::min(dist, 1.0 - dist);
                if (dist < hi + hj) overlap = true;
            }
        if (a.disjoint) CHECK_FALSE(overlap);
        // interval sweep agrees with the exact sum when disjoint
        if (a.disjoint)
            CHECK(a.total_volume ==
                  doctest::Approx(std::pow(a.width_unit, 1) * a.q_sum.get_d()).epsilon(1e-12));
    }
}

TEST_CASE("sliding scale") {
    PolySystem q5 = quadric5();
    BirchParams p = birch_params(q5, 0);
    SlidingScale sc = sliding_scale(p, Rat(1, 10));
    // 2d = (R+1)(d-1) theta_T means theta_T = 2 here
    CHECK(sc.thetas.back() == Rat(2));
    CHECK(sc.thetas.front() == p.theta0);
    Rat bound = sc.epsilon * p.delta / Rat(2);
    for (size_t i = 1; i < sc.thetas.size(); ++i) {
        Rat step = sc.thetas[i] - sc.thetas[i - 1];
        CHECK(step > 0);
        CHECK(step < bound);
    }
    CHECK(static_cast<int>(sc.thetas.size()) == sc.T + 1);

    // theta_0 >= theta_T must refuse
    BirchParams bad = p;
    bad.theta0 = Rat(3);
    CHECK_THROWS_AS(sliding_scale(bad, Rat(1, 10)), input_error);
}

TEST_CASE("empirical complete-sum bound has the lemma exponent shape") {
    // |S_{a,q}| q^{-(n - K/(R(d-1)))} stays bounded for f = x^2 (K = 1/2):
    // the running max stabilizes once q covers the powers of two
    PolySystem s = make_system(1, {{{1, {2}}}});
    double running = 0, at_half = 0;
    const i64 Q = 40;
    for (i64 q = 2; q <= Q; ++q) {
        for (i64 a = 1; a <= q; ++a) {
            if (gcd_i64(a, q) != 1) continue;
            double v = std::abs(exp_sum_complete(s, {a}, q, {0}));
            running = std::max(running, v * std::pow(static_cast<double>(q), -0.5));
        }
        if (q == Q / 2) at_half = running;
    }
    CHECK(std::isfinite(running));
    CHECK(running <= 2.0 * at_half);
    CHECK(running <= std::sqrt(2.0) + 1e-9);
}
