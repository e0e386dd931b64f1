#include <doctest.h>

#include <cmath>
#include <complex>

#include "qcm/expsums.hpp"
#include "qcm/numtheory.hpp"
#include "qcm/series.hpp"
#include "test_helpers.hpp"

using namespace qcm;
using namespace qcm::testing;

namespace {

// oracle: q-sum assembled from complete sums, complex floating point
double qsum_direct(const PolySystem& s, const std::vector<i64>& nu, long Q) {
    std::complex<double> total(1, 0); // q = 1
    for (i64 q = 2; q <= Q; ++q) {
        std::vector<i64> a(static_cast<size_t>(s.R), 1);
        std::complex<double> layer(0, 0);
        while (true) {
            i64 g = q;
            for (i64 ai : a) g = gcd_i64(g, ai);
            if (g == 1) layer += exp_sum_complete(s, a, q, nu);
            int i = 0;
            while (i < s.R && a[static_cast<size_t>(i)] == q) a[static_cast<size_t>(i++)] = 1;
            if (i == s.R) break;
            ++a[static_cast<size_t>(i)];
        }
        total += layer / std::pow(static_cast<double>(q), s.n);
    }
    return total.real();
}

} // namespace

TEST_CASE("coprime layer sums are exact and multiplicative") {
    PolySystem s = make_system(1, {{{1, {2}}, {-1, {0}}}});
    for (i64 q : {2, 3, 4, 5, 9}) {
        std::complex<double> direct(0, 0);
        for (i64 a = 1; a <= q; ++a)
            if (gcd_i64(a, q) == 1) direct += exp_sum_complete(s, {a}, q, {0});
        CHECK(std::abs(direct.imag()) < 1e-9);
        CHECK(coprime_layer_sum(s, q, {Int(0)}).get_d() ==
              doctest::Approx(direct.real()).epsilon(1e-9));
    }
    // multiplicativity across coprime moduli
    Int a6 = coprime_layer_sum(s, 6, {Int(0)});
    CHECK(a6 == coprime_layer_sum(s, 2, {Int(0)}) * coprime_layer_sum(s, 3, {Int(0)}));
}

TEST_CASE("series truncation: q-sum vs direct oracle and Euler factor") {
    PolySystem s = make_system(1, {{{1, {2}}, {-1, {0}}}});
    SeriesTruncation tr = series_truncated(s, {Int(0)}, 9);
    CHECK(tr.value_qsum.get_d() == doctest::Approx(qsum_direct(s, {0}, 9)).epsilon(1e-9));

    // the p = 3 Euler factor is the stabilized density 2
    bool found3 = false;
    for (auto [p, v] : tr.per_prime)
        if (p == 3) {
            found3 = true;
            CHECK(v == doctest::Approx(2.0));
        }
    CHECK(found3);

    // Q_max = 1 keeps only the unit term
    SeriesTruncation one = series_truncated(s, {Int(0)}, 1);
    CHECK(one.value_qsum == Rat(1));
    CHECK(one.value_euler == Rat(1));
}

TEST_CASE("local obstruction collapses the Euler product") {
    PolySystem s = x2_plus_1(); // no root mod 3
    SeriesTruncation tr = series_truncated(s, {Int(0)}, 10);
    CHECK(tr.value_euler == Rat(0));
}

TEST_CASE("q-sum and Euler truncations approach each other") {
    // needs a system inside the convergence range: the quadric has K = 5/2
    PolySystem q5 = quadric5();
    std::vector<Int> nu{Int(0)};
    double first = series_truncated(q5, nu, 12).difference;
    double last = series_truncated(q5, nu, 96).difference;
    CHECK(last <= first + 1e-9);
    CHECK(last < 0.05);
}

TEST_CASE("tail bound reference value") {
    BirchParams p;
    p.n = 5;
    p.R = 1;
    p.d = 2;
    p.K = Rat(5, 2);
    p.eta = Rat(2, 9);
    p.delta = Rat(1, 20);
    p.theta0 = p.eta;
    CHECK(tail_bound(p, Int(1), 100.0, 1.0) ==
          doctest::Approx(std::pow(100.0, -0.05)).epsilon(1e-12));
    CHECK(tail_bound(p, Int(1), 100.0, 0.0) == doctest::Approx(1.0));
    // Ctilde enters through K/(d-1)
    CHECK(tail_bound(p, Int(3), 100.0, 0.0) ==
          doctest::Approx(std::pow(3.0, 2.5)).epsilon(1e-12));
    // violating the delta/eta inequality refuses
    BirchParams bad = p;
    bad.delta = Rat(10);
    CHECK_THROWS_AS(tail_bound(bad, Int(1), 100.0, 1.0), input_error);
}

TEST_CASE("series lower bound: certified factor") {
    // x^2 - 1 with certificate (-2)(x^2-1) + x(2x) = 2: N = 2, S = {2}, and
    // n = R makes the certified factor 1
    PolySystem s = make_system(1, {{{1, {2}}, {-1, {0}}}});
    auto w2 = find_padic_witness(s, 2, {Int(0)}, 2);
    REQUIRE(w2.has_value());
    SeriesLowerBound lb = series_lower_bound(Int(2), s, {*w2});
    CHECK(lb.certified == Rat(1));
    CHECK(lb.S == std::vector<i64>{2});

    // missing witness refuses
    CHECK_THROWS_AS(series_lower_bound(Int(2), s, {}), input_error);

    // n - R = 4 at p = 2 with v_2(N) = 1: factor 2^{-12}
    PolySystem q5 = quadric5();
    auto wq = find_padic_witness(q5, 2, {Int(0)}, 2);
    REQUIRE(wq.has_value());
    CHECK(wq->e == 1);
    SeriesLowerBound lbq = series_lower_bound(Int(2), q5, {*wq});
    Rat expect(1);
    for (int k = 0; k < 12; ++k) expect /= 2;
    CHECK(lbq.certified == expect);
    CHECK(lbq.empirical > 0);

    // certified part sits below the Euler truncation
    SeriesTruncation tr = series_truncated(q5, std::vector<Int>(1, Int(0)), 50);
    CHECK(lbq.certified.get_d() * lbq.empirical <=
          tr.value_euler.get_d() * (1.0 + 1e-9));
}
