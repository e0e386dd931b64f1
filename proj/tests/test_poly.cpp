#include <doctest.h>

#include <random>

#include "qcm/poly.hpp"
#include "test_helpers.hpp"

using namespace qcm;
using namespace qcm::testing;

namespace {

Int binomial(long a, long b) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(b));
    return r;
}

std::vector<Int> random_point(std::mt19937& rng, int n, long range) {
    std::uniform_int_distribution<long> dist(-range, range);
    std::vector<Int> x(static_cast<size_t>(n));
    for (auto& xi : x) xi = dist(rng);
    return x;
}

} // namespace

TEST_CASE("parse_system basics") {
    PolySystem s = parse_system(R"({"n":1,"R":1,"polys":[[{"e":[2],"c":"1"},{"e":[0],"c":"1"}]]})");
    CHECK(s.d == 2);
    CHECK(s.n == 1);
    CHECK(s.polys[0].eval({Int(2)}) == 5);

    // five-variable quadric: d inferred, 5 terms
    PolySystem q = parse_system(serialize_system(quadric5()));
    CHECK(q.d == 2);
    CHECK(q.polys[0].terms().size() == 5);

    CHECK_THROWS_AS(parse_system(R"({"n":1,"R":2,"polys":[
        [{"e":[2],"c":"1"}],[{"e":[3],"c":"1"}]]})"),
                    input_error);
    CHECK_THROWS_AS(parse_system(R"({"n":1,"R":1,"polys":[[]]})"), input_error);
    CHECK_THROWS_AS(parse_system("not json"), input_error);
    // round trip is canonical
    std::string once = serialize_system(q);
    CHECK(once == serialize_system(parse_system(once)));
}

TEST_CASE("top_degree_part and heights") {
    // x^2 + x - 3 -> x^2, C=3, Ctilde=1
    PolySystem s = make_system(1, {{{1, {2}}, {1, {1}}, {-3, {0}}}});
    PolySystem t = top_degree_part(s);
    CHECK(t.polys[0] == Poly(1, {Term{{2}, Int(1)}}));
    Heights h = heights(s);
    CHECK(h.C == 3);
    CHECK(h.Ctilde == 1);

    // idempotent on homogeneous input
    CHECK(top_degree_part(t).polys[0] == t.polys[0]);

    // x1^2 + x2^2 - x1 - 3
    PolySystem s2 = make_system(2, {{{1, {2, 0}}, {1, {0, 2}}, {-1, {1, 0}}, {-3, {0, 0}}}});
    CHECK(top_degree_part(s2).polys[0].terms().size() == 2);

    Heights h3 = heights(make_system(1, {{{7, {3}}, {-2, {1}}}}));
    CHECK(h3.C == 7);
    CHECK(h3.Ctilde == 7);

    Heights h5 = heights(quadric5());
    CHECK(h5.C == 1);
    CHECK(h5.Ctilde == 1);
}

TEST_CASE("homogeneous scaling of top degree part") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        PolySystem s = random_system(rng, 3, 1, 2 + static_cast<int>(rng() % 2));
        PolySystem t = top_degree_part(s);
        std::vector<Int> x = random_point(rng, 3, 5);
        long lambda = 1 + static_cast<long>(rng() % 4);
        std::vector<Int> lx = x;
        for (auto& xi : lx) xi *= lambda;
        Int expect = t.polys[0].eval(x);
        for (int k = 0; k < s.d; ++k) expect *= lambda;
        CHECK(t.polys[0].eval(lx) == expect);
    }
}

TEST_CASE("evaluate") {
    PolySystem s = make_system(3, {{{1, {2, 0, 0}}, {1, {0, 2, 0}}, {-1, {0, 0, 2}}}});
    CHECK(s.evaluate(to_ints({1, 2, 0}))[0] == 5);
    // f(0) = constant term
    PolySystem c = make_system(1, {{{1, {2}}, {42, {0}}}});
    CHECK(c.evaluate({Int(0)})[0] == 42);
    CHECK_THROWS_AS(s.evaluate({Int(1)}), input_error);
}

TEST_CASE("jacobian_minor") {
    // f = x^2 + 1, I = {0} -> 2x
    PolySystem s = x2_plus_1();
    Poly m = jacobian_minor(s, {0});
    CHECK(m == Poly(1, {Term{{1}, Int(2)}}));

    // f = (x1^2 + x2^2, x1 x2): det [[2x1, 2x2],[x2, x1]] = 2x1^2 - 2x2^2
    PolySystem s2 = make_system(2, {{{1, {2, 0}}, {1, {0, 2}}}, {{1, {1, 1}}}});
    Poly m2 = jacobian_minor(s2, {0, 1});
    CHECK(m2 == Poly(2, {Term{{2, 0}, Int(2)}, Term{{0, 2}, Int(-2)}}));

    CHECK_THROWS_AS(jacobian_minor(s2, {0}), input_error);
}

TEST_CASE("jacobian_minor matches numeric determinant at random points") {
    std::mt19937 rng(11);
    PolySystem s2 = make_system(2, {{{1, {2, 0}}, {1, {0, 2}}}, {{1, {1, 1}}}});
    for (int trial = 0; trial < 16; ++trial) {
        std::vector<Int> x = random_point(rng, 2, 9);
        // numeric Jacobian determinant
        Int a = s2.polys[0].derivative(0).eval(x);
        Int b = s2.polys[0].derivative(1).eval(x);
        Int c = s2.polys[1].derivative(0).eval(x);
        Int d = s2.polys[1].derivative(1).eval(x);
        CHECK(jacobian_minor(s2, {0, 1}).eval(x) == a * d - b * c);
    }
}

TEST_CASE("multilinear form") {
    // ftilde = x^2: Gamma(u,v) = 2uv
    MultilinearForm g(Poly(1, {Term{{2}, Int(1)}}), 2);
    CHECK(g.eval({{Int(3)}, {Int(3)}}) == 18);

    // ftilde = x1 x2: Gamma((1,0),(0,1)) = 1 and symmetric
    MultilinearForm b(Poly(2, {Term{{1, 1}, Int(1)}}), 2);
    CHECK(b.eval({to_ints({1, 0}), to_ints({0, 1})}) == 1);
    CHECK(b.eval({to_ints({0, 1}), to_ints({1, 0})}) == 1);
    CHECK(b.eval({to_ints({0, 0}), to_ints({5, 7})}) == 0);

    CHECK_THROWS_AS(b.eval({to_ints({1, 0})}), input_error);
}

TEST_CASE("multilinear diagonal identity Gamma(x,..,x) = d! ftilde(x)") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 14; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        int d = 2 + static_cast<int>(rng() % 2);
        PolySystem s = random_system(rng, n, 1, d);
        Poly ft = top_degree_part(s).polys[0];
        MultilinearForm g(ft, d);
        std::vector<Int> x = random_point(rng, n, 6);
        Int fact = 1;
        for (int k = 2; k <= d; ++k) fact *= k;
        CHECK(g.eval(std::vector<std::vector<Int>>(static_cast<size_t>(d), x)) ==
              fact * ft.eval(x));
    }
}

TEST_CASE("affine_substitute") {
    // f = x^2, M=(2), m=(1) -> 4y^2 + 4y + 1
    PolySystem s = make_system(1, {{{1, {2}}}});
    PolySystem g = affine_substitute(s, {Int(2)}, {Int(1)});
    CHECK(g.polys[0] == Poly(1, {Term{{2}, Int(4)}, Term{{1}, Int(4)}, Term{{0}, Int(1)}}));

    // identity
    PolySystem id = affine_substitute(quadric5(), std::vector<Int>(5, Int(1)),
                                      std::vector<Int>(5, Int(0)));
    CHECK(id.polys[0] == quadric5().polys[0]);

    // f = x1^2 - x2^2, M = (1,3): height grows by 9
    PolySystem s2 = make_system(2, {{{1, {2, 0}}, {-1, {0, 2}}}});
    PolySystem g2 = affine_substitute(s2, {Int(1), Int(3)}, {Int(0), Int(0)});
    CHECK(g2.polys[0] == Poly(2, {Term{{2, 0}, Int(1)}, Term{{0, 2}, Int(-9)}}));
    CHECK(heights(g2).C == 9);
}

TEST_CASE("affine_substitute composition and height bound") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        int d = 2 + static_cast<int>(rng() % 2);
        PolySystem s = random_system(rng, n, 1, d);
        std::vector<Int> M(static_cast<size_t>(n)), m(static_cast<size_t>(n));
        Int Msup = 1, msup = 0;
        for (int j = 0; j < n; ++j) {
            M[static_cast<size_t>(j)] = 1 + static_cast<long>(rng() % 3);
            m[static_cast<size_t>(j)] = static_cast<long>(rng() % 5) - 2;
            Msup = std::max(Msup, M[static_cast<size_t>(j)]);
            msup = std::max(msup, Int(abs(m[static_cast<size_t>(j)])));
        }
        PolySystem g = affine_substitute(s, M, m);

        // evaluate(g, y) == evaluate(f, My + m), exact
        std::vector<Int> y = random_point(rng, n, 4);
        std::vector<Int> My(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            My[static_cast<size_t>(j)] = M[static_cast<size_t>(j)] * y[static_cast<size_t>(j)] +
                                         m[static_cast<size_t>(j)];
        CHECK(g.evaluate(y) == s.evaluate(My));

        // top_degree_part(g) = ftilde(My)
        PolySystem gt = top_degree_part(g);
        PolySystem ft = top_degree_part(s);
        PolySystem ft_scaled = affine_substitute(ft, M, std::vector<Int>(static_cast<size_t>(n), Int(0)));
        CHECK(gt.polys[0] == ft_scaled.polys[0]);

        // coarse certified height bound binom(n+d,d) |M|^d (1+|m|)^d C
        Int bound = binomial(n + d, d) * heights(s).C;
        for (int k = 0; k < d; ++k) bound *= Msup * (1 + msup);
        CHECK(heights(g).C <= bound);
    }
}

TEST_CASE("box validation") {
    Box b = Box::symmetric(3);
    b.validate();
    CHECK(b.is_extension());
    CHECK(b.volume() == doctest::Approx(8.0));
    Box u = Box::unit(2);
    CHECK_FALSE(u.volume() > 1.0);
    Box bad;
    bad.sides = {{Rat(-2), Rat(0)}};
    CHECK_THROWS_AS(bad.validate(), input_error);
}
