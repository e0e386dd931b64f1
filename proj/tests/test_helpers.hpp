#pragma once

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcm/poly.hpp"

namespace qcm::testing {

// Build a system from a compact spec: one vector of (coeff, exponents) per
// polynomial.
inline PolySystem make_system(int n, std::vector<std::vector<std::pair<long, std::vector<int>>>> polys) {
    PolySystem s;
    s.n = n;
    s.R = static_cast<int>(polys.size());
    int d = 0;
    for (auto& pterms : polys) {
        std::vector<Term> terms;
        for (auto& [c, e] : pterms) {
            Term t;
            t.c = c;
            t.e = e;
            terms.push_back(t);
        }
        Poly p(n, terms);
        d = std::max(d, p.total_degree());
        s.polys.push_back(p);
    }
    s.d = d;
    s.validate();
    return s;
}

// x1^2 + x2^2 + x3^2 + x4^2 - x5^2, the workhorse quadric.
inline PolySystem quadric5() {
    return make_system(5, {{{1, {2, 0, 0, 0, 0}},
                            {1, {0, 2, 0, 0, 0}},
                            {1, {0, 0, 2, 0, 0}},
                            {1, {0, 0, 0, 2, 0}},
                            {-1, {0, 0, 0, 0, 2}}}});
}

// x^2 + 1 in one variable.
inline PolySystem x2_plus_1() {
    return make_system(1, {{{1, {2}}, {1, {0}}}});
}

// Random system with small coefficients, degree exactly d.
inline PolySystem random_system(std::mt19937& rng, int n, int R, int d, long cmax = 4) {
    std::uniform_int_distribution<long> cdist(-cmax, cmax);
    std::uniform_int_distribution<int> edist(0, d);
    PolySystem s;
    s.n = n;
    s.R = R;
    s.d = d;
    for (int i = 0; i < R; ++i) {
        std::map<std::vector<int>, long> coeffs;
        // guarantee a top-degree term on a random variable
        std::vector<int> top(n, 0);
        top[static_cast<size_t>(rng() % static_cast<unsigned>(n))] = d;
        long lead = 0;
        while (lead == 0) lead = cdist(rng);
        coeffs[top] = lead;
        int extra = 2 + static_cast<int>(rng() % 4);
        for (int t = 0; t < extra; ++t) {
            std::vector<int> e(n, 0);
            int budget = edist(rng);
            for (int j = 0; j < n && budget > 0; ++j) {
                int used = static_cast<int>(rng() % static_cast<unsigned>(budget + 1));
                e[static_cast<size_t>(j)] = used;
                budget -= used;
            }
            long c = cdist(rng);
            if (c != 0) coeffs[e] += c;
        }
        std::vector<Term> terms;
        for (auto& [e, c] : coeffs)
            if (c != 0) terms.push_back(Term{e, Int(c)});
        s.polys.emplace_back(n, terms);
        if (s.polys.back().total_degree() != d) {
            // top term got cancelled; retry this polynomial
            s.polys.pop_back();
            --i;
        }
    }
    s.validate();
    return s;
}

inline std::vector<Int> to_ints(const std::vector<long>& v) {
    std::vector<Int> out;
    out.reserve(v.size());
    for (long x : v) out.emplace_back(x);
    return out;
}

} // namespace qcm::testing
