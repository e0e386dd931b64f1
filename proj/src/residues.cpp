#include "qcm/residues.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "qcm/errors.hpp"
#include "qcm/modeval.hpp"

namespace qcm {

namespace {

using std::int64_t;
using std::uint64_t;

uint64_t checked_pow(int64_t base, int exp, uint64_t limit) {
    uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > limit / static_cast<uint64_t>(base))
            return limit + 1;
        r *= static_cast<uint64_t>(base);
    }
    return r;
}

// Restrict a polynomial to terms supported on one variable block.
Poly block_restrict(const Poly& f, const std::vector<int>* vars_subset) {
    if (!vars_subset) return f;
    std::vector<Term> terms;
    for (const Term& t : f.terms()) {
        if (t.degree() == 0) continue;
        bool mine = true;
        for (size_t j = 0; j < t.e.size(); ++j)
            if (t.e[j] > 0 &&
                std::find(vars_subset->begin(), vars_subset->end(), static_cast<int>(j)) ==
                    vars_subset->end())
                mine = false;
        if (mine) terms.push_back(t);
    }
    return Poly(f.nvars(), terms);
}

// Enumerate values of the given variables over [0,q)^k and histogram the
// R-tuple of polynomial values.  Parallelized over the first variable.
std::vector<uint64_t> enumerate_block(const std::vector<ModPoly>& polys, int nvars,
                                      int maxdeg, const std::vector<int>& vars, int64_t q,
                                      int R, Exec exec) {
    size_t hist_size = 1;
    for (int i = 0; i < R; ++i) hist_size *= static_cast<size_t>(q);
    std::vector<uint64_t> hist(hist_size, 0);
    const int k = static_cast<int>(vars.size());
    if (k == 0) {
        size_t idx = 0;
        ModTable ev(nvars, maxdeg, q);
        for (int i = R - 1; i >= 0; --i) idx = idx * static_cast<size_t>(q) +
                                              static_cast<size_t>(ev.eval(polys[static_cast<size_t>(i)]));
        hist[idx] = 1;
        return hist;
    }

    const bool par = (exec == Exec::parallel) && q > 1;
#pragma omp parallel if (par)
    {
        std::vector<uint64_t> local(hist_size, 0);
        ModTable ev(nvars, maxdeg, q);
        std::vector<int64_t> x(static_cast<size_t>(k), 0);
        for (int j = 1; j < k; ++j) ev.set_var(vars[static_cast<size_t>(j)], 0);
#pragma omp for schedule(static)
        for (int64_t lead = 0; lead < q; ++lead) {
            ev.set_var(vars[0], lead);
            std::fill(x.begin(), x.end(), 0);
            x[0] = lead;
            for (int j = 1; j < k; ++j) ev.set_var(vars[static_cast<size_t>(j)], 0);
            while (true) {
                size_t idx = 0;
                for (int i = R - 1; i >= 0; --i)
                    idx = idx * static_cast<size_t>(q) +
                          static_cast<size_t>(ev.eval(polys[static_cast<size_t>(i)]));
                ++local[idx];
                int j = k - 1;
                while (j >= 1) {
                    if (++x[static_cast<size_t>(j)] < q) {
                        ev.set_var(vars[static_cast<size_t>(j)], x[static_cast<size_t>(j)]);
                        break;
                    }
                    x[static_cast<size_t>(j)] = 0;
                    ev.set_var(vars[static_cast<size_t>(j)], 0);
                    --j;
                }
                if (j < 1) break;
            }
        }
#pragma omp critical
        for (size_t i = 0; i < hist_size; ++i) hist[i] += local[i];
    }
    return hist;
}

std::vector<uint64_t> convolve_mod(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b,
                                   int64_t q, int R) {
    size_t size = a.size();
    std::vector<uint64_t> out(size, 0);
    std::vector<size_t> digits(static_cast<size_t>(R));
    for (size_t i = 0; i < size; ++i) {
        if (a[i] == 0) continue;
        // decode i
        size_t rest = i;
        for (int r = 0; r < R; ++r) {
            digits[static_cast<size_t>(r)] = rest % static_cast<size_t>(q);
            rest /= static_cast<size_t>(q);
        }
        for (size_t j = 0; j < size; ++j) {
            if (b[j] == 0) continue;
            size_t rj = j, idx = 0, mult = 1;
            for (int r = 0; r < R; ++r) {
                size_t dj = rj % static_cast<size_t>(q);
                rj /= static_cast<size_t>(q);
                idx += ((digits[static_cast<size_t>(r)] + dj) % static_cast<size_t>(q)) * mult;
                mult *= static_cast<size_t>(q);
            }
            out[idx] += a[i] * b[j];
        }
    }
    return out;
}

} // namespace

std::vector<std::vector<int>> variable_blocks(const PolySystem& s) {
    std::vector<int> parent(static_cast<size_t>(s.n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    auto unite = [&](int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); };
    for (const Poly& f : s.polys)
        for (const Term& t : f.terms()) {
            int first = -1;
            for (int j = 0; j < s.n; ++j)
                if (t.e[static_cast<size_t>(j)] > 0) {
                    if (first < 0) first = j;
                    else unite(first, j);
                }
        }
    std::vector<std::vector<int>> blocks;
    std::vector<int> where(static_cast<size_t>(s.n), -1);
    for (int j = 0; j < s.n; ++j) {
        int root = find(j);
        if (where[static_cast<size_t>(root)] < 0) {
            where[static_cast<size_t>(root)] = static_cast<int>(blocks.size());
            blocks.push_back({});
        }
        blocks[static_cast<size_t>(where[static_cast<size_t>(root)])].push_back(j);
    }
    return blocks;
}

std::vector<uint64_t> value_histogram_reference(const PolySystem& s, int64_t q,
                                                uint64_t budget) {
    if (q < 1) throw input_error("modulus must be positive");
    if (checked_pow(q, s.n, budget) > budget)
        throw budget_error("value_histogram: q^n exceeds budget");
    std::vector<ModPoly> polys;
    for (const Poly& f : s.polys) polys.push_back(ModPoly::compile(f, q));
    std::vector<int> vars(static_cast<size_t>(s.n));
    std::iota(vars.begin(), vars.end(), 0);
    return enumerate_block(polys, s.n, s.d, vars, q, s.R, Exec::serial);
}

std::vector<uint64_t> value_histogram(const PolySystem& s, int64_t q, uint64_t budget,
                                      Exec exec) {
    if (q < 1) throw input_error("modulus must be positive");
    if (q == 1) return {1};

    std::vector<std::vector<int>> blocks = variable_blocks(s);
    size_t hist_size = 1;
    for (int i = 0; i < s.R; ++i) hist_size *= static_cast<size_t>(q);

    uint64_t conv_cost = hist_size * hist_size;
    uint64_t split_cost = 0;
    for (const auto& blk : blocks) {
        uint64_t c = checked_pow(q, static_cast<int>(blk.size()), budget);
        split_cost = (c > budget || split_cost > budget - c) ? budget + 1 : split_cost + c;
    }
    bool use_split = blocks.size() > 1 && conv_cost <= 200'000'000ULL &&
                     split_cost <= budget;
    if (!use_split) {
        if (checked_pow(q, s.n, budget) > budget)
            throw budget_error("value_histogram: q^n exceeds budget");
        std::vector<ModPoly> polys;
        for (const Poly& f : s.polys) polys.push_back(ModPoly::compile(f, q));
        std::vector<int> vars(static_cast<size_t>(s.n));
        std::iota(vars.begin(), vars.end(), 0);
        return enumerate_block(polys, s.n, s.d, vars, q, s.R, exec);
    }

    // split path: per-block histograms (constants excluded), convolved, then
    // shifted by the constant vector
    std::vector<uint64_t> acc;
    for (const auto& blk : blocks) {
        std::vector<ModPoly> polys;
        for (const Poly& f : s.polys) polys.push_back(ModPoly::compile(block_restrict(f, &blk), q));
        std::vector<uint64_t> h = enumerate_block(polys, s.n, s.d, blk, q, s.R, exec);
        acc = acc.empty() ? std::move(h) : convolve_mod(acc, h, q, s.R);
    }
    // constants
    std::vector<int64_t> constants(static_cast<size_t>(s.R), 0);
    for (int i = 0; i < s.R; ++i)
        for (const Term& t : s.polys[static_cast<size_t>(i)].terms())
            if (t.degree() == 0)
                constants[static_cast<size_t>(i)] =
                    (constants[static_cast<size_t>(i)] +
                     static_cast<int64_t>(mpz_fdiv_ui(t.c.get_mpz_t(), static_cast<unsigned long>(q)))) %
                    q;
    bool any_const = false;
    for (int64_t c : constants) any_const |= (c != 0);
    if (!any_const) return acc;
    std::vector<uint64_t> shifted(hist_size, 0);
    for (size_t i = 0; i < hist_size; ++i) {
        if (acc[i] == 0) continue;
        size_t rest = i, idx = 0, mult = 1;
        for (int r = 0; r < s.R; ++r) {
            size_t dr = rest % static_cast<size_t>(q);
            rest /= static_cast<size_t>(q);
            idx += ((dr + static_cast<size_t>(constants[static_cast<size_t>(r)])) %
                    static_cast<size_t>(q)) *
                   mult;
            mult *= static_cast<size_t>(q);
        }
        shifted[idx] = acc[i];
    }
    return shifted;
}

} // namespace qcm
