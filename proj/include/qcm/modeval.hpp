#pragma once

#include <cstdint>
#include <vector>

#include "qcm/poly.hpp"

namespace qcm {

// Polynomial compiled for repeated evaluation mod q on machine integers.
// Products stay inside int64 because every factor is reduced below q <= 2^31.
struct ModPoly {
    struct MTerm {
        std::int64_t c;
        std::vector<std::pair<int, int>> powers; // (variable, exponent)
    };
    std::vector<MTerm> terms;
    std::int64_t constant = 0;

    static ModPoly compile(const Poly& f, std::int64_t q) {
        ModPoly mp;
        for (const Term& t : f.terms()) {
            std::int64_t c = static_cast<std::int64_t>(
                mpz_fdiv_ui(t.c.get_mpz_t(), static_cast<unsigned long>(q)));
            if (c == 0) continue;
            if (t.degree() == 0) {
                mp.constant = (mp.constant + c) % q;
                continue;
            }
            MTerm mt;
            mt.c = c;
            for (size_t j = 0; j < t.e.size(); ++j)
                if (t.e[j] > 0) mt.powers.push_back({static_cast<int>(j), t.e[j]});
            mp.terms.push_back(std::move(mt));
        }
        return mp;
    }
};

// Per-point power table: set_var refreshes one variable, eval contracts a
// compiled polynomial against the table.
struct ModTable {
    std::int64_t q;
    int maxdeg;
    std::vector<std::int64_t> pow; // var * (maxdeg+1) + e

    ModTable(int nvars, int maxdeg_, std::int64_t q_) : q(q_), maxdeg(maxdeg_) {
        pow.assign(static_cast<size_t>(nvars) * static_cast<size_t>(maxdeg + 1), 1 % q);
    }

    void set_var(int j, std::int64_t value) {
        std::int64_t* row = pow.data() + static_cast<size_t>(j) * static_cast<size_t>(maxdeg + 1);
        row[0] = 1 % q;
        std::int64_t v = ((value % q) + q) % q;
        for (int e = 1; e <= maxdeg; ++e) row[e] = row[e - 1] * v % q;
    }

    std::int64_t eval(const ModPoly& mp) const {
        std::int64_t total = mp.constant;
        for (const auto& t : mp.terms) {
            std::int64_t v = t.c;
            for (auto [j, e] : t.powers)
                v = v * pow[static_cast<size_t>(j) * static_cast<size_t>(maxdeg + 1) +
                            static_cast<size_t>(e)] %
                    q;
            total += v;
            if (total >= q) total -= q;
        }
        return total;
    }
};

} // namespace qcm
