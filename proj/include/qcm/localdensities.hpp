#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcm/poly.hpp"
#include "qcm/residues.hpp"

namespace qcm {

// #{x mod q : f(x) = nu mod q}, exact.  Composite q factors through CRT;
// prime powers route to the cheapest exact path (direct or split histogram,
// else the Hensel stratification below).
Int count_mod(const PolySystem& s, std::int64_t q, const std::vector<Int>& nu,
              std::uint64_t budget = default_budget, Exec exec = Exec::parallel);

// Serial full-enumeration reference, kept as the oracle.
Int count_mod_reference(const PolySystem& s, std::int64_t q, const std::vector<Int>& nu,
                        std::uint64_t budget = default_budget);

// Exact count mod p^N.  Smooth solutions mod p (some Jacobian minor a p-unit)
// contribute p^{(n-R)(N-1)} lifts each; non-smooth residues are recursed by
// the substitution x = x0 + p y with content factoring, a depth guard and a
// subsystem cache.
Int count_mod_prime_power(const PolySystem& s, std::int64_t p, int N,
                          const std::vector<Int>& nu,
                          std::uint64_t budget = default_budget,
                          Exec exec = Exec::parallel, int depth_cap = 6);

// Force the Hensel stratification (no histogram shortcut); used by tests.
Int count_mod_prime_power_hensel(const PolySystem& s, std::int64_t p, int N,
                                 const std::vector<Int>& nu,
                                 std::uint64_t budget = default_budget,
                                 Exec exec = Exec::parallel, int depth_cap = 6);

// Are all solutions of f = nu mod p smooth?  nullopt when p^n exceeds the
// certification budget.
std::optional<bool> all_solutions_smooth(const PolySystem& s, std::int64_t p,
                                         const std::vector<Int>& nu,
                                         std::uint64_t budget = default_budget);

enum class Stabilization { smooth_certified, consecutive_agreement, unstabilized };

struct LocalDensity {
    std::int64_t p = 0;
    std::vector<Int> nu;
    int N_used = 0;
    Rat value;            // p^{N(R-n)} * count at N_used
    bool stabilized = false;
    Stabilization how = Stabilization::unstabilized;
    std::optional<int> e; // witness valuation when known
};

LocalDensity local_density(const PolySystem& s, std::int64_t p, int N_max,
                           const std::vector<Int>& nu,
                           std::uint64_t budget = default_budget,
                           Exec exec = Exec::parallel);

// Lift x0 mod p^{2e+1} with f(x0) = nu mod p^{2e+1} and
// max_I |Delta_I(x0)|_p = p^{-e}.
struct PadicWitness {
    std::vector<Int> x0;
    std::int64_t p = 0;
    int e = 0;
};

// Throws input_error when the stored invariants fail.
void verify_witness(const PadicWitness& w, const PolySystem& s, const std::vector<Int>& nu);

std::optional<PadicWitness> find_padic_witness(const PolySystem& s, std::int64_t p,
                                               const std::vector<Int>& nu, int e_max = 2,
                                               std::uint64_t budget = default_budget);

// (p^{-1} max_I |Delta_I(x0)|_p^2)^{n-R} = p^{-(1+2e)(n-R)}, exact.
Rat density_lower_bound(const PadicWitness& w, const PolySystem& s,
                        const std::vector<Int>& nu);

struct MinorCheck {
    bool ok = false;
    int witness_valuation = 0; // e with max_I |Delta_I(x0)|_p = p^{-e}
    int N_valuation = 0;       // v_p(N)
};

// max_I |Delta_I(x0)|_p >= |N|_p for a certificate constant N (nu = 0 case).
MinorCheck witness_minor_check(const PadicWitness& w, const Int& N, const PolySystem& s);

} // namespace qcm
