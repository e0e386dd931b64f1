#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcm/birch.hpp"
#include "qcm/localdensities.hpp"
#include "qcm/poly.hpp"

namespace qcm {

struct SeriesTruncation {
    std::vector<Int> nu;
    long Q_max = 0;
    Rat value_qsum;  // sum_{q <= Q_max} q^{-n} A_q(nu), exact
    Rat value_euler; // prod_{p <= Q_max} truncated local density, exact
    std::vector<std::pair<std::int64_t, double>> per_prime;
    std::vector<std::int64_t> primes_used;
    double tail_report = 0; // Ctilde^{K/(d-1)} Q_max^{-delta/eta} when params given
    double difference = 0;  // |qsum - euler| as doubles
};

// Both truncations of the singular series.  A_q(nu) is assembled exactly:
// the inner sum over coprime a collapses to a generalized Ramanujan sum
// against the value histogram, and multiplicativity reduces everything to
// prime powers.
SeriesTruncation series_truncated(const PolySystem& s, const std::vector<Int>& nu, long Q_max,
                                  const std::optional<BirchParams>& params = std::nullopt,
                                  std::uint64_t budget = default_budget,
                                  Exec exec = Exec::parallel);

// A_q(nu) = sum over a mod q, gcd(a,q)=1, of S_{a,q}(nu); exact integer.
Int coprime_layer_sum(const PolySystem& s, std::int64_t q, const std::vector<Int>& nu,
                      std::uint64_t budget = default_budget, Exec exec = Exec::parallel);

// Reference value Ctilde^{K/(d-1)} P^{-tau delta} of the series tail.
double tail_bound(const BirchParams& params, const Int& Ctilde, double P, double tau);

struct SeriesLowerBound {
    Rat certified;          // prod_{p | dN} p^{-(1+2 v_p(N))(n-R)}
    double empirical = 1;   // prod of computed local densities for p <= 50, p not in S
    std::vector<std::int64_t> S;
};

// Certified part of the series lower bound from a certificate constant N and
// one verified witness per prime dividing dN.  The complementary factor over
// good primes is reported, never certified.
SeriesLowerBound series_lower_bound(const Int& N, const PolySystem& s,
                                    const std::vector<PadicWitness>& witnesses,
                                    std::uint64_t budget = default_budget);

} // namespace qcm
