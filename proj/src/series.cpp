#include "qcm/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qcm/errors.hpp"
#include "qcm/numtheory.hpp"

namespace qcm {

namespace {

using std::int64_t;

Int pow_int(int64_t base, long e) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
    return r;
}

} // namespace

Int coprime_layer_sum(const PolySystem& s, int64_t q, const std::vector<Int>& nu,
                      std::uint64_t budget, Exec exec) {
    if (q == 1) return 1;
    std::vector<uint64_t> hist = value_histogram(s, q, budget, exec);
    Int total = 0;
    std::vector<i64> m(static_cast<size_t>(s.R));
    for (size_t idx = 0; idx < hist.size(); ++idx) {
        if (hist[idx] == 0) continue;
        size_t rest = idx;
        for (int r = 0; r < s.R; ++r) {
            int64_t tr = static_cast<int64_t>(rest % static_cast<size_t>(q));
            rest /= static_cast<size_t>(q);
            Int nr = nu[static_cast<size_t>(r)] % q;
            if (nr < 0) nr += q;
            m[static_cast<size_t>(r)] = tr - nr.get_si();
        }
        total += Int(static_cast<unsigned long>(hist[idx])) * ramanujan_sum(q, m, s.R);
    }
    return total;
}

SeriesTruncation series_truncated(const PolySystem& s, const std::vector<Int>& nu, long Q_max,
                                  const std::optional<BirchParams>& params,
                                  std::uint64_t budget, Exec exec) {
    if (Q_max < 1) throw input_error("need Q_max >= 1");
    if (static_cast<int>(nu.size()) != s.R) throw input_error("nu must have length R");
    SeriesTruncation out;
    out.nu = nu;
    out.Q_max = Q_max;

    // layer sums at prime powers; multiplicativity gives the rest
    std::map<int64_t, Int> layer; // q = p^k -> A_q(nu)
    for (int64_t q = 2; q <= Q_max; ++q) {
        auto f = factorize(q);
        if (f.size() != 1) continue;
        layer[q] = coprime_layer_sum(s, q, nu, budget, exec);
    }

    Rat qsum(1); // q = 1 contributes 1
    for (int64_t q = 2; q <= Q_max; ++q) {
        Int Aq = 1;
        int64_t rest = q;
        for (auto [p, k] : factorize(q)) {
            int64_t pk = 1;
            for (int i = 0; i < k; ++i) pk *= p;
            Aq *= layer.at(pk);
            rest /= pk;
        }
        if (Aq == 0) continue;
        qsum += Rat(Aq) / Rat(pow_int(q, s.n));
    }
    qsum.canonicalize();
    out.value_qsum = qsum;

    // Euler product with prime-power cutoff p^r <= Q_max
    Rat euler(1);
    for (int64_t p : primes_up_to(Q_max)) {
        int N = 0;
        int64_t pk = 1;
        while (pk <= Q_max / p) {
            pk *= p;
            ++N;
        }
        Int c = count_mod_prime_power(s, p, N, nu, budget, exec);
        Rat factor = Rat(c) / Rat(pow_int(p, static_cast<long>(N) * (s.n - s.R)));
        factor.canonicalize();
        euler *= factor;
        out.per_prime.push_back({p, factor.get_d()});
        out.primes_used.push_back(p);
    }
    euler.canonicalize();
    out.value_euler = euler;
    out.difference = std::abs(out.value_qsum.get_d() - out.value_euler.get_d());

    if (params.has_value()) {
        Heights h = heights(s);
        Rat expK = params->K / Rat(params->d - 1);
        double ct = h.Ctilde.get_d();
        double de = Rat(params->delta / params->eta).get_d();
        out.tail_report = std::pow(ct, expK.get_d()) *
                          std::pow(static_cast<double>(Q_max), -de);
    }
    return out;
}

double tail_bound(const BirchParams& params, const Int& Ctilde, double P, double tau) {
    if (tau < 0) throw input_error("tau must be non-negative");
    // (eq:delta): delta/eta < K/(R(d-1)) - (R+1) must hold
    Rat lhs = params.delta / params.eta;
    Rat rhs = params.K / Rat(static_cast<long>(params.R) * (params.d - 1)) - Rat(params.R + 1);
    if (!(lhs < rhs)) throw input_error("params violate the delta/eta inequality");
    Rat expK = params.K / Rat(params.d - 1);
    return std::pow(Ctilde.get_d(), expK.get_d()) *
           std::pow(P, -tau * params.delta.get_d());
}

SeriesLowerBound series_lower_bound(const Int& N, const PolySystem& s,
                                    const std::vector<PadicWitness>& witnesses,
                                    std::uint64_t budget) {
    if (N <= 0) throw input_error("certificate constant must be positive");
    SeriesLowerBound out;
    Int dn = N * s.d;
    // trial factorization of d*N (certificate constants stay desk-scale)
    Int rest = dn;
    std::vector<int64_t> S;
    for (int64_t p = 2; p <= 1000000 && rest > 1; p += (p == 2 ? 1 : 2)) {
        if (!mpz_divisible_ui_p(rest.get_mpz_t(), static_cast<unsigned long>(p))) continue;
        S.push_back(p);
        while (mpz_divisible_ui_p(rest.get_mpz_t(), static_cast<unsigned long>(p)))
            rest /= static_cast<unsigned long>(p);
    }
    if (rest > 1)
        throw input_error("certificate constant has a factor beyond the trial bound");
    out.S = S;

    std::vector<Int> nu0(static_cast<size_t>(s.R), Int(0));
    out.certified = Rat(1);
    for (int64_t p : S) {
        const PadicWitness* w = nullptr;
        for (const auto& cand : witnesses)
            if (cand.p == p) w = &cand;
        if (!w)
            throw input_error("missing witness for prime " + std::to_string(p) +
                              " dividing dN");
        verify_witness(*w, s, nu0);
        int vp = valuation(N, p);
        Rat base = Rat(1) / Rat(pow_int(p, 1L + 2L * vp));
        for (int k = 0; k < s.n - s.R; ++k) out.certified *= base;
    }
    out.certified.canonicalize();

    out.empirical = 1.0;
    for (int64_t p : primes_up_to(50)) {
        if (std::find(S.begin(), S.end(), p) != S.end()) continue;
        LocalDensity ld = local_density(s, p, 3, nu0, budget);
        out.empirical *= ld.value.get_d();
    }
    return out;
}

} // namespace qcm
