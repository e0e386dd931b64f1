#include "qcm/numtheory.hpp"

#include <cmath>
#include <numeric>

#include "qcm/errors.hpp"

namespace qcm {

i64 gcd_i64(i64 a, i64 b) {
    return std::gcd(a, b);
}

i64 mod_pow(i64 base, i64 exp, i64 mod) {
    __int128 r = 1, b = ((base % mod) + mod) % mod;
    while (exp > 0) {
        if (exp & 1) r = r * b % mod;
        b = b * b % mod;
        exp >>= 1;
    }
    return static_cast<i64>(r);
}

i64 mod_inverse(i64 a, i64 mod) {
    i64 t = 0, newt = 1, r = mod, newr = ((a % mod) + mod) % mod;
    while (newr != 0) {
        i64 q = r / newr;
        std::swap(t, newt);
        newt -= q * t;
        std::swap(r, newr);
        newr -= q * r;
    }
    if (r != 1) throw input_error("mod_inverse: arguments not coprime");
    return ((t % mod) + mod) % mod;
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    for (i64 d = 41; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::vector<i64> primes_up_to(i64 n) {
    std::vector<i64> out;
    if (n < 2) return out;
    std::vector<bool> sieve(static_cast<size_t>(n) + 1, true);
    for (i64 i = 2; i <= n; ++i) {
        if (!sieve[static_cast<size_t>(i)]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= n; j += i) sieve[static_cast<size_t>(j)] = false;
    }
    return out;
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
    std::vector<std::pair<i64, int>> out;
    if (n < 1) throw input_error("factorize expects n >= 1");
    for (i64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        out.push_back({p, k});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, k] : factorize(n)) r -= r / p;
    return r;
}

mpz_class jordan_totient(i64 q, int R) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(q),
                  static_cast<unsigned long>(R));
    for (auto [p, k] : factorize(q)) {
        mpz_class pr;
        mpz_ui_pow_ui(pr.get_mpz_t(), static_cast<unsigned long>(p),
                      static_cast<unsigned long>(R));
        r = r / pr * (pr - 1);
    }
    return r;
}

int mobius(i64 n) {
    int sign = 1;
    for (auto [p, k] : factorize(n)) {
        if (k > 1) return 0;
        sign = -sign;
    }
    return sign;
}

mpz_class ramanujan_sum(i64 q, const std::vector<i64>& m, int R) {
    if (q == 1) return 1;
    i64 g = q;
    for (i64 mi : m) g = std::gcd(g, ((mi % q) + q) % q);
    mpz_class total = 0;
    for (i64 e = 1; e <= g; ++e) {
        if (g % e) continue;
        int mu = mobius(q / e);
        if (mu == 0) continue;
        mpz_class er;
        mpz_ui_pow_ui(er.get_mpz_t(), static_cast<unsigned long>(e),
                      static_cast<unsigned long>(R));
        total += mu * er;
    }
    return total;
}

int valuation(const mpz_class& x, i64 p) {
    if (x == 0) return -1;
    mpz_class a = abs(x);
    int v = 0;
    while (mpz_divisible_ui_p(a.get_mpz_t(), static_cast<unsigned long>(p))) {
        a /= static_cast<unsigned long>(p);
        ++v;
    }
    return v;
}

i64 isqrt_i64(i64 n) {
    if (n < 0) throw input_error("isqrt of negative");
    i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_perfect_square(i64 n, i64* root) {
    if (n < 0) return false;
    i64 r = isqrt_i64(n);
    if (r * r != n) return false;
    if (root) *root = r;
    return true;
}

mpz_class floor_div(const mpz_class& num, const mpz_class& den) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

mpz_class ceil_div(const mpz_class& num, const mpz_class& den) {
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

long floor_rat(const mpq_class& x) {
    return floor_div(x.get_num(), x.get_den()).get_si();
}

long ceil_rat(const mpq_class& x) {
    return ceil_div(x.get_num(), x.get_den()).get_si();
}

} // namespace qcm
