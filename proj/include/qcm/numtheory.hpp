#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace qcm {

using i64 = std::int64_t;
using u64 = std::uint64_t;

i64 gcd_i64(i64 a, i64 b);
i64 mod_pow(i64 base, i64 exp, i64 mod);
i64 mod_inverse(i64 a, i64 mod); // requires gcd(a, mod) = 1

bool is_prime(i64 n);
std::vector<i64> primes_up_to(i64 n);

// Prime factorization by trial division; pairs (p, k) with p ascending.
std::vector<std::pair<i64, int>> factorize(i64 n);

i64 euler_phi(i64 n);
// Jordan totient J_R(q) = #{a in [1,q]^R : gcd(a_1,...,a_R,q) = 1}.
mpz_class jordan_totient(i64 q, int R);
int mobius(i64 n);

// Generalized Ramanujan sum:
//   sum over a in [1,q]^R with gcd(a,q)=1 of e(a . m / q)
//     = sum_{e | gcd(q, m_1, ..., m_R)} mu(q/e) e^R.
mpz_class ramanujan_sum(i64 q, const std::vector<i64>& m, int R);

// Exact p-adic valuation; v_p(0) is reported as -1 (infinite).
int valuation(const mpz_class& x, i64 p);

// Largest r with r*r <= n, plus an exact perfect-square test.
i64 isqrt_i64(i64 n);
bool is_perfect_square(i64 n, i64* root);

// floor(num/den) and ceil(num/den) for exact rational bounds.
mpz_class floor_div(const mpz_class& num, const mpz_class& den);
mpz_class ceil_div(const mpz_class& num, const mpz_class& den);
long floor_rat(const mpq_class& x);
long ceil_rat(const mpq_class& x);

} // namespace qcm
