#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <vector>

namespace qcm {

// Exact element of Q(zeta_q) stored as sum_j coef[j] * e(j/q).  The stored
// vector is not unique; equality and is_rational go through reduction modulo
// the q-th cyclotomic polynomial.  Intended for moduli up to a few hundred,
// where it anchors golden regression values that float sums cannot.
class CycValue {
  public:
    CycValue() : q_(1), coef_(1, mpq_class(0)) {}
    explicit CycValue(std::int64_t q) : q_(q), coef_(static_cast<size_t>(q), mpq_class(0)) {}

    static CycValue rational(const mpq_class& r);
    // e(k/q)
    static CycValue root_of_unity(std::int64_t q, std::int64_t k);

    std::int64_t order() const { return q_; }
    const std::vector<mpq_class>& coefficients() const { return coef_; }

    void add_root(std::int64_t k, const mpq_class& c); // += c * e(k/q)

    CycValue operator+(const CycValue& o) const;
    CycValue operator-(const CycValue& o) const;
    CycValue operator*(const CycValue& o) const;
    CycValue operator*(const mpq_class& c) const;

    // Multiplication by e(k/q') merged into a common order.
    CycValue twisted(std::int64_t qprime, std::int64_t k) const;
    CycValue conjugate() const;
    CycValue rescaled(std::int64_t new_q) const; // requires q | new_q

    // Coefficient vector reduced mod Phi_q, length phi(q).
    std::vector<mpq_class> canonical() const;
    bool operator==(const CycValue& o) const;
    bool is_rational(mpq_class* value = nullptr) const;

    std::complex<double> to_complex() const;

  private:
    std::int64_t q_;
    std::vector<mpq_class> coef_;
};

// Integer coefficients of the q-th cyclotomic polynomial, ascending degree.
std::vector<mpz_class> cyclotomic_polynomial(std::int64_t q);

} // namespace qcm
