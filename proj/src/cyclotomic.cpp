#include "qcm/cyclotomic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include "qcm/errors.hpp"
#include "qcm/numtheory.hpp"

namespace qcm {

namespace {

std::map<std::int64_t, std::vector<mpz_class>> cyclo_cache;
std::mutex cyclo_mutex;

// Exact division of integer polynomials, divisor monic.
std::vector<mpz_class> divide_monic(std::vector<mpz_class> num,
                                    const std::vector<mpz_class>& den) {
    int dn = static_cast<int>(num.size()) - 1;
    int dd = static_cast<int>(den.size()) - 1;
    std::vector<mpz_class> quot(static_cast<size_t>(dn - dd + 1), mpz_class(0));
    for (int k = dn - dd; k >= 0; --k) {
        mpz_class c = num[static_cast<size_t>(k + dd)];
        quot[static_cast<size_t>(k)] = c;
        if (c == 0) continue;
        for (int j = 0; j <= dd; ++j)
            num[static_cast<size_t>(k + j)] -= c * den[static_cast<size_t>(j)];
    }
    return quot;
}

// Phi_q = (x^q - 1) / prod_{d | q, d < q} Phi_d, cache assumed locked.
const std::vector<mpz_class>& cyclotomic_locked(std::int64_t q) {
    auto it = cyclo_cache.find(q);
    if (it != cyclo_cache.end()) return it->second;
    std::vector<mpz_class> result;
    if (q == 1) {
        result = {mpz_class(-1), mpz_class(1)};
    } else {
        std::vector<mpz_class> poly(static_cast<size_t>(q) + 1, mpz_class(0));
        poly[0] = -1;
        poly[static_cast<size_t>(q)] = 1;
        for (std::int64_t d = 1; d < q; ++d)
            if (q % d == 0) poly = divide_monic(std::move(poly), cyclotomic_locked(d));
        result = std::move(poly);
    }
    return cyclo_cache.emplace(q, std::move(result)).first->second;
}

} // namespace

std::vector<mpz_class> cyclotomic_polynomial(std::int64_t q) {
    if (q < 1) throw input_error("cyclotomic polynomial needs q >= 1");
    std::lock_guard<std::mutex> lock(cyclo_mutex);
    return cyclotomic_locked(q);
}

CycValue CycValue::rational(const mpq_class& r) {
    CycValue v(1);
    v.coef_[0] = r;
    return v;
}

CycValue CycValue::root_of_unity(std::int64_t q, std::int64_t k) {
    CycValue v(q);
    v.add_root(k, mpq_class(1));
    return v;
}

void CycValue::add_root(std::int64_t k, const mpq_class& c) {
    k %= q_;
    if (k < 0) k += q_;
    coef_[static_cast<size_t>(k)] += c;
}

CycValue CycValue::rescaled(std::int64_t new_q) const {
    if (new_q % q_) throw input_error("rescale target must be a multiple of the order");
    CycValue v(new_q);
    std::int64_t f = new_q / q_;
    for (std::int64_t j = 0; j < q_; ++j)
        if (coef_[static_cast<size_t>(j)] != 0)
            v.coef_[static_cast<size_t>(j * f)] = coef_[static_cast<size_t>(j)];
    return v;
}

CycValue CycValue::operator+(const CycValue& o) const {
    std::int64_t q = std::lcm(q_, o.q_);
    CycValue a = rescaled(q), b = o.rescaled(q);
    for (std::int64_t j = 0; j < q; ++j)
        a.coef_[static_cast<size_t>(j)] += b.coef_[static_cast<size_t>(j)];
    return a;
}

CycValue CycValue::operator-(const CycValue& o) const {
    std::int64_t q = std::lcm(q_, o.q_);
    CycValue a = rescaled(q), b = o.rescaled(q);
    for (std::int64_t j = 0; j < q; ++j)
        a.coef_[static_cast<size_t>(j)] -= b.coef_[static_cast<size_t>(j)];
    return a;
}

CycValue CycValue::operator*(const CycValue& o) const {
    std::int64_t q = std::lcm(q_, o.q_);
    CycValue a = rescaled(q), b = o.rescaled(q);
    CycValue r(q);
    for (std::int64_t i = 0; i < q; ++i) {
        if (a.coef_[static_cast<size_t>(i)] == 0) continue;
        for (std::int64_t j = 0; j < q; ++j) {
            if (b.coef_[static_cast<size_t>(j)] == 0) continue;
            std::int64_t k = (i + j) % q;
            r.coef_[static_cast<size_t>(k)] +=
                a.coef_[static_cast<size_t>(i)] * b.coef_[static_cast<size_t>(j)];
        }
    }
    return r;
}

CycValue CycValue::operator*(const mpq_class& c) const {
    CycValue r = *this;
    for (auto& x : r.coef_) x *= c;
    return r;
}

CycValue CycValue::twisted(std::int64_t qprime, std::int64_t k) const {
    return *this * root_of_unity(qprime, k);
}

CycValue CycValue::conjugate() const {
    CycValue r(q_);
    for (std::int64_t j = 0; j < q_; ++j)
        r.coef_[static_cast<size_t>((q_ - j) % q_)] = coef_[static_cast<size_t>(j)];
    return r;
}

std::vector<mpq_class> CycValue::canonical() const {
    const std::vector<mpz_class> phi = cyclotomic_polynomial(q_);
    const int deg = static_cast<int>(phi.size()) - 1;
    std::vector<mpq_class> rem = coef_;
    for (int k = static_cast<int>(rem.size()) - 1; k >= deg; --k) {
        mpq_class c = rem[static_cast<size_t>(k)];
        if (c == 0) continue;
        for (int j = 0; j <= deg; ++j)
            rem[static_cast<size_t>(k - deg + j)] -= c * mpq_class(phi[static_cast<size_t>(j)]);
    }
    rem.resize(static_cast<size_t>(deg));
    for (auto& c : rem) c.canonicalize();
    return rem;
}

bool CycValue::operator==(const CycValue& o) const {
    std::int64_t q = std::lcm(q_, o.q_);
    std::vector<mpq_class> diff = (rescaled(q) - o.rescaled(q)).canonical();
    for (const auto& c : diff)
        if (c != 0) return false;
    return true;
}

bool CycValue::is_rational(mpq_class* value) const {
    std::vector<mpq_class> can = canonical();
    for (size_t j = 1; j < can.size(); ++j)
        if (can[j] != 0) return false;
    if (value) *value = can.empty() ? mpq_class(0) : can[0];
    return true;
}

std::complex<double> CycValue::to_complex() const {
    std::complex<double> s(0, 0);
    const double tau = 2.0 * std::numbers::pi;
    for (std::int64_t j = 0; j < q_; ++j) {
        if (coef_[static_cast<size_t>(j)] == 0) continue;
        double w = coef_[static_cast<size_t>(j)].get_d();
        double ang = tau * static_cast<double>(j) / static_cast<double>(q_);
        s += w * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return s;
}

} // namespace qcm
