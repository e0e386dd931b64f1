#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qcm/birch.hpp"
#include "qcm/cyclotomic.hpp"
#include "qcm/poly.hpp"
#include "qcm/residues.hpp"

namespace qcm {

// Center a/q of a major arc: a componentwise in [1,q], gcd(a_1,...,a_R,q)=1.
struct RationalApprox {
    std::vector<std::int64_t> a;
    std::int64_t q = 1;
};

// Complete sum S_{a,q}(nu) = e(-a.nu/q) sum_{x mod q} e(a.f(x)/q).
// Composite q factors through the prime powers (CRT multiplicativity);
// each prime-power factor is enumerated directly under the budget.
std::complex<double> exp_sum_complete(const PolySystem& s, const std::vector<std::int64_t>& a,
                                      std::int64_t q, const std::vector<std::int64_t>& nu,
                                      std::uint64_t budget = default_budget,
                                      Exec exec = Exec::parallel);

// Exact value in Q(zeta_q); the order cap keeps the cyclotomic reduction at
// golden-test scale.
CycValue exp_sum_complete_exact(const PolySystem& s, const std::vector<std::int64_t>& a,
                                std::int64_t q, const std::vector<std::int64_t>& nu,
                                std::uint64_t budget = default_budget,
                                std::int64_t max_order = 512);

// Box sum S(alpha,nu) = sum_{x in PB cap Z^n} e(alpha.f(x)) e(-alpha.nu),
// compensated summation, deterministic slice-ordered reduction.
std::complex<double> exp_sum_box(const PolySystem& s, const std::vector<double>& alpha,
                                 const std::vector<std::int64_t>& nu, const Rat& P,
                                 const Box& B, std::uint64_t budget = default_budget,
                                 Exec exec = Exec::parallel);

// Counting quantity N(P^xi, P^{-eta}; alpha): tuples x^{(2)},...,x^{(d)} with
// |x^{(i)}| <= P^xi and all n twisted multilinear forms within P^{-eta} of an
// integer.
std::uint64_t weyl_count(const PolySystem& s, const std::vector<double>& alpha, double xi,
                         double eta, double P, std::uint64_t budget = default_budget,
                         Exec exec = Exec::parallel);

struct RationalApproxResult {
    std::optional<RationalApprox> approx;
    bool certified_absence = false; // true only when the q scan was exhaustive
    double q_bound = 0;
    double width = 0;
};

// Least-q simultaneous approximation with q <= Ctilde^R P^{R(d-1)theta} and
// |q alpha - a| <= Ctilde^{R-1} P^{-d+R(d-1)theta}; absence means alpha is
// minor-arc at this theta.
RationalApproxResult rational_approx(const std::vector<double>& alpha, double theta, double P,
                                     const Int& Ctilde, int R, int d);

struct Arc {
    std::vector<std::int64_t> a;
    std::int64_t q;
};

struct ArcDecomposition {
    Rat theta;
    double P = 0;
    Int Ctilde;
    int R = 0;
    int d = 0;
    double q_bound = 0;
    std::int64_t q_max = 0;
    double width_unit = 0; // coordinate width of the q = 1 arc
    std::uint64_t arc_count = 0;
    Rat q_sum;                    // sum_{q <= q_max} J_R(q) / q^R, exact
    double total_volume = 0;      // width_unit^R * q_sum when disjoint
    bool disjoint = false;        // lemma criterion
    bool volume_is_upper_bound = false;
    double lemma_vol_reference = 0; // Ctilde^{R^2} P^{-Rd+R(R+1)(d-1)theta}
    std::vector<Arc> arcs;          // materialized when arc_count is small
};

ArcDecomposition arc_decomposition(const Rat& theta, double P, const Int& Ctilde, int R, int d,
                                   std::uint64_t max_arcs = 100000,
                                   std::uint64_t list_cap = 4096);

struct SlidingScale {
    std::vector<Rat> thetas; // theta_0 < ... < theta_T, 2d = (R+1)(d-1) theta_T
    Rat epsilon;
    Rat delta;
    int T = 0;
};

SlidingScale sliding_scale(const BirchParams& params, const Rat& epsilon);

// Distance to the nearest integer.
double nearest_int_distance(double x);

} // namespace qcm
