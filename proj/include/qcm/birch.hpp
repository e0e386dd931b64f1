#pragma once

#include <string>
#include <vector>

#include "qcm/poly.hpp"

namespace qcm {

enum class DeltaProvenance { exact_quadratic, monte_carlo, user };

struct DeltaEstimate {
    long Delta = 0;
    DeltaProvenance provenance = DeltaProvenance::user;
    bool certified = false;
};

// Quantities attached to the hypothesis K > R(R+1)(d-1): K = (n-Delta)/2^{d-1},
// eta = 1/(K/R(d-1) + R + 1), theta0 = eta/(R(d-1)), and delta realized just
// below its strict upper bound with a fixed 1-10^{-6} safety factor.
struct BirchParams {
    int n = 0;
    int R = 0;
    int d = 0;
    long Delta = 0;
    DeltaProvenance provenance = DeltaProvenance::user;
    Rat K;
    Rat eta;
    Rat delta;
    Rat theta0;

    Rat hypothesis_margin() const; // K - R(R+1)(d-1), must be > 0
    // Smallest P for which 1 > eta + R*log_P(Ctilde) holds.
    double min_admissible_P(const Int& Ctilde) const;
};

// Worst singular-locus dimension over the pencil b . ftilde.  Exact (kernel
// of the Hessian pencil) for d = 2 with R = 1; sampled b for R >= 2; numeric
// search on the gradient variety for d >= 3.
DeltaEstimate delta_quantity(const PolySystem& s, const std::string& mode,
                             long user_delta = 0, unsigned seed = 1);

BirchParams birch_params(const PolySystem& s, long Delta,
                         DeltaProvenance provenance = DeltaProvenance::user);

struct BoundReport {
    std::string theorem; // main1 | main2 | cormain
    Rat exponent;
    double log2_P = 0;
    Int C;
    Int Ctilde;
    Int M_sup; // |M| for cormain, 1 otherwise
    std::string constant_note = "times an uncomputed constant c";
};

BoundReport bound_main1(const BirchParams& p, const Int& C, const Int& Ctilde);
BoundReport bound_main2(const BirchParams& p, const Int& Ctilde, bool homogeneous);
BoundReport bound_cormain(const BirchParams& p, const Int& C, const Int& Ctilde,
                          const std::vector<Int>& Mvec);

// Exact rank of a rational matrix (Gaussian elimination over Q).
int rational_rank(std::vector<std::vector<Rat>> m);

} // namespace qcm
