#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcm/nullstellensatz.hpp"
#include "qcm/poly.hpp"
#include "qcm/residues.hpp"

namespace qcm {

struct IntegralEstimate {
    std::string kind;   // osc | J_truncated | schmidt
    std::string method; // quadrature | monte-carlo
    std::complex<double> value;
    double std_error = 0; // MC standard error or last quadrature refinement delta
    std::uint64_t evals = 0;
    unsigned seed = 0;
    bool converged = true;
};

// I(B, gamma) = integral over B of e(gamma . ftilde(zeta)) d zeta.
IntegralEstimate osc_integral(const PolySystem& s, const std::vector<double>& gamma,
                              const Box& B, const std::string& method = "quadrature",
                              std::uint64_t budget = 40'000'000ULL, double tol = 1e-8,
                              unsigned seed = 1, Exec exec = Exec::parallel);

// J(mu, Phi) = integral over |gamma| <= Phi of I(B, gamma) e(-gamma . mu).
IntegralEstimate J_truncated(const PolySystem& s, const std::vector<double>& mu, double Phi,
                             const Box& B, std::uint64_t budget = 120'000'000ULL,
                             double tol = 1e-4, Exec exec = Exec::parallel);

// Schmidt's limit estimator:
//   t^R integral over B of prod_i max(0, 1 - t |ftilde_i(x) - mu_i|) dx,
// Monte Carlo over the first n-1 coordinates with the last coordinate
// integrated out analytically per sample (same functional, far lower
// variance).  estimator = "plain" disables the conditioning.
IntegralEstimate J_schmidt(const PolySystem& s, const std::vector<double>& mu, double t,
                           std::uint64_t samples, unsigned seed, const Box& B,
                           Exec exec = Exec::parallel,
                           const std::string& estimator = "conditioned");

struct RealZeroWitness {
    std::vector<double> x0;
    double Lambda = 1;
    double M = 0;            // max_I |minor of the ftilde Jacobian at x0|
    std::vector<int> best_I; // achieving column subset, 0-based
};

// Validates |ftilde(x0)| <= tol, |x0| <= Lambda, M > 0.
RealZeroWitness make_real_zero_witness(const PolySystem& s, const std::vector<double>& x0,
                                       double Lambda, double tol = 1e-9);

struct NeighborhoodEstimate {
    double U_radius = 0;
    double W_radius = 0;
    double M = 0;
    double a_used = 0;
    bool verified = false;
};

// Quantitative inverse-function neighborhood around the witness:
// U_radius = a M / (Ctilde^R Lambda^{R(d-1)-1}), W_radius = half of
// a M^2 / (Ctilde^{2R-1} Lambda^{R(d-1)-1}), with the module constant a
// halved until the sampled boundary inequality holds.
NeighborhoodEstimate ift_neighborhood(const RealZeroWitness& w, const PolySystem& s,
                                      unsigned seed = 7, int boundary_samples = 64);

// 2^{-R} M^{-1} (2 W_radius)^{n-R}; requires the U-ball to stay inside B.
double J_lower_bound(const RealZeroWitness& w, const PolySystem& s,
                     const NeighborhoodEstimate& nb, const Box& B);

struct MinorBoundReport {
    double bound = 0;          // Ntilde_j / sum_I l1(cofactor_I), valid at |x0| = 1
    double kps_log2_scale = 0; // log2 of the Ctilde^{4n(n-1)R D^{n-1}} reference scale
    Int Ntilde;
    int patch_j = -1;
    double measured_M = 0;
};

// Lower bound for max_I |minor(x0)| at a sup-norm-1 real zero from a patch
// certificate on a chart with |x0_j| = 1.
MinorBoundReport real_minor_lower_bound(const RealZeroWitness& w, const PolySystem& s,
                                        const PatchCertificates& patches);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace qcm
