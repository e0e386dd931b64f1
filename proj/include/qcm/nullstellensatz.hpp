#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcm/poly.hpp"

namespace qcm {

// Explicit identity sum_i f_i g_i + sum_I Delta_I g_I = N over Z.  The patch
// variant works with the top degree part and holds after substituting
// x_j = 1, which is the homogeneous analogue on the affine chart.
struct NssCertificate {
    Int N;
    std::vector<Poly> cofactors_f;
    std::vector<std::vector<int>> minor_index; // column subsets I, 0-based
    std::vector<Poly> cofactors_minor;
    int degree_cap = 0;
    std::string variant; // "affine" | "patch"
    int patch_j = -1;    // 0-based chart index for the patch variant
};

// Exact rational solve for cofactors of degree <= degree_cap.  Returns the
// certificate with the minimal positive N for the solved cofactors (content
// removed), or nullopt when no combination reaches a nonzero constant at
// this cap.
std::optional<NssCertificate> certificate_search(const PolySystem& s, int degree_cap,
                                                 const std::string& variant = "affine",
                                                 int patch_j = -1,
                                                 std::uint64_t budget = 50'000'000ULL);

// Cap schedule D, 2D, 4D with D = max(R(d-1), d).
std::optional<NssCertificate> certificate_search_scheduled(const PolySystem& s,
                                                           const std::string& variant = "affine",
                                                           int patch_j = -1,
                                                           std::uint64_t budget = 50'000'000ULL);

bool certificate_verify(const NssCertificate& cert, const PolySystem& s);

struct KpsBound {
    double log2_bound = 0;
    int D = 0;
    std::string variant; // "affine" (height C) | "projective" (height Ctilde)
};

// log2 of the height bound 4 n(n+1) D^n R log2(C) (affine) respectively
// 4 n(n-1) D^{n-1} R log2(Ctilde) (projective).
KpsBound kps_bound(const PolySystem& s, const std::string& variant = "affine");

struct PatchCertificates {
    std::vector<std::optional<NssCertificate>> per_patch; // index j
    std::optional<Int> N_min;                             // min_j N_j when all succeed
};

PatchCertificates patch_certificates(const PolySystem& s, int degree_cap,
                                     std::uint64_t budget = 50'000'000ULL);

} // namespace qcm
