#include "qcm/nullstellensatz.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

// monomials of total degree <= cap in n variables, skipping x_skip
std::vector<std::vector<int>> monomials_up_to(int n, int cap, int skip) {
    std::vector<std::vector<int>> out;
    std::vector<int> e(static_cast<size_t>(n), 0);
    while (true) {
        int deg = 0;
        for (int v : e) deg += v;
        bool uses_skip = skip >= 0 && e[static_cast<size_t>(skip)] > 0;
        if (deg <= cap && !uses_skip) out.push_back(e);
        int j = n - 1;
        while (j >= 0) {
            if (e[static_cast<size_t>(j)] < cap) {
                ++e[static_cast<size_t>(j)];
                break;
            }
            e[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return grlex_less(a, b); });
    return out;
}

std::vector<Poly> certificate_generators(const PolySystem& s, const std::string& variant,
                                         int patch_j, std::vector<std::vector<int>>& subsets) {
    subsets = column_subsets(s.n, s.R);
    std::vector<Poly> gens;
    if (variant == "affine") {
        for (const Poly& f : s.polys) gens.push_back(f);
        for (const auto& I : subsets) gens.push_back(jacobian_minor(s, I));
    } else if (variant == "patch") {
        if (patch_j < 0 || patch_j >= s.n) throw input_error("patch index out of range");
        PolySystem tilde = top_degree_part(s);
        for (const Poly& f : tilde.polys) gens.push_back(f.substitute_one(patch_j));
        for (const auto& I : subsets)
            gens.push_back(jacobian_minor(tilde, I).substitute_one(patch_j));
    } else {
        throw input_error("unknown certificate variant: " + variant);
    }
    return gens;
}

} // namespace

std::optional<NssCertificate> certificate_search(const PolySystem& s, int degree_cap,
                                                 const std::string& variant, int patch_j,
                                                 std::uint64_t budget) {
    if (degree_cap < 0) throw input_error("degree cap must be non-negative");
    std::vector<std::vector<int>> subsets;
    std::vector<Poly> gens = certificate_generators(s, variant, patch_j, subsets);

    // a combination with any cofactors has zero constant term whenever every
    // generator vanishes at the origin (x = 0 is then a common zero)
    bool origin_zero = true;
    for (const Poly& g : gens) {
        Int c0 = g.eval(std::vector<Int>(static_cast<size_t>(s.n), Int(0)));
        if (c0 != 0) origin_zero = false;
    }
    if (variant == "affine" && origin_zero) return std::nullopt;

    const int skip = (variant == "patch") ? patch_j : -1;
    std::vector<std::vector<int>> basis = monomials_up_to(s.n, degree_cap, skip);

    int max_gen_deg = 0;
    for (const Poly& g : gens) max_gen_deg = std::max(max_gen_deg, g.total_degree());
    std::vector<std::vector<int>> rows_mono = monomials_up_to(s.n, degree_cap + max_gen_deg, skip);
    std::map<std::vector<int>, size_t> row_of;
    for (size_t r = 0; r < rows_mono.size(); ++r) row_of[rows_mono[r]] = r;

    const size_t rows = rows_mono.size();
    const size_t cols = gens.size() * basis.size();
    if (rows * cols > budget)
        throw budget_error("certificate_search: linear system exceeds budget");

    // A c = e_0 where column (g, m) holds the coefficients of g * m
    std::vector<std::vector<Rat>> A(rows, std::vector<Rat>(cols + 1, Rat(0)));
    {
        size_t col = 0;
        for (const Poly& g : gens) {
            for (const auto& m : basis) {
                Poly shifted = g * Poly(s.n, {Term{m, Int(1)}});
                for (const Term& t : shifted.terms()) {
                    auto it = row_of.find(t.e);
                    if (it == row_of.end()) throw input_error("internal: monomial out of range");
                    A[it->second][col] += Rat(t.c);
                }
                ++col;
            }
        }
        // right-hand side: the constant monomial picks up 1
        auto it = row_of.find(std::vector<int>(static_cast<size_t>(s.n), 0));
        A[it->second][cols] = Rat(1);
    }

    // Gaussian elimination over Q
    std::vector<size_t> pivot_col(rows, SIZE_MAX);
    size_t rank = 0;
    for (size_t c = 0; c < cols && rank < rows; ++c) {
        size_t piv = SIZE_MAX;
        for (size_t r = rank; r < rows; ++r)
            if (A[r][c] != 0) {
                piv = r;
                break;
            }
        if (piv == SIZE_MAX) continue;
        std::swap(A[rank], A[piv]);
        Rat inv = Rat(1) / A[rank][c];
        for (size_t cc = c; cc <= cols; ++cc) A[rank][cc] *= inv;
        for (size_t r = 0; r < rows; ++r) {
            if (r == rank || A[r][c] == 0) continue;
            Rat f = A[r][c];
            for (size_t cc = c; cc <= cols; ++cc) A[r][cc] -= f * A[rank][cc];
        }
        pivot_col[rank] = c;
        ++rank;
    }
    // consistency: a nonzero RHS in a zero row means no solution
    for (size_t r = rank; r < rows; ++r)
        if (A[r][cols] != 0) return std::nullopt;

    // particular solution with free variables zero
    std::vector<Rat> sol(cols, Rat(0));
    for (size_t r = 0; r < rank; ++r)
        if (pivot_col[r] != SIZE_MAX) sol[pivot_col[r]] = A[r][cols];

    // clear denominators, strip content, assemble integer cofactors
    Int L = 1;
    for (const Rat& v : sol)
        if (v != 0) L = lcm(L, Int(v.get_den()));
    Int content = 0;
    std::vector<Int> scaled(cols);
    for (size_t c = 0; c < cols; ++c) {
        Rat v = sol[c] * Rat(L);
        v.canonicalize();
        scaled[c] = Int(v.get_num());
        content = gcd(content, scaled[c]);
    }
    if (content == 0) return std::nullopt; // zero combination cannot reach 1
    Int N = L / content;

    NssCertificate cert;
    cert.N = N;
    cert.degree_cap = degree_cap;
    cert.variant = variant;
    cert.patch_j = patch_j;
    cert.minor_index = subsets;
    size_t col = 0;
    for (size_t g = 0; g < gens.size(); ++g) {
        std::vector<Term> terms;
        for (const auto& m : basis) {
            Int c = scaled[col++] / content;
            if (c != 0) terms.push_back(Term{m, c});
        }
        Poly cof(s.n, terms);
        if (g < static_cast<size_t>(s.R)) cert.cofactors_f.push_back(cof);
        else cert.cofactors_minor.push_back(cof);
    }
    if (!certificate_verify(cert, s))
        throw input_error("internal: solved certificate failed verification");
    return cert;
}

std::optional<NssCertificate> certificate_search_scheduled(const PolySystem& s,
                                                           const std::string& variant,
                                                           int patch_j, std::uint64_t budget) {
    int D = std::max(s.R * (s.d - 1), s.d);
    for (int cap : {D, 2 * D, 4 * D}) {
        auto cert = certificate_search(s, cap, variant, patch_j, budget);
        if (cert.has_value()) return cert;
    }
    return std::nullopt;
}

bool certificate_verify(const NssCertificate& cert, const PolySystem& s) {
    if (cert.N <= 0) return false;
    std::vector<std::vector<int>> subsets;
    std::vector<Poly> gens;
    try {
        gens = certificate_generators(s, cert.variant, cert.patch_j, subsets);
    } catch (const input_error&) {
        return false;
    }
    if (subsets != cert.minor_index) return false;
    if (cert.cofactors_f.size() != static_cast<size_t>(s.R)) return false;
    if (cert.cofactors_minor.size() != subsets.size()) return false;

    Poly acc(s.n);
    size_t g = 0;
    for (const Poly& cof : cert.cofactors_f) acc = acc + gens[g++] * cof;
    for (const Poly& cof : cert.cofactors_minor) acc = acc + gens[g++] * cof;
    if (cert.variant == "patch") acc = acc.substitute_one(cert.patch_j);
    return acc == Poly::constant(s.n, cert.N);
}

KpsBound kps_bound(const PolySystem& s, const std::string& variant) {
    KpsBound b;
    b.D = std::max(s.R * (s.d - 1), s.d);
    b.variant = variant;
    Heights h = heights(s);
    auto log2_height = [](const Int& x) {
        if (x <= 1) return 0.0;
        signed long e2;
        double mant = mpz_get_d_2exp(&e2, x.get_mpz_t());
        return std::log2(mant) + static_cast<double>(e2);
    };
    const double n = s.n, R = s.R;
    if (variant == "affine") {
        b.log2_bound = 4.0 * n * (n + 1) * std::pow(static_cast<double>(b.D), n) * R *
                       log2_height(h.C);
    } else if (variant == "projective") {
        b.log2_bound = 4.0 * n * (n - 1) * std::pow(static_cast<double>(b.D), n - 1) * R *
                       log2_height(h.Ctilde);
    } else {
        throw input_error("unknown kps variant: " + variant);
    }
    return b;
}

PatchCertificates patch_certificates(const PolySystem& s, int degree_cap,
                                     std::uint64_t budget) {
    PatchCertificates out;
    bool all = true;
    std::optional<Int> best;
    for (int j = 0; j < s.n; ++j) {
        auto cert = certificate_search(s, degree_cap, "patch", j, budget);
        if (cert.has_value()) {
            if (!best.has_value() || cert->N < *best) best = cert->N;
        } else {
            all = false;
        }
        out.per_patch.push_back(std::move(cert));
    }
    if (all) out.N_min = best;
    return out;
}

} // namespace qcm
