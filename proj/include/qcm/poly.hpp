#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcm/errors.hpp"

namespace qcm {

using Int = mpz_class;
using Rat = mpq_class;

// One monomial c * x_1^{e_1} ... x_n^{e_n}.  Coefficient is always nonzero
// inside a normalized Poly.
struct Term {
    std::vector<int> e;
    Int c;

    int degree() const;
};

// Graded-lexicographic order, higher degree first.  Canonical term order for
// every serialized polynomial, so goldens are byte-stable.
bool grlex_less(const std::vector<int>& a, const std::vector<int>& b);

// Sparse integer polynomial in a fixed number of variables.  Terms are kept
// sorted grlex-descending with distinct exponent vectors and nonzero
// coefficients.
class Poly {
  public:
    Poly() : n_(0) {}
    explicit Poly(int nvars) : n_(nvars) {}
    Poly(int nvars, std::vector<Term> terms);

    static Poly constant(int nvars, const Int& c);
    static Poly variable(int nvars, int j); // x_j, 0-based

    int nvars() const { return n_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int total_degree() const; // -1 for the zero polynomial

    Int height() const; // max |coefficient|, 0 for zero poly

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Poly& o) const;
    Poly operator*(const Int& c) const;
    bool operator==(const Poly& o) const;

    Poly derivative(int j) const;
    // Terms of total degree exactly k.
    Poly homogeneous_part(int k) const;

    // Exact substitution x_j = scale_j * y_j + shift_j.
    Poly affine_substitute(const std::vector<Int>& scale,
                           const std::vector<Int>& shift) const;
    // Exact substitution x_j = 1 (exponent of x_j dropped; nvars unchanged).
    Poly substitute_one(int j) const;

    Int eval(const std::vector<Int>& x) const;
    double eval(const std::vector<double>& x) const;
    // Value mod q over small machine integers; requires 0 <= x_i < q.
    std::int64_t eval_mod(const std::int64_t* x, std::int64_t q) const;

    std::string to_string() const;

  private:
    void normalize();

    int n_;
    std::vector<Term> terms_;
};

// Coefficient heights of f and its top degree part.
struct Heights {
    Int C;
    Int Ctilde;
};

// Rational box  prod [a_j, b_j] inside [-1,1]^n.  The symmetric full box
// [-1,1]^n is admitted as an extension and flagged in output metadata.
struct Box {
    std::vector<std::pair<Rat, Rat>> sides;

    static Box symmetric(int n); // [-1,1]^n
    static Box unit(int n);      // [0,1]^n

    int dim() const { return static_cast<int>(sides.size()); }
    double volume() const;
    // True when some side has length >= 1 (the extension beyond the
    // strict side-length-<1 convention).
    bool is_extension() const;
    void validate() const;
};

// System f = (f_1,...,f_R) of integer polynomials of common degree d >= 2.
struct PolySystem {
    int n = 0;
    int R = 0;
    int d = 0;
    std::vector<Poly> polys;

    void validate() const;
    bool is_homogeneous() const;
    std::vector<Int> evaluate(const std::vector<Int>& x) const;
};

// Symmetric d-linear form of a top-degree form, normalized so that
// Gamma(x,...,x) = d! * ftilde(x).  Values come from polarization, which
// keeps everything exact over Z.
class MultilinearForm {
  public:
    MultilinearForm(Poly ftilde, int d);

    int arity() const { return d_; }
    Int eval(const std::vector<std::vector<Int>>& vectors) const;
    // Gamma(e_j, v_2, ..., v_d) with the first slot pinned to a basis vector.
    Int eval_basis(int j, const std::vector<std::vector<Int>>& rest) const;

  private:
    Poly f_;
    std::vector<Poly> partials_;
    int d_;
};

PolySystem parse_system(const std::string& json_text);
PolySystem load_system(const std::string& path);
std::string serialize_system(const PolySystem& s);

PolySystem top_degree_part(const PolySystem& s);
Heights heights(const PolySystem& s);

// R x R minor of the Jacobian with columns I (0-based, |I| = R).
Poly jacobian_minor(const PolySystem& s, const std::vector<int>& I);
std::vector<std::vector<int>> column_subsets(int n, int R);

// g(y) = f(My + m) componentwise, exact.
PolySystem affine_substitute(const PolySystem& s, const std::vector<Int>& M,
                             const std::vector<Int>& m);

} // namespace qcm
