#include "qcm/poly.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace qcm {

int Term::degree() const {
    return std::accumulate(e.begin(), e.end(), 0);
}

bool grlex_less(const std::vector<int>& a, const std::vector<int>& b) {
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Poly::Poly(int nvars, std::vector<Term> terms) : n_(nvars), terms_(std::move(terms)) {
    for (const Term& t : terms_)
        if (static_cast<int>(t.e.size()) != n_)
            throw input_error("term exponent vector length != n");
    normalize();
}

void Poly::normalize() {
    std::map<std::vector<int>, Int> acc;
    for (Term& t : terms_) acc[t.e] += t.c;
    terms_.clear();
    for (auto& [e, c] : acc)
        if (c != 0) terms_.push_back(Term{e, c});
    // grlex-descending: leading term first
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return grlex_less(b.e, a.e); });
}

Poly Poly::constant(int nvars, const Int& c) {
    Poly p(nvars);
    if (c != 0) p.terms_.push_back(Term{std::vector<int>(nvars, 0), c});
    return p;
}

Poly Poly::variable(int nvars, int j) {
    Poly p(nvars);
    std::vector<int> e(nvars, 0);
    e.at(j) = 1;
    p.terms_.push_back(Term{e, Int(1)});
    return p;
}

int Poly::total_degree() const {
    int d = -1;
    for (const Term& t : terms_) d = std::max(d, t.degree());
    return d;
}

Int Poly::height() const {
    Int h = 0;
    for (const Term& t : terms_) h = std::max(h, Int(abs(t.c)));
    return h;
}

Poly Poly::operator+(const Poly& o) const {
    if (n_ != o.n_) throw input_error("poly dimension mismatch");
    Poly r(n_);
    r.terms_ = terms_;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    r.normalize();
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
    Poly r(n_);
    r.terms_ = terms_;
    for (Term& t : r.terms_) t.c = -t.c;
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    if (n_ != o.n_) throw input_error("poly dimension mismatch");
    Poly r(n_);
    r.terms_.reserve(terms_.size() * o.terms_.size());
    for (const Term& a : terms_)
        for (const Term& b : o.terms_) {
            Term t;
            t.e.resize(n_);
            for (int i = 0; i < n_; ++i) t.e[i] = a.e[i] + b.e[i];
            t.c = a.c * b.c;
            r.terms_.push_back(std::move(t));
        }
    r.normalize();
    return r;
}

Poly Poly::operator*(const Int& c) const {
    Poly r(n_);
    if (c == 0) return r;
    r.terms_ = terms_;
    for (Term& t : r.terms_) t.c *= c;
    return r;
}

bool Poly::operator==(const Poly& o) const {
    if (n_ != o.n_ || terms_.size() != o.terms_.size()) return false;
    for (size_t i = 0; i < terms_.size(); ++i)
        if (terms_[i].e != o.terms_[i].e || terms_[i].c != o.terms_[i].c) return false;
    return true;
}

Poly Poly::derivative(int j) const {
    Poly r(n_);
    for (const Term& t : terms_) {
        if (t.e[j] == 0) continue;
        Term s = t;
        s.c *= t.e[j];
        s.e[j] -= 1;
        r.terms_.push_back(std::move(s));
    }
    r.normalize();
    return r;
}

Poly Poly::homogeneous_part(int k) const {
    Poly r(n_);
    for (const Term& t : terms_)
        if (t.degree() == k) r.terms_.push_back(t);
    return r;
}

Poly Poly::affine_substitute(const std::vector<Int>& scale,
                             const std::vector<Int>& shift) const {
    if (static_cast<int>(scale.size()) != n_ || static_cast<int>(shift.size()) != n_)
        throw input_error("affine substitution vector length != n");
    Poly result(n_);
    for (const Term& t : terms_) {
        // expand c * prod_j (scale_j y_j + shift_j)^{e_j}
        Poly acc = Poly::constant(n_, t.c);
        for (int j = 0; j < n_; ++j) {
            if (t.e[j] == 0) continue;
            Poly lin = Poly::variable(n_, j) * scale[j] + Poly::constant(n_, shift[j]);
            for (int k = 0; k < t.e[j]; ++k) acc = acc * lin;
        }
        result = result + acc;
    }
    return result;
}

Poly Poly::substitute_one(int j) const {
    Poly r(n_);
    r.terms_ = terms_;
    for (Term& t : r.terms_) t.e[j] = 0;
    r.normalize();
    return r;
}

Int Poly::eval(const std::vector<Int>& x) const {
    if (static_cast<int>(x.size()) != n_) throw input_error("eval dimension mismatch");
    Int total = 0;
    for (const Term& t : terms_) {
        Int v = t.c;
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < t.e[j]; ++k) v *= x[j];
        total += v;
    }
    return total;
}

double Poly::eval(const std::vector<double>& x) const {
    double total = 0;
    for (const Term& t : terms_) {
        double v = t.c.get_d();
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < t.e[j]; ++k) v *= x[j];
        total += v;
    }
    return total;
}

std::int64_t Poly::eval_mod(const std::int64_t* x, std::int64_t q) const {
    std::int64_t total = 0;
    for (const Term& t : terms_) {
        std::int64_t v = mpz_fdiv_ui(t.c.get_mpz_t(), static_cast<unsigned long>(q));
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < t.e[j]; ++k) v = (v * x[j]) % q;
        total = (total + v) % q;
    }
    return total;
}

std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const Term& t : terms_) {
        if (!first) os << (t.c >= 0 ? " + " : " - ");
        else if (t.c < 0) os << "-";
        first = false;
        Int a = abs(t.c);
        bool has_var = t.degree() > 0;
        if (a != 1 || !has_var) os << a.get_str();
        for (int j = 0; j < n_; ++j) {
            if (t.e[j] == 0) continue;
            os << "x" << (j + 1);
            if (t.e[j] > 1) os << "^" << t.e[j];
        }
    }
    return os.str();
}

Box Box::symmetric(int n) {
    Box b;
    b.sides.assign(n, {Rat(-1), Rat(1)});
    return b;
}

Box Box::unit(int n) {
    Box b;
    b.sides.assign(n, {Rat(0), Rat(1)});
    return b;
}

double Box::volume() const {
    double v = 1;
    for (const auto& [a, b] : sides) v *= Rat(b - a).get_d();
    return v;
}

bool Box::is_extension() const {
    for (const auto& [a, b] : sides)
        if (b - a >= 1) return true;
    return false;
}

void Box::validate() const {
    for (const auto& [a, b] : sides) {
        if (a < -1 || b > 1 || a > b)
            throw input_error("box sides must satisfy -1 <= a_j <= b_j <= 1");
    }
}

void PolySystem::validate() const {
    if (n < 1) throw input_error("need n >= 1");
    if (R < 1) throw input_error("need R >= 1");
    if (static_cast<int>(polys.size()) != R) throw input_error("poly count != R");
    if (d < 2) throw input_error("need common degree d >= 2");
    for (const Poly& f : polys) {
        if (f.is_zero()) throw input_error("zero polynomial in system");
        if (f.nvars() != n) throw input_error("polynomial dimension != n");
        if (f.total_degree() != d) throw input_error("mixed degrees in system");
    }
}

bool PolySystem::is_homogeneous() const {
    for (const Poly& f : polys)
        for (const Term& t : f.terms())
            if (t.degree() != d) return false;
    return true;
}

std::vector<Int> PolySystem::evaluate(const std::vector<Int>& x) const {
    std::vector<Int> v(R);
    for (int i = 0; i < R; ++i) v[i] = polys[i].eval(x);
    return v;
}

MultilinearForm::MultilinearForm(Poly ftilde, int d) : f_(std::move(ftilde)), d_(d) {
    if (d_ < 1) throw input_error("multilinear arity must be positive");
    if (!f_.is_zero())
        for (const Term& t : f_.terms())
            if (t.degree() != d_)
                throw input_error("multilinear form needs a homogeneous input");
    partials_.reserve(f_.nvars());
    for (int j = 0; j < f_.nvars(); ++j) partials_.push_back(f_.derivative(j));
}

namespace {

// Polarization of a homogeneous degree-k polynomial g:
//    sum over nonempty S of (-1)^{k-|S|} g(sum_{i in S} v_i)
// is the symmetric k-linear form whose diagonal is k! * g.
Int polarize(const Poly& g, int k, const std::vector<std::vector<Int>>& v) {
    if (static_cast<int>(v.size()) != k) throw input_error("polarization arity mismatch");
    const int n = g.nvars();
    Int total = 0;
    std::vector<Int> x(n);
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        for (int j = 0; j < n; ++j) x[j] = 0;
        int bits = 0;
        for (int i = 0; i < k; ++i) {
            if (!(mask >> i & 1)) continue;
            ++bits;
            for (int j = 0; j < n; ++j) x[j] += v[i][j];
        }
        Int val = g.eval(x);
        total += ((k - bits) % 2 == 0) ? val : -val;
    }
    return total;
}

} // namespace

Int MultilinearForm::eval(const std::vector<std::vector<Int>>& vectors) const {
    return polarize(f_, d_, vectors);
}

Int MultilinearForm::eval_basis(int j, const std::vector<std::vector<Int>>& rest) const {
    // Gamma(e_j, x, ..., x) = (d-1)! * df/dx_j, so pinning the first slot
    // polarizes the partial derivative at arity d-1.
    if (d_ == 1) return partials_.at(j).eval(std::vector<Int>(f_.nvars(), Int(0)));
    return polarize(partials_.at(j), d_ - 1, rest);
}

PolySystem parse_system(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw input_error(std::string("malformed system document: ") + e.what());
    }
    if (!doc.contains("n") || !doc.contains("R") || !doc.contains("polys"))
        throw input_error("system document needs fields n, R, polys");
    PolySystem s;
    s.n = doc["n"].get<int>();
    s.R = doc["R"].get<int>();
    if (s.n < 1 || s.R < 1) throw input_error("need n >= 1 and R >= 1");
    if (!doc["polys"].is_array() || static_cast<int>(doc["polys"].size()) != s.R)
        throw input_error("polys must be an array of R polynomials");
    for (const auto& parr : doc["polys"]) {
        std::vector<Term> terms;
        std::map<std::vector<int>, bool> seen;
        for (const auto& tj : parr) {
            Term t;
            if (!tj.contains("e") || !tj.contains("c"))
                throw input_error("term needs fields e, c");
            t.e = tj["e"].get<std::vector<int>>();
            if (static_cast<int>(t.e.size()) != s.n)
                throw input_error("term exponent vector length != n");
            for (int ei : t.e)
                if (ei < 0) throw input_error("negative exponent");
            if (seen.count(t.e)) throw input_error("duplicate exponent vector in polynomial");
            seen[t.e] = true;
            if (tj["c"].is_string())
                t.c = Int(tj["c"].get<std::string>());
            else
                t.c = Int(std::to_string(tj["c"].get<long long>()));
            if (t.c == 0) throw input_error("zero coefficient term");
            terms.push_back(std::move(t));
        }
        s.polys.emplace_back(s.n, std::move(terms));
    }
    int d = -1;
    for (const Poly& f : s.polys) {
        if (f.is_zero()) throw input_error("zero polynomial in system");
        if (d < 0) d = f.total_degree();
        else if (f.total_degree() != d) throw input_error("mixed degrees in system");
    }
    s.d = d;
    s.validate();
    return s;
}

PolySystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open system file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

std::string serialize_system(const PolySystem& s) {
    nlohmann::json doc;
    doc["n"] = s.n;
    doc["R"] = s.R;
    doc["d"] = s.d;
    nlohmann::json polys = nlohmann::json::array();
    for (const Poly& f : s.polys) {
        nlohmann::json pj = nlohmann::json::array();
        for (const Term& t : f.terms()) {
            nlohmann::json tj;
            tj["e"] = t.e;
            tj["c"] = t.c.get_str();
            pj.push_back(tj);
        }
        polys.push_back(pj);
    }
    doc["polys"] = polys;
    return doc.dump(2);
}

PolySystem top_degree_part(const PolySystem& s) {
    PolySystem t = s;
    for (int i = 0; i < s.R; ++i) {
        t.polys[i] = s.polys[i].homogeneous_part(s.d);
        if (t.polys[i].is_zero())
            throw input_error("top degree part of f_" + std::to_string(i + 1) +
                              " is identically zero");
    }
    return t;
}

Heights heights(const PolySystem& s) {
    Heights h{Int(0), Int(0)};
    for (const Poly& f : s.polys) {
        h.C = std::max(h.C, f.height());
        h.Ctilde = std::max(h.Ctilde, f.homogeneous_part(s.d).height());
    }
    return h;
}

std::vector<std::vector<int>> column_subsets(int n, int R) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(R);
    for (int i = 0; i < R; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        int i = R - 1;
        while (i >= 0 && idx[i] == n - R + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < R; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

namespace {

Poly poly_det(const std::vector<std::vector<Poly>>& m, std::vector<int> cols, int row,
              int nvars) {
    if (cols.empty()) return Poly::constant(nvars, Int(1));
    Poly det(nvars);
    for (size_t k = 0; k < cols.size(); ++k) {
        std::vector<int> rest;
        for (size_t j = 0; j < cols.size(); ++j)
            if (j != k) rest.push_back(cols[j]);
        Poly sub = poly_det(m, rest, row + 1, nvars);
        Poly contrib = m[row][cols[k]] * sub;
        det = (k % 2 == 0) ? det + contrib : det - contrib;
    }
    return det;
}

} // namespace

Poly jacobian_minor(const PolySystem& s, const std::vector<int>& I) {
    if (static_cast<int>(I.size()) != s.R)
        throw input_error("jacobian minor needs |I| = R columns");
    for (int j : I)
        if (j < 0 || j >= s.n) throw input_error("column index out of range");
    std::vector<std::vector<Poly>> jac(s.R);
    for (int i = 0; i < s.R; ++i) {
        jac[i].reserve(s.R);
        for (int j : I) jac[i].push_back(s.polys[i].derivative(j));
    }
    std::vector<int> cols(s.R);
    for (int i = 0; i < s.R; ++i) cols[i] = i;
    return poly_det(jac, cols, 0, s.n);
}

PolySystem affine_substitute(const PolySystem& s, const std::vector<Int>& M,
                             const std::vector<Int>& m) {
    for (const Int& Mi : M)
        if (Mi < 1) throw input_error("need M_i >= 1");
    PolySystem g = s;
    for (int i = 0; i < s.R; ++i) g.polys[i] = s.polys[i].affine_substitute(M, m);
    g.validate();
    return g;
}

} // namespace qcm
