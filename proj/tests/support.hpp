#pragma once

// Shared helpers for the test binaries: random data, reference oracles and a
// generator of well-typed random expressions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "matloop/matloop.hpp"

namespace testing_support {

using namespace matloop;

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// random values and instances

template <class S>
typename S::value_type random_value(Rng& rng, const S& sr = S{});

template <>
inline double random_value<RealSemiring>(Rng& rng, const RealSemiring&) {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}
template <>
inline NatSemiring::value_type random_value<NatSemiring>(Rng& rng, const NatSemiring&) {
    return static_cast<unsigned>(rng() % 4);
}
template <>
inline unsigned char random_value<BoolSemiring>(Rng& rng, const BoolSemiring&) {
    return static_cast<unsigned char>(rng() % 2);
}
template <>
inline double random_value<TropicalSemiring>(Rng& rng, const TropicalSemiring&) {
    if (rng() % 4 == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(static_cast<int>(rng() % 11) - 3);
}
template <>
inline RationalSemiring::value_type random_value<RationalSemiring>(Rng& rng, const RationalSemiring&) {
    long num = static_cast<long>(rng() % 19) - 9;
    long den = static_cast<long>(rng() % 4) + 1;
    return RationalSemiring::value_type(num, den);
}

template <class S>
KMatrix<S> random_matrix(Rng& rng, std::size_t r, std::size_t c, const S& sr = S{}) {
    KMatrix<S> m = KMatrix<S>::zeros(sr, r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = random_value<S>(rng, sr);
    return m;
}

/// Dims assigning n to every size symbol of s.
/// Every symbol of s, plus alpha for expressions with no variables.
inline Dims uniform_dims(const Schema& s, std::size_t n) {
    Dims d{{SizeSymbol("alpha"), n}};
    for (const auto& sym : s.symbols())
        if (!sym.is_unit()) d[sym] = n;
    return d;
}

/// Random matrices for the free variables of e.
template <class S>
Instance<S> random_instance(Rng& rng, const Expr& e, const Schema& s, const Dims& dims, const S& sr = S{}) {
    Instance<S> inst;
    inst.dims = dims;
    for (const auto& name : free_vars(e)) {
        const MatrixType& t = s.at(name);
        inst.set(name, random_matrix<S>(rng, dim_of(dims, t.rows), dim_of(dims, t.cols), sr));
    }
    return inst;
}

// ---------------------------------------------------------------------------
// dense real helpers and oracles

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const KMatrix<RealSemiring>& m) {
    Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
    return d;
}

inline KMatrix<RealSemiring> from_dense(const Dense& d) {
    KMatrix<RealSemiring> m = KMatrix<RealSemiring>::zeros(RealSemiring{}, d.size(), d.empty() ? 0 : d[0].size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j) m(i, j) = d[i][j];
    return m;
}

inline Dense dense_mul(const Dense& a, const Dense& b) {
    Dense c(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::fabs(a[i][j] - b[i][j]));
    return m;
}

inline Dense dense_identity(std::size_t n) {
    Dense d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 1.0;
    return d;
}

/// Laplace expansion along the first row.
inline double cofactor_det(const Dense& a) {
    const std::size_t n = a.size();
    if (n == 1) return a[0][0];
    double det = 0;
    for (std::size_t j = 0; j < n; ++j) {
        Dense minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(a[i][k]);
            minor.push_back(row);
        }
        det += (j % 2 ? -1.0 : 1.0) * a[0][j] * cofactor_det(minor);
    }
    return det;
}

/// Reflexive-transitive closure indicator.
inline std::vector<std::vector<int>> warshall(const std::vector<std::vector<int>>& adj) {
    const std::size_t n = adj.size();
    auto r = adj;
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = 1;
    return r;
}

/// Ordered 4-tuples of distinct pairwise adjacent vertices.
inline long count_ordered_4cliques(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    long count = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
                    if (adj[a][b] && adj[a][c] && adj[a][d] && adj[b][c] && adj[b][d] && adj[c][d]) ++count;
                }
    return count;
}

inline bool has_4clique(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                for (int d = c + 1; d < n; ++d)
                    if (adj[a][b] && adj[a][c] && adj[a][d] && adj[b][c] && adj[b][d] && adj[c][d]) return true;
    return false;
}

inline KMatrix<RealSemiring> adjacency_matrix(const std::vector<std::vector<int>>& adj) {
    KMatrix<RealSemiring> m = KMatrix<RealSemiring>::zeros(RealSemiring{}, adj.size(), adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i)
        for (std::size_t j = 0; j < adj.size(); ++j) m(i, j) = adj[i][j];
    return m;
}

// ---------------------------------------------------------------------------
// evaluation shortcuts

/// Evaluates a named stdlib expression on V (and other named inputs).
inline KMatrix<RealSemiring> eval_named(const NamedExpr& ne, const std::map<std::string, KMatrix<RealSemiring>>& mats,
                                        std::size_t n) {
    Instance<RealSemiring> inst;
    inst.set_dim("alpha", n);
    for (const auto& [k, m] : mats) inst.set(k, m);
    return evaluate(ne.expr, ne.schema, inst, RealSemiring{});
}

// ---------------------------------------------------------------------------
// corpora

/// Schema for hand-written corpus expressions over one symbol alpha.
inline Schema corpus_schema() {
    return parse_schema(
        "var V : alpha x alpha\n"
        "var W : alpha x alpha\n"
        "var a : alpha x 1\n"
        "var b : alpha x 1\n"
        "var s : 1 x 1\n"
        "var u : alpha x 1\n"
        "var v : alpha x 1\n"
        "var w : alpha x 1\n"
        "var X : alpha x alpha\n"
        "var Y : alpha x 1\n"
        "var Z : 1 x 1\n");
}

struct CorpusItem {
    std::string name;
    Expr expr;
    Schema schema;
};

/// Sum-fragment expressions built from semiring operations only, so they
/// evaluate over every semiring and translate to relational algebra.
inline std::vector<CorpusItem> generic_sum_corpus() {
    std::vector<CorpusItem> out;
    for (const char* n : {"e_1", "e_diag", "e_Id", "e_getDiag"}) {
        NamedExpr ne = stdlib_expr(n);
        out.push_back({ne.name, ne.expr, ne.schema});
    }
    const Schema s = corpus_schema();
    const std::vector<std::pair<const char*, const char*>> src = {
        {"var", "V"},
        {"add", "V + W"},
        {"product", "V * W"},
        {"transpose-sum", "V^T + W"},
        {"scaled", "(a^T * b) .* V"},
        {"trace", "sum v . v^T * V * v"},
        {"quadratic form", "a^T * V * a"},
        {"column sums", "sum v . V * v"},
        {"outer", "sum v . sum w . (v^T * V * w) .* (w * v^T)"},
        {"total", "sum v . sum w . v^T * V * w"},
        {"ones", "ones(V)"},
        {"diag", "diag(a)"},
        {"pointwise", "hprod2(V, W)"},
        {"pointwise sum", "hsum3(V, W, V)"},
        {"triangles", "sum u . sum v . sum w . (u^T * V * v) * (v^T * V * w) * (w^T * V * u)"},
        {"raw loop", "for v, Y . Y + V * v"},
        {"mixed", "sum v . (v^T * a) .* (V * v) + b"},
    };
    for (const auto& [name, text] : src) out.push_back({name, parse_expr(text), s});
    return out;
}

/// All sum-fragment corpus expressions, including those using constants or
/// div, which only evaluate over reals.
inline std::vector<CorpusItem> sum_corpus() {
    std::vector<CorpusItem> out = generic_sum_corpus();
    for (const char* n : {"four_clique", "e_diagInverse"}) {
        NamedExpr ne = stdlib_expr(n);
        out.push_back({ne.name, ne.expr, ne.schema});
    }
    return out;
}

// ---------------------------------------------------------------------------
// random well-typed expressions

struct ExprGenOptions {
    bool naturals_only = false;    // constants are naturals; no div/gtz
    bool allow_order = true;       // Sless etc.
    bool allow_unknown_fn = true;  // names outside the registry
};

/// Schema used by the generator: two size symbols, inputs, iterators and
/// accumulators for every shape.
inline Schema generator_schema() {
    Schema s;
    const std::vector<std::string> syms = {"1", "alpha", "beta"};
    for (const auto& r : syms)
        for (const auto& c : syms) {
            std::string tag = (r == "1" ? "1" : r.substr(0, 1)) + (c == "1" ? "1" : c.substr(0, 1));
            s.add("M" + tag, make_type(r, c));
            s.add("N" + tag, make_type(r, c));
            s.add("X" + tag, make_type(r, c));
        }
    s.add("i", make_type("alpha", "1"));
    s.add("j", make_type("alpha", "1"));
    s.add("k", make_type("beta", "1"));
    return s;
}

class ExprGen {
public:
    ExprGen(Rng& rng, ExprGenOptions opt = {}) : rng_(rng), opt_(opt) {}

    Expr gen(const MatrixType& t, int depth) {
        using namespace ex;
        const std::string r = t.rows.name(), c = t.cols.name();
        if (depth <= 0 || pick(5) == 0) return leaf(t);
        switch (pick(13)) {
        case 0: return tr(gen(t.transposed(), depth - 1));
        case 1: {
            MatrixType l{t.rows, sym()}, rr{l.cols, t.cols};
            return gen(l, depth - 1) * gen(rr, depth - 1);
        }
        case 2: return gen(t, depth - 1) + gen(t, depth - 1);
        case 3: return smul(gen(scalar(), depth - 1), gen(t, depth - 1));
        case 4: {
            std::vector<std::string> fns = {"hprod2", "hsum2", "hprod3"};
            if (!opt_.naturals_only) {
                fns.push_back("div");
                fns.push_back("gtz");
            }
            if (opt_.allow_unknown_fn) fns.push_back("f");
            std::string f = fns[pick(fns.size())];
            std::size_t k = f == "gtz" || f == "f" ? 1 + (f == "f" ? pick(2) : 0) : f == "hprod3" ? 3 : 2;
            std::vector<Expr> args;
            for (std::size_t i = 0; i < k; ++i) args.push_back(gen(t, depth - 1));
            return apply(f, args);
        }
        case 5:
        case 6: {
            std::string it = iterator();
            std::string acc = accumulator(t);
            if (pick(2)) return loop(it, acc, gen(t, depth - 1), gen(t, depth - 1));
            return loop(it, acc, gen(t, depth - 1));
        }
        case 7: return sum(iterator(), gen(t, depth - 1));
        case 8:
            if (t.rows == t.cols) return prod(iterator(), gen(t, depth - 1));
            return hprod(iterator(), gen(t, depth - 1));
        case 9:
            if (c == "1") return ones(gen(MatrixType{t.rows, sym()}, depth - 1));
            return leaf(t);
        case 10:
            if (r == c) return diag(gen(MatrixType{t.rows, SizeSymbol::unit()}, depth - 1));
            return leaf(t);
        case 11:
            if (opt_.allow_order && !t.rows.is_unit()) {
                if (r == c) return order(pick(2) ? OrderKind::Sless : OrderKind::Nshift, r);
                if (c == "1") return order(pick(2) ? OrderKind::Emin : OrderKind::Emax, r);
            }
            return leaf(t);
        default: return leaf(t);
        }
    }

    Expr gen_any(int depth) {
        MatrixType t{sym(), sym()};
        return gen(t, depth);
    }

private:
    static MatrixType scalar() { return make_type("1", "1"); }

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

    SizeSymbol sym() {
        static const char* names[] = {"1", "alpha", "beta"};
        return SizeSymbol(names[pick(3)]);
    }

    static std::string tag(const MatrixType& t) {
        auto one = [](const SizeSymbol& s) { return s.is_unit() ? std::string("1") : s.name().substr(0, 1); };
        return one(t.rows) + one(t.cols);
    }

    std::string iterator() {
        static const char* its[] = {"i", "j", "k"};
        return its[pick(3)];
    }
    std::string accumulator(const MatrixType& t) { return "X" + tag(t); }

    Expr leaf(const MatrixType& t) {
        using namespace ex;
        if (t.is_scalar() && pick(3) == 0) {
            if (opt_.naturals_only) return constant(std::to_string(pick(4)));
            static const char* lits[] = {"0", "1", "2", "-1", "0.5", "-2.25", "1e-3", "3E+2", "7"};
            return constant(lits[pick(9)]);
        }
        if (t.is_column() && !t.rows.is_unit() && pick(3) == 0) {
            if (t.rows.name() == "alpha") return var(pick(2) ? "i" : "j");
            return var("k");
        }
        return var((pick(2) ? "M" : "N") + tag(t));
    }

    Rng& rng_;
    ExprGenOptions opt_;
};

}  // namespace testing_support
