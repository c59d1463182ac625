#pragma once

// Named expressions of the standard library. Every expression comes with its
// own schema over the size symbol `alpha`; loop variables get fresh names so
// that inlined building blocks never capture each other's variables.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "matloop/ast.hpp"
#include "matloop/error.hpp"

namespace matloop {

struct NamedExpr {
    std::string name;
    std::string group;
    Expr expr;
    std::set<std::string> required_functions;
    Schema schema;
};

inline void collect_functions(const Expr& e, std::set<std::string>& out) {
    if (const auto* a = e.as<ApplyNode>()) out.insert(a->fname);
    for_each_child(e, [&](const Expr& c) { collect_functions(c, out); });
}

namespace lib {

using namespace ex;

/// Builder state for one named expression.
class Builder {
public:
    explicit Builder(std::string symbol = "alpha") : a_(std::move(symbol)) {}

    const SizeSymbol& symbol() const { return a_; }
    Schema& schema() { return schema_; }

    Expr matrix_input(const std::string& name) { return input(name, {a_, a_}); }
    Expr vector_input(const std::string& name) { return input(name, {a_, SizeSymbol::unit()}); }
    Expr scalar_input(const std::string& name) { return input(name, make_type("1", "1")); }

    Expr input(const std::string& name, MatrixType t) {
        schema_.add(name, t);
        names_.reserve(name);
        return var(name);
    }

    /// Fresh iterator of type alpha x 1.
    std::string it(const std::string& base) {
        std::string n = names_.prefer(base);
        schema_.add(n, {a_, SizeSymbol::unit()});
        return n;
    }

    std::string acc(const std::string& base, MatrixType t) {
        std::string n = names_.prefer(base);
        schema_.add(n, t);
        return n;
    }

    MatrixType square() const { return {a_, a_}; }
    MatrixType column() const { return {a_, SizeSymbol::unit()}; }
    static MatrixType scalar() { return make_type("1", "1"); }

    // sum / prod over a fresh iterator
    Expr sum_over(const std::string& base, const std::function<Expr(Expr)>& body) {
        std::string v = it(base);
        return ex::sum(v, body(var(v)));
    }
    Expr prod_over(const std::string& base, const std::function<Expr(Expr)>& body) {
        std::string v = it(base);
        return ex::prod(v, body(var(v)));
    }

    static Expr c(const std::string& lit) { return constant(lit); }
    static Expr neg(Expr e) { return smul(c("-1"), std::move(e)); }
    /// [1] + [-1] .* s for a scalar s
    static Expr one_minus(Expr s) { return c("1") + neg(std::move(s)); }

    // ---- basics

    Expr e_1() {
        std::string v = it("v");
        std::string x = acc("X", column());
        return loop(v, x, var(x) + var(v));
    }

    Expr e_diag(const Expr& a) {
        std::string v = it("v");
        std::string x = acc("X", square());
        Expr vv = var(v);
        return loop(v, x, var(x) + smul(tr(vv) * a, vv * tr(vv)));
    }

    Expr e_Id() {
        return sum_over("v", [](Expr v) { return v * tr(v); });
    }

    Expr sless() const { return order(OrderKind::Sless, a_.name()); }
    Expr emin() const { return order(OrderKind::Emin, a_.name()); }
    Expr emax() const { return order(OrderKind::Emax, a_.name()); }
    Expr nshift() const { return order(OrderKind::Nshift, a_.name()); }

    /// 1 iff index(w) <= index(v)
    Expr succ(const Expr& w, const Expr& v) { return tr(w) * (e_Id() + sless()) * v; }
    /// 1 iff index(y) < index(v)
    Expr succ_plus(const Expr& y, const Expr& v) { return tr(y) * sless() * v; }
    Expr min(const Expr& v) { return tr(emin()) * v; }
    Expr max(const Expr& v) { return tr(emax()) * v; }

    /// V^j for v = b_j. Factors with index(w) > j contribute the identity.
    Expr e_pow(const Expr& V, const Expr& v) {
        return prod_over("w", [&](Expr w) { return smul(succ(w, v), V) + smul(succ_plus(v, w), e_Id()); });
    }

    Expr get_next_matrix(const Expr& v) { return e_pow(nshift(), v); }

    Expr e_shift(const Expr& a, const Expr& v) {
        return sum_over("w", [&](Expr w) { return smul(tr(w) * a, get_next_matrix(v) * w); });
    }

    // ---- graphs

    Expr four_clique(const Expr& V, bool with_guard) {
        std::string u = it("u"), v = it("v"), w = it("w"), x = it("x");
        std::string x1 = acc("X1", scalar()), x2 = acc("X2", scalar()), x3 = acc("X3", scalar()),
                    x4 = acc("X4", scalar());
        Expr U = var(u), Vv = var(v), W = var(w), Xx = var(x);
        auto edge = [&](const Expr& p, const Expr& q) { return tr(p) * V * q; };
        auto distinct = [&](const Expr& p, const Expr& q) { return one_minus(tr(p) * q); };
        Expr outer = edge(U, Vv) * edge(U, W) * edge(Vv, W);
        Expr inner = edge(U, Xx) * edge(Vv, Xx) * edge(W, Xx);
        if (with_guard) {
            outer = outer * distinct(U, Vv) * distinct(U, W) * distinct(Vv, W);
            inner = inner * distinct(U, Xx) * distinct(Vv, Xx) * distinct(W, Xx);
        }
        Expr l4 = loop(x, x4, var(x4) + outer * inner);
        Expr l3 = loop(w, x3, var(x3) + l4);
        Expr l2 = loop(v, x2, var(x2) + l3);
        return loop(u, x1, var(x1) + l2);
    }

    Expr e_TC(const Expr& V) {
        return apply("gtz", {prod_over("v", [&](Expr) { return e_Id() + V; })});
    }

    Expr e_exp(const Expr& A) {
        std::string v = it("v");
        std::string x = acc("X", scalar());
        return loop(v, x, A, var(x) * var(x));
    }

    // ---- LU

    Expr col(const Expr& V, const Expr& y) {
        std::string v = it("v");
        std::string x = acc("X", column());
        Expr vv = var(v);
        return loop(v, x, smul(succ_plus(y, vv) * (tr(vv) * V * y), vv) + var(x));
    }

    Expr reduce(const Expr& V, const Expr& y) {
        Expr pivot = smul(smul(c("-1"), tr(y) * V * y), ones(y));
        return e_Id() + apply("div", {col(V, y), pivot}) * tr(y);
    }

    /// T_n ... T_1, the product of the elimination steps.
    Expr e_Linv(const Expr& V) {
        std::string y = it("y");
        std::string x = acc("X", square());
        return loop(y, x, e_Id(), reduce(var(x) * V, var(y)) * var(x));
    }

    Expr e_U(const Expr& V) { return e_Linv(V) * V; }
    Expr e_L(const Expr& V) { return e_lowerDiagInv(e_Linv(V)); }

    // ---- LU with row exchanges

    /// 1 when |s| > 1e-10, else 0
    static Expr nonzero(const Expr& s) { return apply("gtz", {s * s + c("-1e-20")}); }

    Expr e_LinvP(const Expr& V) {
        std::string y = it("y");
        std::string x = acc("X", square());
        Expr Y = var(y);
        Expr B = var(x) * V;
        // first row at or below y with a nonzero entry in column y
        std::string pv = it("v"), pw = it("w");
        Expr P_v = var(pv), P_w = var(pw);
        Expr earlier = ex::sum(pw, smul(succ(Y, P_w) * succ_plus(P_w, P_v), nonzero(tr(P_w) * B * Y)));
        Expr p = ex::sum(pv, smul(smul(smul(succ(Y, P_v), nonzero(tr(P_v) * B * Y)), one_minus(apply("gtz", {earlier}))), P_v));
        Expr h = tr(p) * p;
        Expr swap = e_Id() + neg(smul(h, Y * tr(Y))) + neg(p * tr(p)) + Y * tr(p) + p * tr(Y);
        Expr B2 = swap * B;
        Expr d = neg(tr(Y) * B2 * Y) + one_minus(h);
        Expr T = e_Id() + apply("div", {col(B2, Y), smul(d, ones(Y))}) * tr(Y);
        return loop(y, x, e_Id(), T * swap * var(x));
    }

    Expr e_U_pivoted(const Expr& V) { return e_LinvP(V) * V; }

    // ---- triangular inverses and Csanky

    /// I + V + V^2 + ... + V^n
    Expr e_ps(const Expr& V) {
        return e_Id() + sum_over("v", [&](Expr v) { return e_pow(V, v); });
    }

    Expr e_getDiag(const Expr& V) {
        return sum_over("v", [&](Expr v) { return smul(tr(v) * V * v, v * tr(v)); });
    }

    Expr e_diagInverse(const Expr& V) {
        return sum_over("v", [&](Expr v) { return smul(apply("div", {c("1"), tr(v) * V * v}), v * tr(v)); });
    }

    Expr e_upperDiagInv(const Expr& V) {
        return e_ps(neg(e_diagInverse(V) * (V + neg(e_getDiag(V))))) * e_diagInverse(V);
    }

    Expr e_lowerDiagInv(const Expr& V) { return tr(e_upperDiagInv(tr(V))); }

    /// trace of V^j for v = b_j
    Expr e_powTr(const Expr& V, const Expr& v) {
        return sum_over("w", [&](Expr w) { return tr(w) * e_pow(V, v) * w; });
    }

    Expr e_S_vec(const Expr& V, const Expr& v) { return e_powTr(V, v); }

    /// (tr V, tr V^2, ..., tr V^n)
    Expr e_bbar(const Expr& V) {
        return sum_over("w", [&](Expr w) { return smul(e_S_vec(V, w), w); });
    }

    /// Lower triangular system with diagonal 1..n whose column j below the
    /// diagonal is bbar shifted down by j.
    Expr e_Smat(const Expr& V) {
        Expr diag_part = sum_over("v", [&](Expr v) {
            Expr count = sum_over("w", [&](Expr w) { return succ(w, v); });
            return smul(count, v * tr(v));
        });
        Expr b = e_bbar(V);
        Expr band = sum_over("v", [&](Expr v) { return e_shift(b, v) * tr(v); });
        return diag_part + band;
    }

    /// coefficients c_1..c_n of det(xI - V) = x^n + c_1 x^(n-1) + ... + c_n
    Expr e_cbar(const Expr& V) { return e_lowerDiagInv(e_Smat(V)) * neg(e_bbar(V)); }

    Expr e_det(const Expr& V) {
        Expr sign = prod_over("w", [](Expr) { return c("-1"); });
        return tr(smul(sign, e_cbar(V))) * emax();
    }

    Expr e_powNm1(const Expr& V) {
        return prod_over("w", [&](Expr w) { return smul(one_minus(max(w)), V) + smul(max(w), e_Id()); });
    }

    /// V^(n-1-i) for v = b_i, i < n
    Expr e_invPow(const Expr& V, const Expr& v) {
        return prod_over("w", [&](Expr w) {
            Expr s = succ_plus(v, w) * one_minus(max(w));
            return smul(s, V) + smul(one_minus(s), e_Id());
        });
    }

    Expr e_inv(const Expr& V) {
        Expr cv = e_cbar(V);
        Expr cn = tr(cv) * emax();
        Expr lead = smul(apply("div", {c("1"), cn}), e_powNm1(V));
        Expr rest = sum_over("v", [&](Expr v) {
            return smul(smul(one_minus(max(v)), apply("div", {tr(cv) * v, cn})), e_invPow(V, v));
        });
        return neg(lead + rest);
    }

private:
    SizeSymbol a_;
    Schema schema_;
    NameSupply names_;
};

struct Entry {
    const char* name;
    const char* group;
    std::function<Expr(Builder&)> make;
};

inline const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        {"e_1", "basics", [](Builder& b) { return b.e_1(); }},
        {"e_diag", "basics", [](Builder& b) { return b.e_diag(b.vector_input("a")); }},
        {"e_Id", "basics", [](Builder& b) { return b.e_Id(); }},
        {"succ", "basics", [](Builder& b) {
             Expr w = b.vector_input("w");
             return b.succ(w, b.vector_input("v"));
         }},
        {"succ_plus", "basics", [](Builder& b) {
             Expr y = b.vector_input("y");
             return b.succ_plus(y, b.vector_input("v"));
         }},
        {"min", "basics", [](Builder& b) { return b.min(b.vector_input("v")); }},
        {"max", "basics", [](Builder& b) { return b.max(b.vector_input("v")); }},
        {"e_max", "basics", [](Builder& b) { return b.emax(); }},
        {"get_next_matrix", "basics", [](Builder& b) { return b.get_next_matrix(b.vector_input("v")); }},
        {"e_shift", "basics", [](Builder& b) {
             Expr a = b.vector_input("a");
             return b.e_shift(a, b.vector_input("v"));
         }},
        {"four_clique", "graph", [](Builder& b) { return b.four_clique(b.matrix_input("V"), true); }},
        {"e_TC", "graph", [](Builder& b) { return b.e_TC(b.matrix_input("V")); }},
        {"e_exp", "graph", [](Builder& b) { return b.e_exp(b.scalar_input("A")); }},
        {"col", "lu", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.col(V, b.vector_input("y"));
         }},
        {"reduce", "lu", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.reduce(V, b.vector_input("y"));
         }},
        {"e_Linv", "lu", [](Builder& b) { return b.e_Linv(b.matrix_input("V")); }},
        {"e_U", "lu", [](Builder& b) { return b.e_U(b.matrix_input("V")); }},
        {"e_L", "lu", [](Builder& b) { return b.e_L(b.matrix_input("V")); }},
        {"e_LinvP", "plu", [](Builder& b) { return b.e_LinvP(b.matrix_input("V")); }},
        {"e_U_pivoted", "plu", [](Builder& b) { return b.e_U_pivoted(b.matrix_input("V")); }},
        {"e_pow", "csanky", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.e_pow(V, b.vector_input("v"));
         }},
        {"e_powTr", "csanky", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.e_powTr(V, b.vector_input("v"));
         }},
        {"e_ps", "csanky", [](Builder& b) { return b.e_ps(b.matrix_input("V")); }},
        {"e_getDiag", "csanky", [](Builder& b) { return b.e_getDiag(b.matrix_input("V")); }},
        {"e_diagInverse", "csanky", [](Builder& b) { return b.e_diagInverse(b.matrix_input("V")); }},
        {"e_upperDiagInv", "csanky", [](Builder& b) { return b.e_upperDiagInv(b.matrix_input("V")); }},
        {"e_lowerDiagInv", "csanky", [](Builder& b) { return b.e_lowerDiagInv(b.matrix_input("V")); }},
        {"e_S_vec", "csanky", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.e_S_vec(V, b.vector_input("v"));
         }},
        {"e_bbar", "csanky", [](Builder& b) { return b.e_bbar(b.matrix_input("V")); }},
        {"e_Smat", "csanky", [](Builder& b) { return b.e_Smat(b.matrix_input("V")); }},
        {"e_cbar", "csanky", [](Builder& b) { return b.e_cbar(b.matrix_input("V")); }},
        {"e_invPow", "csanky", [](Builder& b) {
             Expr V = b.matrix_input("V");
             return b.e_invPow(V, b.vector_input("v"));
         }},
        {"e_powNm1", "csanky", [](Builder& b) { return b.e_powNm1(b.matrix_input("V")); }},
        {"e_det", "csanky", [](Builder& b) { return b.e_det(b.matrix_input("V")); }},
        {"e_inv", "csanky", [](Builder& b) { return b.e_inv(b.matrix_input("V")); }},
    };
    return table;
}

inline NamedExpr build(const Entry& en, const std::string& symbol = "alpha") {
    Builder b(symbol);
    NamedExpr out;
    out.name = en.name;
    out.group = en.group;
    out.expr = en.make(b);
    collect_functions(out.expr, out.required_functions);
    out.schema = b.schema();
    return out;
}

inline std::vector<NamedExpr> build_group(const std::string& group) {
    std::vector<NamedExpr> out;
    for (const auto& en : entries())
        if (group.empty() || group == en.group) out.push_back(build(en));
    return out;
}

}  // namespace lib

inline std::vector<NamedExpr> build_basics() { return lib::build_group("basics"); }
inline std::vector<NamedExpr> build_graph_queries() { return lib::build_group("graph"); }
inline std::vector<NamedExpr> build_lu_suite() { return lib::build_group("lu"); }
inline std::vector<NamedExpr> build_plu_suite() { return lib::build_group("plu"); }
inline std::vector<NamedExpr> build_csanky_suite() { return lib::build_group("csanky"); }
inline std::vector<NamedExpr> build_stdlib() { return lib::build_group(""); }

inline std::vector<std::string> stdlib_names() {
    std::vector<std::string> out;
    for (const auto& en : lib::entries()) out.push_back(en.name);
    return out;
}

inline NamedExpr stdlib_expr(const std::string& name) {
    for (const auto& en : lib::entries())
        if (name == en.name) return lib::build(en);
    throw Error(ErrorKind::UnboundVariable, "no standard library expression named '" + name + "'");
}

}  // namespace matloop
