#pragma once

// Rewrites of sugar into core loops, and of matrix-valued function
// application into scalar application.
//
// Both passes type the expression under a schema and add the loop variables
// they introduce to that schema, so the result stays checkable.

#include <string>

#include "matloop/ast.hpp"
#include "matloop/typecheck.hpp"

namespace matloop {

namespace detail {

using ex::operator+;
using ex::operator*;

class Rewriter {
public:
    Rewriter(const Expr& root, Schema& s) : schema_(s) {
        names_.reserve(s);
        names_.reserve(root);
    }

    std::string fresh(const std::string& base, MatrixType t) {
        std::string n = names_.fresh(base);
        schema_.add(n, std::move(t));
        return n;
    }

    /// Identity of type (a,a) written as a plain loop.
    Expr identity(const SizeSymbol& a) {
        if (a.is_unit()) return ex::constant("1");
        std::string u = fresh("u", {a, SizeSymbol::unit()});
        std::string y = fresh("Y", {a, a});
        return ex::loop(u, y, ex::var(y) + ex::var(u) * ex::tr(ex::var(u)));
    }

    /// All-ones column of height a.
    Expr ones_column(const SizeSymbol& a) {
        if (a.is_unit()) return ex::constant("1");
        std::string u = fresh("u", {a, SizeSymbol::unit()});
        std::string y = fresh("Y", {a, SizeSymbol::unit()});
        return ex::loop(u, y, ex::var(y) + ex::var(u));
    }

    /// All-ones matrix of type t.
    Expr all_ones(const MatrixType& t) {
        if (t.is_scalar()) return ex::constant("1");
        if (t.cols.is_unit()) return ones_column(t.rows);
        if (t.rows.is_unit()) return ex::tr(ones_column(t.cols));
        std::string a = fresh("u", {t.rows, SizeSymbol::unit()});
        std::string b = fresh("w", {t.cols, SizeSymbol::unit()});
        std::string y = fresh("Y", t);
        std::string z = fresh("Z", t);
        Expr inner = ex::loop(b, z, ex::var(z) + ex::var(a) * ex::tr(ex::var(b)));
        return ex::loop(a, y, ex::var(y) + inner);
    }

    Expr desugar(const Expr& e) {
        return visit(e, overloaded{
            [&](const QuantNode& n) -> Expr {
                MatrixType t = typecheck(e, schema_);
                Expr body = desugar(n.body);
                std::string x = fresh("X", t);
                switch (n.kind) {
                case Quantifier::Sum:
                    return ex::loop(n.iter, x, ex::var(x) + body);
                case Quantifier::Prod:
                    return ex::loop(n.iter, x, identity(t.rows), ex::var(x) * body);
                case Quantifier::Hadamard:
                    return ex::loop(n.iter, x, all_ones(t), ex::apply("hprod2", {ex::var(x), body}));
                }
                return e;
            },
            [&](const OnesNode&) -> Expr {
                MatrixType t = typecheck(e, schema_);
                return ones_column(t.rows);
            },
            [&](const DiagNode& n) -> Expr {
                MatrixType t = typecheck(e, schema_);
                Expr arg = desugar(n.arg);
                if (t.rows.is_unit()) return arg;
                std::string v = fresh("v", {t.rows, SizeSymbol::unit()});
                std::string x = fresh("X", t);
                Expr vv = ex::var(v);
                return ex::loop(v, x, ex::var(x) + ex::smul(ex::tr(vv) * arg, vv * ex::tr(vv)));
            },
            [&](const auto&) -> Expr { return rebuild(e, [&](const Expr& c) { return desugar(c); }); },
        });
    }

    Expr reduce(const Expr& e) {
        if (const auto* n = e.as<ApplyNode>()) {
            std::vector<Expr> args;
            for (const auto& a : n->args) args.push_back(reduce(a));
            MatrixType t = typecheck(e, schema_);
            if (t.is_scalar()) return ex::apply(n->fname, std::move(args));
            std::string vi, vj;
            if (!t.rows.is_unit()) vi = fresh("v", {t.rows, SizeSymbol::unit()});
            if (!t.cols.is_unit()) vj = fresh("w", {t.cols, SizeSymbol::unit()});
            std::vector<Expr> scalars;
            for (const auto& a : args) {
                Expr s = a;
                if (!vi.empty()) s = ex::tr(ex::var(vi)) * s;
                if (!vj.empty()) s = s * ex::var(vj);
                scalars.push_back(s);
            }
            Expr f = ex::apply(n->fname, std::move(scalars));
            Expr unit;
            if (!vi.empty() && !vj.empty()) unit = ex::var(vi) * ex::tr(ex::var(vj));
            else if (!vi.empty()) unit = ex::var(vi);
            else unit = ex::tr(ex::var(vj));
            Expr out = ex::smul(f, unit);
            if (!vj.empty()) out = ex::sum(vj, out);
            if (!vi.empty()) out = ex::sum(vi, out);
            return out;
        }
        return rebuild(e, [&](const Expr& c) { return reduce(c); });
    }

    /// Same node with each child replaced by f(child).
    template <class F>
    static Expr rebuild(const Expr& e, F&& f) {
        Node::Data d = visit(e, overloaded{
            [&](const VarNode& n) -> Node::Data { return n; },
            [&](const TransposeNode& n) -> Node::Data { return TransposeNode{f(n.arg)}; },
            [&](const MatMulNode& n) -> Node::Data { return MatMulNode{f(n.lhs), f(n.rhs)}; },
            [&](const AddNode& n) -> Node::Data { return AddNode{f(n.lhs), f(n.rhs)}; },
            [&](const ScalarMulNode& n) -> Node::Data { return ScalarMulNode{f(n.scalar), f(n.arg)}; },
            [&](const ApplyNode& n) -> Node::Data {
                std::vector<Expr> args;
                for (const auto& a : n.args) args.push_back(f(a));
                return ApplyNode{n.fname, std::move(args)};
            },
            [&](const ForNode& n) -> Node::Data {
                std::optional<Expr> init;
                if (n.init) init = f(*n.init);
                return ForNode{n.iter, n.acc, init, f(n.body)};
            },
            [&](const ConstNode& n) -> Node::Data { return n; },
            [&](const QuantNode& n) -> Node::Data { return QuantNode{n.kind, n.iter, f(n.body)}; },
            [&](const OnesNode& n) -> Node::Data { return OnesNode{f(n.arg)}; },
            [&](const DiagNode& n) -> Node::Data { return DiagNode{f(n.arg)}; },
            [&](const OrderNode& n) -> Node::Data { return n; },
        });
        return ex::make(std::move(d), e.span());
    }

private:
    Schema& schema_;
    NameSupply names_;
};

}  // namespace detail

/// Replaces sum/prod/hprod, ones and diag by core loops. Fresh loop
/// variables are added to s.
inline Expr desugar(const Expr& e, Schema& s) {
    typecheck(e, s);
    detail::Rewriter rw(e, s);
    return rw.desugar(e);
}

/// Rewrites every non-scalar function application into sums of scalar
/// applications over canonical vectors. Fresh loop variables are added to s.
inline Expr reduce_apply_to_scalars(const Expr& e, Schema& s) {
    typecheck(e, s);
    detail::Rewriter rw(e, s);
    return rw.reduce(e);
}

}  // namespace matloop
