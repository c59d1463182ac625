#pragma once

// Syntactic fragments: core (no loops) < sum < fo < prod < full.

#include <algorithm>
#include <string>
#include <string_view>

#include "matloop/ast.hpp"
#include "matloop/typecheck.hpp"

namespace matloop {

enum class Fragment { Core = 0, Sum = 1, FO = 2, Prod = 3, Full = 4 };

inline std::string_view to_string(Fragment f) {
    switch (f) {
    case Fragment::Core: return "core";
    case Fragment::Sum: return "sum";
    case Fragment::FO: return "fo";
    case Fragment::Prod: return "prod";
    case Fragment::Full: return "full";
    }
    return "?";
}

inline bool operator<(Fragment a, Fragment b) { return static_cast<int>(a) < static_cast<int>(b); }
inline bool operator<=(Fragment a, Fragment b) { return static_cast<int>(a) <= static_cast<int>(b); }

enum class LoopPattern { Sigma, Pi, Hadamard, General };

inline std::string_view to_string(LoopPattern p) {
    switch (p) {
    case LoopPattern::Sigma: return "sigma";
    case LoopPattern::Pi: return "pi";
    case LoopPattern::Hadamard: return "hadamard";
    case LoopPattern::General: return "general";
    }
    return "?";
}

namespace detail {

inline bool is_var(const Expr& e, const std::string& name) {
    const VarNode* v = e.as<VarNode>();
    return v && v->name == name;
}

inline bool is_one_literal(const Expr& e) {
    const ConstNode* c = e.as<ConstNode>();
    if (!c) return false;
    try {
        return std::stod(c->literal) == 1.0;
    } catch (...) {
        return false;
    }
}

/// If e is `Y + f` or `f + Y` for the variable Y, returns f.
inline const Expr* accumulated_term(const Expr& e, const std::string& acc) {
    const AddNode* a = e.as<AddNode>();
    if (!a) return nullptr;
    if (is_var(a->lhs, acc)) return &a->rhs;
    if (is_var(a->rhs, acc)) return &a->lhs;
    return nullptr;
}

/// Σu. t (sugar) or for u, Y . Y + t (raw), with Y not free in t: returns
/// the iterator and t.
inline bool sum_shape(const Expr& e, std::string& iter, Expr& term) {
    if (const QuantNode* q = e.as<QuantNode>(); q && q->kind == Quantifier::Sum) {
        iter = q->iter;
        term = q->body;
        return true;
    }
    if (const ForNode* f = e.as<ForNode>(); f && !f->init) {
        const Expr* t = accumulated_term(f->body, f->acc);
        if (!t || free_vars(*t).count(f->acc)) return false;
        iter = f->iter;
        term = *t;
        return true;
    }
    return false;
}

/// u * u^T
inline bool outer_self(const Expr& e, const std::string& u) {
    const MatMulNode* m = e.as<MatMulNode>();
    if (!m || !is_var(m->lhs, u)) return false;
    const TransposeNode* t = m->rhs.as<TransposeNode>();
    return t && is_var(t->arg, u);
}

inline bool is_identity_expr(const Expr& e) {
    if (is_one_literal(e)) return true;
    std::string u;
    Expr t;
    return sum_shape(e, u, t) && outer_self(t, u);
}

inline bool is_ones_column(const Expr& e) {
    if (is_one_literal(e)) return true;
    if (e.is<OnesNode>()) return true;
    std::string u;
    Expr t;
    return sum_shape(e, u, t) && is_var(t, u);
}

inline bool is_all_ones_expr(const Expr& e) {
    if (is_ones_column(e)) return true;
    if (const TransposeNode* t = e.as<TransposeNode>()) return is_ones_column(t->arg);
    // Σa Σb. a * b^T
    std::string a, b;
    Expr t1, t2;
    if (!sum_shape(e, a, t1) || !sum_shape(t1, b, t2)) return false;
    const MatMulNode* m = t2.as<MatMulNode>();
    if (!m || !is_var(m->lhs, a) || a == b) return false;
    const TransposeNode* tr = m->rhs.as<TransposeNode>();
    return tr && is_var(tr->arg, b);
}

}  // namespace detail

inline LoopPattern recognize_loop_pattern(const ForNode& f) {
    if (!f.init) {
        const Expr* t = detail::accumulated_term(f.body, f.acc);
        if (t && !free_vars(*t).count(f.acc)) return LoopPattern::Sigma;
        return LoopPattern::General;
    }
    if (detail::is_identity_expr(*f.init)) {
        const MatMulNode* m = f.body.as<MatMulNode>();
        if (m && detail::is_var(m->lhs, f.acc) && !free_vars(m->rhs).count(f.acc)) return LoopPattern::Pi;
    }
    if (detail::is_all_ones_expr(*f.init)) {
        const ApplyNode* a = f.body.as<ApplyNode>();
        if (a && a->fname == "hprod2" && a->args.size() == 2) {
            if (detail::is_var(a->args[0], f.acc) && !free_vars(a->args[1]).count(f.acc)) return LoopPattern::Hadamard;
            if (detail::is_var(a->args[1], f.acc) && !free_vars(a->args[0]).count(f.acc)) return LoopPattern::Hadamard;
        }
    }
    return LoopPattern::General;
}

/// Least fragment containing e. With a schema, ones() and diag() of height
/// 1 (which need no loop) are not counted as loops.
inline Fragment classify(const Expr& e, const Schema* schema = nullptr) {
    auto unit_height = [&](const Expr& x) {
        if (!schema) return false;
        try {
            return typecheck(x, *schema).rows.is_unit();
        } catch (const Error&) {
            return false;
        }
    };
    Fragment own = visit(e, overloaded{
        [&](const ForNode& f) {
            switch (recognize_loop_pattern(f)) {
            case LoopPattern::Sigma: return Fragment::Sum;
            case LoopPattern::Hadamard: return Fragment::FO;
            case LoopPattern::Pi: return Fragment::Prod;
            case LoopPattern::General: break;
            }
            return Fragment::Full;
        },
        [&](const QuantNode& q) {
            switch (q.kind) {
            case Quantifier::Sum: return Fragment::Sum;
            case Quantifier::Hadamard: return Fragment::FO;
            case Quantifier::Prod: return Fragment::Prod;
            }
            return Fragment::Full;
        },
        [&](const OnesNode& o) { return unit_height(o.arg) ? Fragment::Core : Fragment::Sum; },
        [&](const DiagNode& d) { return unit_height(d.arg) ? Fragment::Core : Fragment::Sum; },
        // order predicates are given as matrices beyond the sum fragment
        [](const OrderNode&) { return Fragment::Prod; },
        [](const auto&) { return Fragment::Core; },
    });
    if (e.is<OnesNode>()) return own;  // the argument is never evaluated
    Fragment out = own;
    for_each_child(e, [&](const Expr& c) { out = std::max(out, classify(c, schema), [](Fragment a, Fragment b) { return a < b; }); });
    return out;
}

}  // namespace matloop
