#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "matloop/ast.hpp"

namespace matloop {

/// Arity of a built-in pointwise function, or nullopt when the name is not a
/// built-in. hprodK and hsumK exist for every K >= 1.
inline std::optional<std::size_t> builtin_arity(std::string_view fname) {
    if (fname == "div") return 2;
    if (fname == "gtz") return 1;
    for (std::string_view prefix : {std::string_view("hprod"), std::string_view("hsum")}) {
        if (fname.size() > prefix.size() && fname.substr(0, prefix.size()) == prefix) {
            auto digits = fname.substr(prefix.size());
            if (digits.find_first_not_of("0123456789") != std::string_view::npos) continue;
            if (digits[0] == '0') continue;
            if (digits.size() > 6) continue;
            return std::stoul(std::string(digits));
        }
    }
    return std::nullopt;
}

namespace detail {

inline Error mismatch(const std::string& what, const MatrixType& a, const MatrixType& b) {
    return Error(ErrorKind::TypeMismatch, what + ": " + to_string(a) + " vs " + to_string(b));
}

inline const MatrixType& iterator_type(const std::string& v, const Schema& s) {
    const MatrixType* t = s.find(v);
    if (!t) throw Error(ErrorKind::UnboundVariable, "loop variable '" + v + "' is not in the schema");
    if (!t->cols.is_unit() || t->rows.is_unit())
        throw Error(ErrorKind::IteratorNotVector,
                    "loop variable '" + v + "' has type " + to_string(*t) + ", expected gamma x 1");
    return *t;
}

}  // namespace detail

/// Type of e under s.
inline MatrixType typecheck(const Expr& e, const Schema& s) {
    return visit(e, overloaded{
        [&](const VarNode& n) -> MatrixType { return s.at(n.name); },
        [&](const TransposeNode& n) -> MatrixType { return typecheck(n.arg, s).transposed(); },
        [&](const MatMulNode& n) -> MatrixType {
            MatrixType a = typecheck(n.lhs, s), b = typecheck(n.rhs, s);
            if (a.cols != b.rows) throw detail::mismatch("matrix product", a, b);
            return {a.rows, b.cols};
        },
        [&](const AddNode& n) -> MatrixType {
            MatrixType a = typecheck(n.lhs, s), b = typecheck(n.rhs, s);
            if (!(a == b)) throw detail::mismatch("addition", a, b);
            return a;
        },
        [&](const ScalarMulNode& n) -> MatrixType {
            MatrixType a = typecheck(n.scalar, s), b = typecheck(n.arg, s);
            if (!a.is_scalar()) throw detail::mismatch("scalar multiplication", a, make_type("1", "1"));
            return b;
        },
        [&](const ApplyNode& n) -> MatrixType {
            if (auto k = builtin_arity(n.fname); k && *k != n.args.size())
                throw Error(ErrorKind::ArityMismatch, n.fname + " expects " + std::to_string(*k) +
                                                          " arguments, got " + std::to_string(n.args.size()));
            if (n.args.empty())
                throw Error(ErrorKind::ArityMismatch, n.fname + " applied to no arguments");
            MatrixType t = typecheck(n.args[0], s);
            for (std::size_t i = 1; i < n.args.size(); ++i) {
                MatrixType u = typecheck(n.args[i], s);
                if (!(u == t)) throw detail::mismatch("arguments of " + n.fname, t, u);
            }
            return t;
        },
        [&](const ForNode& n) -> MatrixType {
            detail::iterator_type(n.iter, s);
            const MatrixType* acc = s.find(n.acc);
            if (!acc) throw Error(ErrorKind::UnboundVariable, "loop accumulator '" + n.acc + "' is not in the schema");
            if (n.init) {
                MatrixType i = typecheck(*n.init, s);
                if (!(i == *acc)) throw detail::mismatch("loop initializer", *acc, i);
            }
            MatrixType b = typecheck(n.body, s);
            if (!(b == *acc)) throw detail::mismatch("loop body", *acc, b);
            return b;
        },
        [&](const ConstNode&) -> MatrixType { return make_type("1", "1"); },
        [&](const QuantNode& n) -> MatrixType {
            detail::iterator_type(n.iter, s);
            MatrixType b = typecheck(n.body, s);
            if (n.kind == Quantifier::Prod && !(b.rows == b.cols))
                throw detail::mismatch("product quantifier needs a square body", b, b.transposed());
            return b;
        },
        [&](const OnesNode& n) -> MatrixType {
            MatrixType a = typecheck(n.arg, s);
            return {a.rows, SizeSymbol::unit()};
        },
        [&](const DiagNode& n) -> MatrixType {
            MatrixType a = typecheck(n.arg, s);
            if (!a.is_column()) throw detail::mismatch("diag expects a column vector", a, {a.rows, SizeSymbol::unit()});
            return {a.rows, a.rows};
        },
        [&](const OrderNode& n) -> MatrixType {
            if (n.symbol.is_unit())
                throw Error(ErrorKind::TypeMismatch, std::string(to_string(n.kind)) + " needs a size symbol other than 1");
            switch (n.kind) {
            case OrderKind::Emin:
            case OrderKind::Emax: return {n.symbol, SizeSymbol::unit()};
            default: return {n.symbol, n.symbol};
            }
        },
    });
}

}  // namespace matloop
