#pragma once

// Abstract syntax of the loop matrix language: size symbols, matrix types,
// schemas and immutable expression trees.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matloop/error.hpp"

namespace matloop {

/// A dimension name. The distinguished symbol "1" always denotes dimension 1.
class SizeSymbol {
public:
    SizeSymbol() : name_("1") {}
    explicit SizeSymbol(std::string name) : name_(std::move(name)) {
        if (name_.empty()) throw Error(ErrorKind::SyntaxError, "empty size symbol");
    }
    static SizeSymbol unit() { return SizeSymbol(); }

    const std::string& name() const noexcept { return name_; }
    bool is_unit() const noexcept { return name_ == "1"; }

    friend bool operator==(const SizeSymbol&, const SizeSymbol&) = default;
    friend auto operator<=>(const SizeSymbol&, const SizeSymbol&) = default;

private:
    std::string name_;
};

struct MatrixType {
    SizeSymbol rows;
    SizeSymbol cols;

    bool is_scalar() const { return rows.is_unit() && cols.is_unit(); }
    bool is_column() const { return cols.is_unit(); }
    MatrixType transposed() const { return {cols, rows}; }

    friend bool operator==(const MatrixType&, const MatrixType&) = default;
};

inline MatrixType make_type(const std::string& rows, const std::string& cols) {
    return {SizeSymbol(rows), SizeSymbol(cols)};
}

inline std::string to_string(const MatrixType& t) {
    return t.rows.name() + " x " + t.cols.name();
}

/// Typing environment: matrix variable name to type. Loop iterators and loop
/// accumulators are ordinary entries.
class Schema {
public:
    Schema() = default;

    void add(const std::string& name, MatrixType type) {
        if (name.empty()) throw Error(ErrorKind::SyntaxError, "empty variable name");
        if (!vars_.emplace(name, std::move(type)).second)
            throw Error(ErrorKind::DuplicateVariable, "variable '" + name + "' declared twice");
    }
    /// Inserts or checks: re-declaring with the same type is allowed.
    void merge(const std::string& name, const MatrixType& type) {
        auto it = vars_.find(name);
        if (it == vars_.end()) {
            vars_.emplace(name, type);
        } else if (!(it->second == type)) {
            throw Error(ErrorKind::DuplicateVariable,
                        "variable '" + name + "' declared as " + to_string(it->second) +
                            " and " + to_string(type));
        }
    }
    void merge(const Schema& other) {
        for (const auto& [name, type] : other.vars_) merge(name, type);
    }

    bool contains(const std::string& name) const { return vars_.count(name) != 0; }
    const MatrixType* find(const std::string& name) const {
        auto it = vars_.find(name);
        return it == vars_.end() ? nullptr : &it->second;
    }
    const MatrixType& at(const std::string& name) const {
        auto it = vars_.find(name);
        if (it == vars_.end())
            throw Error(ErrorKind::UnboundVariable, "variable '" + name + "' is not in the schema");
        return it->second;
    }
    const std::map<std::string, MatrixType>& vars() const noexcept { return vars_; }
    std::set<SizeSymbol> symbols() const {
        std::set<SizeSymbol> out;
        for (const auto& [_, t] : vars_) {
            if (!t.rows.is_unit()) out.insert(t.rows);
            if (!t.cols.is_unit()) out.insert(t.cols);
        }
        return out;
    }

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::map<std::string, MatrixType> vars_;
};

struct Node;

/// Shared, immutable handle to an expression node.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    const Node& node() const { return *node_; }
    const Node* get() const noexcept { return node_.get(); }
    explicit operator bool() const noexcept { return static_cast<bool>(node_); }

    template <class T>
    const T* as() const;
    template <class T>
    bool is() const { return as<T>() != nullptr; }

    const SourceSpan& span() const;

private:
    std::shared_ptr<const Node> node_;
};

enum class OrderKind { Sless, Emin, Emax, Nshift };
enum class Quantifier { Sum, Prod, Hadamard };

struct VarNode {
    std::string name;
};
struct TransposeNode {
    Expr arg;
};
struct MatMulNode {
    Expr lhs, rhs;
};
struct AddNode {
    Expr lhs, rhs;
};
/// scalar × arg, where scalar has type (1,1).
struct ScalarMulNode {
    Expr scalar, arg;
};
struct ApplyNode {
    std::string fname;
    std::vector<Expr> args;
};
/// for iter, acc [= init] . body
struct ForNode {
    std::string iter;
    std::string acc;
    std::optional<Expr> init;
    Expr body;
};
/// Literal scalar in the carrier of the active semiring, kept as source text.
struct ConstNode {
    std::string literal;
};
/// sum / prod / hprod iter . body
struct QuantNode {
    Quantifier kind;
    std::string iter;
    Expr body;
};
struct OnesNode {
    Expr arg;
};
struct DiagNode {
    Expr arg;
};
struct OrderNode {
    OrderKind kind;
    SizeSymbol symbol;
};

struct Node {
    using Data = std::variant<VarNode, TransposeNode, MatMulNode, AddNode, ScalarMulNode,
                              ApplyNode, ForNode, ConstNode, QuantNode, OnesNode, DiagNode,
                              OrderNode>;
    Data data;
    SourceSpan span;
};

template <class T>
const T* Expr::as() const {
    return node_ ? std::get_if<T>(&node_->data) : nullptr;
}

inline const SourceSpan& Expr::span() const { return node_->span; }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class Visitor>
decltype(auto) visit(const Expr& e, Visitor&& vis) {
    return std::visit(std::forward<Visitor>(vis), e.node().data);
}

inline std::string_view to_string(OrderKind kind) {
    switch (kind) {
    case OrderKind::Sless: return "Sless";
    case OrderKind::Emin: return "Emin";
    case OrderKind::Emax: return "Emax";
    case OrderKind::Nshift: return "Nshift";
    }
    return "?";
}

inline std::string_view to_string(Quantifier q) {
    switch (q) {
    case Quantifier::Sum: return "sum";
    case Quantifier::Prod: return "prod";
    case Quantifier::Hadamard: return "hprod";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Construction helpers

namespace ex {

inline Expr make(Node::Data data, SourceSpan span = {}) {
    return Expr(std::make_shared<const Node>(Node{std::move(data), span}));
}

inline Expr var(std::string name) { return make(VarNode{std::move(name)}); }
inline Expr transpose(Expr e) { return make(TransposeNode{std::move(e)}); }
inline Expr matmul(Expr a, Expr b) { return make(MatMulNode{std::move(a), std::move(b)}); }
inline Expr add(Expr a, Expr b) { return make(AddNode{std::move(a), std::move(b)}); }
inline Expr smul(Expr s, Expr e) { return make(ScalarMulNode{std::move(s), std::move(e)}); }
inline Expr apply(std::string f, std::vector<Expr> args) {
    return make(ApplyNode{std::move(f), std::move(args)});
}
inline Expr loop(std::string v, std::string x, Expr body) {
    return make(ForNode{std::move(v), std::move(x), std::nullopt, std::move(body)});
}
inline Expr loop(std::string v, std::string x, Expr init, Expr body) {
    return make(ForNode{std::move(v), std::move(x), std::move(init), std::move(body)});
}
inline Expr constant(std::string literal) { return make(ConstNode{std::move(literal)}); }
inline Expr sum(std::string v, Expr body) {
    return make(QuantNode{Quantifier::Sum, std::move(v), std::move(body)});
}
inline Expr prod(std::string v, Expr body) {
    return make(QuantNode{Quantifier::Prod, std::move(v), std::move(body)});
}
inline Expr hprod(std::string v, Expr body) {
    return make(QuantNode{Quantifier::Hadamard, std::move(v), std::move(body)});
}
inline Expr ones(Expr e) { return make(OnesNode{std::move(e)}); }
inline Expr diag(Expr e) { return make(DiagNode{std::move(e)}); }
inline Expr order(OrderKind k, std::string symbol) {
    return make(OrderNode{k, SizeSymbol(std::move(symbol))});
}

/// Infix shorthands for builders: + is matrix addition, * is matrix product.
inline Expr operator+(Expr a, Expr b) { return add(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return matmul(std::move(a), std::move(b)); }
inline Expr tr(Expr e) { return transpose(std::move(e)); }

}  // namespace ex

// ---------------------------------------------------------------------------
// Structural queries

/// Structural equality, ignoring source spans.
inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a.node().data.index() != b.node().data.index()) return false;
    return visit(a, overloaded{
        [&](const VarNode& n) { return n.name == b.as<VarNode>()->name; },
        [&](const TransposeNode& n) { return structurally_equal(n.arg, b.as<TransposeNode>()->arg); },
        [&](const MatMulNode& n) {
            auto* o = b.as<MatMulNode>();
            return structurally_equal(n.lhs, o->lhs) && structurally_equal(n.rhs, o->rhs);
        },
        [&](const AddNode& n) {
            auto* o = b.as<AddNode>();
            return structurally_equal(n.lhs, o->lhs) && structurally_equal(n.rhs, o->rhs);
        },
        [&](const ScalarMulNode& n) {
            auto* o = b.as<ScalarMulNode>();
            return structurally_equal(n.scalar, o->scalar) && structurally_equal(n.arg, o->arg);
        },
        [&](const ApplyNode& n) {
            auto* o = b.as<ApplyNode>();
            if (n.fname != o->fname || n.args.size() != o->args.size()) return false;
            for (std::size_t i = 0; i < n.args.size(); ++i)
                if (!structurally_equal(n.args[i], o->args[i])) return false;
            return true;
        },
        [&](const ForNode& n) {
            auto* o = b.as<ForNode>();
            if (n.iter != o->iter || n.acc != o->acc) return false;
            if (n.init.has_value() != o->init.has_value()) return false;
            if (n.init && !structurally_equal(*n.init, *o->init)) return false;
            return structurally_equal(n.body, o->body);
        },
        [&](const ConstNode& n) { return n.literal == b.as<ConstNode>()->literal; },
        [&](const QuantNode& n) {
            auto* o = b.as<QuantNode>();
            return n.kind == o->kind && n.iter == o->iter && structurally_equal(n.body, o->body);
        },
        [&](const OnesNode& n) { return structurally_equal(n.arg, b.as<OnesNode>()->arg); },
        [&](const DiagNode& n) { return structurally_equal(n.arg, b.as<DiagNode>()->arg); },
        [&](const OrderNode& n) {
            auto* o = b.as<OrderNode>();
            return n.kind == o->kind && n.symbol == o->symbol;
        },
    });
}

inline bool operator==(const Expr& a, const Expr& b) { return structurally_equal(a, b); }

/// Calls f on every direct child expression (including a loop init).
template <class F>
void for_each_child(const Expr& e, F&& f) {
    visit(e, overloaded{
        [](const VarNode&) {},
        [&](const TransposeNode& n) { f(n.arg); },
        [&](const MatMulNode& n) { f(n.lhs); f(n.rhs); },
        [&](const AddNode& n) { f(n.lhs); f(n.rhs); },
        [&](const ScalarMulNode& n) { f(n.scalar); f(n.arg); },
        [&](const ApplyNode& n) { for (const auto& a : n.args) f(a); },
        [&](const ForNode& n) { if (n.init) f(*n.init); f(n.body); },
        [](const ConstNode&) {},
        [&](const QuantNode& n) { f(n.body); },
        [&](const OnesNode& n) { f(n.arg); },
        [&](const DiagNode& n) { f(n.arg); },
        [](const OrderNode&) {},
    });
}

namespace detail {
inline void collect_free(const Expr& e, std::multiset<std::string>& bound,
                         std::set<std::string>& out) {
    visit(e, overloaded{
        [&](const VarNode& n) {
            if (!bound.count(n.name)) out.insert(n.name);
        },
        [&](const ForNode& n) {
            // the init expression is evaluated outside the loop binders
            if (n.init) collect_free(*n.init, bound, out);
            auto it1 = bound.insert(n.iter);
            auto it2 = bound.insert(n.acc);
            collect_free(n.body, bound, out);
            bound.erase(it1);
            bound.erase(it2);
        },
        [&](const QuantNode& n) {
            auto it = bound.insert(n.iter);
            collect_free(n.body, bound, out);
            bound.erase(it);
        },
        [&](const auto&) { for_each_child(e, [&](const Expr& c) { collect_free(c, bound, out); }); },
    });
}
}  // namespace detail

/// Variables occurring free in e. Loop iterators and accumulators are bound
/// inside their loop body.
inline std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    std::multiset<std::string> bound;
    detail::collect_free(e, bound, out);
    return out;
}

/// Every identifier used as a variable or binder anywhere in e.
inline void collect_names(const Expr& e, std::set<std::string>& out) {
    visit(e, overloaded{
        [&](const VarNode& n) { out.insert(n.name); },
        [&](const ForNode& n) { out.insert(n.iter); out.insert(n.acc); },
        [&](const QuantNode& n) { out.insert(n.iter); },
        [](const auto&) {},
    });
    for_each_child(e, [&](const Expr& c) { collect_names(c, out); });
}

/// Number of nodes in the tree (shared subtrees counted per occurrence).
inline std::size_t tree_size(const Expr& e) {
    std::size_t n = 1;
    for_each_child(e, [&](const Expr& c) { n += tree_size(c); });
    return n;
}

/// Generates identifiers that avoid a fixed set of taken names.
class NameSupply {
public:
    NameSupply() = default;
    explicit NameSupply(std::set<std::string> taken) : taken_(std::move(taken)) {}

    void reserve(const std::string& name) { taken_.insert(name); }
    void reserve(const Schema& s) {
        for (const auto& [name, _] : s.vars()) taken_.insert(name);
    }
    void reserve(const Expr& e) { collect_names(e, taken_); }

    std::string fresh(const std::string& base) {
        for (;;) {
            std::string candidate = base + std::to_string(++counter_);
            if (taken_.insert(candidate).second) return candidate;
        }
    }
    /// Returns base itself when it is still free.
    std::string prefer(const std::string& base) {
        if (taken_.insert(base).second) return base;
        return fresh(base);
    }

private:
    std::set<std::string> taken_;
    unsigned long counter_ = 0;
};

}  // namespace matloop
