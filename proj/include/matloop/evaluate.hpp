#pragma once

// Interpreter. An expression is first lowered to a plan: one node per AST
// occurrence, variables resolved to slots, functions and constants looked up
// once. Subexpressions inside a loop that do not depend on that loop's
// variables are cached and reused until one of their inputs is rebound.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "matloop/ast.hpp"
#include "matloop/functions.hpp"
#include "matloop/instance.hpp"
#include "matloop/matrix.hpp"
#include "matloop/typecheck.hpp"

namespace matloop {

struct EvalOptions {
    /// Visiting order of canonical vectors for a loop of dimension n, as a
    /// permutation of 0..n-1. Empty means ascending.
    std::function<std::vector<std::size_t>(std::size_t n)> order;
    bool memoize = true;
};

template <class S>
class Program {
public:
    using Matrix = KMatrix<S>;
    using value_type = typename S::value_type;

    Program(const Expr& e, const Schema& schema, const Dims& dims, const S& sr = S{},
            const FuncRegistry<S>& reg = FuncRegistry<S>{}, EvalOptions opts = {})
        : sr_(sr), reg_(reg), opts_(std::move(opts)), schema_(schema), dims_(dims) {
        result_type_ = typecheck(e, schema);
        root_ = lower(e);
    }

    const MatrixType& result_type() const noexcept { return result_type_; }

    Matrix run(const Instance<S>& inst) {
        for (std::size_t k = 0; k < inputs_.size(); ++k) {
            const auto& [name, slot] = inputs_[k];
            auto it = inst.mats.find(name);
            if (it == inst.mats.end())
                throw Error(ErrorKind::UnboundVariable, "instance has no matrix named '" + name + "'");
            const MatrixType& t = schema_.at(name);
            if (it->second.rows() != dim_of(dims_, t.rows) || it->second.cols() != dim_of(dims_, t.cols))
                throw Error(ErrorKind::ShapeMismatch, "matrix '" + name + "' does not have the shape of " + to_string(t));
            bind(slot, &it->second);
        }
        Matrix tmp;
        const Matrix& r = fetch(root_, tmp);
        return &r == &tmp ? std::move(tmp) : r;
    }

private:
    enum class Op {
        Var, Const, Transpose, MatMul, Add, ScalarMul, Apply, For, SumLoop, Sum, Prod, Hadamard, Ones, Diag, Fixed
    };

    struct PlanNode {
        Op op;
        std::vector<int> kids;
        int slot = -1;   // Var: slot; loops: iterator slot
        int slot2 = -1;  // For: accumulator slot
        std::size_t rows = 0, cols = 0;
        std::size_t dim = 0;  // loops: iteration count
        bool has_init = false;
        ScalarFunction<S> fn;
        std::string label;  // loop iterator name, for error context
        // caching
        bool cacheable = false;
        std::vector<int> deps;  // slots occurring free in the subtree
        Matrix cache;           // also holds Const / Fixed values
        std::vector<std::uint64_t> seen;
        bool valid = false;
    };

    struct Scope {
        std::map<std::string, int> names;
    };

    int new_slot() {
        slots_.push_back(nullptr);
        stamps_.push_back(0);
        return static_cast<int>(slots_.size()) - 1;
    }

    void bind(int slot, const Matrix* m) {
        slots_[slot] = m;
        stamps_[slot] = ++clock_;
    }

    const std::vector<Matrix>& canonical(std::size_t n) {
        auto& v = canon_[n];
        if (v.empty())
            for (std::size_t i = 1; i <= n; ++i) v.push_back(canonical_vector<S>(i, n, sr_));
        return v;
    }

    int resolve(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
            if (auto f = it->names.find(name); f != it->names.end()) return f->second;
        for (const auto& [n, s] : inputs_)
            if (n == name) return s;
        int s = new_slot();
        inputs_.emplace_back(name, s);
        return s;
    }

    static std::vector<int> merge_deps(const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    int push(PlanNode n) {
        plan_.push_back(std::move(n));
        return static_cast<int>(plan_.size()) - 1;
    }

    PlanNode& node(int i) { return plan_[static_cast<std::size_t>(i)]; }

    void finish_deps(PlanNode& n) {
        for (int k : n.kids) n.deps = merge_deps(n.deps, node(k).deps);
    }

    /// Removes the binder slots from deps (they are bound inside the node).
    static void drop(std::vector<int>& deps, int slot) {
        deps.erase(std::remove(deps.begin(), deps.end(), slot), deps.end());
    }

    void mark_cacheable(PlanNode& n) {
        if (!opts_.memoize || loops_.empty()) return;
        if (n.op == Op::Var || n.op == Op::Const || n.op == Op::Fixed) return;
        const auto& inner = loops_.back();
        for (int s : inner)
            if (std::binary_search(n.deps.begin(), n.deps.end(), s)) return;
        n.cacheable = true;
    }

    std::size_t dim(const SizeSymbol& s) const { return dim_of(dims_, s); }

    int lower(const Expr& e) {
        PlanNode n = visit(e, overloaded{
            [&](const VarNode& v) {
                PlanNode p{Op::Var};
                p.slot = resolve(v.name);
                p.deps = {p.slot};
                const MatrixType& t = schema_.at(v.name);
                p.rows = dim(t.rows);
                p.cols = dim(t.cols);
                return p;
            },
            [&](const ConstNode& c) {
                PlanNode p{Op::Const};
                p.rows = p.cols = 1;
                p.cache = Matrix::scalar(sr_.parse(c.literal));
                return p;
            },
            [&](const TransposeNode& t) {
                PlanNode p{Op::Transpose};
                p.kids = {lower(t.arg)};
                p.rows = node(p.kids[0]).cols;
                p.cols = node(p.kids[0]).rows;
                return p;
            },
            [&](const MatMulNode& m) {
                PlanNode p{Op::MatMul};
                p.kids = {lower(m.lhs), lower(m.rhs)};
                p.rows = node(p.kids[0]).rows;
                p.cols = node(p.kids[1]).cols;
                return p;
            },
            [&](const AddNode& m) {
                PlanNode p{Op::Add};
                p.kids = {lower(m.lhs), lower(m.rhs)};
                p.rows = node(p.kids[0]).rows;
                p.cols = node(p.kids[0]).cols;
                return p;
            },
            [&](const ScalarMulNode& m) {
                PlanNode p{Op::ScalarMul};
                p.kids = {lower(m.scalar), lower(m.arg)};
                p.rows = node(p.kids[1]).rows;
                p.cols = node(p.kids[1]).cols;
                return p;
            },
            [&](const ApplyNode& a) {
                PlanNode p{Op::Apply};
                p.fn = reg_.lookup(a.fname);
                if (p.fn.arity != a.args.size())
                    throw Error(ErrorKind::ArityMismatch, a.fname + " expects " + std::to_string(p.fn.arity) +
                                                              " arguments, got " + std::to_string(a.args.size()));
                for (const auto& x : a.args) p.kids.push_back(lower(x));
                p.rows = node(p.kids[0]).rows;
                p.cols = node(p.kids[0]).cols;
                return p;
            },
            [&](const ForNode& f) { return lower_for(f); },
            [&](const QuantNode& q) {
                PlanNode p{q.kind == Quantifier::Sum ? Op::Sum : q.kind == Quantifier::Prod ? Op::Prod : Op::Hadamard};
                p.dim = dim(schema_.at(q.iter).rows);
                p.label = q.iter;
                scopes_.push_back({});
                p.slot = new_slot();
                scopes_.back().names[q.iter] = p.slot;
                loops_.push_back({p.slot});
                p.kids = {lower(q.body)};
                loops_.pop_back();
                scopes_.pop_back();
                p.rows = node(p.kids[0]).rows;
                p.cols = node(p.kids[0]).cols;
                finish_deps(p);
                drop(p.deps, p.slot);
                return p;
            },
            [&](const OnesNode& o) {
                PlanNode p{Op::Ones};
                MatrixType t = typecheck(o.arg, scoped_schema());
                p.rows = dim(t.rows);
                p.cols = 1;
                p.cache = Matrix(p.rows, 1, sr_.one());
                p.op = Op::Fixed;
                return p;
            },
            [&](const DiagNode& d) {
                PlanNode p{Op::Diag};
                p.kids = {lower(d.arg)};
                p.rows = p.cols = node(p.kids[0]).rows;
                return p;
            },
            [&](const OrderNode& o) {
                PlanNode p{Op::Fixed};
                const std::size_t n = dim(o.symbol);
                switch (o.kind) {
                case OrderKind::Sless:
                    p.cache = Matrix::zeros(sr_, n, n);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = i + 1; j < n; ++j) p.cache(i, j) = sr_.one();
                    break;
                case OrderKind::Nshift:
                    p.cache = Matrix::zeros(sr_, n, n);
                    for (std::size_t j = 0; j + 1 < n; ++j) p.cache(j + 1, j) = sr_.one();
                    break;
                case OrderKind::Emin: p.cache = canonical_vector<S>(1, n, sr_); break;
                case OrderKind::Emax: p.cache = canonical_vector<S>(n, n, sr_); break;
                }
                p.rows = p.cache.rows();
                p.cols = p.cache.cols();
                return p;
            },
        });
        if (n.op != Op::For && n.op != Op::SumLoop && n.op != Op::Sum && n.op != Op::Prod && n.op != Op::Hadamard)
            finish_deps(n);
        mark_cacheable(n);
        if (n.cacheable) n.seen.resize(n.deps.size());
        return push(std::move(n));
    }

    // Types of loop variables come from the schema; nothing else is needed
    // for the static shape of ones().
    const Schema& scoped_schema() const { return schema_; }

    PlanNode lower_for(const ForNode& f) {
        PlanNode p{Op::For};
        p.label = f.iter;
        p.dim = dim(schema_.at(f.iter).rows);
        const MatrixType& at = schema_.at(f.acc);
        p.rows = dim(at.rows);
        p.cols = dim(at.cols);
        int init = -1;
        if (f.init) init = lower(*f.init);
        scopes_.push_back({});
        p.slot = new_slot();
        p.slot2 = new_slot();
        scopes_.back().names[f.iter] = p.slot;
        scopes_.back().names[f.acc] = p.slot2;
        loops_.push_back({p.slot, p.slot2});
        // X + e or e + X with X not free in e accumulates in place
        const AddNode* add = f.body.as<AddNode>();
        int summand = -1;
        if (!f.init && add) {
            auto is_acc = [&](const Expr& x) {
                const VarNode* v = x.as<VarNode>();
                return v && v->name == f.acc;
            };
            const Expr* other = is_acc(add->lhs) ? &add->rhs : is_acc(add->rhs) ? &add->lhs : nullptr;
            if (other && !free_vars(*other).count(f.acc)) summand = lower(*other);
        }
        int body = summand >= 0 ? summand : lower(f.body);
        loops_.pop_back();
        scopes_.pop_back();
        if (summand >= 0) p.op = Op::SumLoop;
        p.kids = {body};
        if (init >= 0) {
            p.kids.push_back(init);
            p.has_init = true;
        }
        // body deps minus binders, plus init deps
        p.deps = node(body).deps;
        drop(p.deps, p.slot);
        drop(p.deps, p.slot2);
        if (init >= 0) p.deps = merge_deps(p.deps, node(init).deps);
        return p;
    }

    const Matrix& fetch(int i, Matrix& tmp) {
        PlanNode& n = node(i);
        switch (n.op) {
        case Op::Var: return *slots_[n.slot];
        case Op::Const:
        case Op::Fixed: return n.cache;
        default: break;
        }
        if (n.cacheable) {
            if (n.valid) {
                bool same = true;
                for (std::size_t k = 0; k < n.deps.size(); ++k)
                    if (stamps_[n.deps[k]] != n.seen[k]) {
                        same = false;
                        break;
                    }
                if (same) return n.cache;
            }
            Matrix value = compute(i);
            PlanNode& m = node(i);
            m.cache = std::move(value);
            for (std::size_t k = 0; k < m.deps.size(); ++k) m.seen[k] = stamps_[m.deps[k]];
            m.valid = true;
            return m.cache;
        }
        tmp = compute(i);
        return tmp;
    }

    std::vector<std::size_t> order(std::size_t n) const {
        if (opts_.order) {
            auto o = opts_.order(n);
            if (o.size() != n) throw Error(ErrorKind::IndexOutOfRange, "iteration order is not a permutation");
            return o;
        }
        std::vector<std::size_t> o(n);
        std::iota(o.begin(), o.end(), std::size_t{0});
        return o;
    }

    static Error in_loop(const Error& err, const std::string& v, std::size_t i, std::size_t n) {
        return Error(err.kind(), err.detail() + " [loop over " + v + ", iteration " + std::to_string(i + 1) +
                                     " of " + std::to_string(n) + "]");
    }

    template <class Step>
    Matrix run_loop(PlanNode& n_ref, int self, Matrix acc, Step&& step) {
        // n_ref may dangle if plan_ reallocates; plan_ is fixed after lowering
        const int slot = n_ref.slot;
        const std::size_t n = n_ref.dim;
        const auto& vecs = canonical(n);
        std::vector<std::size_t> ord;
        const bool custom = static_cast<bool>(opts_.order);
        if (custom) ord = order(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = custom ? ord[k] : k;
            bind(slot, &vecs[i]);
            try {
                step(acc);
            } catch (const Error& err) {
                if (err.kind() == ErrorKind::DivisionByZero) throw in_loop(err, node(self).label, i, n);
                throw;
            }
        }
        return acc;
    }

    Matrix compute(int i) {
        PlanNode& n = node(i);
        Matrix t1, t2;
        switch (n.op) {
        case Op::Transpose: return ops::transpose(fetch(n.kids[0], t1));
        case Op::MatMul: {
            const Matrix& a = fetch(n.kids[0], t1);
            // a zero scalar on the left annihilates whatever follows
            if (a.rows() == 1 && a.cols() == 1 && sr_.is_zero(a(0, 0)))
                return Matrix::zeros(sr_, n.rows, n.cols);
            const Matrix& b = fetch(n.kids[1], t2);
            return ops::matmul(sr_, a, b);
        }
        case Op::Add: {
            const Matrix& a = fetch(n.kids[0], t1);
            const Matrix& b = fetch(n.kids[1], t2);
            return ops::add(sr_, a, b);
        }
        case Op::ScalarMul: {
            const Matrix& s = fetch(n.kids[0], t1);
            if (sr_.is_zero(s(0, 0))) return Matrix::zeros(sr_, n.rows, n.cols);
            const Matrix& a = fetch(n.kids[1], t2);
            return ops::scale(sr_, s(0, 0), a);
        }
        case Op::Apply: return apply(i);
        case Op::Diag: {
            const Matrix& a = fetch(n.kids[0], t1);
            Matrix d = Matrix::zeros(sr_, a.rows(), a.rows());
            for (std::size_t k = 0; k < a.rows(); ++k) d(k, k) = a(k, 0);
            return d;
        }
        case Op::For: {
            Matrix acc = n.has_init ? Matrix(fetch(n.kids[1], t1)) : Matrix::zeros(sr_, n.rows, n.cols);
            const int body = n.kids[0], accslot = n.slot2;
            return run_loop(n, i, std::move(acc), [&](Matrix& a) {
                bind(accslot, &a);
                Matrix tmp;
                const Matrix& r = fetch(body, tmp);
                Matrix next = &r == &tmp ? std::move(tmp) : r;
                a = std::move(next);
            });
        }
        case Op::SumLoop:
        case Op::Sum: {
            const int body = n.kids[0], accslot = n.slot2;
            return run_loop(n, i, Matrix::zeros(sr_, n.rows, n.cols), [&](Matrix& a) {
                if (accslot >= 0) bind(accslot, &a);
                Matrix tmp;
                ops::add_into(sr_, a, fetch(body, tmp));
            });
        }
        case Op::Prod: {
            const int body = n.kids[0];
            return run_loop(n, i, Matrix::identity(sr_, n.rows), [&](Matrix& a) {
                Matrix tmp;
                a = ops::matmul(sr_, a, fetch(body, tmp));
            });
        }
        case Op::Hadamard: {
            const int body = n.kids[0];
            return run_loop(n, i, Matrix(n.rows, n.cols, sr_.one()), [&](Matrix& a) {
                Matrix tmp;
                a = ops::hadamard(sr_, a, fetch(body, tmp));
            });
        }
        case Op::Var:
        case Op::Const:
        case Op::Fixed:
        case Op::Ones: break;
        }
        Matrix tmp;
        return Matrix(fetch(i, tmp));
    }

    Matrix apply(int i) {
        PlanNode& n = node(i);
        const std::size_t k = n.kids.size();
        std::vector<Matrix> tmps(k);
        std::vector<const Matrix*> args(k);
        for (std::size_t a = 0; a < k; ++a) args[a] = &fetch(n.kids[a], tmps[a]);
        PlanNode& m = node(i);
        const std::size_t size = args[0]->size();
        typename Matrix::storage_type out;
        out.reserve(size);
        boost::container::small_vector<value_type, 4> buf(k);
        for (std::size_t e = 0; e < size; ++e) {
            for (std::size_t a = 0; a < k; ++a) buf[a] = args[a]->data()[e];
            out.push_back(m.fn.fn(std::span<const value_type>(buf.data(), k)));
        }
        return Matrix(args[0]->rows(), args[0]->cols(), std::move(out));
    }

    S sr_;
    FuncRegistry<S> reg_;
    EvalOptions opts_;
    Schema schema_;
    Dims dims_;
    MatrixType result_type_;
    std::vector<PlanNode> plan_;
    int root_ = -1;
    std::vector<const Matrix*> slots_;
    std::vector<std::uint64_t> stamps_;
    std::uint64_t clock_ = 0;
    std::vector<std::pair<std::string, int>> inputs_;
    std::vector<Scope> scopes_;
    std::vector<std::vector<int>> loops_;
    std::map<std::size_t, std::vector<Matrix>> canon_;
};

/// Value of e on inst. The schema supplies the types of all variables,
/// including loop variables.
template <class S>
KMatrix<S> evaluate(const Expr& e, const Schema& schema, const Instance<S>& inst, const S& sr,
                    const FuncRegistry<S>& reg, const EvalOptions& opts = {}) {
    Program<S> p(e, schema, inst.dims, sr, reg, opts);
    return p.run(inst);
}

template <class S>
KMatrix<S> evaluate(const Expr& e, const Schema& schema, const Instance<S>& inst, const S& sr = S{}) {
    return evaluate(e, schema, inst, sr, FuncRegistry<S>(sr));
}

}  // namespace matloop
