#pragma once

// Bridges between matrices and K-relations, and between sum-fragment
// expressions and positive relational algebra.
//
// Matrix side to relations: a variable V : (a,b) becomes relation R_V over
// {row_a, col_b} (coordinates of size 1 are dropped), and each size symbol a
// gets a domain relation R_a over {a} annotated with one.
//
// Relations to matrix side: all values of the active domain, sorted, index a
// single size symbol "alpha". R becomes V_R; for a binary R the
// lexicographically smaller attribute is the row.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "matloop/ast.hpp"
#include "matloop/desugar.hpp"
#include "matloop/fragments.hpp"
#include "matloop/instance.hpp"
#include "matloop/relational.hpp"
#include "matloop/typecheck.hpp"

namespace matloop {

inline std::string matrix_relation(const std::string& var) { return "R_" + var; }
inline std::string domain_relation(const SizeSymbol& s) { return "R_" + s.name(); }
inline std::string row_attr(const SizeSymbol& s) { return "row_" + s.name(); }
inline std::string col_attr(const SizeSymbol& s) { return "col_" + s.name(); }

inline AttrSet matrix_signature(const MatrixType& t) {
    AttrSet out;
    if (!t.rows.is_unit()) out.insert(row_attr(t.rows));
    if (!t.cols.is_unit()) out.insert(col_attr(t.cols));
    return out;
}

/// Signatures of the relations encoding instances of s.
inline RelSchema rel_schema(const Schema& s) {
    RelSchema rs;
    for (const auto& [name, t] : s.vars()) rs[matrix_relation(name)] = matrix_signature(t);
    for (const auto& sym : s.symbols()) {
        if (sym.is_unit()) continue;
        std::string r = domain_relation(sym);
        if (rs.count(r))
            throw Error(ErrorKind::SignatureViolation, "relation name '" + r + "' is used by a variable and a size symbol");
        rs[r] = {sym.name()};
    }
    return rs;
}

/// Matrices of inst declared in s, plus one domain relation per size symbol.
template <class S>
std::pair<RelSchema, RelInstance<S>> rel_encode(const Schema& s, const Instance<S>& inst, const S& sr = S{}) {
    RelSchema rs = rel_schema(s);
    RelInstance<S> out;
    for (const auto& [name, t] : s.vars()) {
        auto it = inst.mats.find(name);
        if (it == inst.mats.end()) continue;
        const KMatrix<S>& m = it->second;
        KRelation<S> r(matrix_signature(t));
        const bool has_row = !t.rows.is_unit(), has_col = !t.cols.is_unit();
        // tuples follow the sorted attribute order
        const bool row_first = !has_col || !has_row || row_attr(t.rows) < col_attr(t.cols);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) {
                std::vector<long> tup;
                long ri = static_cast<long>(i + 1), cj = static_cast<long>(j + 1);
                if (has_row && has_col) tup = row_first ? std::vector<long>{ri, cj} : std::vector<long>{cj, ri};
                else if (has_row) tup = {ri};
                else if (has_col) tup = {cj};
                r.set(tup, m(i, j), sr);
            }
        out[matrix_relation(name)] = std::move(r);
    }
    for (const auto& sym : s.symbols()) {
        if (sym.is_unit()) continue;
        KRelation<S> r(AttrSet{sym.name()});
        const std::size_t n = inst.dim(sym);
        for (std::size_t i = 1; i <= n; ++i) r.set({static_cast<long>(i)}, sr.one(), sr);
        out[domain_relation(sym)] = std::move(r);
    }
    return {rs, out};
}

/// Result of mat_encode.
template <class S>
struct MatEncoding {
    Schema schema;
    Instance<S> instance;
    std::vector<long> adom;  // d_1 < ... < d_n
};

inline const SizeSymbol& adom_symbol() {
    static const SizeSymbol a("alpha");
    return a;
}

inline std::string relation_variable(const std::string& rel) { return "V_" + rel; }

inline void require_binary(const RelSchema& rs) {
    for (const auto& [name, attrs] : rs)
        if (attrs.size() > 2)
            throw Error(ErrorKind::SchemaNotBinary,
                        "relation '" + name + "' has " + std::to_string(attrs.size()) + " attributes");
}

inline Schema mat_schema(const RelSchema& rs) {
    require_binary(rs);
    Schema s;
    const SizeSymbol& a = adom_symbol();
    for (const auto& [name, attrs] : rs) {
        MatrixType t{attrs.size() >= 1 ? a : SizeSymbol::unit(), attrs.size() == 2 ? a : SizeSymbol::unit()};
        s.add(relation_variable(name), t);
    }
    return s;
}

template <class S>
MatEncoding<S> mat_encode(const RelSchema& rs, const RelInstance<S>& j, const S& sr = S{}) {
    require_binary(rs);
    MatEncoding<S> out;
    out.schema = mat_schema(rs);
    std::set<long> dom = active_domain(j);
    if (dom.empty()) throw Error(ErrorKind::EmptyActiveDomain, "the active domain is empty");
    out.adom.assign(dom.begin(), dom.end());
    std::map<long, std::size_t> index;
    for (std::size_t i = 0; i < out.adom.size(); ++i) index[out.adom[i]] = i;
    const std::size_t n = out.adom.size();
    out.instance.set_dim(adom_symbol().name(), n);
    for (const auto& [name, attrs] : rs) {
        const std::size_t rows = attrs.empty() ? 1 : n, cols = attrs.size() == 2 ? n : 1;
        KMatrix<S> m = KMatrix<S>::zeros(sr, rows, cols);
        if (auto it = j.find(name); it != j.end()) {
            if (it->second.signature() != attrs)
                throw Error(ErrorKind::SignatureViolation, "relation '" + name + "' does not match its schema");
            for (const auto& [t, v] : it->second.support()) {
                std::size_t r = t.size() >= 1 ? index.at(t[0]) : 0, c = t.size() == 2 ? index.at(t[1]) : 0;
                m(r, c) = v;
            }
        }
        out.instance.set(relation_variable(name), std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// sum-MATLANG to RA

namespace detail {

inline bool fold_arity(const std::string& f, const std::string& prefix, std::size_t& k) {
    if (f.size() <= prefix.size() || f.compare(0, prefix.size(), prefix) != 0) return false;
    std::string digits = f.substr(prefix.size());
    if (digits.find_first_not_of("0123456789") != std::string::npos) return false;
    k = std::stoul(digits);
    return true;
}

class PhiTranslator {
public:
    explicit PhiTranslator(Schema& s) : schema_(s) {
        for (const auto& [name, t] : s.vars()) {
            attrs_.reserve(row_attr(t.rows));
            attrs_.reserve(col_attr(t.cols));
            attrs_.reserve(t.rows.name());
            attrs_.reserve(t.cols.name());
        }
    }

    RAExpr top(const Expr& e) {
        Piece p = tr(e);
        MatrixType t = typecheck(e, schema_);
        std::map<std::string, std::string> f;
        if (p.row) f[*p.row] = row_attr(t.rows);
        if (p.col) f[*p.col] = col_attr(t.cols);
        return f.empty() ? p.q : ra::rename(f, p.q);
    }

private:
    // q's value at row = i, col = j and iterator attributes = k equals the
    // entry (i, j) of the expression with those iterators bound to b_k.
    struct Piece {
        RAExpr q;
        std::optional<std::string> row, col;
        std::set<std::string> iters;  // iterator attributes in the signature
    };

    struct Binding {
        std::string attr;
        SizeSymbol sym;
    };

    RAExpr domain(const SizeSymbol& s, const std::string& attr) {
        return ra::rename({{s.name(), attr}}, ra::rel(domain_relation(s)));
    }

    std::string fresh(const char* base) { return "_" + attrs_.fresh(base); }

    static Piece relabel(Piece p, const std::optional<std::string>& row, const std::optional<std::string>& col) {
        std::map<std::string, std::string> f;
        if (p.row && row && *p.row != *row) f[*p.row] = *row;
        if (p.col && col && *p.col != *col) f[*p.col] = *col;
        if (!f.empty()) p.q = ra::rename(f, p.q);
        if (p.row) p.row = row;
        if (p.col) p.col = col;
        return p;
    }

    Piece pad(Piece p, const std::set<std::string>& iters) {
        for (const auto& a : iters)
            if (!p.iters.count(a)) {
                p.q = ra::join(p.q, domain(iter_sym_.at(a), a));
                p.iters.insert(a);
            }
        return p;
    }

    /// Union of pieces of one type, after aligning their coordinates.
    Piece unite(std::vector<Piece> ps) {
        std::set<std::string> iters;
        for (const auto& p : ps) iters.insert(p.iters.begin(), p.iters.end());
        Piece out;
        out.row = ps.front().row;
        out.col = ps.front().col;
        for (auto& p : ps) {
            p = pad(relabel(p, out.row, out.col), iters);
            out.q = out.q ? ra::union_(out.q, p.q) : p.q;
        }
        out.iters = iters;
        return out;
    }

    Piece conjoin(std::vector<Piece> ps) {
        Piece out;
        out.row = ps.front().row;
        out.col = ps.front().col;
        for (auto& p : ps) {
            p = relabel(p, out.row, out.col);
            out.q = out.q ? ra::join(out.q, p.q) : p.q;
            out.iters.insert(p.iters.begin(), p.iters.end());
        }
        return out;
    }

    Piece tr(const Expr& e) {
        return visit(e, overloaded{
            [&](const VarNode& n) -> Piece {
                if (auto it = bound_.find(n.name); it != bound_.end()) {
                    const Binding& b = it->second;
                    std::string r = fresh("r");
                    RAExpr q = ra::select({r, b.attr}, ra::join(domain(b.sym, r), domain(b.sym, b.attr)));
                    return Piece{q, r, std::nullopt, {b.attr}};
                }
                if (accs_.count(n.name))
                    throw Error(ErrorKind::NotInSumFragment, "loop accumulator '" + n.name + "' is used outside the accumulation");
                const MatrixType& t = schema_.at(n.name);
                Piece p{ra::rel(matrix_relation(n.name)), std::nullopt, std::nullopt, {}};
                std::map<std::string, std::string> f;
                if (!t.rows.is_unit()) {
                    p.row = fresh("r");
                    f[row_attr(t.rows)] = *p.row;
                }
                if (!t.cols.is_unit()) {
                    p.col = fresh("c");
                    f[col_attr(t.cols)] = *p.col;
                }
                if (!f.empty()) p.q = ra::rename(f, p.q);
                return p;
            },
            [&](const TransposeNode& n) -> Piece {
                Piece p = tr(n.arg);
                std::swap(p.row, p.col);
                return p;
            },
            [&](const MatMulNode& n) -> Piece {
                Piece a = tr(n.lhs), b = tr(n.rhs);
                Piece out;
                out.iters = a.iters;
                out.iters.insert(b.iters.begin(), b.iters.end());
                out.row = a.row;
                out.col = b.col;
                if (a.col && b.row) {
                    std::string k = fresh("k");
                    a = relabel(a, out.row, k);
                    b = relabel(b, k, out.col);
                    AttrSet keep(out.iters.begin(), out.iters.end());
                    if (out.row) keep.insert(*out.row);
                    if (out.col) keep.insert(*out.col);
                    out.q = ra::project(keep, ra::join(a.q, b.q));
                } else {
                    out.q = ra::join(a.q, b.q);
                }
                return out;
            },
            [&](const AddNode& n) -> Piece { return unite({tr(n.lhs), tr(n.rhs)}); },
            [&](const ScalarMulNode& n) -> Piece {
                Piece s = tr(n.scalar), a = tr(n.arg);
                a.q = ra::join(s.q, a.q);
                a.iters.insert(s.iters.begin(), s.iters.end());
                return a;
            },
            [&](const ApplyNode& n) -> Piece {
                std::size_t k = 0;
                std::vector<Piece> ps;
                if (fold_arity(n.fname, "hprod", k) || fold_arity(n.fname, "hsum", k)) {
                    for (const auto& a : n.args) ps.push_back(tr(a));
                    return n.fname[1] == 'p' ? conjoin(std::move(ps)) : unite(std::move(ps));
                }
                throw Error(ErrorKind::UnsupportedFunction, "function '" + n.fname + "' has no relational counterpart");
            },
            [&](const ForNode& f) -> Piece {
                const Expr* t = f.init ? nullptr : accumulated_term(f.body, f.acc);
                if (!t || free_vars(*t).count(f.acc))
                    throw Error(ErrorKind::NotInSumFragment, "loop over '" + f.iter + "' is not a sum");
                SizeSymbol sym = schema_.at(f.iter).rows;
                std::string attr = fresh("i");
                iter_sym_[attr] = sym;
                auto saved = bound_.find(f.iter) == bound_.end() ? std::nullopt : std::optional<Binding>(bound_.at(f.iter));
                bound_[f.iter] = Binding{attr, sym};
                accs_.insert(f.acc);
                Piece body = tr(*t);
                accs_.erase(f.acc);
                if (saved) bound_[f.iter] = *saved;
                else bound_.erase(f.iter);
                if (!body.iters.count(attr)) body.q = ra::join(body.q, domain(sym, attr));
                body.iters.erase(attr);
                AttrSet keep(body.iters.begin(), body.iters.end());
                if (body.row) keep.insert(*body.row);
                if (body.col) keep.insert(*body.col);
                body.q = ra::project(keep, body.q);
                return body;
            },
            [&](const ConstNode& c) -> Piece {
                // one, as a function of some iterator in scope
                if (is_one_literal(e) && !bound_.empty()) {
                    const Binding& b = bound_.begin()->second;
                    return Piece{domain(b.sym, b.attr), std::nullopt, std::nullopt, {b.attr}};
                }
                throw Error(ErrorKind::UnsupportedConstruct, "constant [" + c.literal + "] has no relational counterpart");
            },
            [&](const OrderNode&) -> Piece {
                throw Error(ErrorKind::NotInSumFragment, "order predicates are not in the sum fragment");
            },
            [&](const auto&) -> Piece { throw Error(ErrorKind::UnsupportedConstruct, "expression was not desugared"); },
        });
    }

    Schema& schema_;
    NameSupply attrs_;
    std::map<std::string, Binding> bound_;
    std::map<std::string, SizeSymbol> iter_sym_;
    std::set<std::string> accs_;
};

}  // namespace detail

/// RA query over rel_schema(s) whose value at (row_a = i, col_b = j) is
/// entry (i, j) of e.
inline RAExpr phi_translate(const Expr& e, const Schema& s) {
    Schema work = s;
    typecheck(e, work);
    if (!(classify(e, &work) <= Fragment::Sum))
        throw Error(ErrorKind::NotInSumFragment, "expression is in the " + std::string(to_string(classify(e, &work))) + " fragment");
    Expr core = desugar(e, work);
    return detail::PhiTranslator(work).top(core);
}

// ---------------------------------------------------------------------------
// RA to sum-MATLANG

namespace detail {

class PsiTranslator {
public:
    PsiTranslator(const RelSchema& rs, Schema& out) : rs_(rs), schema_(out) {
        names_.reserve(schema_);
    }

    Expr top(const RAExpr& q) {
        AttrSet sig = ra_signature(q, rs_);
        if (sig.size() > 2)
            throw Error(ErrorKind::OutputArityTooLarge, "query has " + std::to_string(sig.size()) + " output attributes");
        std::map<std::string, std::string> env;
        std::vector<std::string> its;
        for (const auto& a : sig) {
            its.push_back(iterator());
            env[a] = its.back();
        }
        Expr body = psi(q, env);
        using namespace ex;
        if (its.empty()) return body;
        Expr coord = its.size() == 1 ? var(its[0]) : var(its[0]) * tr(var(its[1]));
        Expr out = smul(body, coord);
        for (auto it = its.rbegin(); it != its.rend(); ++it) out = sum(*it, out);
        return out;
    }

private:
    std::string iterator() {
        std::string v = names_.fresh("x");
        schema_.add(v, {adom_symbol(), SizeSymbol::unit()});
        return v;
    }

    /// Scalar expression whose value is q at the tuple assigning each
    /// attribute a the index of the canonical vector env[a].
    Expr psi(const RAExpr& q, const std::map<std::string, std::string>& env) {
        using namespace ex;
        return std::visit(
            [&](const auto& n) -> Expr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, RARel>) {
                    const AttrSet& sig = rs_.at(n.name);
                    std::vector<std::string> a(sig.begin(), sig.end());
                    Expr V = var(relation_variable(n.name));
                    if (a.empty()) return V;
                    if (a.size() == 1) return tr(var(env.at(a[0]))) * V;
                    return tr(var(env.at(a[0]))) * V * var(env.at(a[1]));
                } else if constexpr (std::is_same_v<T, RAUnion>) {
                    return psi(n.lhs, env) + psi(n.rhs, env);
                } else if constexpr (std::is_same_v<T, RAJoin>) {
                    return psi(n.lhs, env) * psi(n.rhs, env);
                } else if constexpr (std::is_same_v<T, RAProject>) {
                    AttrSet inner = ra_signature(n.arg, rs_);
                    std::map<std::string, std::string> env2 = env;
                    std::vector<std::string> its;
                    for (const auto& a : inner)
                        if (!n.attrs.count(a)) {
                            its.push_back(iterator());
                            env2[a] = its.back();
                        }
                    Expr out = psi(n.arg, env2);
                    for (auto it = its.rbegin(); it != its.rend(); ++it) out = sum(*it, out);
                    return out;
                } else if constexpr (std::is_same_v<T, RASelect>) {
                    Expr out = psi(n.arg, env);
                    if (n.attrs.size() < 2) return out;
                    const std::string& first = env.at(*n.attrs.begin());
                    for (auto it = std::next(n.attrs.begin()); it != n.attrs.end(); ++it)
                        out = out * (tr(var(first)) * var(env.at(*it)));
                    return out;
                } else if constexpr (std::is_same_v<T, RARename>) {
                    std::map<std::string, std::string> env2;
                    for (const auto& a : ra_signature(n.arg, rs_)) {
                        auto f = n.mapping.find(a);
                        env2[a] = env.at(f == n.mapping.end() ? a : f->second);
                    }
                    return psi(n.arg, env2);
                }
            },
            q->data);
    }

    const RelSchema& rs_;
    Schema& schema_;
    NameSupply names_;
};

}  // namespace detail

/// Sum-fragment expression over mat_schema(rs) whose entry (i, j) is q at
/// (d_i, d_j). `out` receives mat_schema(rs) plus the iterator declarations.
inline Expr psi_translate(const RAExpr& q, const RelSchema& rs, Schema& out) {
    out = mat_schema(rs);
    ra_signature(q, rs);
    return detail::PsiTranslator(rs, out).top(q);
}

}  // namespace matloop
