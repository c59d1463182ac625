#pragma once

// Positive relational algebra over K-relations.
//
// Text forms:
//   relations:   relation NAME attr1 attr2 ...   then lines `v1 v2 ... : annotation`
//   queries:     rel NAME | union(q, q) | join(q, q) | project[a,b](q)
//                | select[a,b](q) | rename[a->b, c->d](q)

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "matloop/error.hpp"
#include "matloop/semiring.hpp"

namespace matloop {

using AttrSet = std::set<std::string>;

/// Relation name to attribute set. Attributes are ordered lexicographically.
using RelSchema = std::map<std::string, AttrSet>;

/// Finite-support map from tuples to nonzero annotations. Tuples store
/// values in the order of `attrs()`, which is sorted.
template <class S>
class KRelation {
public:
    using value_type = typename S::value_type;
    using Tuple = std::vector<long>;

    KRelation() = default;
    explicit KRelation(AttrSet attrs) : attrs_(attrs.begin(), attrs.end()) {}

    const std::vector<std::string>& attrs() const noexcept { return attrs_; }
    AttrSet signature() const { return AttrSet(attrs_.begin(), attrs_.end()); }
    const std::map<Tuple, value_type>& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }

    /// Stores v for t; a zero annotation removes t from the support.
    void set(const Tuple& t, const value_type& v, const S& sr = S{}) {
        check_arity(t);
        if (sr.is_zero(v)) support_.erase(t);
        else support_[t] = v;
    }

    /// t := t + v
    void add(const Tuple& t, const value_type& v, const S& sr = S{}) {
        check_arity(t);
        auto it = support_.find(t);
        value_type sum = it == support_.end() ? v : sr.plus(it->second, v);
        if (sr.is_zero(sum)) {
            if (it != support_.end()) support_.erase(it);
        } else if (it == support_.end()) {
            support_.emplace(t, sum);
        } else {
            it->second = sum;
        }
    }

    value_type get(const Tuple& t, const S& sr = S{}) const {
        auto it = support_.find(t);
        return it == support_.end() ? sr.zero() : it->second;
    }

    /// Lookup by attribute name.
    value_type get(const std::map<std::string, long>& t, const S& sr = S{}) const {
        Tuple k;
        for (const auto& a : attrs_) {
            auto it = t.find(a);
            if (it == t.end()) throw Error(ErrorKind::SignatureViolation, "tuple has no value for attribute '" + a + "'");
            k.push_back(it->second);
        }
        return get(k, sr);
    }

    std::size_t index_of(const std::string& a) const {
        auto it = std::lower_bound(attrs_.begin(), attrs_.end(), a);
        if (it == attrs_.end() || *it != a)
            throw Error(ErrorKind::SignatureViolation, "relation has no attribute '" + a + "'");
        return static_cast<std::size_t>(it - attrs_.begin());
    }

    friend bool operator==(const KRelation& a, const KRelation& b) {
        return a.attrs_ == b.attrs_ && a.support_ == b.support_;
    }

private:
    void check_arity(const Tuple& t) const {
        if (t.size() != attrs_.size()) throw Error(ErrorKind::SignatureViolation, "tuple arity does not match signature");
        for (long v : t)
            if (v < 1) throw Error(ErrorKind::SignatureViolation, "domain values are positive integers");
    }

    std::vector<std::string> attrs_;
    std::map<Tuple, value_type> support_;
};

template <class S>
using RelInstance = std::map<std::string, KRelation<S>>;

// ---------------------------------------------------------------------------
// Query syntax

struct RANode;
using RAExpr = std::shared_ptr<const RANode>;

struct RARel {
    std::string name;
};
struct RAUnion {
    RAExpr lhs, rhs;
};
struct RAProject {
    AttrSet attrs;
    RAExpr arg;
};
struct RASelect {
    AttrSet attrs;
    RAExpr arg;
};
/// Renames attributes old -> new; attributes not mentioned keep their name.
struct RARename {
    std::map<std::string, std::string> mapping;
    RAExpr arg;
};
struct RAJoin {
    RAExpr lhs, rhs;
};

struct RANode {
    std::variant<RARel, RAUnion, RAProject, RASelect, RARename, RAJoin> data;
};

namespace ra {
inline RAExpr rel(std::string n) { return std::make_shared<const RANode>(RANode{RARel{std::move(n)}}); }
inline RAExpr union_(RAExpr a, RAExpr b) { return std::make_shared<const RANode>(RANode{RAUnion{std::move(a), std::move(b)}}); }
inline RAExpr project(AttrSet x, RAExpr q) { return std::make_shared<const RANode>(RANode{RAProject{std::move(x), std::move(q)}}); }
inline RAExpr select(AttrSet x, RAExpr q) { return std::make_shared<const RANode>(RANode{RASelect{std::move(x), std::move(q)}}); }
inline RAExpr rename(std::map<std::string, std::string> f, RAExpr q) {
    return std::make_shared<const RANode>(RANode{RARename{std::move(f), std::move(q)}});
}
inline RAExpr join(RAExpr a, RAExpr b) { return std::make_shared<const RANode>(RANode{RAJoin{std::move(a), std::move(b)}}); }
}  // namespace ra

namespace detail {
inline std::string join_names(const AttrSet& s) {
    std::string out;
    for (const auto& a : s) {
        if (!out.empty()) out += ",";
        out += a;
    }
    return out;
}
}  // namespace detail

/// Output signature of q, checking the signature rules.
inline AttrSet ra_signature(const RAExpr& q, const RelSchema& rs) {
    return std::visit(
        [&](const auto& n) -> AttrSet {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RARel>) {
                auto it = rs.find(n.name);
                if (it == rs.end()) throw Error(ErrorKind::UnknownRelation, "no relation named '" + n.name + "'");
                return it->second;
            } else if constexpr (std::is_same_v<T, RAUnion>) {
                AttrSet a = ra_signature(n.lhs, rs), b = ra_signature(n.rhs, rs);
                if (a != b)
                    throw Error(ErrorKind::SignatureViolation,
                                "union of {" + detail::join_names(a) + "} and {" + detail::join_names(b) + "}");
                return a;
            } else if constexpr (std::is_same_v<T, RAProject> || std::is_same_v<T, RASelect>) {
                AttrSet a = ra_signature(n.arg, rs);
                for (const auto& x : n.attrs)
                    if (!a.count(x)) throw Error(ErrorKind::SignatureViolation, "attribute '" + x + "' not in {" + detail::join_names(a) + "}");
                if constexpr (std::is_same_v<T, RAProject>) return n.attrs;
                else return a;
            } else if constexpr (std::is_same_v<T, RARename>) {
                AttrSet a = ra_signature(n.arg, rs);
                AttrSet out;
                for (const auto& [from, to] : n.mapping)
                    if (!a.count(from)) throw Error(ErrorKind::SignatureViolation, "renamed attribute '" + from + "' not in {" + detail::join_names(a) + "}");
                for (const auto& x : a) {
                    auto it = n.mapping.find(x);
                    const std::string& y = it == n.mapping.end() ? x : it->second;
                    if (!out.insert(y).second) throw Error(ErrorKind::SignatureViolation, "renaming is not one to one at '" + y + "'");
                }
                return out;
            } else {
                AttrSet a = ra_signature(n.lhs, rs), b = ra_signature(n.rhs, rs);
                a.insert(b.begin(), b.end());
                return a;
            }
        },
        q->data);
}

template <class S>
RelSchema schema_of(const RelInstance<S>& inst) {
    RelSchema rs;
    for (const auto& [name, r] : inst) rs[name] = r.signature();
    return rs;
}

template <class S>
KRelation<S> eval_ra(const RAExpr& q, const RelInstance<S>& inst, const S& sr = S{}) {
    using Rel = KRelation<S>;
    using Tuple = typename Rel::Tuple;
    return std::visit(
        [&](const auto& n) -> Rel {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RARel>) {
                auto it = inst.find(n.name);
                if (it == inst.end()) throw Error(ErrorKind::UnknownRelation, "no relation named '" + n.name + "'");
                return it->second;
            } else if constexpr (std::is_same_v<T, RAUnion>) {
                Rel a = eval_ra(n.lhs, inst, sr), b = eval_ra(n.rhs, inst, sr);
                if (a.attrs() != b.attrs()) throw Error(ErrorKind::SignatureViolation, "union of relations with different signatures");
                for (const auto& [t, v] : b.support()) a.add(t, v, sr);
                return a;
            } else if constexpr (std::is_same_v<T, RAProject>) {
                Rel a = eval_ra(n.arg, inst, sr);
                std::vector<std::size_t> keep;
                for (const auto& x : n.attrs) keep.push_back(a.index_of(x));
                Rel out(n.attrs);
                for (const auto& [t, v] : a.support()) {
                    Tuple k;
                    for (std::size_t i : keep) k.push_back(t[i]);
                    out.add(k, v, sr);
                }
                return out;
            } else if constexpr (std::is_same_v<T, RASelect>) {
                Rel a = eval_ra(n.arg, inst, sr);
                std::vector<std::size_t> idx;
                for (const auto& x : n.attrs) idx.push_back(a.index_of(x));
                Rel out(a.signature());
                for (const auto& [t, v] : a.support()) {
                    bool eq = true;
                    for (std::size_t i : idx) eq = eq && t[i] == t[idx[0]];
                    if (eq) out.set(t, v, sr);
                }
                return out;
            } else if constexpr (std::is_same_v<T, RARename>) {
                Rel a = eval_ra(n.arg, inst, sr);
                AttrSet sig;
                std::vector<std::string> renamed;
                for (const auto& x : a.attrs()) {
                    auto it = n.mapping.find(x);
                    renamed.push_back(it == n.mapping.end() ? x : it->second);
                }
                for (const auto& [from, _] : n.mapping) a.index_of(from);
                sig.insert(renamed.begin(), renamed.end());
                if (sig.size() != renamed.size()) throw Error(ErrorKind::SignatureViolation, "renaming is not one to one");
                Rel out(sig);
                // position in the new order of each old position
                std::vector<std::size_t> pos;
                for (const auto& y : renamed) pos.push_back(out.index_of(y));
                for (const auto& [t, v] : a.support()) {
                    Tuple k(t.size());
                    for (std::size_t i = 0; i < t.size(); ++i) k[pos[i]] = t[i];
                    out.set(k, v, sr);
                }
                return out;
            } else {
                Rel a = eval_ra(n.lhs, inst, sr), b = eval_ra(n.rhs, inst, sr);
                AttrSet sig = a.signature();
                for (const auto& x : b.attrs()) sig.insert(x);
                Rel out(sig);
                std::vector<std::pair<std::size_t, std::size_t>> shared;
                for (std::size_t i = 0; i < a.attrs().size(); ++i)
                    for (std::size_t j = 0; j < b.attrs().size(); ++j)
                        if (a.attrs()[i] == b.attrs()[j]) shared.emplace_back(i, j);
                std::vector<std::pair<int, std::size_t>> source;  // (0 = a, 1 = b, index)
                for (const auto& x : out.attrs()) {
                    auto ia = std::lower_bound(a.attrs().begin(), a.attrs().end(), x);
                    if (ia != a.attrs().end() && *ia == x)
                        source.emplace_back(0, static_cast<std::size_t>(ia - a.attrs().begin()));
                    else
                        source.emplace_back(1, b.index_of(x));
                }
                for (const auto& [ta, va] : a.support())
                    for (const auto& [tb, vb] : b.support()) {
                        bool ok = true;
                        for (const auto& [i, j] : shared) ok = ok && ta[i] == tb[j];
                        if (!ok) continue;
                        Tuple k;
                        for (const auto& [side, i] : source) k.push_back(side == 0 ? ta[i] : tb[i]);
                        out.set(k, sr.times(va, vb), sr);
                    }
                return out;
            }
        },
        q->data);
}

/// Union of the values appearing in any tuple.
template <class S>
std::set<long> active_domain(const RelInstance<S>& inst) {
    std::set<long> out;
    for (const auto& [_, r] : inst)
        for (const auto& [t, v] : r.support()) out.insert(t.begin(), t.end());
    return out;
}

// ---------------------------------------------------------------------------
// Query text

inline std::string print_ra(const RAExpr& q) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, RARel>) return "rel " + n.name;
            else if constexpr (std::is_same_v<T, RAUnion>) return "union(" + print_ra(n.lhs) + ", " + print_ra(n.rhs) + ")";
            else if constexpr (std::is_same_v<T, RAJoin>) return "join(" + print_ra(n.lhs) + ", " + print_ra(n.rhs) + ")";
            else if constexpr (std::is_same_v<T, RAProject>) return "project[" + detail::join_names(n.attrs) + "](" + print_ra(n.arg) + ")";
            else if constexpr (std::is_same_v<T, RASelect>) return "select[" + detail::join_names(n.attrs) + "](" + print_ra(n.arg) + ")";
            else {
                std::string m;
                for (const auto& [a, b] : n.mapping) {
                    if (!m.empty()) m += ",";
                    m += a + "->" + b;
                }
                return "rename[" + m + "](" + print_ra(n.arg) + ")";
            }
        },
        q->data);
}

inline bool ra_equal(const RAExpr& a, const RAExpr& b) { return print_ra(a) == print_ra(b); }

namespace detail {

class RAParser {
public:
    explicit RAParser(std::string_view s) : s_(s) {}

    RAExpr parse_all() {
        RAExpr q = query();
        skip();
        if (p_ != s_.size()) fail("unexpected trailing text");
        return q;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < p_ && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SyntaxError(msg, SourceSpan{p_, p_, line, col});
    }

    void skip() {
        while (p_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[p_]))) {
                ++p_;
            } else if (s_[p_] == '#') {
                while (p_ < s_.size() && s_[p_] != '\n') ++p_;
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip();
        if (p_ >= s_.size() || s_[p_] != c) fail(std::string("expected '") + c + "'");
        ++p_;
    }

    bool peek(char c) {
        skip();
        return p_ < s_.size() && s_[p_] == c;
    }

    std::string ident() {
        skip();
        std::size_t b = p_;
        while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
        if (b == p_) fail("expected a name");
        return std::string(s_.substr(b, p_ - b));
    }

    AttrSet attr_list() {
        AttrSet out;
        expect('[');
        if (peek(']')) {
            ++p_;
            return out;
        }
        for (;;) {
            out.insert(ident());
            if (peek(',')) {
                ++p_;
                continue;
            }
            expect(']');
            return out;
        }
    }

    RAExpr query() {
        if (++depth_ > 500) fail("query nested too deeply");
        std::string kw = ident();
        RAExpr out;
        if (kw == "rel") {
            out = ra::rel(ident());
        } else if (kw == "union" || kw == "join") {
            expect('(');
            RAExpr a = query();
            expect(',');
            RAExpr b = query();
            expect(')');
            out = kw == "union" ? ra::union_(a, b) : ra::join(a, b);
        } else if (kw == "project" || kw == "select") {
            AttrSet x = attr_list();
            expect('(');
            RAExpr a = query();
            expect(')');
            out = kw == "project" ? ra::project(x, a) : ra::select(x, a);
        } else if (kw == "rename") {
            std::map<std::string, std::string> f;
            expect('[');
            if (!peek(']')) {
                for (;;) {
                    std::string from = ident();
                    expect('-');
                    expect('>');
                    std::string to = ident();
                    if (!f.emplace(from, to).second) fail("attribute '" + from + "' renamed twice");
                    if (peek(',')) {
                        ++p_;
                        continue;
                    }
                    break;
                }
            }
            expect(']');
            expect('(');
            RAExpr a = query();
            expect(')');
            out = ra::rename(f, a);
        } else {
            fail("unknown operator '" + kw + "'");
        }
        --depth_;
        return out;
    }

    std::string_view s_;
    std::size_t p_ = 0;
    int depth_ = 0;
};

}  // namespace detail

inline RAExpr parse_ra(std::string_view text) { return detail::RAParser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Relation files

/// Relation file contents with annotations in text form.
struct RawRelations {
    struct Rel {
        std::string name;
        std::vector<std::string> attrs;
        std::vector<std::pair<std::vector<long>, std::string>> rows;
        std::vector<std::size_t> lines;
    };
    std::optional<SemiringKind> semiring;
    std::vector<Rel> relations;

    RelSchema schema() const {
        RelSchema rs;
        for (const auto& r : relations) rs[r.name] = AttrSet(r.attrs.begin(), r.attrs.end());
        return rs;
    }
};

inline RawRelations parse_relations_text(const std::string& text) {
    RawRelations raw;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto words_of = [](const std::string& s) {
        std::istringstream is(s);
        std::vector<std::string> w;
        std::string x;
        while (is >> x) w.push_back(x);
        return w;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto w = words_of(line);
        if (w.empty()) continue;
        if (w[0] == "semiring") {
            if (w.size() != 2) throw FormatError(lineno, "expected 'semiring NAME'");
            try {
                raw.semiring = parse_semiring_kind(w[1]);
            } catch (const Error&) {
                throw FormatError(lineno, "unknown semiring '" + w[1] + "'");
            }
            continue;
        }
        if (w[0] == "relation") {
            if (w.size() < 2) throw FormatError(lineno, "expected 'relation NAME attr ...'");
            RawRelations::Rel r;
            r.name = w[1];
            for (std::size_t i = 2; i < w.size(); ++i) r.attrs.push_back(w[i]);
            AttrSet distinct(r.attrs.begin(), r.attrs.end());
            if (distinct.size() != r.attrs.size()) throw FormatError(lineno, "repeated attribute in relation '" + r.name + "'");
            for (const auto& x : raw.relations)
                if (x.name == r.name) throw FormatError(lineno, "relation '" + r.name + "' defined twice");
            raw.relations.push_back(std::move(r));
            continue;
        }
        if (raw.relations.empty()) throw FormatError(lineno, "tuple before any relation header");
        auto colon = line.find(':');
        if (colon == std::string::npos) throw FormatError(lineno, "expected 'values : annotation'");
        auto vals = words_of(line.substr(0, colon));
        auto ann = words_of(line.substr(colon + 1));
        auto& r = raw.relations.back();
        if (vals.size() != r.attrs.size())
            throw FormatError(lineno, "tuple has " + std::to_string(vals.size()) + " values, relation '" + r.name + "' has " +
                                          std::to_string(r.attrs.size()) + " attributes");
        if (ann.size() != 1) throw FormatError(lineno, "expected exactly one annotation");
        std::vector<long> t;
        for (const auto& v : vals) {
            if (v.empty() || v.size() > 12 || v.find_first_not_of("0123456789") != std::string::npos)
                throw FormatError(lineno, "domain value '" + v + "' is not a positive integer");
            long x = std::stol(v);
            if (x < 1) throw FormatError(lineno, "domain values start at 1");
            t.push_back(x);
        }
        r.rows.emplace_back(std::move(t), ann[0]);
        r.lines.push_back(lineno);
    }
    return raw;
}

template <class S>
RelInstance<S> materialize(const RawRelations& raw, const S& sr = S{}) {
    RelInstance<S> out;
    for (const auto& r : raw.relations) {
        AttrSet sig(r.attrs.begin(), r.attrs.end());
        KRelation<S> rel(sig);
        // file order of attributes to sorted order
        std::vector<std::size_t> pos;
        for (const auto& a : r.attrs) pos.push_back(rel.index_of(a));
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            typename KRelation<S>::value_type v;
            try {
                v = sr.parse(r.rows[i].second);
            } catch (const Error& e) {
                throw FormatError(r.lines[i], e.detail());
            }
            std::vector<long> t(r.attrs.size());
            for (std::size_t k = 0; k < r.attrs.size(); ++k) t[pos[k]] = r.rows[i].first[k];
            rel.add(t, v, sr);
        }
        out[r.name] = std::move(rel);
    }
    return out;
}

/// Relation file text for inst.
template <class S>
std::string write_relations(const RelInstance<S>& inst, const S& sr = S{}) {
    std::ostringstream os;
    os << "semiring " << S::name << "\n";
    for (const auto& [name, r] : inst) {
        os << "relation " << name;
        for (const auto& a : r.attrs()) os << " " << a;
        os << "\n";
        for (const auto& [t, v] : r.support()) {
            for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
            os << (t.empty() ? ": " : " : ") << sr.print(v) << "\n";
        }
    }
    return os.str();
}

/// Relation schema file: lines `relation NAME attr ...`.
inline RelSchema parse_relschema_text(const std::string& text) {
    RawRelations raw = parse_relations_text(text);
    for (const auto& r : raw.relations)
        if (!r.rows.empty()) throw FormatError(r.lines.front(), "a relation schema lists no tuples");
    return raw.schema();
}

}  // namespace matloop
