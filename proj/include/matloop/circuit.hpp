#pragma once

// Arithmetic circuits: unrolled expressions for one dimension assignment.
//
// Dump format, one gate per line, gates numbered from 0 in order:
//   gN = input V[i,j] | const0 | const1 | const VALUE | sum gA gB ... | prod gA gB ... | div gA gB
//   output[i,j] = gN
// VALUE is an exact rational, written p or p/q.

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "matloop/ast.hpp"
#include "matloop/error.hpp"
#include "matloop/evaluate.hpp"
#include "matloop/functions.hpp"
#include "matloop/instance.hpp"
#include "matloop/semiring.hpp"

namespace matloop {

enum class GateKind { Input, Const0, Const1, Const, Sum, Prod, Div };

struct Gate {
    GateKind kind = GateKind::Const0;
    std::vector<std::size_t> kids;
    std::string var;                 // Input
    std::size_t row = 0, col = 0;    // Input, 1-based
    RationalSemiring::value_type value = 0;  // Const

    bool is_constant() const { return kind == GateKind::Const0 || kind == GateKind::Const1 || kind == GateKind::Const; }
    RationalSemiring::value_type constant() const {
        return kind == GateKind::Const0 ? 0 : kind == GateKind::Const1 ? 1 : value;
    }
};

struct CircuitOutput {
    std::size_t row = 0, col = 0;  // 1-based
    std::size_t gate = 0;
};

struct Circuit {
    std::vector<Gate> gates;
    std::vector<CircuitOutput> outputs;

    /// (matrix, row, col) to input gate index.
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> input_layout() const {
        std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> out;
        for (std::size_t g = 0; g < gates.size(); ++g)
            if (gates[g].kind == GateKind::Input) out[{gates[g].var, gates[g].row, gates[g].col}] = g;
        return out;
    }

    std::size_t output_rows() const {
        std::size_t r = 0;
        for (const auto& o : outputs) r = std::max(r, o.row);
        return r;
    }
    std::size_t output_cols() const {
        std::size_t c = 0;
        for (const auto& o : outputs) c = std::max(c, o.col);
        return c;
    }
};

// ---------------------------------------------------------------------------
// Construction

/// Hash-consing gate factory with folding of constant subterms.
class CircuitBuilder {
public:
    using Rational = RationalSemiring::value_type;

    CircuitBuilder() {
        zero_ = intern(Gate{GateKind::Const0, {}, {}, 0, 0, 0});
        one_ = intern(Gate{GateKind::Const1, {}, {}, 0, 0, 0});
    }

    std::size_t zero() const { return zero_; }
    std::size_t one() const { return one_; }

    std::size_t input(const std::string& var, std::size_t row, std::size_t col) {
        return intern(Gate{GateKind::Input, {}, var, row, col, 0});
    }

    std::size_t constant(const Rational& v) {
        if (v == 0) return zero_;
        if (v == 1) return one_;
        return intern(Gate{GateKind::Const, {}, {}, 0, 0, v});
    }

    std::size_t sum(std::size_t a, std::size_t b) {
        if (a == zero_) return b;
        if (b == zero_) return a;
        const Gate &ga = gates_[a], &gb = gates_[b];
        if (ga.is_constant() && gb.is_constant()) return constant(ga.constant() + gb.constant());
        return intern(Gate{GateKind::Sum, {std::min(a, b), std::max(a, b)}, {}, 0, 0, 0});
    }

    std::size_t prod(std::size_t a, std::size_t b) {
        if (a == zero_ || b == zero_) return zero_;
        if (a == one_) return b;
        if (b == one_) return a;
        const Gate &ga = gates_[a], &gb = gates_[b];
        if (ga.is_constant() && gb.is_constant()) return constant(ga.constant() * gb.constant());
        return intern(Gate{GateKind::Prod, {std::min(a, b), std::max(a, b)}, {}, 0, 0, 0});
    }

    std::size_t div(std::size_t a, std::size_t b) {
        const Gate& gb = gates_[b];
        if (gb.is_constant() && gb.constant() != 0) {
            if (b == one_) return a;
            const Gate& ga = gates_[a];
            if (ga.is_constant()) return constant(ga.constant() / gb.constant());
        }
        return intern(Gate{GateKind::Div, {a, b}, {}, 0, 0, 0});
    }

    const Gate& gate(std::size_t g) const { return gates_.at(g); }
    bool is_zero(std::size_t g) const { return g == zero_; }

    /// Circuit with the given outputs and only the gates they reach.
    Circuit finish(const std::vector<CircuitOutput>& outputs) const {
        std::vector<char> live(gates_.size(), 0);
        for (const auto& o : outputs) live[o.gate] = 1;
        for (std::size_t g = gates_.size(); g-- > 0;)
            if (live[g])
                for (std::size_t k : gates_[g].kids) live[k] = 1;
        std::vector<std::size_t> renum(gates_.size());
        Circuit c;
        for (std::size_t g = 0; g < gates_.size(); ++g) {
            if (!live[g]) continue;
            renum[g] = c.gates.size();
            Gate x = gates_[g];
            for (auto& k : x.kids) k = renum[k];
            c.gates.push_back(std::move(x));
        }
        for (auto o : outputs) {
            o.gate = renum[o.gate];
            c.outputs.push_back(o);
        }
        return c;
    }

private:
    using Key = std::tuple<int, std::vector<std::size_t>, std::string, std::size_t, std::size_t, std::string>;

    std::size_t intern(Gate g) {
        Key k{static_cast<int>(g.kind), g.kids, g.var, g.row, g.col, g.kind == GateKind::Const ? g.value.str() : ""};
        auto it = index_.find(k);
        if (it != index_.end()) return it->second;
        gates_.push_back(std::move(g));
        index_.emplace(std::move(k), gates_.size() - 1);
        return gates_.size() - 1;
    }

    std::vector<Gate> gates_;
    std::map<Key, std::size_t> index_;
    std::size_t zero_ = 0, one_ = 0;
};

/// Values are gate indices of a builder; running the interpreter over this
/// semiring records the operations it performs.
struct SymbolicSemiring {
    using value_type = std::size_t;
    static constexpr std::string_view name = "circuit";
    static constexpr bool exact = true;

    CircuitBuilder* b = nullptr;

    value_type zero() const { return b->zero(); }
    value_type one() const { return b->one(); }
    value_type plus(value_type x, value_type y) const { return b->sum(x, y); }
    value_type times(value_type x, value_type y) const { return b->prod(x, y); }
    value_type divide(value_type x, value_type y) const { return b->div(x, y); }
    bool equal(value_type x, value_type y, double = 0) const { return x == y; }
    bool is_zero(value_type x) const { return b->is_zero(x); }
    value_type parse(std::string_view s) const {
        try {
            return b->constant(RationalSemiring{}.parse(s));
        } catch (const Error&) {
            throw Error(ErrorKind::ConstantNotInCarrier, "'" + std::string(s) + "' is not a rational constant");
        }
    }
    std::string print(value_type x) const { return "g" + std::to_string(x); }
};

/// Unrolls e for the dimensions dims. Uses of gtz or of any function other
/// than div, hprodK and hsumK are rejected.
inline Circuit compile(const Expr& e, const Schema& s, const Dims& dims) {
    typecheck(e, s);
    CircuitBuilder b;
    SymbolicSemiring sr{&b};
    FuncRegistry<SymbolicSemiring> reg(sr);
    auto program = [&]() {
        try {
            return Program<SymbolicSemiring>(e, s, dims, sr, reg, EvalOptions{});
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::MissingDimension) throw Error(ErrorKind::UnassignedSymbol, err.detail());
            if (err.kind() == ErrorKind::FunctionUnavailableForSemiring || err.kind() == ErrorKind::UnknownFunction)
                throw Error(ErrorKind::UnsupportedFunction, err.detail() + "; circuits have only sum, product and division gates");
            throw;
        }
    }();
    Instance<SymbolicSemiring> inst;
    inst.dims = dims;
    for (const auto& name : free_vars(e)) {
        const MatrixType& t = s.at(name);
        std::size_t r = dim_of(dims, t.rows), c = dim_of(dims, t.cols);
        KMatrix<SymbolicSemiring> m(r, c, b.zero());
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = b.input(name, i + 1, j + 1);
        inst.set(name, std::move(m));
    }
    KMatrix<SymbolicSemiring> out = program.run(inst);
    std::vector<CircuitOutput> outs;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) outs.push_back({i + 1, j + 1, out(i, j)});
    return b.finish(outs);
}

// ---------------------------------------------------------------------------
// Analysis and evaluation

struct CircuitStats {
    using Degree = boost::multiprecision::cpp_int;
    std::size_t gates = 0, wires = 0, size = 0;  // size = gates + wires
    std::size_t depth = 0;                       // edges on the longest path
    std::vector<Degree> output_degrees;
    Degree degree = 0;        // max over outputs
    Degree total_degree = 0;  // sum over outputs
};

inline CircuitStats stats(const Circuit& c) {
    CircuitStats st;
    std::vector<CircuitStats::Degree> deg(c.gates.size());
    std::vector<std::size_t> depth(c.gates.size(), 0);
    st.gates = c.gates.size();
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& x = c.gates[g];
        st.wires += x.kids.size();
        if (x.kids.empty()) {
            deg[g] = 1;
            continue;
        }
        CircuitStats::Degree d = 0;
        for (std::size_t k : x.kids) {
            depth[g] = std::max(depth[g], depth[k] + 1);
            if (x.kind == GateKind::Prod) d += deg[k];
            else d = std::max(d, deg[k]);
        }
        deg[g] = d;
    }
    st.size = st.gates + st.wires;
    for (const auto& o : c.outputs) {
        st.output_degrees.push_back(deg[o.gate]);
        st.degree = std::max(st.degree, deg[o.gate]);
        st.total_degree += deg[o.gate];
        st.depth = std::max(st.depth, depth[o.gate]);
    }
    return st;
}

using CircuitInputs = std::map<std::tuple<std::string, std::size_t, std::size_t>, std::string>;

namespace detail {

template <class S>
typename S::value_type circuit_constant(const S& sr, const RationalSemiring::value_type& v) {
    using V = typename S::value_type;
    if constexpr (std::is_same_v<V, RationalSemiring::value_type>) return v;
    else if constexpr (std::is_same_v<V, double>) return v.template convert_to<double>();
    else return sr.parse(RationalSemiring{}.print(v));
}

}  // namespace detail

/// Bottom-up evaluation. `value(name, row, col)` supplies input entries
/// (1-based) and returns nullptr when an input is unassigned.
template <class S, class Lookup>
std::map<std::pair<std::size_t, std::size_t>, typename S::value_type> eval_circuit_with(const Circuit& c, Lookup&& value,
                                                                                     const S& sr = S{}) {
    using V = typename S::value_type;
    std::vector<V> val(c.gates.size());
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& x = c.gates[g];
        switch (x.kind) {
        case GateKind::Input: {
            const V* v = value(x.var, x.row, x.col);
            if (!v)
                throw Error(ErrorKind::MissingInput,
                            "no value for input " + x.var + "[" + std::to_string(x.row) + "," + std::to_string(x.col) + "]");
            val[g] = *v;
            break;
        }
        case GateKind::Const0: val[g] = sr.zero(); break;
        case GateKind::Const1: val[g] = sr.one(); break;
        case GateKind::Const: val[g] = detail::circuit_constant(sr, x.value); break;
        case GateKind::Sum:
            val[g] = val[x.kids[0]];
            for (std::size_t k = 1; k < x.kids.size(); ++k) val[g] = sr.plus(val[g], val[x.kids[k]]);
            break;
        case GateKind::Prod:
            val[g] = val[x.kids[0]];
            for (std::size_t k = 1; k < x.kids.size(); ++k) val[g] = sr.times(val[g], val[x.kids[k]]);
            break;
        case GateKind::Div:
            if constexpr (HasDivision<S>) {
                val[g] = sr.divide(val[x.kids[0]], val[x.kids[1]]);
            } else {
                throw Error(ErrorKind::FunctionUnavailableForSemiring,
                            "division is not available over the " + std::string(S::name) + " semiring");
            }
            break;
        }
    }
    std::map<std::pair<std::size_t, std::size_t>, V> out;
    for (const auto& o : c.outputs) out[{o.row, o.col}] = val[o.gate];
    return out;
}

/// Inputs taken from the matrices of an instance.
template <class S>
std::map<std::pair<std::size_t, std::size_t>, typename S::value_type> eval_circuit(const Circuit& c,
                                                                                const Instance<S>& inst,
                                                                                const S& sr = S{}) {
    return eval_circuit_with<S>(
        c,
        [&](const std::string& var, std::size_t r, std::size_t col) -> const typename S::value_type* {
            auto it = inst.mats.find(var);
            if (it == inst.mats.end() || r < 1 || col < 1 || r > it->second.rows() || col > it->second.cols()) return nullptr;
            return &it->second(r - 1, col - 1);
        },
        sr);
}

/// Inputs keyed by (matrix, row, col) in text form.
template <class S>
std::map<std::pair<std::size_t, std::size_t>, typename S::value_type> eval_circuit(const Circuit& c,
                                                                                const CircuitInputs& inputs,
                                                                                const S& sr = S{}) {
    using V = typename S::value_type;
    std::map<std::tuple<std::string, std::size_t, std::size_t>, V> parsed;
    for (const auto& [k, text] : inputs) parsed[k] = sr.parse(text);
    return eval_circuit_with<S>(
        c,
        [&](const std::string& var, std::size_t r, std::size_t col) -> const V* {
            auto it = parsed.find({var, r, col});
            return it == parsed.end() ? nullptr : &it->second;
        },
        sr);
}

/// Output values laid out as a matrix; unlabelled positions are zero.
template <class S>
KMatrix<S> output_matrix(const Circuit& c, const std::map<std::pair<std::size_t, std::size_t>, typename S::value_type>& v,
                         const S& sr = S{}) {
    KMatrix<S> m = KMatrix<S>::zeros(sr, c.output_rows(), c.output_cols());
    for (const auto& [rc, x] : v) m(rc.first - 1, rc.second - 1) = x;
    return m;
}

/// Compiled degree of e for each n assigned to `symbol`.
inline std::vector<std::pair<std::size_t, CircuitStats::Degree>> degree_growth(const Expr& e, const Schema& s,
                                                                               const SizeSymbol& symbol,
                                                                               const std::vector<std::size_t>& ns) {
    std::vector<std::pair<std::size_t, CircuitStats::Degree>> out;
    for (std::size_t n : ns) out.emplace_back(n, stats(compile(e, s, Dims{{symbol, n}})).degree);
    return out;
}

// ---------------------------------------------------------------------------
// Text form

inline std::string dump_circuit(const Circuit& c) {
    std::ostringstream os;
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& x = c.gates[g];
        os << "g" << g << " = ";
        switch (x.kind) {
        case GateKind::Input: os << "input " << x.var << "[" << x.row << "," << x.col << "]"; break;
        case GateKind::Const0: os << "const0"; break;
        case GateKind::Const1: os << "const1"; break;
        case GateKind::Const: os << "const " << RationalSemiring{}.print(x.value); break;
        case GateKind::Sum: os << "sum"; break;
        case GateKind::Prod: os << "prod"; break;
        case GateKind::Div: os << "div"; break;
        }
        for (std::size_t k : x.kids) os << " g" << k;
        os << "\n";
    }
    for (const auto& o : c.outputs) os << "output[" << o.row << "," << o.col << "] = g" << o.gate << "\n";
    return os.str();
}

inline Circuit parse_circuit(const std::string& text) {
    static const std::regex gate_re(R"(g([0-9]+)\s*=\s*(\w+)(.*))");
    static const std::regex input_re(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\[([0-9]+),([0-9]+)\]\s*)");
    static const std::regex output_re(R"(output\[([0-9]+),([0-9]+)\]\s*=\s*g([0-9]+))");
    Circuit c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto bad = [&](const std::string& msg) {
        return Error(ErrorKind::MalformedCircuit, "line " + std::to_string(lineno) + ": " + msg);
    };
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    auto number = [&](const std::string& s) -> std::size_t {
        if (s.size() > 15) throw bad("number too large");
        return std::stoull(s);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        std::smatch m;
        if (std::regex_match(line, m, output_re)) {
            std::size_t r = number(m[1]), col = number(m[2]), g = number(m[3]);
            if (r < 1 || col < 1) throw bad("output positions start at 1");
            if (g >= c.gates.size()) throw bad("output refers to undefined gate g" + m[3].str());
            c.outputs.push_back({r, col, g});
            continue;
        }
        if (!c.outputs.empty()) throw bad("gate after output lines");
        if (!std::regex_match(line, m, gate_re)) throw bad("expected 'gN = ...' or 'output[i,j] = gN'");
        if (number(m[1]) != c.gates.size())
            throw bad("gate g" + m[1].str() + " out of order, expected g" + std::to_string(c.gates.size()));
        const std::string op = m[2], rest = m[3];
        Gate x;
        if (op == "input") {
            std::smatch im;
            if (!std::regex_match(rest, im, input_re)) throw bad("expected 'input NAME[i,j]'");
            x.kind = GateKind::Input;
            x.var = im[1];
            x.row = number(im[2]);
            x.col = number(im[3]);
            if (x.row < 1 || x.col < 1) throw bad("input positions start at 1");
        } else if (op == "const0" || op == "const1") {
            if (!trim(rest).empty()) throw bad(op + " takes no operands");
            x.kind = op == "const0" ? GateKind::Const0 : GateKind::Const1;
        } else if (op == "const") {
            x.kind = GateKind::Const;
            try {
                x.value = RationalSemiring{}.parse(trim(rest));
            } catch (const Error& e) {
                throw bad(e.detail());
            }
        } else if (op == "sum" || op == "prod" || op == "div") {
            x.kind = op == "sum" ? GateKind::Sum : op == "prod" ? GateKind::Prod : GateKind::Div;
            std::istringstream ks(rest);
            std::string tok;
            while (ks >> tok) {
                if (tok.size() < 2 || tok[0] != 'g' || tok.find_first_not_of("0123456789", 1) != std::string::npos)
                    throw bad("expected a gate reference, got '" + tok + "'");
                std::size_t k = number(tok.substr(1));
                if (k >= c.gates.size()) throw bad("gate " + tok + " is not defined before use");
                x.kids.push_back(k);
            }
            if (x.kids.empty()) throw bad(op + " needs operands");
            if (x.kind == GateKind::Div && x.kids.size() != 2) throw bad("div takes exactly two operands");
        } else {
            throw bad("unknown gate '" + op + "'");
        }
        c.gates.push_back(std::move(x));
    }
    return c;
}

inline Circuit load_circuit(const std::string& path) { return parse_circuit(read_file(path)); }

}  // namespace matloop
