#pragma once

// Command-line driver. Results go to `out`, diagnostics to `err`.
//
// Exit codes: 0 success, 1 usage error (bad flags, unreadable file),
// 2 parse, type or translation error, 3 evaluation error.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "matloop/circuit.hpp"
#include "matloop/desugar.hpp"
#include "matloop/evaluate.hpp"
#include "matloop/fragments.hpp"
#include "matloop/instance.hpp"
#include "matloop/parser.hpp"
#include "matloop/relational.hpp"
#include "matloop/stdlib.hpp"
#include "matloop/translate.hpp"
#include "matloop/typecheck.hpp"

namespace matloop::cli {

inline int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::FileNotFound: return 1;
    case ErrorKind::ShapeError:
    case ErrorKind::UnknownRelation:
    case ErrorKind::UnsupportedFunction:
    case ErrorKind::UnsupportedConstruct:
    case ErrorKind::ConstantNotInCarrier:
    case ErrorKind::UnassignedSymbol: return 2;
    default: return is_static_error(k) ? 2 : 3;
    }
}

namespace detail {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_source(const std::string& arg, std::istream& in) {
    if (arg != "-") return arg;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Declarations from a schema file; instance files are accepted too.
inline Schema load_schema(const std::string& path) { return parse_instance_text(read_file(path)).schema; }

inline Dims parse_dims(const std::vector<std::string>& specs) {
    Dims d;
    for (const auto& s : specs) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            throw Usage("--dim expects SYM=N, got '" + s + "'");
        std::string sym = s.substr(0, eq), n = s.substr(eq + 1);
        if (n.find_first_not_of("0123456789") != std::string::npos || n.size() > 9 || std::stoul(n) == 0)
            throw Usage("--dim " + sym + ": dimension must be a positive integer");
        d[SizeSymbol(sym)] = std::stoul(n);
    }
    return d;
}

inline SemiringKind pick_semiring(const std::string& flag, const std::optional<SemiringKind>& file) {
    if (!flag.empty()) {
        try {
            return parse_semiring_kind(flag);
        } catch (const Error&) {
            throw Usage("unknown semiring '" + flag + "' (real, nat, bool, tropical, rational)");
        }
    }
    return file.value_or(SemiringKind::Real);
}

inline void print_labeled(std::ostream& out, const std::string& label, const std::string& matrix) {
    out << label << "\n" << matrix;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in = std::cin) {
    CLI::App app{"matloop: for-MATLANG workbench"};
    app.require_subcommand(1);

    std::string expr, schema_path, instance_path, semiring, query_path, relschema_path, circuit_path, inputs_path,
        schema_out, name;
    std::vector<std::string> dims;
    bool reduce = false, want_schema = false;

    auto* check = app.add_subcommand("check", "type-check an expression");
    check->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    check->add_option("--schema", schema_path, "schema file")->required();

    auto* eval = app.add_subcommand("eval", "evaluate an expression on an instance");
    eval->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    eval->add_option("--instance", instance_path, "instance file")->required();
    eval->add_option("--schema", schema_path, "extra declarations");
    eval->add_option("--semiring", semiring, "real, nat, bool, tropical or rational");

    auto* des = app.add_subcommand("desugar", "rewrite sugar into core loops");
    des->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    des->add_option("--schema", schema_path, "schema file")->required();
    des->add_flag("--reduce", reduce, "also reduce matrix function application to scalars");
    des->add_option("--schema-out", schema_out, "write the extended schema here");

    auto* cls = app.add_subcommand("classify", "print the least fragment");
    cls->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    cls->add_option("--schema", schema_path, "schema file");

    auto* tora = app.add_subcommand("to-ra", "translate a sum expression to relational algebra");
    tora->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    tora->add_option("--schema", schema_path, "schema file")->required();

    auto* fromra = app.add_subcommand("from-ra", "translate a relational query to a sum expression");
    fromra->add_option("-q,--query", query_path, "query file, or - for standard input")->required();
    fromra->add_option("--relschema", relschema_path, "relation schema file")->required();
    fromra->add_option("--schema-out", schema_out, "write the matrix schema here");

    auto* cc = app.add_subcommand("compile-circuit", "unroll an expression into a circuit");
    cc->add_option("-e,--expr", expr, "expression, or - for standard input")->required();
    cc->add_option("--schema", schema_path, "schema file")->required();
    cc->add_option("--dim", dims, "SYM=N, repeatable")->required();

    auto* ce = app.add_subcommand("circuit-eval", "evaluate a circuit dump");
    ce->add_option("--circuit", circuit_path, "circuit file, or - for standard input")->required();
    ce->add_option("--inputs", inputs_path, "instance file holding the input matrices")->required();
    ce->add_option("--semiring", semiring, "real or rational");

    auto* cs = app.add_subcommand("circuit-stats", "size, depth and degree of a circuit");
    cs->add_option("--circuit", circuit_path, "circuit file, or - for standard input")->required();

    auto* sl = app.add_subcommand("stdlib", "print a standard library expression; without NAME, list them");
    sl->add_option("name", name, "expression name");
    sl->add_flag("--schema", want_schema, "print its schema instead");

    std::string demo_kind;
    auto* demo = app.add_subcommand("demo", "run a standard library pipeline on a square matrix V");
    demo->add_option("kind", demo_kind, "lu, plu, inv, det, tc or clique")
        ->required()
        ->check(CLI::IsMember({"lu", "plu", "inv", "det", "tc", "clique"}));
    demo->add_option("--instance", instance_path, "instance file with a square matrix V")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (app.get_subcommands().empty()) err << app.help();
        return 1;
    }

    try {
        if (check->parsed()) {
            Schema s = detail::load_schema(schema_path);
            out << to_string(typecheck(parse_expr(detail::read_source(expr, in)), s)) << "\n";
        } else if (eval->parsed()) {
            RawInstance raw = load_raw_instance(instance_path);
            Schema s = raw.schema;
            if (!schema_path.empty()) s.merge(detail::load_schema(schema_path));
            Expr e = parse_expr(detail::read_source(expr, in));
            typecheck(e, s);
            with_semiring(detail::pick_semiring(semiring, raw.semiring), [&](auto sr) {
                auto inst = materialize(raw, sr);
                print_matrix(out, evaluate(e, s, inst, sr), sr);
            });
        } else if (des->parsed()) {
            Schema s = detail::load_schema(schema_path);
            Expr e = desugar(parse_expr(detail::read_source(expr, in)), s);
            if (reduce) e = reduce_apply_to_scalars(e, s);
            out << pretty(e) << "\n";
            if (!schema_out.empty()) {
                std::ofstream f(schema_out);
                if (!f) throw Error(ErrorKind::FileNotFound, "cannot write '" + schema_out + "'");
                f << print_schema(s);
            }
        } else if (cls->parsed()) {
            Expr e = parse_expr(detail::read_source(expr, in));
            if (schema_path.empty()) {
                out << to_string(classify(e)) << "\n";
            } else {
                Schema s = detail::load_schema(schema_path);
                typecheck(e, s);
                out << to_string(classify(e, &s)) << "\n";
            }
        } else if (tora->parsed()) {
            Schema s = detail::load_schema(schema_path);
            out << print_ra(phi_translate(parse_expr(detail::read_source(expr, in)), s)) << "\n";
        } else if (fromra->parsed()) {
            RelSchema rs = parse_relschema_text(read_file(relschema_path));
            std::string text = query_path == "-" ? detail::read_source("-", in) : read_file(query_path);
            Schema s;
            out << pretty(psi_translate(parse_ra(text), rs, s)) << "\n";
            if (!schema_out.empty()) {
                std::ofstream f(schema_out);
                if (!f) throw Error(ErrorKind::FileNotFound, "cannot write '" + schema_out + "'");
                f << print_schema(s);
            }
        } else if (cc->parsed()) {
            Schema s = detail::load_schema(schema_path);
            out << dump_circuit(compile(parse_expr(detail::read_source(expr, in)), s, detail::parse_dims(dims)));
        } else if (ce->parsed()) {
            Circuit c = parse_circuit(circuit_path == "-" ? detail::read_source("-", in) : read_file(circuit_path));
            RawInstance raw = load_raw_instance(inputs_path);
            SemiringKind k = detail::pick_semiring(semiring, raw.semiring);
            auto go = [&](auto sr) {
                auto inst = materialize(raw, sr);
                print_matrix(out, output_matrix(c, eval_circuit(c, inst, sr), sr), sr);
            };
            if (k == SemiringKind::Real) go(RealSemiring{});
            else if (k == SemiringKind::Rational) go(RationalSemiring{});
            else throw detail::Usage("circuits are evaluated over the real or rational semiring");
        } else if (cs->parsed()) {
            Circuit c = parse_circuit(circuit_path == "-" ? detail::read_source("-", in) : read_file(circuit_path));
            CircuitStats st = stats(c);
            out << "gates " << st.gates << "\nwires " << st.wires << "\nsize " << st.size << "\ndepth " << st.depth
                << "\ndegree " << st.degree << "\ntotal_degree " << st.total_degree << "\n";
            for (std::size_t k = 0; k < c.outputs.size(); ++k)
                out << "output[" << c.outputs[k].row << "," << c.outputs[k].col << "] " << st.output_degrees[k] << "\n";
        } else if (sl->parsed()) {
            if (name.empty()) {
                for (const auto& n : stdlib_names()) out << n << "\n";
            } else {
                NamedExpr ne = stdlib_expr(name);
                out << (want_schema ? print_schema(ne.schema) : pretty(ne.expr) + "\n");
            }
        } else if (demo->parsed()) {
            RawInstance raw = load_raw_instance(instance_path);
            const MatrixType* t = raw.schema.find("V");
            if (!t) throw Error(ErrorKind::UnboundVariable, "the demo instance needs a matrix named V");
            if (t->rows != t->cols || t->rows.is_unit())
                throw Error(ErrorKind::ShapeError, "V must be square with a size symbol other than 1");
            RealSemiring sr;
            Instance<RealSemiring> inst = materialize(raw, sr);
            lib::Builder b(t->rows.name());
            Expr V = b.matrix_input("V");
            auto run_one = [&](const Expr& e) { return evaluate(e, b.schema(), inst, sr); };
            if (demo_kind == "lu") {
                Expr L = b.e_L(V), U = b.e_U(V);
                detail::print_labeled(out, "L", to_string(run_one(L), sr));
                detail::print_labeled(out, "U", to_string(run_one(U), sr));
            } else if (demo_kind == "plu") {
                Expr M = b.e_LinvP(V), U = b.e_U_pivoted(V);
                detail::print_labeled(out, "M", to_string(run_one(M), sr));
                detail::print_labeled(out, "U", to_string(run_one(U), sr));
            } else if (demo_kind == "inv") {
                print_matrix(out, run_one(b.e_inv(V)), sr);
            } else if (demo_kind == "det") {
                print_matrix(out, run_one(b.e_det(V)), sr);
            } else if (demo_kind == "tc") {
                print_matrix(out, run_one(b.e_TC(V)), sr);
            } else {
                print_matrix(out, run_one(b.four_clique(V, true)), sr);
            }
        }
    } catch (const detail::Usage& u) {
        err << "usage error: " << u.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }
    return 0;
}

}  // namespace matloop::cli
