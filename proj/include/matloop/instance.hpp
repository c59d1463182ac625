#pragma once

// Instances (dimension assignment plus matrices) and the instance file format:
//
//   semiring real|nat|bool|tropical
//   size SYM N
//   matrix NAME SYM SYM        followed by dims[SYM1] rows of dims[SYM2] values
//   var NAME : SYM x SYM       declares a loop variable type
//
// `#` starts a comment.

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "matloop/ast.hpp"
#include "matloop/matrix.hpp"
#include "matloop/semiring.hpp"

namespace matloop {

using Dims = std::map<SizeSymbol, std::size_t>;

inline std::size_t dim_of(const Dims& dims, const SizeSymbol& s) {
    if (s.is_unit()) return 1;
    auto it = dims.find(s);
    if (it == dims.end())
        throw Error(ErrorKind::MissingDimension, "no dimension assigned to size symbol '" + s.name() + "'");
    return it->second;
}

template <class S>
struct Instance {
    Dims dims;
    std::map<std::string, KMatrix<S>> mats;

    std::size_t dim(const SizeSymbol& s) const { return dim_of(dims, s); }

    void set_dim(const std::string& sym, std::size_t n) {
        if (n < 1) throw Error(ErrorKind::ShapeError, "dimension of '" + sym + "' must be at least 1");
        SizeSymbol s(sym);
        if (s.is_unit()) {
            if (n != 1) throw Error(ErrorKind::ShapeError, "size symbol 1 always has dimension 1");
            return;
        }
        dims[s] = n;
    }

    void set(const std::string& name, KMatrix<S> m) { mats[name] = std::move(m); }

    const KMatrix<S>& at(const std::string& name) const {
        auto it = mats.find(name);
        if (it == mats.end()) throw Error(ErrorKind::UnboundVariable, "no matrix named '" + name + "'");
        return it->second;
    }

    /// Checks every matrix of s against the dimensions for the variables it
    /// declares that are present here.
    void validate(const Schema& s) const {
        for (const auto& [name, m] : mats) {
            const MatrixType* t = s.find(name);
            if (!t) continue;
            if (m.rows() != dim(t->rows) || m.cols() != dim(t->cols))
                throw Error(ErrorKind::ShapeError,
                            "matrix '" + name + "' is " + std::to_string(m.rows()) + " x " +
                                std::to_string(m.cols()) + " but its type " + to_string(*t) + " needs " +
                                std::to_string(dim(t->rows)) + " x " + std::to_string(dim(t->cols)));
        }
    }
};

/// Instance file contents with values still in text form.
struct RawInstance {
    struct Matrix {
        std::string name;
        MatrixType type;
        std::vector<std::vector<std::string>> rows;
        std::vector<std::size_t> lines;
    };
    std::optional<SemiringKind> semiring;
    Dims dims;
    std::vector<Matrix> matrices;
    Schema schema;
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

inline bool valid_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

inline bool valid_symbol(const std::string& s) { return s == "1" || valid_identifier(s); }

}  // namespace detail

inline RawInstance parse_instance_text(const std::string& text) {
    RawInstance raw;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    RawInstance::Matrix* open = nullptr;
    std::size_t want_rows = 0, want_cols = 0;

    auto close_block = [&](std::size_t at_line) {
        if (open && open->rows.size() != want_rows)
            throw Error(ErrorKind::ShapeError, "line " + std::to_string(at_line) + ": matrix '" + open->name +
                                                   "' has " + std::to_string(open->rows.size()) + " rows, expected " +
                                                   std::to_string(want_rows));
        open = nullptr;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto words = detail::split_words(line);
        if (words.empty()) continue;
        const std::string& head = words[0];
        if (open && open->rows.size() < want_rows && head != "semiring" && head != "size" && head != "matrix" &&
            head != "var") {
            if (words.size() != want_cols)
                throw FormatError(lineno, "row of matrix '" + open->name + "' has " + std::to_string(words.size()) +
                                              " values, expected " + std::to_string(want_cols));
            open->rows.push_back(words);
            open->lines.push_back(lineno);
            if (open->rows.size() == want_rows) open = nullptr;
            continue;
        }
        close_block(lineno);
        if (head == "semiring") {
            if (words.size() != 2) throw FormatError(lineno, "expected 'semiring NAME'");
            try {
                raw.semiring = parse_semiring_kind(words[1]);
            } catch (const Error&) {
                throw FormatError(lineno, "unknown semiring '" + words[1] + "'");
            }
        } else if (head == "size") {
            if (words.size() != 3 || !detail::valid_symbol(words[1]))
                throw FormatError(lineno, "expected 'size SYM N'");
            if (words[2].find_first_not_of("0123456789") != std::string::npos || words[2].size() > 9)
                throw FormatError(lineno, "dimension must be a positive integer");
            std::size_t n = std::stoul(words[2]);
            if (n < 1) throw FormatError(lineno, "dimension must be at least 1");
            if (words[1] == "1") {
                if (n != 1) throw FormatError(lineno, "size symbol 1 always has dimension 1");
                continue;
            }
            SizeSymbol s(words[1]);
            if (raw.dims.count(s) && raw.dims[s] != n)
                throw FormatError(lineno, "size '" + words[1] + "' declared twice");
            raw.dims[s] = n;
        } else if (head == "matrix") {
            if (words.size() != 4 || !detail::valid_identifier(words[1]) || !detail::valid_symbol(words[2]) ||
                !detail::valid_symbol(words[3]))
                throw FormatError(lineno, "expected 'matrix NAME SYM SYM'");
            MatrixType t = make_type(words[2], words[3]);
            for (const SizeSymbol& sym : {t.rows, t.cols})
                if (!sym.is_unit() && !raw.dims.count(sym))
                    throw Error(ErrorKind::ShapeError, "line " + std::to_string(lineno) + ": size '" + sym.name() +
                                                           "' used before its size line");
            for (const auto& m : raw.matrices)
                if (m.name == words[1]) throw FormatError(lineno, "matrix '" + words[1] + "' defined twice");
            try {
                raw.schema.merge(words[1], t);
            } catch (const Error& e) {
                throw FormatError(lineno, e.detail());
            }
            raw.matrices.push_back({words[1], t, {}, {}});
            open = &raw.matrices.back();
            want_rows = dim_of(raw.dims, t.rows);
            want_cols = dim_of(raw.dims, t.cols);
        } else if (head == "var") {
            // var NAME : SYM x SYM, also accepted without spaces around ':'
            std::string rest;
            for (std::size_t i = 1; i < words.size(); ++i) rest += words[i] + " ";
            for (std::size_t p; (p = rest.find(':')) != std::string::npos;) rest.replace(p, 1, " ");
            auto w = detail::split_words(rest);
            if (w.size() != 4 || w[2] != "x" || !detail::valid_identifier(w[0]) || !detail::valid_symbol(w[1]) ||
                !detail::valid_symbol(w[3]))
                throw FormatError(lineno, "expected 'var NAME : SYM x SYM'");
            try {
                raw.schema.merge(w[0], make_type(w[1], w[3]));
            } catch (const Error& e) {
                throw FormatError(lineno, e.detail());
            }
        } else {
            throw FormatError(lineno, "unexpected '" + head + "'");
        }
    }
    close_block(lineno);
    return raw;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RawInstance load_raw_instance(const std::string& path) { return parse_instance_text(read_file(path)); }

/// Converts values into carrier elements of sr.
template <class S>
Instance<S> materialize(const RawInstance& raw, const S& sr = S{}) {
    Instance<S> inst;
    inst.dims = raw.dims;
    for (const auto& m : raw.matrices) {
        const std::size_t r = inst.dim(m.type.rows), c = inst.dim(m.type.cols);
        typename KMatrix<S>::storage_type data;
        data.reserve(r * c);
        for (std::size_t i = 0; i < m.rows.size(); ++i)
            for (const auto& w : m.rows[i]) {
                try {
                    data.push_back(sr.parse(w));
                } catch (const Error& e) {
                    throw FormatError(m.lines[i], e.detail() + " (" + std::string(S::name) + " semiring)");
                }
            }
        inst.set(m.name, KMatrix<S>(r, c, std::move(data)));
    }
    return inst;
}

template <class S>
Instance<S> parse_instance(const std::string& text, const S& sr = S{}) {
    return materialize(parse_instance_text(text), sr);
}

template <class S>
Instance<S> load_instance(const std::string& path, const S& sr = S{}) {
    return materialize(load_raw_instance(path), sr);
}

/// Text form readable by parse_instance.
template <class S>
std::string write_instance(const Instance<S>& inst, const Schema& schema, const S& sr = S{}) {
    std::ostringstream os;
    os << "semiring " << S::name << "\n";
    for (const auto& [sym, n] : inst.dims) os << "size " << sym.name() << " " << n << "\n";
    for (const auto& [name, t] : schema.vars()) {
        auto it = inst.mats.find(name);
        if (it == inst.mats.end()) {
            os << "var " << name << " : " << t.rows.name() << " x " << t.cols.name() << "\n";
            continue;
        }
        os << "matrix " << name << " " << t.rows.name() << " " << t.cols.name() << "\n";
        const auto& m = it->second;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << sr.print(m(i, j));
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace matloop
