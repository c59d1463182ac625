#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace matloop {

/// Location of a construct in source text. Offsets are byte offsets, line and
/// column are 1-based.
struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t line = 0;
    std::size_t column = 0;
};

enum class ErrorKind {
    // parsing and typing
    SyntaxError,
    DuplicateVariable,
    UnboundVariable,
    TypeMismatch,
    IteratorNotVector,
    ArityMismatch,
    // evaluation
    DivisionByZero,
    UnknownFunction,
    FunctionUnavailableForSemiring,
    MissingDimension,
    ShapeMismatch,
    IndexOutOfRange,
    ConstantNotInCarrier,
    // relational algebra and translations
    SignatureViolation,
    UnknownRelation,
    NotInSumFragment,
    UnsupportedFunction,
    UnsupportedConstruct,
    OutputArityTooLarge,
    SchemaNotBinary,
    EmptyActiveDomain,
    // circuits
    MissingInput,
    UnassignedSymbol,
    MalformedCircuit,
    // files
    FileNotFound,
    FormatError,
    ShapeError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateVariable: return "DuplicateVariable";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::IteratorNotVector: return "IteratorNotVector";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::FunctionUnavailableForSemiring: return "FunctionUnavailableForSemiring";
    case ErrorKind::MissingDimension: return "MissingDimension";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ConstantNotInCarrier: return "ConstantNotInCarrier";
    case ErrorKind::SignatureViolation: return "SignatureViolation";
    case ErrorKind::UnknownRelation: return "UnknownRelation";
    case ErrorKind::NotInSumFragment: return "NotInSumFragment";
    case ErrorKind::UnsupportedFunction: return "UnsupportedFunction";
    case ErrorKind::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorKind::OutputArityTooLarge: return "OutputArityTooLarge";
    case ErrorKind::SchemaNotBinary: return "SchemaNotBinary";
    case ErrorKind::EmptyActiveDomain: return "EmptyActiveDomain";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::UnassignedSymbol: return "UnassignedSymbol";
    case ErrorKind::MalformedCircuit: return "MalformedCircuit";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::ShapeError: return "ShapeError";
    }
    return "Error";
}

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, SourceSpan span,
                std::vector<std::string> expected = {})
        : Error(ErrorKind::SyntaxError, render(message, span, expected)),
          span_(span),
          expected_(std::move(expected)) {}

    const SourceSpan& span() const noexcept { return span_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string render(const std::string& message, const SourceSpan& span,
                              const std::vector<std::string>& expected) {
        std::string out = std::to_string(span.line) + ":" + std::to_string(span.column) +
                          ": " + message;
        if (!expected.empty()) {
            out += " (expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) out += ", ";
                out += expected[i];
            }
            out += ")";
        }
        return out;
    }

    SourceSpan span_;
    std::vector<std::string> expected_;
};

/// Errors raised while loading a text file carry the offending line.
class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& message)
        : Error(ErrorKind::FormatError, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// True for failures that belong to parsing or static checking, as opposed
/// to evaluation.
inline bool is_static_error(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SyntaxError:
    case ErrorKind::DuplicateVariable:
    case ErrorKind::UnboundVariable:
    case ErrorKind::TypeMismatch:
    case ErrorKind::IteratorNotVector:
    case ErrorKind::ArityMismatch:
    case ErrorKind::FormatError:
    case ErrorKind::SignatureViolation:
    case ErrorKind::NotInSumFragment:
    case ErrorKind::SchemaNotBinary:
    case ErrorKind::OutputArityTooLarge:
    case ErrorKind::MalformedCircuit:
        return true;
    default:
        return false;
    }
}

}  // namespace matloop
