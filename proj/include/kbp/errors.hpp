#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kbp/ast.hpp"

namespace kbp {

/// Lexical or grammatical error, or a duplicate declaration found while parsing.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(ast::Pos pos, const std::string& message)
        : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
          pos_(pos) {}
    ast::Pos pos() const { return pos_; }

private:
    ast::Pos pos_;
};

struct Diagnostic {
    ast::Pos pos;
    std::string rule;
    std::string message;

    std::string str() const {
        return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": [" + rule + "] " + message;
    }
};

/// Static-semantics violation; carries every diagnostic found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Diagnostic> diags)
        : std::runtime_error(diags.empty() ? std::string("invalid model") : diags.front().str()),
          diags_(std::move(diags)) {}
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

/// Misuse of an API by a caller on well-formed input (bad depth, missing binding).
class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed; indicates a bug, not bad input.
class InternalError : public std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace kbp
