#pragma once

#include <string_view>

#include "kbp/ast.hpp"
#include "kbp/errors.hpp"

namespace kbp {

/// Parses a whole model document.  Throws SyntaxError.
ast::Model parse_model(std::string_view text);

/// Parses a single formula or expression, e.g. a command-line property.
ast::ExprPtr parse_formula(std::string_view text);

}  // namespace kbp
