#pragma once

#include <string>

#include "kbp/ast.hpp"

namespace kbp {

/// Minimal-parenthesis rendering that parses back to an equal tree.
std::string print(const ast::ExprPtr& e);
std::string print(const ast::TypeRef& t);
std::string print(const ast::Atomic& a);
std::string print(const ast::Statement& s, int indent = 0);
std::string print(const ast::Program& p, int indent = 0);
std::string print(const ast::ProtocolDecl& p);
std::string print(const ast::Model& m);

}  // namespace kbp
