#pragma once

#include <string_view>
#include <vector>

#include "procure/code/ast.hpp"
#include "procure/code/lexer.hpp"

namespace procure::code {

/// Parses a whole module. Throws SyntaxError.
std::vector<Stmt> parse_module(std::string_view source);

/// Parses a single expression (used for f-string fields and in tests).
Expr parse_expression(std::string_view source);

}  // namespace procure::code
