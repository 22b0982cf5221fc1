#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procure/code/ast.hpp"
#include "procure/code/lexer.hpp"

namespace procure::code {

/// A name binding produced by scope resolution. Symbols are only created for
/// module-level functions whose bodies contain no nested def/class.
struct Symbol {
  std::string name;
  std::string function;        // owning module-level function
  bool function_level = true;  // false for comprehension and lambda locals
  bool is_param = false;
  bool captured_lazily = false;  // read from a lambda or generator expression
};

/// Immutable parsed program. Copies share the same underlying state.
class SubjectProgram {
 public:
  /// Throws SyntaxError or MissingEntryPoint.
  static SubjectProgram parse(std::string source, std::string entry_point, std::string origin = {});

  const std::string& source() const noexcept;
  const std::string& entry_point() const noexcept;
  const std::string& origin() const noexcept;
  const std::vector<Stmt>& module() const noexcept;
  const std::vector<Token>& tokens() const noexcept;
  const std::vector<Symbol>& symbols() const noexcept;
  const Stmt& entry_function() const noexcept;

  /// Statements of the entry function in pre-order; element k has index k+1.
  const std::vector<const Stmt*>& statements() const noexcept;
  const Stmt& statement(int index) const;

  /// Construct in the entry function that the analyses do not model, if any.
  const std::optional<std::string>& unsupported() const noexcept;
  void require_supported() const;

  std::string_view text(Span span) const;
  std::size_t line_start(std::size_t pos) const noexcept;
  /// Offset just past the newline that ends the line containing `pos`.
  std::size_t line_end(std::size_t pos) const noexcept;
  /// Leading whitespace of the line on which `stmt` starts, if the statement
  /// is the first thing on that line.
  std::optional<std::string> indent_of(const Stmt& stmt) const;
  /// True when the statement occupies whole lines by itself.
  bool own_line(const Stmt& stmt) const;

 private:
  struct Impl;
  explicit SubjectProgram(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct StatementInfo {
  int index = 0;
  Span span;
  std::set<std::string> defs;
  std::set<std::string> uses;
  bool is_pure = true;
};

/// Calls that do not disqualify a statement from being pure.
const std::set<std::string>& pure_call_whitelist();

/// One entry per indexed statement of the entry function. Compound
/// statements contribute their header only.
std::vector<StatementInfo> def_use_sets(const SubjectProgram& program);
StatementInfo def_use(const SubjectProgram& program, int index);

}  // namespace procure::code
