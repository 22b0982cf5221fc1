#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace procure::code {

/// Half-open character range [begin, end) into the program source.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t pos) const noexcept { return pos >= begin && pos < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class ExprKind {
  Name,
  Constant,
  FString,
  BinOp,
  UnaryOp,
  BoolOp,
  Compare,
  Call,
  Keyword,
  Attribute,
  Subscript,
  Slice,
  Starred,
  DoubleStarred,
  Tuple,
  List,
  Set,
  Dict,
  ListComp,
  SetComp,
  DictComp,
  GeneratorExp,
  Comprehension,
  Lambda,
  Param,
  IfExp,
  NamedExpr,
  Yield,
  YieldFrom,
  Await,
  Alias,
  Empty,
};

enum class NameCtx { Load, Store, Del };

enum class ParamFlavor { Plain, VarArgs, KwArgs, KwOnlyMarker, PosOnlyMarker };

enum class ConstantFlavor { Number, String, Keyword };

/// Expression node. Layout of `kids` by kind:
///   BinOp/BoolOp/Compare: operands (operators in `value`, comma separated for Compare)
///   Call: callee, then arguments (Keyword / Starred / DoubleStarred / plain)
///   Attribute: object (attribute name in `value`)
///   Subscript: object, index;  Slice: lower, upper, step (Empty when absent)
///   Dict: key, value pairs (DoubleStarred occupies a single slot)
///   *Comp / GeneratorExp: element(s), then Comprehension nodes
///   Comprehension: target, iterable, conditions...
///   Lambda: Param nodes, then body;  Param: annotation, default (Empty when absent)
///   IfExp: body, test, orelse;  NamedExpr: target, value
///   Alias: bound Name (module path in `value`)
struct Expr {
  ExprKind kind = ExprKind::Empty;
  std::string value;
  Span span;
  std::vector<Expr> kids;
  NameCtx ctx = NameCtx::Load;
  ParamFlavor param = ParamFlavor::Plain;
  ConstantFlavor constant = ConstantFlavor::Number;
  int symbol = -1;  // resolved binding for Name/Param, -1 when free or unresolved
};

enum class StmtKind {
  Expr,
  Assign,
  AugAssign,
  AnnAssign,
  Return,
  Pass,
  Break,
  Continue,
  Raise,
  Assert,
  Del,
  Global,
  Nonlocal,
  Import,
  ImportFrom,
  If,
  While,
  For,
  FunctionDef,
  ClassDef,
  Try,
  ExceptHandler,
  With,
};

/// Statement node. `exprs` layout by kind:
///   Expr: value;  Assign: targets..., value;  AugAssign: target, value (operator in `name`)
///   AnnAssign: target, annotation[, value];  Return: [value];  Raise: [exc[, cause]]
///   Assert: test[, msg];  Del: targets;  Global/Nonlocal: Names;  Import/ImportFrom: Aliases
///   If/While: test;  For: target, iterable;  FunctionDef: Params..., [return annotation]
///   ClassDef: bases and keywords;  ExceptHandler: [type[, Name]];  With: (context, target|Empty) pairs
struct Stmt {
  StmtKind kind = StmtKind::Pass;
  Span span;    // whole statement including nested suites
  Span header;  // keyword up to and including ':' for compound statements
  Span else_keyword;  // position of `else`/`elif` when present
  std::vector<Expr> exprs;
  std::vector<Expr> decorators;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
  std::vector<Stmt> handlers;
  std::vector<Stmt> finalbody;
  std::string name;
  bool is_elif = false;
  bool is_async = false;
  bool inline_body = false;
  int index = 0;  // 1-based pre-order ordinal inside the entry function, 0 elsewhere
};

bool is_compound(StmtKind kind) noexcept;
std::string_view to_string(StmtKind kind) noexcept;
std::string_view to_string(ExprKind kind) noexcept;

/// Pre-order walk over an expression tree.
template <typename F>
void walk(const Expr& e, F&& fn) {
  fn(e);
  for (const Expr& k : e.kids) walk(k, fn);
}

}  // namespace procure::code
