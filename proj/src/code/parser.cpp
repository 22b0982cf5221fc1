#include "procure/code/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <utility>

#include "procure/errors.hpp"

namespace procure::code {
namespace {

bool one_of(std::string_view s, std::initializer_list<std::string_view> options) {
  return std::find(options.begin(), options.end(), s) != options.end();
}

bool is_aug_op(std::string_view s) {
  return one_of(s, {"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@="});
}

class Parser {
 public:
  Parser(std::string_view source, std::vector<Token> tokens)
      : src_(source), toks_(std::move(tokens)) {}

  std::vector<Stmt> module() {
    std::vector<Stmt> out;
    while (!at(TokenKind::EndMarker)) parse_statement(out);
    return out;
  }

  Expr lone_expression() {
    Expr e = at_kw("yield") ? parse_yield() : parse_testlist_star_expr();
    if (!at(TokenKind::EndMarker)) fail("invalid syntax");
    return e;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(i_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Op && t.text == op;
  }
  bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Name && t.text == kw;
  }
  const Token& advance() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    last_end_ = t.end;
    return t;
  }
  const Token& expect_op(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    return advance();
  }
  const Token& expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail("expected '" + std::string(kw) + "'");
    return advance();
  }
  const Token& expect_name() {
    if (!at(TokenKind::Name) || is_keyword(peek().text)) fail("expected identifier");
    return advance();
  }
  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::string what = message;
    if (t.kind == TokenKind::Indent) what = "unexpected indent";
    throw SyntaxError(t.begin, t.line, what);
  }

  bool at_statement_end() const {
    return at(TokenKind::Newline) || at(TokenKind::EndMarker) || at_op(";");
  }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
        return true;
      case TokenKind::Name:
        return !is_keyword(t.text) ||
               one_of(t.text, {"None", "True", "False", "not", "lambda", "await", "yield"});
      case TokenKind::Op:
        return one_of(t.text, {"(", "[", "{", "-", "+", "~", "...", "*"});
      default:
        return false;
    }
  }

  static Expr node(ExprKind kind, Span span, std::string value = {}) {
    Expr e;
    e.kind = kind;
    e.span = span;
    e.value = std::move(value);
    return e;
  }
  Expr empty() const { return node(ExprKind::Empty, Span{last_end_, last_end_}); }

  // ---- statements ----------------------------------------------------------

  void parse_statement(std::vector<Stmt>& out) {
    if (at(TokenKind::Indent)) fail("unexpected indent");
    if (at(TokenKind::Dedent)) fail("unexpected dedent");
    if (at_op("@")) {
      out.push_back(parse_decorated());
      return;
    }
    if (at(TokenKind::Name)) {
      const std::string& kw = peek().text;
      if (kw == "if") {
        out.push_back(parse_if());
        return;
      }
      if (kw == "while") {
        out.push_back(parse_while());
        return;
      }
      if (kw == "for") {
        out.push_back(parse_for());
        return;
      }
      if (kw == "def") {
        out.push_back(parse_def());
        return;
      }
      if (kw == "class") {
        out.push_back(parse_class());
        return;
      }
      if (kw == "try") {
        out.push_back(parse_try());
        return;
      }
      if (kw == "with") {
        out.push_back(parse_with());
        return;
      }
      if (kw == "async") {
        std::size_t begin = advance().begin;
        Stmt s;
        if (at_kw("def")) {
          s = parse_def();
        } else if (at_kw("for")) {
          s = parse_for();
        } else if (at_kw("with")) {
          s = parse_with();
        } else {
          fail("invalid syntax");
        }
        s.is_async = true;
        s.span.begin = begin;
        s.header.begin = begin;
        out.push_back(std::move(s));
        return;
      }
    }
    parse_simple_line(out);
  }

  void parse_simple_line(std::vector<Stmt>& out) {
    while (true) {
      out.push_back(parse_small());
      if (at_op(";")) {
        advance();
        if (at(TokenKind::Newline) || at(TokenKind::EndMarker)) break;
        continue;
      }
      break;
    }
    if (at(TokenKind::Newline)) {
      advance();
    } else if (!at(TokenKind::EndMarker)) {
      fail("invalid syntax");
    }
  }

  // Parses the suite after ':' into `body`; returns whether it was inline.
  bool parse_suite(std::vector<Stmt>& body) {
    if (at(TokenKind::Newline)) {
      advance();
      if (!at(TokenKind::Indent)) fail("expected an indented block");
      advance();
      while (!at(TokenKind::Dedent) && !at(TokenKind::EndMarker)) parse_statement(body);
      if (at(TokenKind::Dedent)) advance();
      return false;
    }
    parse_simple_line(body);
    return true;
  }

  Span header_from(std::size_t begin) const { return Span{begin, last_end_}; }

  static std::size_t suite_end(const std::vector<Stmt>& suite, std::size_t fallback) {
    return suite.empty() ? fallback : suite.back().span.end;
  }

  Stmt parse_if() {
    Stmt s;
    s.kind = StmtKind::If;
    const Token& kw = advance();
    s.is_elif = kw.text == "elif";
    std::size_t begin = kw.begin;
    s.exprs.push_back(parse_namedexpr_test());
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    std::size_t end = suite_end(s.body, last_end_);
    if (at_kw("elif")) {
      s.else_keyword = Span{peek().begin, peek().end};
      s.orelse.push_back(parse_if());
      end = s.orelse.back().span.end;
    } else if (at_kw("else")) {
      const Token& e = advance();
      s.else_keyword = Span{e.begin, e.end};
      expect_op(":");
      s.inline_body = parse_suite(s.orelse) || s.inline_body;
      end = suite_end(s.orelse, end);
    }
    s.span = Span{begin, end};
    return s;
  }

  void parse_loop_else(Stmt& s, std::size_t& end) {
    if (!at_kw("else")) return;
    const Token& e = advance();
    s.else_keyword = Span{e.begin, e.end};
    expect_op(":");
    s.inline_body = parse_suite(s.orelse) || s.inline_body;
    end = suite_end(s.orelse, end);
  }

  Stmt parse_while() {
    Stmt s;
    s.kind = StmtKind::While;
    std::size_t begin = advance().begin;
    s.exprs.push_back(parse_namedexpr_test());
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    std::size_t end = suite_end(s.body, last_end_);
    parse_loop_else(s, end);
    s.span = Span{begin, end};
    return s;
  }

  Stmt parse_for() {
    Stmt s;
    s.kind = StmtKind::For;
    std::size_t begin = advance().begin;
    Expr target = parse_exprlist();
    to_store(target, NameCtx::Store);
    s.exprs.push_back(std::move(target));
    expect_kw("in");
    s.exprs.push_back(parse_testlist_star_expr());
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    std::size_t end = suite_end(s.body, last_end_);
    parse_loop_else(s, end);
    s.span = Span{begin, end};
    return s;
  }

  Stmt parse_decorated() {
    std::size_t begin = peek().begin;
    std::vector<Expr> decorators;
    while (at_op("@")) {
      advance();
      decorators.push_back(parse_namedexpr_test());
      if (!at(TokenKind::Newline)) fail("invalid syntax");
      advance();
    }
    Stmt s;
    bool is_async = false;
    if (at_kw("async")) {
      advance();
      is_async = true;
    }
    if (at_kw("def")) {
      s = parse_def();
    } else if (at_kw("class") && !is_async) {
      s = parse_class();
    } else {
      fail("invalid syntax");
    }
    s.is_async = is_async;
    s.decorators = std::move(decorators);
    s.span.begin = begin;
    return s;
  }

  Stmt parse_def() {
    Stmt s;
    s.kind = StmtKind::FunctionDef;
    std::size_t begin = advance().begin;
    s.name = expect_name().text;
    expect_op("(");
    parse_params(s.exprs, ")", true);
    expect_op(")");
    if (at_op("->")) {
      advance();
      s.exprs.push_back(parse_test());
    }
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    s.span = Span{begin, suite_end(s.body, last_end_)};
    return s;
  }

  void parse_params(std::vector<Expr>& out, std::string_view closer, bool annotations) {
    while (!at_op(closer)) {
      Expr p;
      p.kind = ExprKind::Param;
      if (at_op("/")) {
        const Token& t = advance();
        p.param = ParamFlavor::PosOnlyMarker;
        p.span = Span{t.begin, t.end};
        p.kids = {empty(), empty()};
      } else if (at_op("*") && (at_op(",", 1) || at_op(closer, 1))) {
        const Token& t = advance();
        p.param = ParamFlavor::KwOnlyMarker;
        p.span = Span{t.begin, t.end};
        p.kids = {empty(), empty()};
      } else {
        if (at_op("*")) {
          advance();
          p.param = ParamFlavor::VarArgs;
        } else if (at_op("**")) {
          advance();
          p.param = ParamFlavor::KwArgs;
        }
        const Token& name = expect_name();
        p.value = name.text;
        p.span = Span{name.begin, name.end};
        Expr annotation = empty();
        Expr fallback = empty();
        if (annotations && at_op(":")) {
          advance();
          annotation = parse_test();
        }
        if (at_op("=")) {
          advance();
          fallback = parse_test();
        }
        p.kids.push_back(std::move(annotation));
        p.kids.push_back(std::move(fallback));
      }
      out.push_back(std::move(p));
      if (!at_op(",")) break;
      advance();
    }
  }

  Stmt parse_class() {
    Stmt s;
    s.kind = StmtKind::ClassDef;
    std::size_t begin = advance().begin;
    s.name = expect_name().text;
    if (at_op("(")) {
      advance();
      parse_arglist(s.exprs);
      expect_op(")");
    }
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    s.span = Span{begin, suite_end(s.body, last_end_)};
    return s;
  }

  Stmt parse_try() {
    Stmt s;
    s.kind = StmtKind::Try;
    std::size_t begin = advance().begin;
    expect_op(":");
    s.header = header_from(begin);
    parse_suite(s.body);
    std::size_t end = suite_end(s.body, last_end_);
    while (at_kw("except")) {
      Stmt h;
      h.kind = StmtKind::ExceptHandler;
      std::size_t hb = advance().begin;
      if (!at_op(":")) {
        h.exprs.push_back(parse_test());
        if (at_kw("as")) {
          advance();
          const Token& n = expect_name();
          Expr name = node(ExprKind::Name, Span{n.begin, n.end}, n.text);
          name.ctx = NameCtx::Store;
          h.exprs.push_back(std::move(name));
        }
      }
      expect_op(":");
      h.header = header_from(hb);
      parse_suite(h.body);
      h.span = Span{hb, suite_end(h.body, last_end_)};
      end = h.span.end;
      s.handlers.push_back(std::move(h));
    }
    if (at_kw("else")) {
      advance();
      expect_op(":");
      parse_suite(s.orelse);
      end = suite_end(s.orelse, end);
    }
    if (at_kw("finally")) {
      advance();
      expect_op(":");
      parse_suite(s.finalbody);
      end = suite_end(s.finalbody, end);
    }
    if (s.handlers.empty() && s.finalbody.empty()) fail("expected 'except' or 'finally' block");
    s.span = Span{begin, end};
    return s;
  }

  Stmt parse_with() {
    Stmt s;
    s.kind = StmtKind::With;
    std::size_t begin = advance().begin;
    while (true) {
      s.exprs.push_back(parse_test());
      if (at_kw("as")) {
        advance();
        Expr target = parse_expr();
        to_store(target, NameCtx::Store);
        s.exprs.push_back(std::move(target));
      } else {
        s.exprs.push_back(empty());
      }
      if (!at_op(",")) break;
      advance();
    }
    expect_op(":");
    s.header = header_from(begin);
    s.inline_body = parse_suite(s.body);
    s.span = Span{begin, suite_end(s.body, last_end_)};
    return s;
  }

  Stmt simple(StmtKind kind, std::size_t begin) {
    Stmt s;
    s.kind = kind;
    s.span = Span{begin, last_end_};
    s.header = s.span;
    return s;
  }

  Stmt parse_small() {
    const Token& first = peek();
    std::size_t begin = first.begin;
    if (first.kind == TokenKind::Name) {
      const std::string& kw = first.text;
      if (kw == "pass" || kw == "break" || kw == "continue") {
        advance();
        StmtKind kind = kw == "pass" ? StmtKind::Pass : (kw == "break" ? StmtKind::Break : StmtKind::Continue);
        return simple(kind, begin);
      }
      if (kw == "return") {
        advance();
        std::vector<Expr> exprs;
        if (!at_statement_end()) exprs.push_back(parse_testlist_star_expr());
        Stmt s = simple(StmtKind::Return, begin);
        s.exprs = std::move(exprs);
        return s;
      }
      if (kw == "raise") {
        advance();
        std::vector<Expr> exprs;
        if (!at_statement_end()) {
          exprs.push_back(parse_test());
          if (at_kw("from")) {
            advance();
            exprs.push_back(parse_test());
          }
        }
        Stmt s = simple(StmtKind::Raise, begin);
        s.exprs = std::move(exprs);
        return s;
      }
      if (kw == "global" || kw == "nonlocal") {
        advance();
        std::vector<Expr> names;
        while (true) {
          const Token& n = expect_name();
          names.push_back(node(ExprKind::Name, Span{n.begin, n.end}, n.text));
          if (!at_op(",")) break;
          advance();
        }
        Stmt s = simple(kw == "global" ? StmtKind::Global : StmtKind::Nonlocal, begin);
        s.exprs = std::move(names);
        return s;
      }
      if (kw == "del") {
        advance();
        Expr targets = parse_exprlist();
        std::vector<Expr> exprs;
        if (targets.kind == ExprKind::Tuple && targets.value == ",") {
          exprs = std::move(targets.kids);
        } else {
          exprs.push_back(std::move(targets));
        }
        for (Expr& t : exprs) to_store(t, NameCtx::Del);
        Stmt s = simple(StmtKind::Del, begin);
        s.exprs = std::move(exprs);
        return s;
      }
      if (kw == "assert") {
        advance();
        std::vector<Expr> exprs;
        exprs.push_back(parse_test());
        if (at_op(",")) {
          advance();
          exprs.push_back(parse_test());
        }
        Stmt s = simple(StmtKind::Assert, begin);
        s.exprs = std::move(exprs);
        return s;
      }
      if (kw == "import") return parse_import();
      if (kw == "from") return parse_from_import();
    }

    Expr lhs = at_kw("yield") ? parse_yield() : parse_testlist_star_expr();
    if (peek().kind == TokenKind::Op && is_aug_op(peek().text)) {
      std::string op = advance().text;
      if (lhs.kind != ExprKind::Name && lhs.kind != ExprKind::Attribute && lhs.kind != ExprKind::Subscript) {
        throw SyntaxError(lhs.span.begin, first.line, "illegal expression for augmented assignment");
      }
      to_store(lhs, NameCtx::Store);
      Expr rhs = at_kw("yield") ? parse_yield() : parse_testlist_star_expr();
      Stmt s = simple(StmtKind::AugAssign, begin);
      s.name = op;
      s.exprs.push_back(std::move(lhs));
      s.exprs.push_back(std::move(rhs));
      return s;
    }
    if (at_op(":")) {
      advance();
      to_store(lhs, NameCtx::Store);
      Expr annotation = parse_test();
      Stmt s;
      s.kind = StmtKind::AnnAssign;
      s.exprs.push_back(std::move(lhs));
      s.exprs.push_back(std::move(annotation));
      if (at_op("=")) {
        advance();
        s.exprs.push_back(at_kw("yield") ? parse_yield() : parse_testlist_star_expr());
      }
      s.span = Span{begin, last_end_};
      s.header = s.span;
      return s;
    }
    if (at_op("=")) {
      std::vector<Expr> parts;
      parts.push_back(std::move(lhs));
      while (at_op("=")) {
        advance();
        parts.push_back(at_kw("yield") ? parse_yield() : parse_testlist_star_expr());
      }
      for (std::size_t k = 0; k + 1 < parts.size(); ++k) to_store(parts[k], NameCtx::Store);
      Stmt s = simple(StmtKind::Assign, begin);
      s.exprs = std::move(parts);
      return s;
    }
    Stmt s = simple(StmtKind::Expr, begin);
    s.exprs.push_back(std::move(lhs));
    return s;
  }

  std::string parse_dotted(Span& first_component) {
    const Token& n = expect_name();
    first_component = Span{n.begin, n.end};
    std::string path = n.text;
    while (at_op(".")) {
      advance();
      path += ".";
      path += expect_name().text;
    }
    return path;
  }

  Expr alias(std::string path, const Token* as_name, Span fallback_span, std::string fallback_name) {
    Expr a = node(ExprKind::Alias, Span{fallback_span.begin, last_end_}, std::move(path));
    Expr bound;
    if (as_name != nullptr) {
      bound = node(ExprKind::Name, Span{as_name->begin, as_name->end}, as_name->text);
    } else {
      bound = node(ExprKind::Name, fallback_span, std::move(fallback_name));
    }
    bound.ctx = NameCtx::Store;
    a.kids.push_back(std::move(bound));
    return a;
  }

  Stmt parse_import() {
    std::size_t begin = advance().begin;
    std::vector<Expr> aliases;
    while (true) {
      Span first;
      std::string path = parse_dotted(first);
      std::string head = path.substr(0, path.find('.'));
      if (at_kw("as")) {
        advance();
        const Token& n = expect_name();
        aliases.push_back(alias(path, &n, first, head));
      } else {
        aliases.push_back(alias(path, nullptr, first, head));
      }
      if (!at_op(",")) break;
      advance();
    }
    Stmt s = simple(StmtKind::Import, begin);
    s.exprs = std::move(aliases);
    return s;
  }

  Stmt parse_from_import() {
    std::size_t begin = advance().begin;
    std::string module;
    while (at_op(".") || at_op("...")) module += advance().text;
    if (!at_kw("import")) {
      Span ignored;
      module += parse_dotted(ignored);
    }
    expect_kw("import");
    std::vector<Expr> aliases;
    if (at_op("*")) {
      const Token& t = advance();
      aliases.push_back(node(ExprKind::Alias, Span{t.begin, t.end}, "*"));
    } else {
      bool paren = at_op("(");
      if (paren) advance();
      while (true) {
        if (paren && at_op(")")) break;
        const Token& n = expect_name();
        Span sp{n.begin, n.end};
        std::string name = n.text;
        if (at_kw("as")) {
          advance();
          const Token& as = expect_name();
          aliases.push_back(alias(name, &as, sp, name));
        } else {
          aliases.push_back(alias(name, nullptr, sp, name));
        }
        if (!at_op(",")) break;
        advance();
      }
      if (paren) expect_op(")");
    }
    Stmt s = simple(StmtKind::ImportFrom, begin);
    s.name = module;
    s.exprs = std::move(aliases);
    return s;
  }

  void to_store(Expr& e, NameCtx ctx) {
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::Attribute:
      case ExprKind::Subscript:
        e.ctx = ctx;
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        e.ctx = ctx;
        for (Expr& k : e.kids) to_store(k, ctx);
        return;
      case ExprKind::Starred:
        e.ctx = ctx;
        to_store(e.kids.front(), ctx);
        return;
      default:
        throw SyntaxError(e.span.begin, line_of(e.span.begin), "cannot assign to " + std::string(to_string(e.kind)));
    }
  }

  int line_of(std::size_t pos) const {
    return 1 + static_cast<int>(std::count(src_.begin(), src_.begin() + static_cast<std::ptrdiff_t>(std::min(pos, src_.size())), '\n'));
  }

  // ---- expressions ---------------------------------------------------------

  Expr tuple_from(Expr first, std::size_t begin, bool allow_star) {
    if (!at_op(",")) return first;
    Expr t = node(ExprKind::Tuple, Span{begin, 0}, ",");
    t.kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (!starts_expression()) break;
      t.kids.push_back(allow_star && at_op("*") ? parse_star_expr() : parse_test());
    }
    t.span.end = last_end_;
    return t;
  }

  Expr parse_testlist_star_expr() {
    std::size_t begin = peek().begin;
    Expr first = at_op("*") ? parse_star_expr() : parse_test();
    return tuple_from(std::move(first), begin, true);
  }

  // Targets of `for` and `del`: bitwise-or level expressions so `in` is not consumed.
  Expr parse_exprlist() {
    std::size_t begin = peek().begin;
    Expr first = at_op("*") ? parse_star_expr() : parse_expr();
    if (!at_op(",")) return first;
    Expr t = node(ExprKind::Tuple, Span{begin, 0}, ",");
    t.kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (!starts_expression() || at_kw("not") || at_kw("lambda")) break;
      t.kids.push_back(at_op("*") ? parse_star_expr() : parse_expr());
    }
    t.span.end = last_end_;
    return t;
  }

  Expr parse_star_expr() {
    std::size_t begin = expect_op("*").begin;
    Expr s = node(ExprKind::Starred, Span{begin, 0});
    s.kids.push_back(parse_expr());
    s.span.end = last_end_;
    return s;
  }

  Expr parse_yield() {
    std::size_t begin = expect_kw("yield").begin;
    if (at_kw("from")) {
      advance();
      Expr y = node(ExprKind::YieldFrom, Span{begin, 0});
      y.kids.push_back(parse_test());
      y.span.end = last_end_;
      return y;
    }
    Expr y = node(ExprKind::Yield, Span{begin, 0});
    if (starts_expression() && !at_kw("yield")) y.kids.push_back(parse_testlist_star_expr());
    y.span.end = last_end_;
    return y;
  }

  Expr parse_namedexpr_test() {
    if (at(TokenKind::Name) && !is_keyword(peek().text) && at_op(":=", 1)) {
      const Token& n = advance();
      Expr target = node(ExprKind::Name, Span{n.begin, n.end}, n.text);
      target.ctx = NameCtx::Store;
      advance();
      Expr ne = node(ExprKind::NamedExpr, Span{n.begin, 0});
      ne.kids.push_back(std::move(target));
      ne.kids.push_back(parse_test());
      ne.span.end = last_end_;
      return ne;
    }
    return parse_test();
  }

  Expr parse_test() {
    if (at_kw("lambda")) return parse_lambda(false);
    std::size_t begin = peek().begin;
    Expr body = parse_or_test();
    if (!at_kw("if")) return body;
    advance();
    Expr cond = parse_or_test();
    expect_kw("else");
    Expr orelse = parse_test();
    Expr e = node(ExprKind::IfExp, Span{begin, last_end_});
    e.kids.push_back(std::move(body));
    e.kids.push_back(std::move(cond));
    e.kids.push_back(std::move(orelse));
    return e;
  }

  Expr parse_test_nocond() {
    if (at_kw("lambda")) return parse_lambda(true);
    return parse_or_test();
  }

  Expr parse_lambda(bool nocond) {
    std::size_t begin = expect_kw("lambda").begin;
    Expr l = node(ExprKind::Lambda, Span{begin, 0});
    parse_params(l.kids, ":", false);
    expect_op(":");
    l.kids.push_back(nocond ? parse_test_nocond() : parse_test());
    l.span.end = last_end_;
    return l;
  }

  Expr parse_bool(std::string_view op, Expr (Parser::*next)()) {
    std::size_t begin = peek().begin;
    Expr first = (this->*next)();
    if (!at_kw(op)) return first;
    Expr b = node(ExprKind::BoolOp, Span{begin, 0}, std::string(op));
    b.kids.push_back(std::move(first));
    while (at_kw(op)) {
      advance();
      b.kids.push_back((this->*next)());
    }
    b.span.end = last_end_;
    return b;
  }

  Expr parse_or_test() { return parse_bool("or", &Parser::parse_and_test); }
  Expr parse_and_test() { return parse_bool("and", &Parser::parse_not_test); }

  Expr parse_not_test() {
    if (at_kw("not")) {
      std::size_t begin = advance().begin;
      Expr u = node(ExprKind::UnaryOp, Span{begin, 0}, "not");
      u.kids.push_back(parse_not_test());
      u.span.end = last_end_;
      return u;
    }
    return parse_comparison();
  }

  Expr parse_comparison() {
    std::size_t begin = peek().begin;
    Expr first = parse_expr();
    std::vector<std::string> ops;
    std::vector<Expr> operands;
    operands.push_back(std::move(first));
    while (true) {
      std::string op;
      if (peek().kind == TokenKind::Op && one_of(peek().text, {"<", ">", "==", ">=", "<=", "!="})) {
        op = advance().text;
      } else if (at_kw("in")) {
        advance();
        op = "in";
      } else if (at_kw("not") && at_kw("in", 1)) {
        advance();
        advance();
        op = "not in";
      } else if (at_kw("is")) {
        advance();
        op = "is";
        if (at_kw("not")) {
          advance();
          op = "is not";
        }
      } else {
        break;
      }
      ops.push_back(op);
      operands.push_back(parse_expr());
    }
    if (ops.empty()) return std::move(operands.front());
    std::string joined;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      if (k > 0) joined += ",";
      joined += ops[k];
    }
    Expr c = node(ExprKind::Compare, Span{begin, last_end_}, joined);
    c.kids = std::move(operands);
    return c;
  }

  Expr parse_binary(std::initializer_list<std::string_view> ops, Expr (Parser::*next)()) {
    std::size_t begin = peek().begin;
    Expr lhs = (this->*next)();
    while (peek().kind == TokenKind::Op && one_of(peek().text, ops)) {
      std::string op = advance().text;
      Expr rhs = (this->*next)();
      Expr b = node(ExprKind::BinOp, Span{begin, last_end_}, op);
      b.kids.push_back(std::move(lhs));
      b.kids.push_back(std::move(rhs));
      lhs = std::move(b);
    }
    return lhs;
  }

  Expr parse_expr() { return parse_binary({"|"}, &Parser::parse_xor); }
  Expr parse_xor() { return parse_binary({"^"}, &Parser::parse_and); }
  Expr parse_and() { return parse_binary({"&"}, &Parser::parse_shift); }
  Expr parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  Expr parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  Expr parse_term() { return parse_binary({"*", "/", "%", "//", "@"}, &Parser::parse_factor); }

  Expr parse_factor() {
    if (peek().kind == TokenKind::Op && one_of(peek().text, {"+", "-", "~"})) {
      const Token& t = advance();
      Expr u = node(ExprKind::UnaryOp, Span{t.begin, 0}, t.text);
      u.kids.push_back(parse_factor());
      u.span.end = last_end_;
      return u;
    }
    return parse_power();
  }

  Expr parse_power() {
    std::size_t begin = peek().begin;
    Expr base = parse_await_primary();
    if (!at_op("**")) return base;
    advance();
    Expr exponent = parse_factor();
    Expr b = node(ExprKind::BinOp, Span{begin, last_end_}, "**");
    b.kids.push_back(std::move(base));
    b.kids.push_back(std::move(exponent));
    return b;
  }

  Expr parse_await_primary() {
    if (at_kw("await")) {
      std::size_t begin = advance().begin;
      Expr a = node(ExprKind::Await, Span{begin, 0});
      a.kids.push_back(parse_primary());
      a.span.end = last_end_;
      return a;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    std::size_t begin = peek().begin;
    Expr e = parse_atom();
    while (true) {
      if (at_op("(")) {
        advance();
        Expr call = node(ExprKind::Call, Span{begin, 0});
        call.kids.push_back(std::move(e));
        parse_arglist(call.kids);
        expect_op(")");
        call.span.end = last_end_;
        e = std::move(call);
      } else if (at_op("[")) {
        advance();
        Expr sub = node(ExprKind::Subscript, Span{begin, 0});
        sub.kids.push_back(std::move(e));
        sub.kids.push_back(parse_subscriptlist());
        expect_op("]");
        sub.span.end = last_end_;
        e = std::move(sub);
      } else if (at_op(".")) {
        advance();
        if (!at(TokenKind::Name)) fail("expected attribute name");
        const Token& n = advance();
        Expr attr = node(ExprKind::Attribute, Span{begin, last_end_}, n.text);
        attr.kids.push_back(std::move(e));
        e = std::move(attr);
      } else {
        return e;
      }
    }
  }

  void parse_arglist(std::vector<Expr>& out) {
    while (!at_op(")")) {
      std::size_t begin = peek().begin;
      if (at_op("*")) {
        advance();
        Expr s = node(ExprKind::Starred, Span{begin, 0});
        s.kids.push_back(parse_test());
        s.span.end = last_end_;
        out.push_back(std::move(s));
      } else if (at_op("**")) {
        advance();
        Expr s = node(ExprKind::DoubleStarred, Span{begin, 0});
        s.kids.push_back(parse_test());
        s.span.end = last_end_;
        out.push_back(std::move(s));
      } else if (at(TokenKind::Name) && !is_keyword(peek().text) && at_op("=", 1)) {
        const Token& n = advance();
        advance();
        Expr k = node(ExprKind::Keyword, Span{n.begin, 0}, n.text);
        k.kids.push_back(parse_test());
        k.span.end = last_end_;
        out.push_back(std::move(k));
      } else {
        Expr arg = parse_namedexpr_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
          Expr g = node(ExprKind::GeneratorExp, Span{begin, 0});
          g.kids.push_back(std::move(arg));
          parse_comp_for(g.kids);
          g.span.end = last_end_;
          arg = std::move(g);
        }
        out.push_back(std::move(arg));
      }
      if (!at_op(",")) break;
      advance();
    }
  }

  Expr parse_subscript() {
    std::size_t begin = peek().begin;
    Expr lower = empty();
    if (!at_op(":")) {
      lower = parse_namedexpr_test();
      if (!at_op(":")) return lower;
    }
    Expr slice = node(ExprKind::Slice, Span{begin, 0});
    advance();  // ':'
    Expr upper = empty();
    Expr step = empty();
    if (!at_op(":") && !at_op("]") && !at_op(",")) upper = parse_test();
    if (at_op(":")) {
      advance();
      if (!at_op("]") && !at_op(",")) step = parse_test();
    }
    slice.kids.push_back(std::move(lower));
    slice.kids.push_back(std::move(upper));
    slice.kids.push_back(std::move(step));
    slice.span.end = last_end_;
    return slice;
  }

  Expr parse_subscriptlist() {
    std::size_t begin = peek().begin;
    Expr first = at_op("*") ? parse_star_expr() : parse_subscript();
    if (!at_op(",")) return first;
    Expr t = node(ExprKind::Tuple, Span{begin, 0}, ",");
    t.kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_op("]")) break;
      t.kids.push_back(at_op("*") ? parse_star_expr() : parse_subscript());
    }
    t.span.end = last_end_;
    return t;
  }

  void parse_comp_for(std::vector<Expr>& out) {
    while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
      std::size_t begin = peek().begin;
      Expr c = node(ExprKind::Comprehension, Span{begin, 0}, "for");
      if (at_kw("async")) {
        advance();
        c.value = "async for";
      }
      advance();
      Expr target = parse_exprlist();
      to_store(target, NameCtx::Store);
      c.kids.push_back(std::move(target));
      expect_kw("in");
      c.kids.push_back(parse_or_test());
      while (at_kw("if")) {
        advance();
        c.kids.push_back(parse_test_nocond());
      }
      c.span.end = last_end_;
      out.push_back(std::move(c));
    }
  }

  bool at_comp_for() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

  Expr parse_elem() { return at_op("*") ? parse_star_expr() : parse_namedexpr_test(); }

  Expr parse_atom() {
    const Token& t = peek();
    std::size_t begin = t.begin;
    if (t.kind == TokenKind::Op) {
      if (t.text == "(") {
        advance();
        if (at_op(")")) {
          advance();
          return node(ExprKind::Tuple, Span{begin, last_end_}, "()");
        }
        if (at_kw("yield")) {
          Expr y = parse_yield();
          expect_op(")");
          return y;
        }
        Expr first = parse_elem();
        if (at_comp_for()) {
          Expr g = node(ExprKind::GeneratorExp, Span{begin, 0});
          g.kids.push_back(std::move(first));
          parse_comp_for(g.kids);
          expect_op(")");
          g.span.end = last_end_;
          return g;
        }
        if (at_op(",")) {
          Expr tup = node(ExprKind::Tuple, Span{begin, 0}, "()");
          tup.kids.push_back(std::move(first));
          while (at_op(",")) {
            advance();
            if (at_op(")")) break;
            tup.kids.push_back(parse_elem());
          }
          expect_op(")");
          tup.span.end = last_end_;
          return tup;
        }
        expect_op(")");
        return first;
      }
      if (t.text == "[") {
        advance();
        Expr list = node(ExprKind::List, Span{begin, 0});
        if (!at_op("]")) {
          Expr first = parse_elem();
          if (at_comp_for()) {
            list.kind = ExprKind::ListComp;
            list.kids.push_back(std::move(first));
            parse_comp_for(list.kids);
          } else {
            list.kids.push_back(std::move(first));
            while (at_op(",")) {
              advance();
              if (at_op("]")) break;
              list.kids.push_back(parse_elem());
            }
          }
        }
        expect_op("]");
        list.span.end = last_end_;
        return list;
      }
      if (t.text == "{") {
        advance();
        return parse_brace(begin);
      }
      if (t.text == "...") {
        advance();
        Expr c = node(ExprKind::Constant, Span{begin, last_end_}, "...");
        c.constant = ConstantFlavor::Keyword;
        return c;
      }
      fail("invalid syntax");
    }
    if (t.kind == TokenKind::Name) {
      if (t.text == "None" || t.text == "True" || t.text == "False") {
        advance();
        Expr c = node(ExprKind::Constant, Span{begin, last_end_}, t.text);
        c.constant = ConstantFlavor::Keyword;
        return c;
      }
      if (is_keyword(t.text)) fail("invalid syntax");
      advance();
      return node(ExprKind::Name, Span{begin, last_end_}, t.text);
    }
    if (t.kind == TokenKind::Number) {
      advance();
      std::string v;
      for (char c : t.text) {
        if (c != '_') v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
      return node(ExprKind::Constant, Span{begin, last_end_}, v);
    }
    if (t.kind == TokenKind::String) return parse_strings();
    fail("invalid syntax");
  }

  Expr parse_brace(std::size_t begin) {
    if (at_op("}")) {
      advance();
      return node(ExprKind::Dict, Span{begin, last_end_});
    }
    if (at_op("**")) return parse_dict_rest(begin, std::nullopt);
    Expr first = parse_elem();
    if (at_op(":")) {
      advance();
      Expr value = parse_test();
      if (at_comp_for()) {
        Expr dc = node(ExprKind::DictComp, Span{begin, 0});
        dc.kids.push_back(std::move(first));
        dc.kids.push_back(std::move(value));
        parse_comp_for(dc.kids);
        expect_op("}");
        dc.span.end = last_end_;
        return dc;
      }
      return parse_dict_rest(begin, std::make_pair(std::move(first), std::move(value)));
    }
    Expr set = node(ExprKind::Set, Span{begin, 0});
    set.kids.push_back(std::move(first));
    if (at_comp_for()) {
      set.kind = ExprKind::SetComp;
      parse_comp_for(set.kids);
    } else {
      while (at_op(",")) {
        advance();
        if (at_op("}")) break;
        set.kids.push_back(parse_elem());
      }
    }
    expect_op("}");
    set.span.end = last_end_;
    return set;
  }

  Expr parse_dict_rest(std::size_t begin, std::optional<std::pair<Expr, Expr>> first) {
    Expr d = node(ExprKind::Dict, Span{begin, 0});
    bool need_comma = false;
    if (first) {
      d.kids.push_back(std::move(first->first));
      d.kids.push_back(std::move(first->second));
      need_comma = true;
    }
    while (true) {
      if (need_comma) {
        if (!at_op(",")) break;
        advance();
      }
      if (at_op("}")) break;
      if (at_op("**")) {
        std::size_t b = advance().begin;
        Expr ds = node(ExprKind::DoubleStarred, Span{b, 0});
        ds.kids.push_back(parse_expr());
        ds.span.end = last_end_;
        d.kids.push_back(std::move(ds));
      } else {
        d.kids.push_back(parse_test());
        expect_op(":");
        d.kids.push_back(parse_test());
      }
      need_comma = true;
    }
    expect_op("}");
    d.span.end = last_end_;
    return d;
  }

  // ---- strings -------------------------------------------------------------

  static std::size_t prefix_length(const std::string& raw) {
    std::size_t k = 0;
    while (k < raw.size() && raw[k] != '"' && raw[k] != '\'') ++k;
    return k;
  }

  Expr parse_strings() {
    std::size_t begin = peek().begin;
    std::vector<const Token*> parts;
    while (at(TokenKind::String)) parts.push_back(&advance());
    bool any_f = false;
    for (const Token* p : parts) {
      std::size_t pl = prefix_length(p->text);
      for (std::size_t k = 0; k < pl; ++k) {
        if (p->text[k] == 'f' || p->text[k] == 'F') any_f = true;
      }
    }
    Expr s = node(any_f ? ExprKind::FString : ExprKind::Constant, Span{begin, last_end_});
    s.constant = ConstantFlavor::String;
    std::string value;
    for (const Token* p : parts) {
      std::size_t pl = prefix_length(p->text);
      std::string prefix;
      bool is_f = false;
      for (std::size_t k = 0; k < pl; ++k) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(p->text[k])));
        if (c == 'f') is_f = true;
        if (c == 'b' || c == 'r') prefix.push_back(c);
      }
      std::size_t ql = (p->text.size() >= pl + 6 && p->text[pl] == p->text[pl + 1] && p->text[pl] == p->text[pl + 2]) ? 3 : 1;
      std::size_t body_begin = pl + ql;
      std::size_t body_end = p->text.size() - ql;
      std::sort(prefix.begin(), prefix.end());
      value += prefix;
      value += '|';
      if (is_f) {
        parse_fstring_body(*p, body_begin, body_end, value, s.kids);
      } else {
        value.append(p->text, body_begin, body_end - body_begin);
      }
      value += '\x1f';
    }
    s.value = std::move(value);
    return s;
  }

  void parse_fstring_body(const Token& tok, std::size_t b, std::size_t e, std::string& skeleton,
                          std::vector<Expr>& exprs) {
    std::string_view body(tok.text);
    std::size_t k = b;
    while (k < e) {
      char c = body[k];
      if (c == '{') {
        if (k + 1 < e && body[k + 1] == '{') {
          skeleton += "{{";
          k += 2;
          continue;
        }
        k = parse_fstring_field(tok, k, e, skeleton, exprs);
      } else if (c == '}') {
        if (k + 1 < e && body[k + 1] == '}') {
          skeleton += "}}";
          k += 2;
          continue;
        }
        throw SyntaxError(tok.begin + k, tok.line, "f-string: single '}' is not allowed");
      } else {
        skeleton.push_back(c);
        ++k;
      }
    }
  }

  std::size_t parse_fstring_field(const Token& tok, std::size_t open, std::size_t e, std::string& skeleton,
                                  std::vector<Expr>& exprs) {
    std::string_view body(tok.text);
    std::size_t j = open + 1;
    int depth = 0;
    char in_str = 0;
    while (j < e) {
      char c = body[j];
      if (in_str != 0) {
        if (c == in_str) in_str = 0;
        ++j;
        continue;
      }
      if (c == '\'' || c == '"') {
        in_str = c;
      } else if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if (c == ')' || c == ']' || c == '}') {
        if (depth == 0) break;
        --depth;
      } else if (depth == 0 && c == '!' && !(j + 1 < e && body[j + 1] == '=')) {
        break;
      } else if (depth == 0 && c == ':') {
        break;
      }
      ++j;
    }
    if (j >= e) throw SyntaxError(tok.begin + open, tok.line, "f-string: expecting '}'");
    std::size_t expr_end = j;
    std::size_t trim = expr_end;
    while (trim > open + 1 && std::isspace(static_cast<unsigned char>(body[trim - 1])) != 0) --trim;
    bool self_doc = false;
    if (trim > open + 1 && body[trim - 1] == '=' &&
        !(trim > open + 2 && one_of(body.substr(trim - 2, 1), {"=", "!", "<", ">"}))) {
      self_doc = true;
      expr_end = trim - 1;
    }
    std::string_view text = body.substr(open + 1, expr_end - open - 1);
    if (text.find_first_not_of(" \t\n") == std::string_view::npos) {
      throw SyntaxError(tok.begin + open, tok.line, "f-string: empty expression not allowed");
    }
    Parser sub(src_, tokenize_expression(text, tok.begin + open + 1, tok.line));
    exprs.push_back(sub.lone_expression());
    skeleton += self_doc ? "{=" : "{";
    if (j < e && body[j] == '!') {
      if (j + 1 >= e) throw SyntaxError(tok.begin + j, tok.line, "f-string: invalid conversion character");
      skeleton += '!';
      skeleton += body[j + 1];
      j += 2;
    }
    if (j < e && body[j] == ':') {
      skeleton += ':';
      ++j;
      while (j < e && body[j] != '}') {
        if (body[j] == '{') {
          j = parse_fstring_field(tok, j, e, skeleton, exprs);
        } else {
          skeleton += body[j];
          ++j;
        }
      }
    }
    if (j >= e || body[j] != '}') throw SyntaxError(tok.begin + open, tok.line, "f-string: expecting '}'");
    skeleton += '}';
    return j + 1;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::size_t last_end_ = 0;
};

}  // namespace

std::vector<Stmt> parse_module(std::string_view source) {
  Parser p(source, tokenize(source));
  return p.module();
}

Expr parse_expression(std::string_view source) {
  Parser p(source, tokenize_expression(source, 0, 1));
  return p.lone_expression();
}

bool is_compound(StmtKind kind) noexcept {
  switch (kind) {
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::For:
    case StmtKind::FunctionDef:
    case StmtKind::ClassDef:
    case StmtKind::Try:
    case StmtKind::ExceptHandler:
    case StmtKind::With:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(StmtKind kind) noexcept {
  switch (kind) {
    case StmtKind::Expr: return "Expr";
    case StmtKind::Assign: return "Assign";
    case StmtKind::AugAssign: return "AugAssign";
    case StmtKind::AnnAssign: return "AnnAssign";
    case StmtKind::Return: return "Return";
    case StmtKind::Pass: return "Pass";
    case StmtKind::Break: return "Break";
    case StmtKind::Continue: return "Continue";
    case StmtKind::Raise: return "Raise";
    case StmtKind::Assert: return "Assert";
    case StmtKind::Del: return "Del";
    case StmtKind::Global: return "Global";
    case StmtKind::Nonlocal: return "Nonlocal";
    case StmtKind::Import: return "Import";
    case StmtKind::ImportFrom: return "ImportFrom";
    case StmtKind::If: return "If";
    case StmtKind::While: return "While";
    case StmtKind::For: return "For";
    case StmtKind::FunctionDef: return "FunctionDef";
    case StmtKind::ClassDef: return "ClassDef";
    case StmtKind::Try: return "Try";
    case StmtKind::ExceptHandler: return "ExceptHandler";
    case StmtKind::With: return "With";
  }
  return "?";
}

std::string_view to_string(ExprKind kind) noexcept {
  switch (kind) {
    case ExprKind::Name: return "Name";
    case ExprKind::Constant: return "Constant";
    case ExprKind::FString: return "FString";
    case ExprKind::BinOp: return "BinOp";
    case ExprKind::UnaryOp: return "UnaryOp";
    case ExprKind::BoolOp: return "BoolOp";
    case ExprKind::Compare: return "Compare";
    case ExprKind::Call: return "Call";
    case ExprKind::Keyword: return "Keyword";
    case ExprKind::Attribute: return "Attribute";
    case ExprKind::Subscript: return "Subscript";
    case ExprKind::Slice: return "Slice";
    case ExprKind::Starred: return "Starred";
    case ExprKind::DoubleStarred: return "DoubleStarred";
    case ExprKind::Tuple: return "Tuple";
    case ExprKind::List: return "List";
    case ExprKind::Set: return "Set";
    case ExprKind::Dict: return "Dict";
    case ExprKind::ListComp: return "ListComp";
    case ExprKind::SetComp: return "SetComp";
    case ExprKind::DictComp: return "DictComp";
    case ExprKind::GeneratorExp: return "GeneratorExp";
    case ExprKind::Comprehension: return "Comprehension";
    case ExprKind::Lambda: return "Lambda";
    case ExprKind::Param: return "Param";
    case ExprKind::IfExp: return "IfExp";
    case ExprKind::NamedExpr: return "NamedExpr";
    case ExprKind::Yield: return "Yield";
    case ExprKind::YieldFrom: return "YieldFrom";
    case ExprKind::Await: return "Await";
    case ExprKind::Alias: return "Alias";
    case ExprKind::Empty: return "Empty";
  }
  return "?";
}

}  // namespace procure::code
