#include "procure/code/program.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

#include "procure/code/parser.hpp"
#include "procure/errors.hpp"

namespace procure::code {

struct SubjectProgram::Impl {
  std::string source;
  std::string entry_point;
  std::string origin;
  std::vector<Token> tokens;
  std::vector<Stmt> module;
  std::vector<Symbol> symbols;
  std::vector<const Stmt*> statements;
  std::size_t entry = 0;
  std::optional<std::string> unsupported;
};

namespace {

bool is_comprehension(ExprKind k) {
  return k == ExprKind::ListComp || k == ExprKind::SetComp || k == ExprKind::DictComp ||
         k == ExprKind::GeneratorExp;
}

struct Binding {
  std::size_t pos;
  std::string name;
};

// Names bound directly in the scope whose code `e` belongs to.
void collect_expr(const Expr& e, std::vector<Binding>& out, bool in_comp) {
  switch (e.kind) {
    case ExprKind::Name:
      if (e.ctx != NameCtx::Load && !in_comp) out.push_back({e.span.begin, e.value});
      return;
    case ExprKind::NamedExpr:
      out.push_back({e.kids[0].span.begin, e.kids[0].value});
      collect_expr(e.kids[1], out, in_comp);
      return;
    case ExprKind::Lambda:
      for (std::size_t k = 0; k + 1 < e.kids.size(); ++k) collect_expr(e.kids[k].kids[1], out, in_comp);
      return;
    default:
      break;
  }
  bool comp = in_comp || is_comprehension(e.kind);
  for (const Expr& k : e.kids) collect_expr(k, out, comp);
}

void collect_stmts(const std::vector<Stmt>& body, std::vector<Binding>& out, std::set<std::string>& declared) {
  for (const Stmt& s : body) {
    if (s.kind == StmtKind::Global || s.kind == StmtKind::Nonlocal) {
      for (const Expr& n : s.exprs) declared.insert(n.value);
      continue;
    }
    if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) {
      out.push_back({s.span.begin, s.name});
      continue;
    }
    for (const Expr& e : s.exprs) collect_expr(e, out, false);
    collect_stmts(s.body, out, declared);
    collect_stmts(s.orelse, out, declared);
    collect_stmts(s.handlers, out, declared);
    collect_stmts(s.finalbody, out, declared);
  }
}

bool has_nested_scope_stmt(const std::vector<Stmt>& body) {
  for (const Stmt& s : body) {
    if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) return true;
    if (has_nested_scope_stmt(s.body) || has_nested_scope_stmt(s.orelse) || has_nested_scope_stmt(s.handlers) ||
        has_nested_scope_stmt(s.finalbody)) {
      return true;
    }
  }
  return false;
}

struct Frame {
  std::map<std::string, int> names;
  const Frame* parent = nullptr;
  bool lazy = false;
};

class Resolver {
 public:
  Resolver(std::vector<Symbol>& symbols, std::string function) : symbols_(symbols), function_(std::move(function)) {}

  void function(Stmt& def) {
    std::vector<Binding> bindings;
    std::set<std::string> declared;
    for (Expr& p : def.exprs) {
      if (p.kind != ExprKind::Param) continue;
      if (p.param == ParamFlavor::KwOnlyMarker || p.param == ParamFlavor::PosOnlyMarker) continue;
      bindings.push_back({p.span.begin, p.value});
    }
    collect_stmts(def.body, bindings, declared);
    Frame frame;
    std::set<std::string> params;
    for (const Expr& p : def.exprs) {
      if (p.kind == ExprKind::Param) params.insert(p.value);
    }
    for (const Binding& b : bindings) {
      if (declared.count(b.name) != 0 || frame.names.count(b.name) != 0) continue;
      frame.names[b.name] = add_symbol(b.name, true, params.count(b.name) != 0);
    }
    for (Expr& p : def.exprs) {
      if (p.kind == ExprKind::Param) {
        auto it = frame.names.find(p.value);
        if (it != frame.names.end() && !p.value.empty()) p.symbol = it->second;
        for (Expr& k : p.kids) resolve(k, nullptr);
      } else {
        resolve(p, nullptr);
      }
    }
    resolve_stmts(def.body, &frame);
  }

 private:
  int add_symbol(const std::string& name, bool function_level, bool is_param) {
    symbols_.push_back(Symbol{name, function_, function_level, is_param, false});
    return static_cast<int>(symbols_.size()) - 1;
  }

  int lookup(const std::string& name, const Frame* frame) {
    bool crossed_lazy = false;
    for (const Frame* f = frame; f != nullptr; f = f->parent) {
      auto it = f->names.find(name);
      if (it != f->names.end()) {
        if (crossed_lazy) symbols_[static_cast<std::size_t>(it->second)].captured_lazily = true;
        return it->second;
      }
      if (f->lazy) crossed_lazy = true;
    }
    return -1;
  }

  void resolve_stmts(std::vector<Stmt>& body, const Frame* frame) {
    for (Stmt& s : body) {
      for (Expr& e : s.decorators) resolve(e, frame);
      for (Expr& e : s.exprs) resolve(e, frame);
      resolve_stmts(s.body, frame);
      resolve_stmts(s.orelse, frame);
      resolve_stmts(s.handlers, frame);
      resolve_stmts(s.finalbody, frame);
    }
  }

  void resolve(Expr& e, const Frame* frame) {
    switch (e.kind) {
      case ExprKind::Name:
        e.symbol = lookup(e.value, frame);
        return;
      case ExprKind::Lambda: {
        Frame inner;
        inner.parent = frame;
        inner.lazy = true;
        std::vector<Binding> bindings;
        for (std::size_t k = 0; k + 1 < e.kids.size(); ++k) {
          const Expr& p = e.kids[k];
          if (!p.value.empty()) bindings.push_back({p.span.begin, p.value});
        }
        collect_expr(e.kids.back(), bindings, false);
        for (const Binding& b : bindings) {
          if (inner.names.count(b.name) == 0) inner.names[b.name] = add_symbol(b.name, false, false);
        }
        for (std::size_t k = 0; k + 1 < e.kids.size(); ++k) {
          Expr& p = e.kids[k];
          if (!p.value.empty()) p.symbol = inner.names[p.value];
          for (Expr& d : p.kids) resolve(d, frame);
        }
        resolve(e.kids.back(), &inner);
        return;
      }
      case ExprKind::ListComp:
      case ExprKind::SetComp:
      case ExprKind::DictComp:
      case ExprKind::GeneratorExp: {
        Frame inner;
        inner.parent = frame;
        inner.lazy = e.kind == ExprKind::GeneratorExp;
        std::vector<Binding> bindings;
        for (const Expr& k : e.kids) {
          if (k.kind != ExprKind::Comprehension) continue;
          std::vector<Binding> targets;
          walk(k.kids[0], [&](const Expr& n) {
            if (n.kind == ExprKind::Name) targets.push_back({n.span.begin, n.value});
          });
          bindings.insert(bindings.end(), targets.begin(), targets.end());
        }
        for (const Binding& b : bindings) {
          if (inner.names.count(b.name) == 0) inner.names[b.name] = add_symbol(b.name, false, false);
        }
        bool first = true;
        for (Expr& k : e.kids) {
          if (k.kind != ExprKind::Comprehension) {
            resolve(k, &inner);
            continue;
          }
          resolve(k.kids[0], &inner);
          resolve(k.kids[1], first ? frame : &inner);
          first = false;
          for (std::size_t c = 2; c < k.kids.size(); ++c) resolve(k.kids[c], &inner);
        }
        return;
      }
      default:
        for (Expr& k : e.kids) resolve(k, frame);
        return;
    }
  }

  std::vector<Symbol>& symbols_;
  std::string function_;
};

void index_statements(std::vector<Stmt>& body, std::vector<const Stmt*>& out) {
  for (Stmt& s : body) {
    out.push_back(&s);
    s.index = static_cast<int>(out.size());
    index_statements(s.body, out);
    index_statements(s.orelse, out);
    index_statements(s.handlers, out);
    index_statements(s.finalbody, out);
  }
}

std::optional<std::string> find_unsupported(const std::vector<Stmt>& body) {
  for (const Stmt& s : body) {
    if (s.is_async) return "async";
    switch (s.kind) {
      case StmtKind::Try:
      case StmtKind::ExceptHandler:
        return "try";
      case StmtKind::With:
        return "with";
      case StmtKind::ClassDef:
        return "class";
      case StmtKind::FunctionDef:
        return "nested function";
      default:
        break;
    }
    for (const Expr& e : s.exprs) {
      bool found = false;
      walk(e, [&](const Expr& x) { found = found || x.kind == ExprKind::Await; });
      if (found) return "async";
    }
    if (auto u = find_unsupported(s.body)) return u;
    if (auto u = find_unsupported(s.orelse)) return u;
  }
  return std::nullopt;
}

}  // namespace

SubjectProgram SubjectProgram::parse(std::string source, std::string entry_point, std::string origin) {
  auto impl = std::make_shared<Impl>();
  impl->tokens = tokenize(source);
  impl->module = parse_module(source);
  impl->source = std::move(source);
  impl->entry_point = std::move(entry_point);
  impl->origin = std::move(origin);

  std::optional<std::size_t> entry;
  for (std::size_t k = 0; k < impl->module.size(); ++k) {
    const Stmt& s = impl->module[k];
    if (s.kind == StmtKind::FunctionDef && s.name == impl->entry_point) entry = k;
  }
  if (!entry) throw MissingEntryPoint(impl->entry_point);
  impl->entry = *entry;

  for (Stmt& s : impl->module) {
    if (s.kind != StmtKind::FunctionDef || has_nested_scope_stmt(s.body)) continue;
    Resolver(impl->symbols, s.name).function(s);
  }
  Stmt& fn = impl->module[impl->entry];
  index_statements(fn.body, impl->statements);
  impl->unsupported = fn.is_async ? std::optional<std::string>("async") : find_unsupported(fn.body);
  return SubjectProgram(std::move(impl));
}

const std::string& SubjectProgram::source() const noexcept { return impl_->source; }
const std::string& SubjectProgram::entry_point() const noexcept { return impl_->entry_point; }
const std::string& SubjectProgram::origin() const noexcept { return impl_->origin; }
const std::vector<Stmt>& SubjectProgram::module() const noexcept { return impl_->module; }
const std::vector<Token>& SubjectProgram::tokens() const noexcept { return impl_->tokens; }
const std::vector<Symbol>& SubjectProgram::symbols() const noexcept { return impl_->symbols; }
const Stmt& SubjectProgram::entry_function() const noexcept { return impl_->module[impl_->entry]; }
const std::vector<const Stmt*>& SubjectProgram::statements() const noexcept { return impl_->statements; }

const Stmt& SubjectProgram::statement(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > impl_->statements.size()) {
    throw std::out_of_range("statement index " + std::to_string(index) + " out of range");
  }
  return *impl_->statements[static_cast<std::size_t>(index - 1)];
}

const std::optional<std::string>& SubjectProgram::unsupported() const noexcept { return impl_->unsupported; }

void SubjectProgram::require_supported() const {
  if (impl_->unsupported) throw UnsupportedConstruct(*impl_->unsupported);
}

std::string_view SubjectProgram::text(Span span) const {
  return std::string_view(impl_->source).substr(span.begin, span.size());
}

std::size_t SubjectProgram::line_start(std::size_t pos) const noexcept {
  const std::string& s = impl_->source;
  pos = std::min(pos, s.size());
  while (pos > 0 && s[pos - 1] != '\n') --pos;
  return pos;
}

std::size_t SubjectProgram::line_end(std::size_t pos) const noexcept {
  const std::string& s = impl_->source;
  std::size_t nl = s.find('\n', pos);
  return nl == std::string::npos ? s.size() : nl + 1;
}

std::optional<std::string> SubjectProgram::indent_of(const Stmt& stmt) const {
  std::size_t start = line_start(stmt.span.begin);
  std::string_view prefix = std::string_view(impl_->source).substr(start, stmt.span.begin - start);
  if (prefix.find_first_not_of(" \t") != std::string_view::npos) return std::nullopt;
  return std::string(prefix);
}

bool SubjectProgram::own_line(const Stmt& stmt) const {
  if (!indent_of(stmt)) return false;
  const std::string& s = impl_->source;
  std::size_t p = stmt.span.end;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t' || s[p] == '\r')) ++p;
  return p >= s.size() || s[p] == '\n' || s[p] == '#';
}

// ---- def/use ---------------------------------------------------------------

const std::set<std::string>& pure_call_whitelist() {
  static const std::set<std::string> names{"len", "min", "max", "abs", "int", "float", "str", "ord", "chr"};
  return names;
}

namespace {

class DefUseVisitor {
 public:
  DefUseVisitor(const std::vector<Symbol>& symbols, StatementInfo& info) : symbols_(symbols), info_(info) {}

  void visit(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Name: {
        if (e.symbol >= 0 && !symbols_[static_cast<std::size_t>(e.symbol)].function_level) return;
        if (e.ctx == NameCtx::Load) {
          info_.uses.insert(e.value);
        } else {
          info_.defs.insert(e.value);
        }
        return;
      }
      case ExprKind::NamedExpr:
        info_.defs.insert(e.kids[0].value);
        visit(e.kids[1]);
        return;
      case ExprKind::Call: {
        const Expr& callee = e.kids.front();
        bool whitelisted = callee.kind == ExprKind::Name && callee.symbol < 0 &&
                           pure_call_whitelist().count(callee.value) != 0;
        if (!whitelisted) info_.is_pure = false;
        break;
      }
      case ExprKind::Attribute:
      case ExprKind::Subscript:
        if (e.ctx != NameCtx::Load) info_.is_pure = false;
        break;
      case ExprKind::Yield:
      case ExprKind::YieldFrom:
      case ExprKind::Await:
        info_.is_pure = false;
        break;
      default:
        break;
    }
    for (const Expr& k : e.kids) visit(k);
  }

 private:
  const std::vector<Symbol>& symbols_;
  StatementInfo& info_;
};

}  // namespace

StatementInfo def_use(const SubjectProgram& program, int index) {
  const Stmt& s = program.statement(index);
  StatementInfo info;
  info.index = index;
  info.span = is_compound(s.kind) ? s.header : s.span;
  DefUseVisitor visitor(program.symbols(), info);
  switch (s.kind) {
    case StmtKind::Global:
    case StmtKind::Nonlocal:
    case StmtKind::Import:
    case StmtKind::ImportFrom:
      info.is_pure = false;
      break;
    default:
      break;
  }
  switch (s.kind) {
    case StmtKind::Global:
    case StmtKind::Nonlocal:
    case StmtKind::FunctionDef:
    case StmtKind::ClassDef:
      break;
    case StmtKind::AugAssign: {
      const Expr& target = s.exprs[0];
      if (target.kind == ExprKind::Name) {
        bool inner = target.symbol >= 0 && !program.symbols()[static_cast<std::size_t>(target.symbol)].function_level;
        if (!inner) {
          info.defs.insert(target.value);
          info.uses.insert(target.value);
        }
      } else {
        visitor.visit(target);
      }
      visitor.visit(s.exprs[1]);
      break;
    }
    default:
      for (const Expr& e : s.exprs) visitor.visit(e);
      break;
  }
  return info;
}

std::vector<StatementInfo> def_use_sets(const SubjectProgram& program) {
  std::vector<StatementInfo> out;
  int n = static_cast<int>(program.statements().size());
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) out.push_back(def_use(program, k));
  return out;
}

}  // namespace procure::code
