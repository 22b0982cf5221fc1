#include "procure/perturb/perturb.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

#include "procure/errors.hpp"
#include "procure/rng.hpp"

namespace procure::perturb {

using code::Expr;
using code::ExprKind;
using code::NameCtx;
using code::Stmt;
using code::StmtKind;
using code::SubjectProgram;

namespace {

// ---- text editing ------------------------------------------------------------

struct TextEdit {
  std::size_t begin;
  std::size_t end;
  std::string text;
};

std::string apply_edits(std::string_view src, std::vector<TextEdit> edits) {
  std::sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
  });
  std::string out;
  std::size_t pos = 0;
  for (const TextEdit& e : edits) {
    if (e.begin < pos) throw std::logic_error("overlapping text edits");
    out.append(src.substr(pos, e.begin - pos));
    out += e.text;
    pos = e.end;
  }
  out.append(src.substr(pos));
  return out;
}

// Source with a guaranteed final newline so that line regions always end
// with one; the newline is removed again afterwards.
struct Workspace {
  std::string text;
  bool added = false;

  explicit Workspace(const std::string& src) : text(src) {
    if (text.empty() || text.back() != '\n') {
      text.push_back('\n');
      added = true;
    }
  }

  std::size_t line_start(std::size_t pos) const {
    while (pos > 0 && text[pos - 1] != '\n') --pos;
    return pos;
  }

  // End (past the newline) of the line holding the last character of `span`.
  std::size_t line_end(code::Span span) const {
    std::size_t last = span.end > span.begin ? span.end - 1 : span.begin;
    std::size_t nl = text.find('\n', last);
    return nl == std::string::npos ? text.size() : nl + 1;
  }

  std::string finish(std::vector<TextEdit> edits) const {
    std::string out = apply_edits(text, std::move(edits));
    if (added && !out.empty() && out.back() == '\n') out.pop_back();
    return out;
  }
};

int line_number(const std::string& src, std::size_t pos) {
  return 1 + static_cast<int>(std::count(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// ---- tree helpers ------------------------------------------------------------

template <typename F>
void for_each_stmt(const std::vector<Stmt>& suite, F&& fn) {
  for (const Stmt& s : suite) {
    fn(s);
    for_each_stmt(s.body, fn);
    for_each_stmt(s.orelse, fn);
    for_each_stmt(s.handlers, fn);
    for_each_stmt(s.finalbody, fn);
  }
}

template <typename F>
void for_each_suite(const std::vector<Stmt>& suite, F&& fn) {
  fn(suite);
  for (const Stmt& s : suite) {
    for (const auto* child : {&s.body, &s.orelse, &s.handlers, &s.finalbody}) {
      if (!child->empty()) for_each_suite(*child, fn);
    }
  }
}

template <typename F>
void for_each_expr(const std::vector<Stmt>& suite, F&& fn) {
  for_each_stmt(suite, [&](const Stmt& s) {
    for (const Expr& e : s.decorators) code::walk(e, fn);
    for (const Expr& e : s.exprs) code::walk(e, fn);
  });
}

void collect_indices(const std::vector<Stmt>& suite, std::set<int>& out) {
  for_each_stmt(suite, [&](const Stmt& s) {
    if (s.index > 0) out.insert(s.index);
  });
}

bool reads_symbol(const Expr& e, int symbol) {
  bool found = false;
  code::walk(e, [&](const Expr& n) {
    if (n.kind == ExprKind::Name && n.ctx == NameCtx::Load && n.symbol == symbol) found = true;
  });
  return found;
}

bool writes_symbol(const Expr& e, int symbol) {
  bool found = false;
  code::walk(e, [&](const Expr& n) {
    if (n.kind == ExprKind::Name && n.ctx != NameCtx::Load && n.symbol == symbol) found = true;
    if (n.kind == ExprKind::NamedExpr && n.kids[0].symbol == symbol) found = true;
  });
  return found;
}

bool walrus_on(const Expr& e, int symbol) {
  bool found = false;
  code::walk(e, [&](const Expr& n) {
    if (n.kind == ExprKind::NamedExpr && n.kids[0].symbol == symbol) found = true;
  });
  return found;
}

// ---- reaching definitions for one symbol -----------------------------------

// Statement-level reaching definitions of a single function-level symbol.
// Definition ids are statement indices; 0 stands for "unassigned at entry".
class ReachingDefs {
 public:
  using DefSet = std::set<int>;

  ReachingDefs(const Stmt& fn, int symbol) : symbol_(symbol) {
    suite(fn.body, DefSet{0});
  }

  // Reaching definitions at every statement that reads the symbol.
  const std::map<int, DefSet>& uses() const { return uses_; }

 private:
  using Flow = std::optional<DefSet>;

  struct LoopFlow {
    Flow breaks;
    Flow continues;
  };

  static Flow join(Flow a, const Flow& b) {
    if (!a) return b;
    if (b) a->insert(b->begin(), b->end());
    return a;
  }

  void record(const Stmt& s, const DefSet& defs) { uses_[s.index] = defs; }

  Flow suite(const std::vector<Stmt>& body, Flow in) {
    for (const Stmt& s : body) in = stmt(s, std::move(in));
    return in;
  }

  bool header_reads(const Stmt& s, std::size_t from = 0) const {
    for (std::size_t k = from; k < s.exprs.size(); ++k) {
      if (reads_symbol(s.exprs[k], symbol_)) return true;
    }
    return false;
  }

  Flow stmt(const Stmt& s, Flow in) {
    if (!in) return in;
    switch (s.kind) {
      case StmtKind::If: {
        if (header_reads(s)) record(s, *in);
        if (writes_symbol(s.exprs[0], symbol_)) in = DefSet{s.index};
        Flow a = suite(s.body, in);
        Flow b = s.orelse.empty() ? in : suite(s.orelse, in);
        return join(a, b);
      }
      case StmtKind::While: {
        Flow head = in;
        Flow after_test;
        LoopFlow loop;
        for (int guard = 0; guard < 1000; ++guard) {
          if (header_reads(s)) record(s, *head);
          after_test = writes_symbol(s.exprs[0], symbol_) ? Flow(DefSet{s.index}) : head;
          loops_.push_back(LoopFlow{});
          Flow body_out = suite(s.body, after_test);
          loop = loops_.back();
          loops_.pop_back();
          Flow next = join(join(in, body_out), loop.continues);
          if (next == head) break;
          head = next;
        }
        Flow out = s.orelse.empty() ? after_test : suite(s.orelse, after_test);
        return join(out, loop.breaks);
      }
      case StmtKind::For: {
        if (header_reads(s, 1)) record(s, *in);
        Flow head = in;
        LoopFlow loop;
        for (int guard = 0; guard < 1000; ++guard) {
          Flow body_in = writes_symbol(s.exprs[0], symbol_) ? Flow(DefSet{s.index}) : head;
          loops_.push_back(LoopFlow{});
          Flow body_out = suite(s.body, body_in);
          loop = loops_.back();
          loops_.pop_back();
          Flow next = join(join(in, body_out), loop.continues);
          if (next == head) break;
          head = next;
        }
        Flow out = s.orelse.empty() ? head : suite(s.orelse, head);
        return join(out, loop.breaks);
      }
      case StmtKind::Break:
        loops_.back().breaks = join(loops_.back().breaks, in);
        return std::nullopt;
      case StmtKind::Continue:
        loops_.back().continues = join(loops_.back().continues, in);
        return std::nullopt;
      default:
        break;
    }
    bool reads = false;
    bool writes = false;
    for (const Expr& e : s.exprs) {
      reads = reads || reads_symbol(e, symbol_);
      writes = writes || writes_symbol(e, symbol_);
    }
    if (s.kind == StmtKind::AugAssign && s.exprs[0].kind == ExprKind::Name && s.exprs[0].symbol == symbol_) {
      reads = true;
    }
    if (reads) record(s, *in);
    if (s.kind == StmtKind::Return || s.kind == StmtKind::Raise) return std::nullopt;
    if (writes) return DefSet{s.index};
    return in;
  }

  int symbol_;
  std::map<int, DefSet> uses_;
  std::vector<LoopFlow> loops_;
};

// ---- identifier facts ------------------------------------------------------

struct NameFacts {
  std::vector<int> order;  // function-level symbols of the entry function, by first occurrence
  std::map<std::string, std::set<int>> bound_by;
  std::set<std::string> free_names;
  std::set<std::string> imported;
  std::set<std::string> keyword_names;
  std::set<std::string> self_documented;
  bool dynamic_scope = false;
};

NameFacts gather_names(const SubjectProgram& p) {
  NameFacts facts;
  const Stmt& fn = p.entry_function();
  std::vector<const Expr*> occurrences;
  auto visit = [&](const Expr& e) {
    if (e.kind == ExprKind::Name || e.kind == ExprKind::Param) {
      if (e.value.empty()) return;
      occurrences.push_back(&e);
      if (e.symbol >= 0) {
        facts.bound_by[e.value].insert(e.symbol);
      } else if (e.kind == ExprKind::Name) {
        facts.free_names.insert(e.value);
        if (e.value == "locals" || e.value == "vars" || e.value == "eval" || e.value == "exec") {
          facts.dynamic_scope = true;
        }
      }
    }
    if (e.kind == ExprKind::Alias && !e.kids.empty()) facts.imported.insert(e.kids[0].value);
    if (e.kind == ExprKind::FString && e.value.find("{=") != std::string::npos) {
      code::walk(e, [&](const Expr& n) {
        if (n.kind == ExprKind::Name) facts.self_documented.insert(n.value);
      });
    }
  };
  for (const Expr& e : fn.exprs) code::walk(e, visit);
  for_each_expr(fn.body, visit);
  for_each_stmt(fn.body, [&](const Stmt& s) {
    if (s.kind == StmtKind::Global || s.kind == StmtKind::Nonlocal) {
      for (const Expr& n : s.exprs) facts.free_names.insert(n.value);
    }
  });
  for_each_expr(p.module(), [&](const Expr& e) {
    if (e.kind == ExprKind::Keyword) facts.keyword_names.insert(e.value);
  });
  std::stable_sort(occurrences.begin(), occurrences.end(),
                   [](const Expr* a, const Expr* b) { return a->span.begin < b->span.begin; });
  std::set<int> seen;
  for (const Expr* e : occurrences) {
    if (e->symbol < 0 || !p.symbols()[static_cast<std::size_t>(e->symbol)].function_level) continue;
    if (seen.insert(e->symbol).second) facts.order.push_back(e->symbol);
  }
  return facts;
}

std::vector<int> renameable_symbols(const SubjectProgram& p, const SiteOptions& options) {
  NameFacts facts = gather_names(p);
  if (facts.dynamic_scope) return {};
  std::vector<int> out;
  for (int id : facts.order) {
    const std::string& name = p.symbols()[static_cast<std::size_t>(id)].name;
    if (facts.bound_by[name].size() != 1) continue;
    if (facts.free_names.count(name) != 0 || facts.imported.count(name) != 0) continue;
    if (code::is_builtin(name) || name == p.entry_point()) continue;
    if (facts.keyword_names.count(name) != 0 || options.protected_names.count(name) != 0) continue;
    if (facts.self_documented.count(name) != 0) continue;
    out.push_back(id);
  }
  return out;
}

std::set<std::string> taken_names(const SubjectProgram& p) {
  std::set<std::string> taken;
  for (const code::Token& t : p.tokens()) {
    if (t.kind == code::TokenKind::Name) taken.insert(t.text);
  }
  // Identifiers inside f-string fields are not separate tokens.
  for_each_expr(p.module(), [&](const Expr& e) {
    if (e.kind == ExprKind::Name || e.kind == ExprKind::Param) taken.insert(e.value);
  });
  return taken;
}

// ---- per-concept site discovery --------------------------------------------

bool flippable(const SubjectProgram& p, const Stmt& s) {
  if (s.kind != StmtKind::If || s.is_elif || s.inline_body) return false;
  if (s.orelse.empty() || s.orelse.front().is_elif) return false;
  auto a = p.indent_of(s.body.front());
  auto b = p.indent_of(s.orelse.front());
  return a && b && *a == *b;
}

std::vector<PerturbationSite> if_else_sites(const SubjectProgram& p) {
  std::vector<PerturbationSite> out;
  for (const Stmt* s : p.statements()) {
    if (!flippable(p, *s)) continue;
    PerturbationSite site;
    site.kind = Concept::IfElseFlip;
    site.anchor = StatementAnchor{s->index};
    std::string cond(p.text(s->exprs[0].span));
    site.elements = {cond};
    site.notes = "if-statement on line " + std::to_string(line_number(p.source(), s->span.begin)) +
                 " with condition `" + cond + "` has an else branch on line " +
                 std::to_string(line_number(p.source(), s->else_keyword.begin));
    out.push_back(std::move(site));
  }
  return out;
}

struct DefUseChain {
  int def_index;
  int symbol;
  std::string name;
  std::vector<int> uses;
};

std::optional<DefUseChain> def_use_chain(const SubjectProgram& p, const Stmt& d) {
  if (!p.own_line(d)) return std::nullopt;
  const Expr* target = nullptr;
  if (d.kind == StmtKind::Assign && d.exprs.size() == 2) target = &d.exprs[0];
  if (d.kind == StmtKind::AnnAssign && d.exprs.size() == 3) target = &d.exprs[0];
  if (d.kind == StmtKind::AugAssign) target = &d.exprs[0];
  if (target == nullptr || target->kind != ExprKind::Name || target->symbol < 0) return std::nullopt;
  const code::Symbol& sym = p.symbols()[static_cast<std::size_t>(target->symbol)];
  if (!sym.function_level || sym.captured_lazily) return std::nullopt;

  ReachingDefs rd(p.entry_function(), target->symbol);
  DefUseChain chain{d.index, target->symbol, target->value, {}};
  for (const auto& [index, defs] : rd.uses()) {
    if (defs.count(d.index) == 0) continue;
    if (defs.size() != 1) return std::nullopt;
    const Stmt& use = p.statement(index);
    if (use.kind == StmtKind::AugAssign && use.exprs[0].kind == ExprKind::Name &&
        use.exprs[0].symbol == target->symbol) {
      return std::nullopt;
    }
    for (const Expr& e : use.exprs) {
      if (walrus_on(e, target->symbol)) return std::nullopt;
    }
    chain.uses.push_back(index);
  }
  if (chain.uses.empty()) return std::nullopt;
  return chain;
}

std::string join_lines(const SubjectProgram& p, const std::vector<int>& indices) {
  std::string out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0) out += ", ";
    out += std::to_string(line_number(p.source(), p.statement(indices[k]).span.begin));
  }
  return out;
}

std::vector<PerturbationSite> def_use_sites(const SubjectProgram& p) {
  std::vector<PerturbationSite> out;
  for (const Stmt* s : p.statements()) {
    auto chain = def_use_chain(p, *s);
    if (!chain) continue;
    PerturbationSite site;
    site.kind = Concept::DefUseBreak;
    site.anchor = StatementAnchor{s->index};
    site.elements = {chain->name};
    site.notes = "variable `" + chain->name + "` defined on line " +
                 std::to_string(line_number(p.source(), s->span.begin)) + " is used on line(s) " +
                 join_lines(p, chain->uses) + " with no other reaching definition";
    out.push_back(std::move(site));
  }
  return out;
}

bool swappable_kind(const Stmt& s) {
  return s.kind == StmtKind::Assign || s.kind == StmtKind::AugAssign ||
         (s.kind == StmtKind::AnnAssign && s.exprs.size() == 3);
}

std::string set_text(const std::set<std::string>& names) {
  std::string out = "{";
  bool first = true;
  for (const auto& n : names) {
    if (!first) out += ", ";
    out += n;
    first = false;
  }
  return out + "}";
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.count(x) != 0) return false;
  }
  return true;
}

std::vector<PerturbationSite> swap_sites(const SubjectProgram& p) {
  std::vector<PerturbationSite> out;
  for_each_suite(p.entry_function().body, [&](const std::vector<Stmt>& suite) {
    for (std::size_t k = 0; k + 1 < suite.size(); ++k) {
      const Stmt& s1 = suite[k];
      const Stmt& s2 = suite[k + 1];
      if (!swappable_kind(s1) || !swappable_kind(s2)) continue;
      if (!p.own_line(s1) || !p.own_line(s2)) continue;
      if (p.text(s1.span) == p.text(s2.span)) continue;
      auto a = code::def_use(p, s1.index);
      auto b = code::def_use(p, s2.index);
      if (!a.is_pure || !b.is_pure) continue;
      if (!disjoint(a.defs, b.defs) || !disjoint(a.uses, b.defs) || !disjoint(a.defs, b.uses)) continue;
      PerturbationSite site;
      site.kind = Concept::IndependentSwap;
      site.anchor = StatementPairAnchor{s1.index, s2.index};
      for (const auto& n : a.defs) site.elements.push_back(n);
      for (const auto& n : b.defs) site.elements.push_back(n);
      if (site.elements.empty()) site.elements.push_back(std::string(p.text(s1.span)));
      site.notes = "statements on lines " + std::to_string(line_number(p.source(), s1.span.begin)) + " and " +
                   std::to_string(line_number(p.source(), s2.span.begin)) + " are independent: defs " +
                   set_text(a.defs) + " / " + set_text(b.defs) + ", uses " + set_text(a.uses) + " / " +
                   set_text(b.uses);
      out.push_back(std::move(site));
    }
  });
  std::sort(out.begin(), out.end(), [](const PerturbationSite& x, const PerturbationSite& y) {
    return std::get<StatementPairAnchor>(x.anchor).first < std::get<StatementPairAnchor>(y.anchor).first;
  });
  return out;
}

std::vector<PerturbationSite> rename_sites(const SubjectProgram& p, Concept kind, const SiteOptions& options) {
  std::vector<int> ids = renameable_symbols(p, options);
  std::size_t needed = kind == Concept::NameRandom ? 1 : 2;
  if (ids.size() < needed) return {};
  PerturbationSite site;
  site.kind = kind;
  IdentifierAnchor anchor;
  for (int id : ids) anchor.names.push_back(p.symbols()[static_cast<std::size_t>(id)].name);
  site.elements = anchor.names;
  site.anchor = std::move(anchor);
  std::string list;
  for (std::size_t k = 0; k < site.elements.size(); ++k) {
    if (k > 0) list += ", ";
    list += site.elements[k];
  }
  site.notes = "local identifiers that can be renamed: " + list;
  return {site};
}

// ---- transformations ---------------------------------------------------------

CounterfactualCandidate flip(const SubjectProgram& p, const PerturbationSite& site) {
  const Stmt& s = p.statement(std::get<StatementAnchor>(site.anchor).index);
  Workspace ws(p.source());
  const code::Span cond = s.exprs[0].span;
  std::size_t body_begin = ws.line_start(s.body.front().span.begin);
  std::size_t body_end = ws.line_end(s.body.back().span);
  std::size_t else_begin = ws.line_start(s.orelse.front().span.begin);
  std::size_t else_end = ws.line_end(s.orelse.back().span);
  std::string body = ws.text.substr(body_begin, body_end - body_begin);
  std::string orelse = ws.text.substr(else_begin, else_end - else_begin);
  CounterfactualCandidate c;
  c.kind = Concept::IfElseFlip;
  c.source = ws.finish({{cond.begin, cond.end, "not (" + std::string(p.text(cond)) + ")"},
                        {body_begin, body_end, orelse},
                        {else_begin, else_end, body}});
  collect_indices(s.body, c.impact_region);
  collect_indices(s.orelse, c.impact_region);
  return c;
}

CounterfactualCandidate break_chain(const SubjectProgram& p, const PerturbationSite& site, std::uint64_t seed) {
  const Stmt& d = p.statement(std::get<StatementAnchor>(site.anchor).index);
  auto chain = def_use_chain(p, d);
  if (!chain) throw NotApplicable("def-use chain no longer present");
  std::string fresh = fresh_name(taken_names(p), seed);
  Workspace ws(p.source());
  std::vector<TextEdit> edits;
  edits.push_back({ws.line_end(d.span), ws.line_end(d.span), *p.indent_of(d) + fresh + " = " + chain->name + "\n"});
  CounterfactualCandidate c;
  c.kind = Concept::DefUseBreak;
  for (int index : chain->uses) {
    c.impact_region.insert(index);
    for (const Expr& e : p.statement(index).exprs) {
      code::walk(e, [&](const Expr& n) {
        if (n.kind == ExprKind::Name && n.ctx == NameCtx::Load && n.symbol == chain->symbol) {
          edits.push_back({n.span.begin, n.span.end, fresh});
        }
      });
    }
  }
  c.source = ws.finish(std::move(edits));
  c.rename_map = std::map<std::string, std::string>{{chain->name, fresh}};
  return c;
}

CounterfactualCandidate swap(const SubjectProgram& p, const PerturbationSite& site) {
  auto pair = std::get<StatementPairAnchor>(site.anchor);
  const Stmt& s1 = p.statement(pair.first);
  const Stmt& s2 = p.statement(pair.second);
  Workspace ws(p.source());
  std::size_t a0 = ws.line_start(s1.span.begin), a1 = ws.line_end(s1.span);
  std::size_t b0 = ws.line_start(s2.span.begin), b1 = ws.line_end(s2.span);
  CounterfactualCandidate c;
  c.kind = Concept::IndependentSwap;
  c.source = ws.finish({{a0, a1, ws.text.substr(b0, b1 - b0)}, {b0, b1, ws.text.substr(a0, a1 - a0)}});
  return c;
}

CounterfactualCandidate rename(const SubjectProgram& p, const std::map<int, std::string>& by_symbol, Concept kind) {
  Workspace ws(p.source());
  std::vector<TextEdit> edits;
  CounterfactualCandidate c;
  c.kind = kind;
  auto visit = [&](const Expr& n) {
    if ((n.kind == ExprKind::Name || n.kind == ExprKind::Param) && by_symbol.count(n.symbol) != 0) {
      edits.push_back({n.span.begin, n.span.end, by_symbol.at(n.symbol)});
    }
  };
  const Stmt& fn = p.entry_function();
  for (const Expr& e : fn.exprs) code::walk(e, visit);
  for_each_stmt(fn.body, [&](const Stmt& s) {
    std::size_t before = edits.size();
    for (const Expr& e : s.exprs) code::walk(e, visit);
    if (edits.size() != before) c.impact_region.insert(s.index);
  });
  c.source = ws.finish(std::move(edits));
  std::map<std::string, std::string> names;
  for (const auto& [id, to] : by_symbol) names[p.symbols()[static_cast<std::size_t>(id)].name] = to;
  c.rename_map = std::move(names);
  return c;
}

std::map<std::string, int> symbols_by_name(const SubjectProgram& p, const SiteOptions& options) {
  std::map<std::string, int> out;
  for (int id : renameable_symbols(p, options)) out[p.symbols()[static_cast<std::size_t>(id)].name] = id;
  return out;
}

CounterfactualCandidate name_random(const SubjectProgram& p, const PerturbationSite& site, std::uint64_t seed,
                                    const SiteOptions& options) {
  auto ids = symbols_by_name(p, options);
  std::set<std::string> taken = taken_names(p);
  std::map<int, std::string> by_symbol;
  for (const std::string& name : std::get<IdentifierAnchor>(site.anchor).names) {
    std::string fresh = fresh_name(taken, seed);
    taken.insert(fresh);
    by_symbol[ids.at(name)] = fresh;
  }
  return rename(p, by_symbol, Concept::NameRandom);
}

CounterfactualCandidate name_shuffle(const SubjectProgram& p, const PerturbationSite& site, std::uint64_t seed,
                                     const SiteOptions& options) {
  auto ids = symbols_by_name(p, options);
  std::vector<std::string> names = std::get<IdentifierAnchor>(site.anchor).names;
  Rng rng(mix_seed(seed, p.origin(), "NameShuffle"));
  rng.shuffle(names);
  std::size_t swaps = 1 + static_cast<std::size_t>(rng.below(names.size() / 2));
  std::map<int, std::string> by_symbol;
  for (std::size_t k = 0; k < swaps; ++k) {
    const std::string& a = names[2 * k];
    const std::string& b = names[2 * k + 1];
    by_symbol[ids.at(a)] = b;
    by_symbol[ids.at(b)] = a;
  }
  return rename(p, by_symbol, Concept::NameShuffle);
}

}  // namespace

std::vector<PerturbationSite> enumerate_sites(const SubjectProgram& program, Concept kind,
                                              const SiteOptions& options) {
  if (program.unsupported()) return {};
  switch (kind) {
    case Concept::IfElseFlip: return if_else_sites(program);
    case Concept::DefUseBreak: return def_use_sites(program);
    case Concept::IndependentSwap: return swap_sites(program);
    case Concept::NameRandom:
    case Concept::NameShuffle: return rename_sites(program, kind, options);
  }
  return {};
}

CounterfactualCandidate apply(const SubjectProgram& program, const PerturbationSite& site, std::uint64_t seed,
                              const SiteOptions& options) {
  auto sites = enumerate_sites(program, site.kind, options);
  auto it = std::find(sites.begin(), sites.end(), site);
  if (it == sites.end()) throw NotApplicable("site is not present in program " + program.origin());
  CounterfactualCandidate c;
  switch (site.kind) {
    case Concept::IfElseFlip: c = flip(program, *it); break;
    case Concept::DefUseBreak: c = break_chain(program, *it, seed); break;
    case Concept::IndependentSwap: c = swap(program, *it); break;
    case Concept::NameRandom: c = name_random(program, *it, seed, options); break;
    case Concept::NameShuffle: c = name_shuffle(program, *it, seed, options); break;
  }
  c.site = *it;
  try {
    code::SubjectProgram::parse(c.source, program.entry_point(), program.origin());
  } catch (const Error& e) {
    throw NotApplicable(std::string("transformation produced invalid code: ") + e.what());
  }
  return c;
}

std::size_t select_site(std::size_t count, std::uint64_t seed, std::string_view task_id, Concept kind) {
  if (count == 0) throw std::invalid_argument("no sites to select from");
  Rng rng(mix_seed(seed, task_id, to_string(kind)));
  return static_cast<std::size_t>(rng.below(count));
}

std::set<std::string> keyword_argument_names(std::string_view code) {
  static const std::regex pattern(R"([(,]\s*([A-Za-z_][A-Za-z0-9_]*)\s*=(?!=))");
  std::set<std::string> out;
  std::string text(code);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
    out.insert((*it)[1].str());
  }
  return out;
}

std::string fresh_name(const std::set<std::string>& taken, std::uint64_t seed, int start) {
  std::string suffix = seed == 0 ? std::string() : "_" + std::to_string(seed % 997);
  for (int k = start;; ++k) {
    std::string candidate = "pcv_" + std::to_string(k) + suffix;
    if (taken.count(candidate) == 0 && !code::is_keyword(candidate) && !code::is_builtin(candidate)) {
      return candidate;
    }
  }
}

}  // namespace procure::perturb
