#include <gtest/gtest.h>

#include "procure/code/program.hpp"
#include "procure/errors.hpp"

using namespace procure::code;
using Names = std::set<std::string>;

namespace {

SubjectProgram fn(const std::string& body, const std::string& params = "a, b") {
  std::string src = "def f(" + params + "):\n";
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    std::string line = body.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    src += "    " + line + "\n";
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return SubjectProgram::parse(src, "f", "test/0");
}

}  // namespace

TEST(SubjectProgram, ParseErrors) {
  EXPECT_NO_THROW(SubjectProgram::parse("def f(x):\n    return x", "f"));
  EXPECT_THROW(SubjectProgram::parse("def f(:", "f"), procure::SyntaxError);
  EXPECT_THROW(SubjectProgram::parse("def g():\n    pass", "f"), procure::MissingEntryPoint);
  EXPECT_THROW(SubjectProgram::parse("class K:\n    def f(self):\n        pass\n", "f"), procure::MissingEntryPoint);
}

TEST(SubjectProgram, SingleBodyStatement) {
  auto p = SubjectProgram::parse("def f(x):\n    return x", "f", "t/1");
  EXPECT_EQ(p.statements().size(), 1u);
  EXPECT_EQ(p.origin(), "t/1");
  EXPECT_EQ(p.statement(1).kind, StmtKind::Return);
  EXPECT_THROW(p.statement(2), std::out_of_range);
}

TEST(SubjectProgram, StatementsArePreOrderIncludingHeaders) {
  auto p = fn("x = 1\nif a:\n    y = 2\nelif b:\n    y = 3\nelse:\n    for i in a:\n        y = i\nreturn y");
  std::vector<StmtKind> want{StmtKind::Assign, StmtKind::If,  StmtKind::Assign, StmtKind::If,
                             StmtKind::Assign, StmtKind::For, StmtKind::Assign, StmtKind::Return};
  ASSERT_EQ(p.statements().size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_EQ(p.statements()[k]->kind, want[k]);
    EXPECT_EQ(p.statements()[k]->index, static_cast<int>(k) + 1);
  }
}

TEST(SubjectProgram, CopiesShareState) {
  auto p = fn("return a");
  SubjectProgram q = p;
  EXPECT_EQ(&p.entry_function(), &q.entry_function());
}

TEST(SubjectProgram, UnsupportedConstructsAreReported) {
  EXPECT_EQ(fn("try:\n    pass\nexcept E:\n    pass").unsupported(), "try");
  EXPECT_EQ(fn("with a:\n    pass").unsupported(), "with");
  EXPECT_EQ(fn("def g():\n    pass").unsupported(), "nested function");
  EXPECT_EQ(fn("class K:\n    pass").unsupported(), "class");
  EXPECT_FALSE(fn("return [x for x in a]").unsupported().has_value());
  EXPECT_THROW(fn("with a:\n    pass").require_supported(), procure::UnsupportedConstruct);
}

TEST(DefUse, SpecifiedExamples) {
  auto assign = def_use(fn("v = a + b\nreturn v"), 1);
  EXPECT_EQ(assign.defs, Names{"v"});
  EXPECT_EQ(assign.uses, (Names{"a", "b"}));
  auto aug = def_use(fn("v = 0\nv += 1\nreturn v"), 2);
  EXPECT_EQ(aug.defs, Names{"v"});
  EXPECT_EQ(aug.uses, Names{"v"});
  auto ret = def_use(fn("x = 1\nreturn x"), 2);
  EXPECT_TRUE(ret.defs.empty());
  EXPECT_EQ(ret.uses, Names{"x"});
}

TEST(DefUse, ComprehensionLocalsAreNotFunctionDefs) {
  auto info = def_use(fn("r = [i * a for i in b if i]\nreturn r"), 1);
  EXPECT_EQ(info.defs, Names{"r"});
  EXPECT_EQ(info.uses, (Names{"a", "b"}));
}

TEST(DefUse, WalrusInsideComprehensionBindsInFunction) {
  auto info = def_use(fn("r = [y := i for i in b]\nreturn y"), 1);
  EXPECT_EQ(info.defs, (Names{"r", "y"}));
}

TEST(DefUse, CompoundHeadersOnly) {
  auto p = fn("for i in a:\n    b += i\nreturn b");
  auto info = def_use(p, 1);
  EXPECT_EQ(info.defs, Names{"i"});
  EXPECT_EQ(info.uses, Names{"a"});
  EXPECT_EQ(p.text(info.span), "for i in a:");
}

TEST(DefUse, Purity) {
  EXPECT_TRUE(def_use(fn("x = len(a) + abs(b)\nreturn x"), 1).is_pure);
  EXPECT_FALSE(def_use(fn("x = sorted(a)\nreturn x"), 1).is_pure);
  EXPECT_FALSE(def_use(fn("a[0] = 1\nreturn a"), 1).is_pure);
  EXPECT_FALSE(def_use(fn("a.x = 1\nreturn a"), 1).is_pure);
  EXPECT_FALSE(def_use(fn("x = a.pop()\nreturn x"), 1).is_pure);
  EXPECT_FALSE(def_use(fn("global g\nreturn g"), 1).is_pure);
  auto shadowed = fn("len = b\nx = len(a)\nreturn x");
  EXPECT_FALSE(def_use(shadowed, 2).is_pure);
}

TEST(DefUse, SubscriptStoreReadsItsBase) {
  auto info = def_use(fn("a[b] = 1\nreturn a"), 1);
  EXPECT_TRUE(info.defs.empty());
  EXPECT_EQ(info.uses, (Names{"a", "b"}));
}

TEST(DefUse, NamesLieInsideTheSpan) {
  auto p = fn("x = a\ny = [x + k for k in b]\nif y:\n    x = y\nwhile x:\n    x -= 1\nreturn x");
  for (const auto& info : def_use_sets(p)) {
    std::string_view text = p.text(info.span);
    for (const auto& n : info.defs) EXPECT_NE(text.find(n), std::string_view::npos);
    for (const auto& n : info.uses) EXPECT_NE(text.find(n), std::string_view::npos);
  }
}

TEST(Scopes, LambdaCapturesAreFlagged) {
  auto p = fn("k = 2\nm = 3\ng = lambda v: v * k\nreturn g(m)");
  bool k_captured = false, m_captured = false;
  for (const auto& s : p.symbols()) {
    if (s.name == "k") k_captured = s.captured_lazily;
    if (s.name == "m") m_captured = s.captured_lazily;
  }
  EXPECT_TRUE(k_captured);
  EXPECT_FALSE(m_captured);
}

TEST(Scopes, GlobalNamesStayUnresolved) {
  auto p = fn("global g\ng = a\nreturn g");
  for (const auto& s : p.symbols()) EXPECT_NE(s.name, "g");
}

TEST(Lines, OwnLineAndIndent) {
  auto p = fn("x = 1; y = 2\nz = 3  # note\nreturn z");
  EXPECT_FALSE(p.own_line(p.statement(1)));
  EXPECT_FALSE(p.own_line(p.statement(2)));
  EXPECT_TRUE(p.own_line(p.statement(3)));
  EXPECT_EQ(p.indent_of(p.statement(3)), "    ");
  EXPECT_FALSE(p.indent_of(p.statement(2)).has_value());
}
