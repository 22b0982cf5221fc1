#include <gtest/gtest.h>

#include "procure/code/lexer.hpp"
#include "procure/code/parser.hpp"
#include "procure/errors.hpp"

using namespace procure::code;

namespace {

std::vector<TokenKind> kinds(std::string_view src) {
  std::vector<TokenKind> out;
  for (const Token& t : tokenize(src)) out.push_back(t.kind);
  return out;
}

}  // namespace

TEST(Lexer, IndentDedentAndNewlines) {
  auto k = kinds("def f(x):\n    return x\n");
  std::vector<TokenKind> want{TokenKind::Name, TokenKind::Name, TokenKind::Op,      TokenKind::Name,
                              TokenKind::Op,   TokenKind::Op,   TokenKind::Newline, TokenKind::Indent,
                              TokenKind::Name, TokenKind::Name, TokenKind::Newline, TokenKind::Dedent,
                              TokenKind::EndMarker};
  EXPECT_EQ(k, want);
}

TEST(Lexer, BlankLinesAndCommentsAreSkipped) {
  auto toks = tokenize("x = 1  # one\n\n   # indented comment\ny = 2\n");
  int newlines = 0;
  for (const Token& t : toks) {
    EXPECT_NE(t.kind, TokenKind::Indent);
    if (t.kind == TokenKind::Newline) ++newlines;
  }
  EXPECT_EQ(newlines, 2);
}

TEST(Lexer, BracketsSuppressNewlines) {
  auto toks = tokenize("x = (1,\n     2)\n");
  int newlines = 0;
  for (const Token& t : toks) newlines += t.kind == TokenKind::Newline;
  EXPECT_EQ(newlines, 1);
}

TEST(Lexer, StringsWithPrefixesAndTripleQuotes) {
  auto toks = tokenize("s = rb'a\\'b' + \"\"\"x\ny\"\"\" + f'{v}'\n");
  std::vector<std::string> strings;
  for (const Token& t : toks) {
    if (t.kind == TokenKind::String) strings.push_back(t.text);
  }
  ASSERT_EQ(strings.size(), 3u);
  EXPECT_EQ(strings[0], "rb'a\\'b'");
  EXPECT_EQ(strings[1], "\"\"\"x\ny\"\"\"");
  EXPECT_EQ(strings[2], "f'{v}'");
}

TEST(Lexer, NumbersWithExponentsAndUnderscores) {
  auto toks = tokenize("x = 1_000 + 2.5e-3 + 0xFF + .5j\n");
  std::vector<std::string> numbers;
  for (const Token& t : toks) {
    if (t.kind == TokenKind::Number) numbers.push_back(t.text);
  }
  EXPECT_EQ(numbers, (std::vector<std::string>{"1_000", "2.5e-3", "0xFF", ".5j"}));
}

TEST(Lexer, Errors) {
  EXPECT_THROW(tokenize("x = 'abc\n"), procure::SyntaxError);
  EXPECT_THROW(tokenize("x = (1, 2\n"), procure::SyntaxError);
  EXPECT_THROW(tokenize("x = 1)\n"), procure::SyntaxError);
  EXPECT_THROW(tokenize("if x:\n        a\n    b\n"), procure::SyntaxError);
  EXPECT_THROW(tokenize("x = $\n"), procure::SyntaxError);
}

TEST(Lexer, OffsetsPointIntoSource) {
  std::string src = "alpha = beta\n";
  for (const Token& t : tokenize(src)) {
    if (t.kind == TokenKind::Name) EXPECT_EQ(src.substr(t.begin, t.end - t.begin), t.text);
  }
}

TEST(Parser, MinimalFunction) {
  auto mod = parse_module("def f(x):\n    return x");
  ASSERT_EQ(mod.size(), 1u);
  EXPECT_EQ(mod[0].kind, StmtKind::FunctionDef);
  EXPECT_EQ(mod[0].name, "f");
  ASSERT_EQ(mod[0].body.size(), 1u);
  EXPECT_EQ(mod[0].body[0].kind, StmtKind::Return);
}

TEST(Parser, RejectsMalformedInput) {
  for (const char* bad : {"def f(:", "def f(x):\nreturn x\n", "x = = 1\n", "if x\n    pass\n",
                          "def f():\n    return 1 +\n", "lambda = 3\n", "f(x) = 1\n", "x + 1 += 2\n",
                          "for in y:\n    pass\n", "def f():\n  x = 1\n    y = 2\n", "print(f'{}')\n",
                          "try:\n    pass\n"}) {
    EXPECT_THROW(parse_module(bad), procure::SyntaxError) << bad;
  }
}

TEST(Parser, AcceptsBroadPythonSubset) {
  const char* src = R"PY(
import math, os.path as osp
from collections import defaultdict, Counter as C
from . import sibling

@decorator(arg=1)
def f(a, b: int = 2, *args, c, d=3, **kw) -> list:
    """doc"""
    global g
    x, *rest = [1, 2, 3]
    y = z = a if b else -a
    w: float = 1.5
    w += 2 ** -1
    s = {k: v for k, v in kw.items() if v}
    t = {i for i in range(3)}
    u = [j * 2 for row in [[1]] for j in row]
    gen = (q for q in range(4))
    lam = lambda p, *r, o=1: p + o
    if (n := len(u)) > 1 and not a or b is not None:
        pass
    elif a in u or a not in t:
        x = a[1:2, ::3]
    else:
        del x
    while True:
        break
    else:
        pass
    for i, (j, k) in enumerate([(1, 2)]):
        continue
    with open("f") as fh, ctx():
        pass
    try:
        raise ValueError("x") from None
    except (ValueError, TypeError) as e:
        pass
    except Exception:
        pass
    else:
        pass
    finally:
        pass
    assert a, "msg"
    print(f"{a!r:>{b}} {{lit}} {x=}", end="")
    return x; pass

class K(Base, metaclass=M):
    def m(self): return self.v

async def co():
    async for i in aiter():
        await thing()
    async with lock:
        yield i
    yield from other()
)PY";
  auto mod = parse_module(src);
  EXPECT_EQ(mod.size(), 6u);
}

TEST(Parser, ElifNestsInOrelse) {
  auto mod = parse_module("def f(x):\n    if x:\n        a = 1\n    elif x > 2:\n        a = 2\n    else:\n        a = 3\n    return a\n");
  const Stmt& s = mod[0].body[0];
  ASSERT_EQ(s.kind, StmtKind::If);
  ASSERT_EQ(s.orelse.size(), 1u);
  EXPECT_TRUE(s.orelse[0].is_elif);
  EXPECT_EQ(s.orelse[0].orelse.size(), 1u);
}

TEST(Parser, SpansCoverText) {
  std::string src = "def f(x):\n    if x > 0:\n        r = 1\n    else:\n        r = 2\n    return r\n";
  auto mod = parse_module(src);
  const Stmt& s = mod[0].body[0];
  EXPECT_EQ(src.substr(s.header.begin, s.header.size()), "if x > 0:");
  EXPECT_EQ(src.substr(s.exprs[0].span.begin, s.exprs[0].span.size()), "x > 0");
  EXPECT_EQ(src.substr(s.else_keyword.begin, s.else_keyword.size()), "else");
  EXPECT_EQ(src.substr(s.span.begin, s.span.size()), "if x > 0:\n        r = 1\n    else:\n        r = 2");
}

TEST(Parser, FStringFieldsAreParsedWithSourceOffsets) {
  std::string src = "x = f'{alpha + 1:>{width}}'\n";
  auto mod = parse_module(src);
  const Expr& fs = mod[0].exprs[1];
  ASSERT_EQ(fs.kind, ExprKind::FString);
  ASSERT_EQ(fs.kids.size(), 2u);
  const Expr& bin = fs.kids[0];
  EXPECT_EQ(src.substr(bin.kids[0].span.begin, bin.kids[0].span.size()), "alpha");
  EXPECT_EQ(src.substr(fs.kids[1].span.begin, fs.kids[1].span.size()), "width");
}

TEST(Parser, AssignmentTargetsGetStoreContext) {
  auto mod = parse_module("a, b[0], c.d = 1, 2, 3\n");
  const Expr& target = mod[0].exprs[0];
  ASSERT_EQ(target.kind, ExprKind::Tuple);
  EXPECT_EQ(target.kids[0].ctx, NameCtx::Store);
  EXPECT_EQ(target.kids[1].ctx, NameCtx::Store);
  EXPECT_EQ(target.kids[1].kids[0].ctx, NameCtx::Load);
  EXPECT_EQ(target.kids[2].ctx, NameCtx::Store);
}

TEST(Parser, ChainedComparisonKeepsOperators) {
  Expr e = parse_expression("a < b <= c not in d is not e");
  ASSERT_EQ(e.kind, ExprKind::Compare);
  EXPECT_EQ(e.value, "<,<=,not in,is not");
  EXPECT_EQ(e.kids.size(), 5u);
}

TEST(Parser, PowerBindsTighterThanUnaryOnTheLeft) {
  Expr e = parse_expression("-2 ** 2");
  ASSERT_EQ(e.kind, ExprKind::UnaryOp);
  EXPECT_EQ(e.kids[0].kind, ExprKind::BinOp);
  EXPECT_EQ(e.kids[0].value, "**");
}
