#include <gtest/gtest.h>

#include <chrono>

#include "procure/errors.hpp"
#include "procure/perturb/perturb.hpp"
#include "procure/validate/validate.hpp"
#include "python_oracle.hpp"

using namespace procure;
using namespace procure::validate;
using code::SubjectProgram;
using perturb::Concept;

namespace {

const std::string kInc = "def f(x):\n    return x + 1\n";
const std::string kIncTests = "assert f(1) == 2\nassert f(-1) == 0\nassert f(10) == 11\n";

const std::string kSign =
    "def f(x):\n"
    "    total = 0\n"
    "    if x > 0:\n"
    "        total = x * 2\n"
    "    else:\n"
    "        total = -x\n"
    "    return total\n";
const std::string kSignTests = "assert f(3) == 6\nassert f(-2) == 2\nassert f(0) == 0\n";

TestHarness harness(const std::string& tests, double timeout = 10.0) {
  TestHarness h;
  h.test_code = tests;
  h.timeout_s = timeout;
  return h;
}

#define REQUIRE_PYTHON()                                                  \
  if (!testing_support::python_available()) GTEST_SKIP() << "no python3"; \
  static_assert(true)

}  // namespace

TEST(Verdict, NamesRoundTrip) {
  for (Verdict v : {Verdict::AcceptedStructural, Verdict::AcceptedByTests, Verdict::FailureTypeI,
                    Verdict::FailureTypeII, Verdict::RejectedByTests, Verdict::ExecutionError}) {
    EXPECT_EQ(verdict_from_string(to_string(v)), v);
  }
  EXPECT_THROW(verdict_from_string("Accepted"), std::invalid_argument);
  EXPECT_TRUE(is_accepted(Verdict::AcceptedByTests));
  EXPECT_FALSE(is_accepted(Verdict::RejectedByTests));
}

TEST(Compose, OrderIsPreludeCandidateTests) {
  TestHarness h;
  h.prelude = "import math";
  h.test_code = "assert f(1) == 2";
  std::string out = compose("def f(x):\n    return x + 1\n", h);
  auto p = out.find("import math"), c = out.find("def f"), t = out.find("assert");
  EXPECT_LT(p, c);
  EXPECT_LT(c, t);
  EXPECT_EQ(out.back(), '\n');
}

TEST(CountTests, CountsAsserts) {
  EXPECT_EQ(count_tests(kIncTests), 3);
  EXPECT_EQ(count_tests("def check(c):\n    assert c(1) == 2\n    assert c(2) == 3\n"), 2);
  EXPECT_EQ(count_tests("check(f)\n"), 1);
  EXPECT_EQ(count_tests("x = 'reassert'\nassert x\n"), 1);
}

TEST(FastFilter, IdenticalIsTypeOne) {
  auto p = SubjectProgram::parse(kInc, "f");
  auto o = fast_filter(p, kInc);
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::FailureTypeI);
  EXPECT_EQ(o->stage, "fast-filter");
  // Trailing whitespace changes do not count as a perturbation.
  o = fast_filter(p, "def f(x):   \n    return x + 1\n\n\n");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::FailureTypeI);
}

TEST(FastFilter, UnparseableIsTypeTwo) {
  auto p = SubjectProgram::parse(kInc, "f");
  auto o = fast_filter(p, "def f(:");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::FailureTypeII);
  o = fast_filter(p, "def g(x):\n    return x + 1\n");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::FailureTypeII);
}

TEST(FastFilter, RenameIsStructural) {
  auto p = SubjectProgram::parse(kSign, "f");
  std::string renamed =
      "def f(y):\n    acc = 0\n    if y > 0:\n        acc = y * 2\n    else:\n        acc = -y\n    return acc\n";
  auto o = fast_filter(p, renamed);
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::AcceptedStructural);
  EXPECT_EQ(o->tests_run, 0);
}

TEST(FastFilter, CommentOnlyChangeIsAstMatch) {
  auto p = SubjectProgram::parse(kInc, "f");
  auto o = fast_filter(p, "def f(x):\n    # bump\n    return x + 1\n");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->verdict, Verdict::AcceptedStructural);
}

TEST(FastFilter, SwapNeverStructural) {
  auto p = SubjectProgram::parse(kInc, "f");
  auto o = fast_filter(p, "def f(y):\n    return y + 1\n", Concept::IndependentSwap);
  EXPECT_FALSE(o);
}

TEST(FastFilter, BehaviourChangeIsInconclusive) {
  auto p = SubjectProgram::parse(kInc, "f");
  EXPECT_FALSE(fast_filter(p, "def f(x):\n    return x - 1\n"));
}

TEST(FastFilter, HelperChangeBlocksCfgMatch) {
  std::string src = "def g(v):\n    return v\n\ndef f(x):\n    return g(x)\n";
  auto p = SubjectProgram::parse(src, "f");
  EXPECT_FALSE(fast_filter(p, "def g(v):\n    return -v\n\ndef f(x):\n    return g(x)\n"));
}

TEST(Sandbox, MissingInterpreterThrows) {
  Sandbox sb("/nonexistent/python-xyz");
  EXPECT_FALSE(sb.available());
  EXPECT_THROW(sb.run("pass\n", 1.0), SandboxUnavailable);
}

TEST(Sandbox, CapturesOutputAndExitCode) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto r = sb.run("import sys\nprint('hi')\nsys.exit(3)\n", 10);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_FALSE(r.timed_out);
  EXPECT_EQ(r.output, "hi\n");
  EXPECT_EQ(sb.executions(), 1u);
}

TEST(Sandbox, CapsOutput) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto r = sb.run("import sys\nsys.stdout.write('x' * (3 << 20))\n", 20);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.output.size(), Sandbox::kOutputCap);
}

TEST(Sandbox, WorkingDirectoryIsIsolated) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto a = sb.run("import os\nprint(os.getcwd())\nopen('scratch', 'w').write('1')\n", 10);
  auto b = sb.run("import os\nprint(os.getcwd())\nprint(os.path.exists('scratch'))\n", 10);
  EXPECT_NE(a.output.substr(0, a.output.find('\n')), b.output.substr(0, b.output.find('\n')));
  EXPECT_NE(b.output.find("False"), std::string::npos);
}

TEST(RunTests, PassingCandidate) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto o = run_tests(kInc, harness(kIncTests), sb);
  EXPECT_EQ(o.verdict, Verdict::AcceptedByTests);
  EXPECT_EQ(o.tests_run, 3);
  EXPECT_EQ(o.stage, "tests");
}

TEST(RunTests, InvertedBehaviourRejected) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto o = run_tests("def f(x):\n    return x - 1\n", harness(kIncTests), sb);
  EXPECT_EQ(o.verdict, Verdict::RejectedByTests);
  EXPECT_NE(o.detail.find("AssertionError"), std::string::npos);
}

TEST(RunTests, InfiniteLoopTimesOut) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto start = std::chrono::steady_clock::now();
  auto o = run_tests("def f(x):\n    while True: pass\n", harness(kIncTests, 2.0), sb);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(o.verdict, Verdict::ExecutionError);
  EXPECT_EQ(o.tests_run, 0);
  EXPECT_LT(secs, 3.0);
  EXPECT_GE(secs, 1.9);
}

TEST(RunTests, ChildProcessesAreKilled) {
  REQUIRE_PYTHON();
  Sandbox sb;
  // The grandchild keeps the pipe open; the group kill must still end the run.
  auto start = std::chrono::steady_clock::now();
  auto r = sb.run("import subprocess, sys\nsubprocess.Popen([sys.executable, '-c', 'import time; time.sleep(30)'])\n",
                  2.0);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 3.0);
  (void)r;
}

TEST(ValidateCandidate, FunnelOrdering) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto p = SubjectProgram::parse(kSign, "f");
  auto h = harness(kSignTests);

  auto same = validate_candidate(p, kSign, h, sb);
  EXPECT_EQ(same.verdict, Verdict::FailureTypeI);
  auto broken = validate_candidate(p, "def f(:", h, sb);
  EXPECT_EQ(broken.verdict, Verdict::FailureTypeII);
  auto sites = perturb::enumerate_sites(p, Concept::NameShuffle);
  ASSERT_FALSE(sites.empty());
  auto renamed = perturb::apply(p, sites[0], 7);
  auto rn = validate_candidate(p, renamed.source, h, sb, Concept::NameShuffle);
  EXPECT_EQ(rn.verdict, Verdict::AcceptedStructural);
  EXPECT_EQ(rn.tests_run, 0);
  EXPECT_EQ(sb.executions(), 0u);

  auto flip_sites = perturb::enumerate_sites(p, Concept::IfElseFlip);
  ASSERT_EQ(flip_sites.size(), 1u);
  auto flip = perturb::apply(p, flip_sites[0], 0);
  auto fo = validate_candidate(p, flip.source, h, sb, Concept::IfElseFlip);
  EXPECT_EQ(fo.verdict, Verdict::AcceptedByTests);
  EXPECT_EQ(fo.tests_run, 3);
  EXPECT_EQ(sb.executions(), 1u);

  // Structural acceptance is sound: the renamed variant also passes.
  EXPECT_EQ(run_tests(renamed.source, h, sb).verdict, Verdict::AcceptedByTests);
}

TEST(ValidateCandidate, Deterministic) {
  REQUIRE_PYTHON();
  Sandbox sb;
  auto p = SubjectProgram::parse(kInc, "f");
  auto a = validate_candidate(p, "def f(x):\n    return 1 + x\n", harness(kIncTests), sb);
  auto b = validate_candidate(p, "def f(x):\n    return 1 + x\n", harness(kIncTests), sb);
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_EQ(a.verdict, Verdict::AcceptedByTests);
}
