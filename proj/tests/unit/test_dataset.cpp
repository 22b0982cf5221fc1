#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "diff_oracle.hpp"
#include "procure/dataset/combine.hpp"
#include "procure/dataset/diff.hpp"
#include "procure/errors.hpp"

using namespace procure;
using namespace procure::dataset;
using perturb::Concept;
using validate::Verdict;

namespace {

std::vector<std::string> covered(std::string_view text, const std::vector<CharSpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

std::size_t covered_chars(const std::vector<CharSpan>& spans) {
  std::size_t n = 0;
  for (const auto& s : spans) n += s.end - s.begin;
  return n;
}

void expect_well_formed(const std::vector<CharSpan>& spans, std::string_view text) {
  std::size_t last = 0;
  for (const auto& s : spans) {
    EXPECT_LT(s.begin, s.end);
    EXPECT_GE(s.begin, last);
    EXPECT_LE(s.end, text.size());
    last = s.end;
  }
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("procure_test_" + name);
}

DatasetRecord sample_record(const std::string& id, Concept c, Verdict v = Verdict::AcceptedByTests) {
  DatasetRecord r;
  r.task_id = id;
  r.kind = c;
  r.instruction = "def f(x):\n    \"\"\"Ünïcode docstring\"\"\"\n";
  r.original_code = r.instruction + "    return x\n";
  r.counterfactual_code = r.instruction + "    y = x\n    return y\n";
  r.diff_spans = annotate_diff(r.original_code, r.counterfactual_code);
  r.verdict = v;
  r.generator = "rule";
  return r;
}

OriginalEntry orig(const std::string& id) { return {id, "h " + id, "def f(): pass\n"}; }

CombinedGroup group_of(const std::string& id, int counterfactuals) {
  CombinedGroup g{orig(id), {}};
  for (int k = 0; k < counterfactuals; ++k) g.counterfactuals.push_back(sample_record(id, perturb::kAllConcepts[k]));
  return g;
}

}  // namespace

TEST(LexTokens, SplitsOnLexicalBoundaries) {
  std::vector<std::string> got;
  for (const auto& t : lex_tokens("if not (a<=b): s = f'x{y}' # note\n    z **= 1.5e-3")) got.emplace_back(t.text);
  std::vector<std::string> want{"if", "not", "(", "a", "<=", "b", ")", ":", "s", "=", "f'x{y}'", "# note",
                                "z", "**=", "1.5e-3"};
  EXPECT_EQ(got, want);
}

TEST(LexTokens, NeverThrowsOnBrokenInput) {
  EXPECT_NO_THROW(lex_tokens("x = 'unterminated\n$ ? \"\"\"open"));
  EXPECT_TRUE(lex_tokens("   \n\t").empty());
}

TEST(AnnotateDiff, IdenticalTextsHaveNoSpans) {
  EXPECT_TRUE(annotate_diff("x = 1\nreturn x", "x = 1\nreturn x").empty());
  // Whitespace is ignored for matching.
  EXPECT_TRUE(annotate_diff("x = 1\nreturn x", "x  =  1\n\nreturn   x").empty());
}

TEST(AnnotateDiff, RenameMarksBothOccurrences) {
  std::string cf = "y = 1\nreturn y";
  auto spans = annotate_diff("x = 1\nreturn x", cf);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(covered(cf, spans), (std::vector<std::string>{"y", "y"}));
}

TEST(AnnotateDiff, IfElseFlipPair) {
  std::string o =
      "def f(x):\n    if x > 0:\n        r = x * 2\n    else:\n        r = -x\n    return r\n";
  std::string cf =
      "def f(x):\n    if not (x > 0):\n        r = -x\n    else:\n        r = x * 2\n    return r\n";
  auto spans = annotate_diff(o, cf);
  expect_well_formed(spans, cf);
  auto got = covered(cf, spans);
  // `not`, `(` and `)` are inserted; one of the two branch bodies moves.
  std::string joined;
  for (const auto& g : got) joined += g + "|";
  EXPECT_NE(joined.find("not|(|"), std::string::npos) << joined;
  EXPECT_NE(joined.find(")"), std::string::npos);
  std::vector<std::string> ot, ct;
  for (const auto& t : lex_tokens(o)) ot.emplace_back(t.text);
  for (const auto& t : lex_tokens(cf)) ct.emplace_back(t.text);
  EXPECT_EQ(covered_chars(spans), testing_support::min_inserted_chars(ot, ct));
}

TEST(AnnotateDiff, MatchesExhaustiveOracleOnShortPairs) {
  for (std::uint32_t seed = 0; seed < 300; ++seed) {
    auto p = testing_support::random_token_pair(seed, 12);
    auto spans = annotate_diff(p.original_text, p.counterfactual_text);
    expect_well_formed(spans, p.counterfactual_text);
    EXPECT_EQ(covered_chars(spans), testing_support::min_inserted_chars_exhaustive(p.original, p.counterfactual))
        << "seed " << seed;
  }
}

TEST(AnnotateDiff, MatchesEditScriptOracleUpTo64Tokens) {
  for (std::uint32_t seed = 1000; seed < 1200; ++seed) {
    auto p = testing_support::random_token_pair(seed, 64);
    std::vector<std::string> lexed;
    for (const auto& t : lex_tokens(p.counterfactual_text)) lexed.emplace_back(t.text);
    ASSERT_EQ(lexed, p.counterfactual);
    auto spans = annotate_diff(p.original_text, p.counterfactual_text);
    expect_well_formed(spans, p.counterfactual_text);
    std::size_t oracle = testing_support::min_inserted_chars(p.original, p.counterfactual);
    EXPECT_EQ(covered_chars(spans), oracle) << "seed " << seed;
    // Pure deletions leave nothing to mark in the counterfactual.
    EXPECT_EQ(spans.empty(), oracle == 0);
    // Spans cover whole tokens only.
    std::set<std::size_t> starts, ends;
    for (const auto& t : lex_tokens(p.counterfactual_text)) {
      starts.insert(t.begin);
      ends.insert(t.end);
    }
    for (const auto& s : spans) {
      EXPECT_TRUE(starts.count(s.begin));
      EXPECT_TRUE(ends.count(s.end));
    }
  }
}

TEST(Records, RoundTrip) {
  auto path = temp_file("records.jsonl");
  std::vector<DatasetRecord> recs{sample_record("A/1", Concept::IfElseFlip),
                                  sample_record("A/2", Concept::NameShuffle, Verdict::AcceptedStructural),
                                  sample_record("A/3", Concept::DefUseBreak)};
  recs[2].generator = "llm:gpt-4o";
  recs[2].attempts = 3;
  EXPECT_EQ(write_records(recs, path), 3u);
  EXPECT_EQ(read_records(path), recs);
  std::filesystem::remove(path);
}

TEST(Records, StableKeyOrder) {
  std::string line = to_json_line(sample_record("A/1", Concept::IfElseFlip));
  std::vector<std::string> keys{"task_id", "concept", "instruction", "original_code", "counterfactual_code",
                                "diff_spans", "attempts", "verdict", "generator"};
  std::size_t pos = 0;
  for (const auto& k : keys) {
    auto at = line.find("\"" + k + "\":");
    ASSERT_NE(at, std::string::npos) << k;
    EXPECT_GT(at + 1, pos) << k;
    pos = at;
  }
}

TEST(Records, PropertyRoundTripGenerated) {
  std::mt19937 gen(7);
  std::vector<DatasetRecord> recs;
  for (std::uint32_t seed = 0; seed < 100; ++seed) {
    auto p = testing_support::random_token_pair(seed, 40);
    DatasetRecord r;
    r.task_id = "G/" + std::to_string(seed);
    r.kind = perturb::kAllConcepts[gen() % 5];
    r.instruction = "\"quoted\"\t\\ " + std::to_string(gen());
    r.original_code = p.original_text;
    r.counterfactual_code = p.counterfactual_text;
    r.diff_spans = annotate_diff(p.original_text, p.counterfactual_text);
    r.attempts = 1 + static_cast<int>(gen() % 5);
    r.verdict = gen() % 2 ? Verdict::AcceptedByTests : Verdict::AcceptedStructural;
    r.generator = gen() % 2 ? "rule" : "llm:m";
    recs.push_back(r);
  }
  auto path = temp_file("prop.jsonl");
  write_records(recs, path);
  EXPECT_EQ(read_records(path), recs);
  std::filesystem::remove(path);
}

TEST(Records, MissingConceptIsSchemaError) {
  auto path = temp_file("bad.jsonl");
  std::string good = to_json_line(sample_record("A/1", Concept::IfElseFlip));
  std::string bad = good;
  bad.erase(bad.find("\"concept\""), std::string("\"concept\":\"IfElseFlip\",").size());
  std::ofstream(path) << good << "\n" << bad << "\n";
  try {
    read_records(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "concept");
  }
  std::filesystem::remove(path);
}

TEST(Records, EmptyFileAndMissingFile) {
  auto path = temp_file("empty.jsonl");
  std::ofstream(path).close();
  EXPECT_TRUE(read_records(path).empty());
  std::filesystem::remove(path);
  EXPECT_THROW(read_records(path), IoError);
}

TEST(Records, SpansOutOfBoundsRejected) {
  auto r = sample_record("A/1", Concept::IfElseFlip);
  r.diff_spans = {{0, r.counterfactual_code.size() + 1}};
  EXPECT_THROW(from_json_line(to_json_line(r)), SchemaError);
}

TEST(Tasks, ParseAndHarness) {
  std::string jsonl =
      R"({"task_id":"X/0","prompt":"def f(x):\n","canonical_solution":"    return x\n","test":"def check(c):\n    assert c(1) == 1\n","entry_point":"f"})"
      "\n";
  auto tasks = parse_tasks(jsonl);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].source(), "def f(x):\n    return x\n");
  EXPECT_NE(tasks[0].harness().test_code.find("check(f)"), std::string::npos);
  EXPECT_THROW(parse_tasks(R"({"task_id":"X/0"})"), SchemaError);
}

TEST(Combined, GroupsByTask) {
  std::vector<DatasetRecord> cfs{sample_record("A", Concept::NameShuffle), sample_record("A", Concept::IfElseFlip),
                                 sample_record("A", Concept::DefUseBreak),
                                 sample_record("B", Concept::IfElseFlip, Verdict::RejectedByTests)};
  auto groups = build_combined({orig("A"), orig("B")}, cfs);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].size(), 4u);
  EXPECT_EQ(groups[0].counterfactuals[0].kind, Concept::IfElseFlip);
  EXPECT_EQ(groups[1].size(), 1u);
  EXPECT_THROW(build_combined({orig("A")}, {sample_record("Z", Concept::IfElseFlip)}), OrphanCounterfactual);
}

TEST(Batches, ExamplePacking) {
  auto two = plan_batches({group_of("a", 3), group_of("b", 3)}, 8, 1);
  EXPECT_EQ(two.batches.size(), 1u);
  auto three = plan_batches({group_of("a", 3), group_of("b", 3), group_of("c", 3)}, 8, 1);
  ASSERT_EQ(three.batches.size(), 2u);
  EXPECT_EQ(three.batches[0].size() + three.batches[1].size(), 3u);
  EXPECT_THROW(plan_batches({group_of("a", 5)}, 4, 1), GroupTooLarge);
}

TEST(Batches, IntegrityAndDeterminism) {
  std::mt19937 gen(3);
  std::vector<CombinedGroup> groups;
  for (int i = 0; i < 60; ++i) groups.push_back(group_of("t" + std::to_string(i), static_cast<int>(gen() % 6)));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto plan = plan_batches(groups, 12, seed);
    std::vector<int> seen(groups.size(), 0);
    for (const auto& batch : plan.batches) {
      std::size_t members = 0;
      for (std::size_t g : batch) {
        ++seen[g];
        members += groups[g].size();
      }
      EXPECT_LE(members, 12u);
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    auto again = plan_batches(groups, 12, seed);
    EXPECT_EQ(again.batches, plan.batches);
  }
}

TEST(Split, HalfAndDeterministic) {
  std::vector<std::string> ids;
  for (int i = 0; i < 31; ++i) ids.push_back("t" + std::to_string(i));
  auto [a, b] = split_tasks(ids, 9);
  EXPECT_EQ(a.size() + b.size(), ids.size());
  EXPECT_EQ(a.size(), 16u);
  auto [a2, b2] = split_tasks(ids, 9);
  EXPECT_EQ(a, a2);
  std::set<std::string> all(a.begin(), a.end());
  all.insert(b.begin(), b.end());
  EXPECT_EQ(all.size(), ids.size());
}
