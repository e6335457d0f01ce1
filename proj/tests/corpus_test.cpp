#include "mbrkit/corpus.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "mbrkit/error.hpp"
#include "mbrkit/rng.hpp"
#include "mbrkit/synthetic.hpp"

namespace mbrkit {
namespace {

std::vector<Instance> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(ReferenceBag, SupportAndMultiplicity) {
  ReferenceBag bag({"b", "a", "b", "c", "b"});
  EXPECT_EQ(bag.support(), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(bag.multiplicity(), (std::vector<int>{3, 1, 1}));
  EXPECT_EQ(bag.multiplicity_of("b"), 3);
  EXPECT_EQ(bag.multiplicity_of("z"), 0);
  EXPECT_EQ(bag.support_index_of_item(3), 2u);
  EXPECT_EQ(bag.size(), 5u);
}

TEST(ReferenceBag, MultiplicitiesSumToSize) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> items;
    const auto n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) items.push_back(std::to_string(rng.below(6)));
    ReferenceBag bag(items);
    int total = 0;
    for (std::size_t k = 0; k < bag.support().size(); ++k) {
      EXPECT_GT(bag.multiplicity()[k], 0);
      total += bag.multiplicity()[k];
      for (std::size_t l = 0; l < k; ++l) EXPECT_NE(bag.support()[k], bag.support()[l]);
    }
    EXPECT_EQ(static_cast<std::size_t>(total), bag.size());
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(bag.support()[bag.support_index_of_item(i)], items[i]);
    }
  }
}

TEST(ParseJsonl, DefaultReferencesAreHypotheses) {
  auto v = parse(R"({"source":"s","hypotheses":["a","b"]})" "\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].references.items(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(*v[0].source, "s");
  EXPECT_FALSE(v[0].lprobs);
}

TEST(ParseJsonl, BagWithDuplicates) {
  auto v = parse(
      R"({"source":"s","hypotheses":["a"],"references":["a","a","b"],"lprobs":[-0.1,-0.1,-2.3]})");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].references.size(), 3u);
  EXPECT_EQ(v[0].references.support().size(), 2u);
  EXPECT_EQ(v[0].lprobs->size(), 3u);
}

TEST(ParseJsonl, LprobsLengthMismatch) {
  const auto msg = error_of(R"({"source":"s","hypotheses":["a"],"lprobs":[-0.1,-0.2]})");
  EXPECT_NE(msg.find("lprobs length 2 ≠ bag length 1"), std::string::npos) << msg;
}

TEST(ParseJsonl, MalformedLineNumber) {
  const auto msg = error_of("{\"hypotheses\":[\"a\"]}\n\n{oops\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseJsonl, Rejects) {
  EXPECT_NE(error_of(R"({"source":"s"})"), "");
  EXPECT_NE(error_of(R"({"hypotheses":[]})"), "");
  EXPECT_NE(error_of(R"({"hypotheses":["a"],"references":[]})"), "");
  EXPECT_NE(error_of(R"({"hypotheses":[1]})"), "");
  EXPECT_NE(error_of(R"([1,2])"), "");
}

TEST(ParseJsonl, BlankLinesSkippedAndIdKept) {
  auto v = parse("\n{\"id\":\"x\",\"hypotheses\":[\"a\"]}\n   \n{\"hypotheses\":[\"b\"]}\n");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(*v[0].id, "x");
  EXPECT_FALSE(v[1].id);
}

TEST(ParseJsonl, RoundTrip) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    Instance inst;
    if (rng.below(2)) inst.source = synthetic::random_sentence(1 + rng.below(5), 20, rng);
    if (rng.below(2)) inst.id = "id-" + std::to_string(t);
    const auto nh = 1 + rng.below(5);
    for (std::size_t i = 0; i < nh; ++i) {
      inst.hypotheses.push_back(synthetic::random_sentence(rng.below(6), 10, rng));
    }
    std::vector<std::string> refs;
    const auto nr = 1 + rng.below(6);
    for (std::size_t i = 0; i < nr; ++i) refs.push_back("r" + std::to_string(rng.below(3)));
    inst.references = ReferenceBag(refs);
    if (rng.below(2)) {
      std::vector<double> lp;
      for (const auto& r : refs) lp.push_back(-static_cast<double>(r.back() - '0') * 0.25);
      inst.lprobs = lp;
    }
    auto back = parse(to_jsonl(inst));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], inst) << to_jsonl(inst);
  }
}

TEST(ParsePlain, Blocks) {
  std::istringstream in("a\nb\nc\nd\n");
  auto v = parse_plain(in, 2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1].hypotheses, (std::vector<std::string>{"c", "d"}));
  EXPECT_EQ(v[1].references.items(), v[1].hypotheses);
}

TEST(ParsePlain, NotDivisible) {
  std::istringstream in("a\nb\nc\n");
  try {
    parse_plain(in, 2);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3 not divisible by 2"), std::string::npos);
  }
}

TEST(ParsePlain, Sources) {
  std::istringstream in("a\nb\n");
  std::istringstream src("the source\n");
  auto v = parse_plain(in, 2, &src);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(*v[0].source, "the source");

  std::istringstream in2("a\nb\n");
  std::istringstream src2("x\ny\n");
  EXPECT_THROW(parse_plain(in2, 2, &src2), DataError);
}

TEST(Embeddings, Normalized) {
  std::istringstream in(R"({"text":"a","vector":[3,4]})");
  auto t = load_embeddings(in);
  ASSERT_NE(t.find("a"), nullptr);
  EXPECT_DOUBLE_EQ((*t.find("a"))[0], 0.6);
  EXPECT_DOUBLE_EQ((*t.find("a"))[1], 0.8);
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.find("b"), nullptr);
}

TEST(Embeddings, DimensionMismatch) {
  std::istringstream in("{\"text\":\"a\",\"vector\":[1,0]}\n{\"text\":\"b\",\"vector\":[1,0,0]}\n");
  EXPECT_THROW(load_embeddings(in), DataError);
}

TEST(Embeddings, ZeroVector) {
  std::istringstream in(R"({"text":"a","vector":[0,0]})");
  try {
    load_embeddings(in);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("cannot normalize zero vector"), std::string::npos);
  }
}

TEST(Embeddings, DuplicateLastWins) {
  std::istringstream in("{\"text\":\"a\",\"vector\":[1,0]}\n{\"text\":\"a\",\"vector\":[0,2]}\n");
  std::vector<std::string> warnings;
  auto t = load_embeddings(in, &warnings);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ((*t.find("a"))[1], 1.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(WriteOutputs, Jsonl) {
  std::ostringstream out;
  write_outputs(out, {{{1}, {"Thank you"}, {0.9}}}, OutputMode::kJsonl);
  EXPECT_EQ(out.str(), "{\"idx\":[1],\"sentence\":[\"Thank you\"],\"score\":[0.9]}\n");
}

TEST(WriteOutputs, Text) {
  std::ostringstream out;
  write_outputs(out, {{{1}, {"Thank you"}, {0.9}}, {{0, 1}, {"x", "y"}, {2, 1}}},
                OutputMode::kText);
  EXPECT_EQ(out.str(), "Thank you\nx\n");
}

}  // namespace
}  // namespace mbrkit
