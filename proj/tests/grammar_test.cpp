#include <set>
#include <string>

#include <gtest/gtest.h>

#include "talkitout/grammar.hpp"

using namespace talkitout;

TEST(Grammar, RendersTableSentences) {
  EXPECT_EQ(render({0, 1}), "Where is the exit.");
  EXPECT_EQ(render({1, 0}), "Open sesame.");
  EXPECT_EQ(render({3, 10}), "What is oven.");
  EXPECT_EQ(render({2, 12}), "Close the trash can.");
}

TEST(Grammar, RenderRejectsOutOfRange) {
  EXPECT_THROW(render({4, 0}), InvalidIndexError);
  EXPECT_THROW(render({0, 16}), InvalidIndexError);
  EXPECT_THROW(render({-1, 3}), InvalidIndexError);
}

TEST(Grammar, ParseKnownSentences) {
  EXPECT_EQ(parse("Where is the exit."), (Utterance{0, 1}));
  EXPECT_EQ(parse("Open sesame."), (Utterance{1, 0}));
}

TEST(Grammar, ParseRejectsForeignText) {
  EXPECT_THROW(parse("hello world"), ParseError);
  EXPECT_THROW(parse("Open sesame"), ParseError);  // no period: not a rendering
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_FALSE(try_parse("What is the oven.").has_value());
}

TEST(Grammar, RoundTripAndInjectivity) {
  std::set<std::string> seen;
  for (int t = 0; t < kNumTemplates; ++t) {
    for (int n = 0; n < kNumNouns; ++n) {
      const Utterance u{t, n};
      const auto text = render(u);
      EXPECT_EQ(parse(text), u);
      EXPECT_TRUE(seen.insert(text).second) << text;
    }
  }
  EXPECT_EQ(seen.size(), 64u);
}

TEST(Grammar, VocabularyOrder) {
  const auto v = vocabulary();
  ASSERT_EQ(v.size(), 64u);
  EXPECT_EQ(v.front(), "Where is sesame.");
  EXPECT_EQ(v.back(), "What is the sofa.");
  EXPECT_EQ(v[1 * kNumNouns + 0], "Open sesame.");
  EXPECT_EQ(std::set<std::string>(v.begin(), v.end()).size(), 64u);
}

TEST(Grammar, HeardLineFormat) {
  const HeardLine line{"Wizard", "Ask John."};
  EXPECT_EQ(line.serialize(), "Wizard: Ask John.");
  EXPECT_EQ(HeardLine::deserialize("Jack: Go to the red door."), (HeardLine{"Jack", "Go to the red door."}));
  EXPECT_THROW(HeardLine::deserialize("no prefix"), ParseError);
}
