#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "ivlab/answer.hpp"
#include "ivlab/prompts.hpp"

using namespace ivlab;

TEST(Answer, SplitsListAfterReasoning) {
  auto parts = split_answer("reasoning goes here. Answer = [a, b]");
  EXPECT_EQ(parts.body, "a, b");
  EXPECT_EQ(parts.rationale, "reasoning goes here.");
  EXPECT_EQ(parse_list(parts.body), (std::vector<std::string>{"a", "b"}));
}

TEST(Answer, VerdictWithSpaces) {
  EXPECT_EQ(parse_verdict(split_answer("Answer=[ Valid ]").body), Verdict::Valid);
  EXPECT_EQ(parse_verdict(split_answer("answer: [INVALID]").body), Verdict::Invalid);
  EXPECT_IVLAB_ERROR(parse_verdict("Maybe"), ErrorCode::Parse);
}

TEST(Answer, LastMarkerWins) {
  auto parts = split_answer("First guess Answer = [1]. On reflection, Answer = [3]");
  EXPECT_EQ(parse_choice(parts.body, 1, 4), 3);
}

TEST(Answer, MarkerWithoutBrackets) {
  EXPECT_EQ(split_answer("Answer = Keep\nthanks").body, "Keep");
}

TEST(Answer, MissingMarkerKeepsRawText) {
  try {
    split_answer("I cannot decide.");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_EQ(e.raw(), "I cannot decide.");
  }
}

TEST(Answer, ListCleanup) {
  EXPECT_EQ(parse_list("1. \"rainfall\", 2) Tariffs, rainfall, , 'rail density'"),
            (std::vector<std::string>{"rainfall", "Tariffs", "rail density"}));
  EXPECT_TRUE(parse_list("").empty());
}

TEST(Answer, ChoiceRange) {
  EXPECT_EQ(parse_choice("4", 1, 4), 4);
  EXPECT_IVLAB_ERROR(parse_choice("5", 1, 4), ErrorCode::Parse);
  EXPECT_IVLAB_ERROR(parse_choice("0", 1, 10), ErrorCode::Parse);
  EXPECT_IVLAB_ERROR(parse_choice("seven", 1, 10), ErrorCode::Parse);
}

TEST(Answer, Keep) {
  EXPECT_TRUE(parse_keep("Keep"));
  EXPECT_FALSE(parse_keep(" drop "));
  EXPECT_IVLAB_ERROR(parse_keep("perhaps"), ErrorCode::Parse);
}

TEST(Prompts, BuiltinTemplatesRenderCompletely) {
  auto set = TemplateSet::builtin();
  ASSERT_FALSE(set.names().empty());
  for (const auto& name : set.names()) {
    std::map<std::string, std::string> values;
    for (const auto& key : placeholders(set.text(name))) values[key] = "value_" + key;
    const std::string out = set.render(name, values);
    EXPECT_TRUE(placeholders(out).empty()) << name;
    EXPECT_EQ(out.find("{T}"), std::string::npos);
  }
}

TEST(Prompts, MissingValueIsStateError) {
  auto set = TemplateSet::builtin();
  EXPECT_IVLAB_ERROR(set.render("exclusion", {{"T", "a"}}), ErrorCode::State);
  EXPECT_IVLAB_ERROR(set.text("no_such_template"), ErrorCode::Lookup);
}

TEST(Prompts, DirectoryOverridesBuiltin) {
  auto dir = fixture::scratch_dir("prompts");
  {
    std::ofstream(dir / "exclusion.txt") << "Is {Z} excluded for {T} -> {Y}? Answer = [Valid / Invalid]";
  }
  auto set = TemplateSet::from_directory(dir.string());
  EXPECT_EQ(set.render("exclusion", {{"Z", "rain"}, {"T", "a"}, {"Y", "b"}}),
            "Is rain excluded for a -> b? Answer = [Valid / Invalid]");
  EXPECT_NO_THROW(set.text("instruments"));
}
