#include "test_util.hpp"

#include "ctgi/prompt.hpp"
#include "ctgi/text.hpp"

using namespace ctgi;

TEST(Text, WordsAreLowercaseAlnumRuns)
{
    EXPECT_EQ(text::words("Yes, the person's RED jacket!"),
              (std::vector<std::string>{"yes", "the", "person", "s", "red", "jacket"}));
    EXPECT_TRUE(text::words("  ... ").empty());
}

TEST(Text, Jaccard)
{
    EXPECT_EQ(text::jaccard("a red jacket", "A red JACKET."), 1.0);
    // {wearing, a, red, jacket} vs {carrying, a, black, backpack}: one shared word of seven.
    EXPECT_DOUBLE_EQ(text::jaccard("wearing a red jacket", "carrying a black backpack"), 1.0 / 7.0);
    EXPECT_EQ(text::jaccard("", ""), 1.0);
    EXPECT_EQ(text::jaccard("x", ""), 0.0);
}

TEST(Text, WholeWordSequences)
{
    const auto hay = text::words("A person wearing a red jacket and blue jeans.");
    EXPECT_TRUE(text::contains_words(hay, text::words("red jacket")));
    EXPECT_TRUE(text::contains_words(hay, text::words("blue jeans")));
    EXPECT_FALSE(text::contains_words(hay, text::words("red jeans")));
    EXPECT_FALSE(text::contains_words(text::words("redjacket"), text::words("red jacket")));
    EXPECT_EQ(text::find_words(hay, text::words("a red")), 3u);
    EXPECT_EQ(text::find_words(hay, text::words("green")), std::string::npos);
}

TEST(Text, Helpers)
{
    EXPECT_EQ(text::token_count("  one two\tthree\nfour "), 4u);
    EXPECT_EQ(text::token_count(""), 0u);
    EXPECT_EQ(text::trim(" \t x y \n"), "x y");
    EXPECT_EQ(text::join({"a", "b", "c"}, "-"), "a-b-c");
    EXPECT_EQ(text::join_natural({"a"}), "a");
    EXPECT_EQ(text::join_natural({"a", "b"}), "a and b");
    EXPECT_EQ(text::join_natural({"a", "b", "c"}), "a, b and c");
}

TEST(Prompt, RenderAndMatchAreInverse)
{
    const prompt::Vars vars{{"static", "A person."}, {"enriched", "Yes, a hat. No."}};
    const auto rendered = prompt::render(prompt::kRephrase, vars);
    EXPECT_NE(rendered.find("A person."), std::string::npos);
    EXPECT_NE(rendered.find("Yes, a hat. No."), std::string::npos);
    const auto back = prompt::match(prompt::kRephrase, rendered);
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, vars);
}

TEST(Prompt, MatchRejectsOtherText)
{
    EXPECT_FALSE(prompt::match(prompt::kAlignment, "Describe the person in the image."));
    EXPECT_FALSE(prompt::match(prompt::kVisualQa, "Answer the question about the person in this image."));
    EXPECT_TRUE(prompt::match(prompt::kInitCaption, prompt::kInitCaption));
    EXPECT_EQ(prompt::render("{a}-{b}-{a}", {{"a", "1"}}), "1-{b}-1");
}
