#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ctgi::prompt {

using Vars = std::map<std::string, std::string>;

/// Replaces each `{name}` with vars[name]. Unknown placeholders are left as is.
std::string render(std::string_view tmpl, const Vars& vars);

/// Inverse of render: if `text` could have been produced by `tmpl`, returns
/// the placeholder values. Literals are matched left to right, first
/// occurrence wins; the final literal must be a suffix.
std::optional<Vars> match(std::string_view tmpl, std::string_view text);

// Default prompts for every model call site.
inline constexpr std::string_view kInitCaption = "Describe the person in the image.";
inline constexpr std::string_view kRephrase =
    "Initial description: {static}\n"
    "Details from the conversation: {enriched}\n"
    "Rephrase the description using all the above information.";
inline constexpr std::string_view kAlignment =
    "Does the person in this image match the following description? Answer yes or no.\n"
    "Description: {query}";
inline constexpr std::string_view kVisualQa = "Answer the question about the person in this image.\nQuestion: {question}";
inline constexpr std::string_view kAggregate =
    "Original query: {query}\n"
    "Observed details: {details}\n"
    "Merge the observed details into the query as one description of the person.";

} // namespace ctgi::prompt
