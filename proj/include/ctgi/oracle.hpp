#pragma once

#include "ctgi/chat.hpp"
#include "ctgi/mtg.hpp"
#include "ctgi/mti.hpp"
#include "ctgi/sim_world.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctgi::sim {

struct OracleConfig {
    std::uint64_t seed = 7;
    /// Probability that an alignment judgment is inverted. Only alignment
    /// judgments are noisy; attribute answers are always truthful.
    double yes_no_error_rate = 0.1;
    /// Attributes rendered in an initial caption.
    std::size_t caption_attributes = 2;
    std::string caption_template = "A person wearing {attributes}.";
    std::string answer_template = "Yes, the person has {attributes}.";
    std::string negative_answer = "No, the person does not.";
    std::string unknown_answer = "I don't know.";
    std::string match_answer = "Yes, the person matches the description.";
    std::string mismatch_answer = "No, the person does not match the description.";
    std::size_t noise_table_size = 1 << 16;

    void validate() const;
};

/// The prompt texts the oracle recognizes, one per model role.
struct OraclePrompts {
    std::string init_caption{prompt::kInitCaption};
    std::string rephrase{prompt::kRephrase};
    std::string alignment{prompt::kAlignment};
    std::string vqa{prompt::kVisualQa};
    std::string aggregate{prompt::kAggregate};

    static OraclePrompts from(const mtg::MTGConfig& mtg, const mti::MTIConfig& mti);
};

/// Truthful simulated model over a World. It recognizes each request by the
/// prompt that produced it and answers from ground-truth attributes:
///  - init caption: `caption_attributes` seeded attributes of the image;
///  - question about the image: yes/no on a named attribute, or the value of
///    the asked category, or "I don't know";
///  - alignment judgment: candidate attributes contain the target
///    attributes, inverted with probability yes_no_error_rate;
///  - rephrase/aggregate: the deduplicated attribute mentions of both inputs
///    rendered through the caption template.
/// The noise stream is drawn into a fixed table up front and indexed by a
/// hash of (query, image), so answers do not depend on call order.
class OracleChat final : public chat::ChatBackend {
public:
    OracleChat(const World& world, OracleConfig config, OraclePrompts prompts = {},
               mti::CategoryLexicon lexicon = mti::default_lexicon());

    /// Copy whose alignment target is `subject_attributes` (the full
    /// attribute set of the person being searched for) rather than the
    /// attributes mentioned in the query text.
    OracleChat bound_to(std::vector<std::string> subject_attributes) const;

    std::string complete(std::span<const chat::ChatMessage> messages) override;
    std::string_view kind() const noexcept override { return "oracle"; }

    std::string caption_for(const std::string& image_id) const;
    std::string answer_question(const std::string& image_id, const std::string& question) const;
    bool truthful_alignment(const std::string& query_text, const std::string& image_id) const;
    bool flipped(const std::string& query_text, const std::string& image_id) const;
    bool judge(const std::string& query_text, const std::string& image_id) const;
    std::string combine(const std::string& first, const std::string& second) const;

    const OracleConfig& config() const noexcept { return state_->config; }

private:
    struct State {
        AttributeSchema schema;
        OracleConfig config;
        OraclePrompts prompts;
        mti::CategoryLexicon lexicon;
        std::unordered_map<std::string, std::vector<std::string>> attributes;
        std::vector<double> noise;
    };

    const std::vector<std::string>& attributes_of(const std::string& image_id) const;
    std::string render_attributes(const std::vector<std::string>& attrs) const;

    std::shared_ptr<const State> state_;
    std::optional<std::vector<std::string>> subject_;
};

} // namespace ctgi::sim
