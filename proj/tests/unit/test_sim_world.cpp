#include "sim_fixtures.hpp"
#include "test_util.hpp"

#include "ctgi/ablation.hpp"
#include "ctgi/gallery.hpp"
#include "ctgi/io.hpp"
#include "ctgi/mti.hpp"
#include "ctgi/oracle.hpp"
#include "ctgi/text.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace ctgi;
using namespace ctgi::sim;

namespace {

std::string full_caption(const SimIdentity& identity)
{
    return "A person wearing " + text::join_natural(identity.attributes) + ".";
}

/// log P(X = k) for X ~ Binomial(n, p).
double log_binom_pmf(int n, int k, double p)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p)
           + (n - k) * std::log1p(-p);
}

} // namespace

TEST(AttributeSchema, DefaultsAndValidation)
{
    const auto schema = AttributeSchema::defaults();
    EXPECT_EQ(schema.categories().size(), 6u);
    for (const auto& [name, values] : schema.categories()) EXPECT_EQ(values.size(), 5u) << name;
    EXPECT_EQ(schema.size(), 30u);
    EXPECT_EQ(schema.combinations(), 15625u);

    EXPECT_ERRC(AttributeSchema({{"a", {"x", "y", "z"}}, {"b", {"u", "v", "w"}}, {"c", {"p", "q", "r"}}}),
                Errc::InvalidSchema);
    EXPECT_ERRC(AttributeSchema({{"a", {"x", "y"}}, {"b", {"u", "v", "w"}}, {"c", {"p", "q", "r"}}, {"d", {"1", "2", "3"}}}),
                Errc::InvalidSchema);
    EXPECT_ERRC(AttributeSchema({{"a", {"x", "y", "z"}}, {"b", {"x", "v", "w"}}, {"c", {"p", "q", "r"}}, {"d", {"1", "2", "3"}}}),
                Errc::InvalidSchema);
}

TEST(AttributeSchema, JsonRoundTripKeepsOrder)
{
    const auto schema = fixtures::small_schema();
    const auto back = AttributeSchema::parse_json(schema.to_json());
    EXPECT_EQ(back.categories(), schema.categories());
    EXPECT_ERRC(AttributeSchema::parse_json("[1,2]"), Errc::InvalidSchema);
    EXPECT_ERRC(AttributeSchema::parse_json("{"), Errc::ParseError);
}

TEST(AttributeSchema, MentionedByFirstOccurrence)
{
    const auto schema = AttributeSchema::defaults();
    EXPECT_EQ(schema.mentioned("Blue jeans, then a red jacket; blue jeans again."),
              (std::vector<std::string>{"blue jeans", "a red jacket"}));
    EXPECT_TRUE(schema.mentioned("a person").empty());
}

TEST(GenerateWorld, DefaultWorldShape)
{
    const auto world = generate_world(7, 200, AttributeSchema::defaults());
    ASSERT_EQ(world.identities.size(), 200u);
    EXPECT_EQ(world.gallery.size(), 200u);
    std::set<std::vector<std::string>> combos;
    for (const auto& identity : world.identities) {
        EXPECT_NEAR(identity.image_embedding.norm(), 1.0, 1e-12);
        ASSERT_EQ(identity.attributes.size(), 6u);
        for (std::size_t c = 0; c < 6; ++c) {
            const auto& values = world.schema.categories()[c].second;
            EXPECT_NE(std::find(values.begin(), values.end(), identity.attributes[c]), values.end());
        }
        combos.insert(identity.attributes);
        EXPECT_EQ(world.relevance.at(identity.id), std::set<std::string>{identity.id});
    }
    EXPECT_EQ(combos.size(), 200u);
    EXPECT_EQ(world.identities.front().id, "id0000");
}

TEST(GenerateWorld, DeterministicFiles)
{
    testutil::TempDir a, b;
    save_world(generate_world(7, 50, AttributeSchema::defaults()), a.path());
    save_world(generate_world(7, 50, AttributeSchema::defaults()), b.path());
    for (const char* f : {"gallery.jsonl", "ground_truth.json", "schema.json"}) {
        EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
    }
    testutil::TempDir c;
    save_world(generate_world(8, 50, AttributeSchema::defaults()), c.path());
    EXPECT_NE(io::read_file(a / "gallery.jsonl"), io::read_file(c / "gallery.jsonl"));

    const auto back = load_world(a.path());
    EXPECT_EQ(back.identities.size(), 50u);
    EXPECT_EQ(gallery_to_jsonl(back.gallery), io::read_file(a / "gallery.jsonl"));
}

TEST(GenerateWorld, SchemaTooSmall)
{
    const auto schema = fixtures::small_schema();
    EXPECT_EQ(generate_world(1, 81, schema).identities.size(), 81u);
    EXPECT_ERRC(generate_world(1, 82, schema), Errc::SchemaTooSmall);
    EXPECT_ERRC(generate_world(1, 1, schema), Errc::SchemaTooSmall);
}

TEST(Embedder, Examples)
{
    const auto world = generate_world(7, 200, AttributeSchema::defaults());
    const AttributeEmbedder embedder(world.schema);
    for (const auto& identity : world.identities) {
        EXPECT_NEAR(cosine(embedder.embed_text(full_caption(identity)), identity.image_embedding), 1.0, 1e-12);
        const auto two = "A person with " + identity.attributes[1] + " and " + identity.attributes[4] + ".";
        EXPECT_NEAR(cosine(embedder.embed_text(two), identity.image_embedding), 2.0 / std::sqrt(12.0), 1e-12);
    }
    EXPECT_NEAR(2.0 / std::sqrt(12.0), 0.577, 1e-3);
    EXPECT_TRUE(embedder.embed_text("a person standing there").is_zero());
    EXPECT_ERRC(cosine(embedder.embed_text("nothing"), world.identities[0].image_embedding), Errc::ZeroVector);
    const std::vector<std::string> bogus{"a purple cape"};
    EXPECT_ERRC(embedder.embed_attributes(bogus), Errc::InvalidSchema);
}

TEST(Embedder, FullCaptionPrefersItsOwnIdentity)
{
    const auto world = generate_world(7, 200, AttributeSchema::defaults());
    const AttributeEmbedder embedder(world.schema);
    for (const auto& x : world.identities) {
        const auto q = embedder.embed_text(full_caption(x));
        const double own = cosine(q, x.image_embedding);
        for (const auto& y : world.identities) {
            if (y.id != x.id) {
                EXPECT_LT(cosine(q, y.image_embedding), own);
            }
        }
    }
}

TEST(Embedder, TruthfulAdditionsNeverHurt)
{
    const auto world = generate_world(5, 100, AttributeSchema::defaults());
    const AttributeEmbedder embedder(world.schema);
    std::mt19937_64 rng(1);
    for (const auto& x : world.identities) {
        auto order = x.attributes;
        std::shuffle(order.begin(), order.end(), rng);
        double prev = 0.0;
        std::vector<std::string> partial;
        for (const auto& a : order) {
            partial.push_back(a);
            const double c = cosine(embedder.embed_attributes(partial), x.image_embedding);
            EXPECT_GE(c, prev - 1e-15);
            prev = c;
        }
    }
}

TEST(Oracle, TruthfulJudgmentIsSupersetTest)
{
    const auto world = generate_world(7, 60, AttributeSchema::defaults());
    OracleConfig cfg;
    cfg.yes_no_error_rate = 0.0;
    OracleChat oracle(world, cfg);
    cfg.yes_no_error_rate = 1.0;
    OracleChat inverted(world, cfg);
    for (const auto& q : world.identities) {
        const auto text = "A person wearing " + q.attributes[0] + " and " + q.attributes[3] + ".";
        for (const auto& c : world.identities) {
            const bool superset = std::find(c.attributes.begin(), c.attributes.end(), q.attributes[0]) != c.attributes.end()
                                  && std::find(c.attributes.begin(), c.attributes.end(), q.attributes[3])
                                         != c.attributes.end();
            EXPECT_EQ(oracle.judge(text, c.id), superset);
            EXPECT_EQ(inverted.judge(text, c.id), !superset);
        }
    }
}

TEST(Oracle, FlipRateWithinBinomialInterval)
{
    // Independent check that [73, 127] holds at least 99% of Binomial(1000, 0.1).
    double mass = 0.0;
    for (int k = 73; k <= 127; ++k) mass += std::exp(log_binom_pmf(1000, k, 0.1));
    ASSERT_GE(mass, 0.99);

    const auto world = generate_world(7, 200, AttributeSchema::defaults());
    OracleChat oracle(world, OracleConfig{});
    int flips = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto& identity = world.identities[std::size_t(i) % 200];
        const auto query = "query " + std::to_string(i / 200) + ": " + identity.attributes[0];
        if (oracle.flipped(query, identity.id)) ++flips;
    }
    EXPECT_GE(flips, 73);
    EXPECT_LE(flips, 127);
}

TEST(Oracle, NoiseIsOrderIndependentAndSeeded)
{
    const auto world = generate_world(7, 30, AttributeSchema::defaults());
    OracleChat a(world, OracleConfig{});
    OracleChat b(world, OracleConfig{});
    std::vector<bool> forward, backward;
    for (const auto& x : world.identities) forward.push_back(a.judge("q " + x.attributes[0], x.id));
    for (auto it = world.identities.rbegin(); it != world.identities.rend(); ++it) {
        backward.insert(backward.begin(), b.judge("q " + it->attributes[0], it->id));
    }
    EXPECT_EQ(forward, backward);
}

TEST(Oracle, AnswersAndPromptsDispatch)
{
    const auto world = fixtures::world_of(fixtures::small_schema(),
                                          {{"p", {"a red jacket", "jeans", "brown boots", "sunglasses"}},
                                           {"r", {"a white shirt", "a gray skirt", "white sneakers", "a straw hat"}}});
    OracleChat oracle(world, OracleConfig{});
    EXPECT_EQ(oracle.answer_question("p", "Is the person wearing sunglasses?"), "Yes, the person has sunglasses.");
    EXPECT_EQ(oracle.answer_question("r", "Is the person wearing sunglasses?"), "No, the person does not.");
    EXPECT_EQ(oracle.answer_question("p", "What kind of shoes is the person wearing?"), "Yes, the person has brown boots.");
    EXPECT_EQ(oracle.answer_question("p", "What is the weather like?"), "I don't know.");
    EXPECT_ERRC(oracle.answer_question("nobody", "x"), Errc::UnknownImage);
    EXPECT_EQ(oracle.combine("A person wearing jeans.", "Yes, the person has jeans. Yes, the person has sunglasses."),
              "A person wearing jeans and sunglasses.");
    EXPECT_EQ(oracle.combine("A person.", "nothing"), "A person.");

    chat::ChatGateway gw(oracle);
    EXPECT_EQ(gw.chat({chat::user("Describe the person in the image.", "p")}), oracle.caption_for("p"));
    EXPECT_EQ(gw.chat({chat::user(prompt::render(prompt::kAggregate, {{"query", "A person in jeans."},
                                                                       {"details", "Yes, the person has brown boots."}}))}),
              "A person wearing jeans and brown boots.");
}

TEST(Oracle, BoundJudgeUsesSubjectAttributes)
{
    const auto world = generate_world(9, 200, AttributeSchema::defaults());
    OracleConfig cfg;
    cfg.yes_no_error_rate = 0.0;
    OracleChat oracle(world, cfg);
    const auto& x = world.identities[17];
    const auto bound = oracle.bound_to(x.attributes);
    const auto query = "A person wearing " + x.attributes[0] + ".";
    for (const auto& c : world.identities) EXPECT_EQ(bound.judge(query, c.id), c.id == x.id);
}

TEST(Oracle, TruthfulAnchorFindsSubjectWhenInTopK)
{
    const auto world = generate_world(7, 200, AttributeSchema::defaults());
    const AttributeEmbedder embedder(world.schema);
    OracleConfig cfg;
    cfg.yes_no_error_rate = 0.0;
    OracleChat oracle(world, cfg);
    const mti::MTIConfig mcfg;
    for (const auto& x : world.identities) {
        const auto query = oracle.caption_for(x.id);
        const auto emb = embedder.embed_text(query);
        const auto top = top_k(emb, world.gallery, mcfg.top_k);
        const bool in_top = std::any_of(top.entries.begin(), top.entries.end(),
                                        [&](const RankEntry& e) { return e.item_id == x.id; });
        auto bound = oracle.bound_to(x.attributes);
        chat::ChatGateway gw(bound);
        const auto anchor = mti::find_anchor(query, emb, world.gallery, mcfg, gw);
        if (in_top) {
            EXPECT_EQ(anchor.anchor_id, x.id);
        }
    }
}

TEST(Ablation, ShapeAndDeterminism)
{
    const auto world = generate_world(7, 40, AttributeSchema::defaults());
    AblationConfig cfg;
    const auto a = run_ablation(world, cfg);
    ASSERT_EQ(a.arms.size(), 4u);
    EXPECT_EQ(a.arms[0].arm, "baseline");
    EXPECT_EQ(a.arms[1].arm, "mtg_only");
    EXPECT_EQ(a.arms[2].arm, "mti_only");
    EXPECT_EQ(a.arms[3].arm, "mtg_mti");
    ASSERT_EQ(a.rankings.size(), 4u);
    for (const auto& r : a.rankings) EXPECT_EQ(r.size(), 40u);
    EXPECT_EQ(a.labels.size(), 40u);

    const auto csv = ablation_csv(a.arms);
    const auto lines = io::read_lines([&] {
        static testutil::TempDir dir;
        io::write_file_atomic(dir / "a.csv", csv);
        return dir / "a.csv";
    }());
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "arm,rank1,rank5,rank10,map,seconds");

    cfg.jobs = 3;
    const auto b = run_ablation(world, cfg);
    EXPECT_EQ(a.rankings, b.rankings);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(arm(a, "mtg_mti").rank1, arm(b, "mtg_mti").rank1);
    EXPECT_ERRC(arm(a, "w/o pes"), Errc::OutOfRange);
}

TEST(Ablation, PerfectOracleAnchorsEveryQuery)
{
    const auto world = generate_world(3, 60, AttributeSchema::defaults());
    AblationConfig cfg;
    cfg.oracle.yes_no_error_rate = 0.0;
    const auto result = run_ablation(world, cfg);
    EXPECT_EQ(arm(result, "mtg_mti").rank1, 1.0);
    for (const auto& s : result.sessions[1]) {
        EXPECT_EQ(s.final_ranking.entries[0].item_id, s.query_id);
    }
}
