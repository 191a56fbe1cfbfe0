#include "ctgi/ablation.hpp"

#include "ctgi/error.hpp"
#include "ctgi/metrics.hpp"
#include "ctgi/parallel.hpp"

#include <chrono>
#include <cstdio>

namespace ctgi::sim {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ArmMetrics score(std::string name, const std::vector<Ranking>& rankings, const RelevanceMap& relevance, double seconds)
{
    return {std::move(name),
            rank_k_accuracy(rankings, relevance, 1),
            rank_k_accuracy(rankings, relevance, 5),
            rank_k_accuracy(rankings, relevance, 10),
            mean_average_precision(rankings, relevance),
            seconds};
}

} // namespace

AblationResult run_ablation(const World& world, const AblationConfig& config)
{
    const auto& ids = world.identities;
    const std::size_t n = ids.size();
    const AttributeEmbedder embedder(world.schema);
    const mti::TextEmbedder embed = [&](std::string_view t) { return embedder.embed_text(t); };
    const OracleChat oracle(world, config.oracle, OraclePrompts::from(config.mtg, config.mti), config.mti.lexicon);

    AblationResult result;
    result.labels.resize(n);

    auto t0 = Clock::now();
    parallel_for(n, config.jobs, [&](std::size_t i) {
        OracleChat backend = oracle;
        chat::ChatGateway gateway(backend);
        result.labels[i] = mtg::generate_pseudo_label(ids[i].id, config.pool, config.mtg, gateway);
    });
    const double mtg_seconds = since(t0);

    auto rank_static = [&](bool use_final) {
        std::vector<Ranking> out(n);
        parallel_for(n, config.jobs, [&](std::size_t i) {
            const auto& label = result.labels[i];
            out[i] = rank_all(embed(use_final ? label.final_caption : label.static_caption), world.gallery, ids[i].id);
        });
        return out;
    };
    auto run_mti = [&](bool use_final, std::vector<mti::RefinementSession>& sessions) {
        std::vector<Ranking> out(n);
        sessions.assign(n, {});
        parallel_for(n, config.jobs, [&](std::size_t i) {
            OracleChat backend = oracle.bound_to(ids[i].attributes);
            chat::ChatGateway gateway(backend);
            const auto& label = result.labels[i];
            sessions[i] = mti::search(use_final ? label.final_caption : label.static_caption, world.gallery,
                                      config.mti, gateway, embed, ids[i].id);
            out[i] = sessions[i].final_ranking;
        });
        return out;
    };

    result.sessions.resize(2);

    t0 = Clock::now();
    result.rankings.push_back(rank_static(false));
    result.arms.push_back(score("baseline", result.rankings.back(), world.relevance, since(t0)));

    t0 = Clock::now();
    result.rankings.push_back(rank_static(true));
    result.arms.push_back(score("mtg_only", result.rankings.back(), world.relevance, mtg_seconds + since(t0)));

    t0 = Clock::now();
    result.rankings.push_back(run_mti(false, result.sessions[0]));
    result.arms.push_back(score("mti_only", result.rankings.back(), world.relevance, since(t0)));

    t0 = Clock::now();
    result.rankings.push_back(run_mti(true, result.sessions[1]));
    result.arms.push_back(score("mtg_mti", result.rankings.back(), world.relevance, mtg_seconds + since(t0)));

    return result;
}

const ArmMetrics& arm(const AblationResult& result, std::string_view name)
{
    for (const auto& a : result.arms) {
        if (a.arm == name) return a;
    }
    throw Error(Errc::OutOfRange, "no ablation arm '" + std::string(name) + "'");
}

std::string ablation_csv(const std::vector<ArmMetrics>& arms)
{
    std::string out = "arm,rank1,rank5,rank10,map,seconds\n";
    char buf[256];
    for (const auto& a : arms) {
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%.4f,%.3f\n", a.arm.c_str(), a.rank1, a.rank5, a.rank10,
                      a.map, a.seconds);
        out += buf;
    }
    return out;
}

} // namespace ctgi::sim
