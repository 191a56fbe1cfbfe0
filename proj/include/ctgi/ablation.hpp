#pragma once

#include "ctgi/mtg.hpp"
#include "ctgi/mti.hpp"
#include "ctgi/oracle.hpp"
#include "ctgi/ranking.hpp"
#include "ctgi/sim_world.hpp"

#include <string>
#include <vector>

namespace ctgi::sim {

struct AblationConfig {
    mtg::MTGConfig mtg;
    mti::MTIConfig mti;
    OracleConfig oracle;
    mtg::QuestionPool pool = mtg::QuestionPool::defaults();
    /// Queries processed concurrently.
    int jobs = 1;
};

struct ArmMetrics {
    std::string arm;
    double rank1 = 0.0;
    double rank5 = 0.0;
    double rank10 = 0.0;
    double map = 0.0;
    double seconds = 0.0;
};

struct AblationResult {
    /// baseline, mtg_only, mti_only, mtg_mti, in that order.
    std::vector<ArmMetrics> arms;
    std::vector<mtg::PseudoLabel> labels;
    /// Final rankings per arm, parallel to `arms`, one per identity.
    std::vector<std::vector<Ranking>> rankings;
    /// MTI sessions for the two MTI arms (mti_only, mtg_mti).
    std::vector<std::vector<mti::RefinementSession>> sessions;
};

/// Four-arm ablation over a simulated world. Every identity yields one query:
/// its initial caption (baseline, MTI-only) or its final pseudo-caption
/// (MTG-only, MTG+MTI). MTI arms search with an oracle bound to the queried
/// identity.
AblationResult run_ablation(const World& world, const AblationConfig& config);

const ArmMetrics& arm(const AblationResult& result, std::string_view name);

/// CSV "arm,rank1,rank5,rank10,map,seconds".
std::string ablation_csv(const std::vector<ArmMetrics>& arms);

} // namespace ctgi::sim
