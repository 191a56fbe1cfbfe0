#include "ctgi/cli.hpp"

#include "ctgi/ablation.hpp"
#include "ctgi/chat.hpp"
#include "ctgi/error.hpp"
#include "ctgi/gallery.hpp"
#include "ctgi/http_backend.hpp"
#include "ctgi/io.hpp"
#include "ctgi/metrics.hpp"
#include "ctgi/mtg.hpp"
#include "ctgi/mti.hpp"
#include "ctgi/oracle.hpp"
#include "ctgi/pe_stretch.hpp"
#include "ctgi/sim_world.hpp"
#include "ctgi/text.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifndef CTGI_VERSION
#define CTGI_VERSION "0.0.0"
#endif

namespace ctgi::cli {

std::string version()
{
    return CTGI_VERSION;
}

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// A command-line option whose presence is tracked separately from its value.
template <class T>
struct Flag {
    T value{};
    CLI::Option* opt = nullptr;

    std::optional<T> given() const
    {
        return opt && opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
    }
};

template <class T>
CLI::Option* add(CLI::App& app, const std::string& name, Flag<T>& flag, const std::string& help)
{
    flag.opt = app.add_option(name, flag.value, help);
    return flag.opt;
}

/// Dotted key -> raw value from a TOML/INI style config file.
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile load(const fs::path& path)
    {
        if (!fs::is_regular_file(path)) throw Error(Errc::IOError, "cannot open config " + path.string());
        ConfigFile cfg;
        for (const auto& item : CLI::ConfigTOML().from_file(path.string())) {
            if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
            cfg.values_[item.fullname()] = item.inputs.front();
        }
        return cfg;
    }

    std::optional<std::string> get(const std::string& key) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? std::nullopt : std::optional<std::string>(it->second);
    }

private:
    std::map<std::string, std::string> values_;
};

template <class T>
T parse_value(const std::string& key, const std::string& raw)
{
    if constexpr (std::is_same_v<T, std::string>) {
        return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
        const auto v = text::to_lower(raw);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error(Errc::UsageError, "bad boolean for " + key + ": " + raw);
    } else {
        std::istringstream in(raw);
        T out{};
        in >> out;
        if (!in || !(in >> std::ws).eof()) throw Error(Errc::UsageError, "bad value for " + key + ": " + raw);
        return out;
    }
}

/// Resolves settings with precedence flag > environment > config file >
/// built-in default, and records every resolved value for the manifest.
class Settings {
public:
    explicit Settings(ConfigFile file) : file_(std::move(file)) {}

    template <class T>
    T get(const std::string& key, const std::optional<T>& flag, T fallback, const char* env = nullptr,
          bool secret = false)
    {
        T value = fallback;
        if (flag) {
            value = *flag;
        } else if (const char* e = env ? std::getenv(env) : nullptr; e && *e) {
            value = parse_value<T>(key, e);
        } else if (auto raw = file_.get(key)) {
            value = parse_value<T>(key, *raw);
        }
        snapshot_[key] = secret ? Json("<redacted>") : Json(value);
        return value;
    }

    template <class T>
    std::optional<T> get_optional(const std::string& key, const std::optional<T>& flag, const char* env = nullptr,
                                  bool secret = false)
    {
        std::optional<T> value = flag;
        if (!value) {
            if (const char* e = env ? std::getenv(env) : nullptr; e && *e) {
                value = parse_value<T>(key, e);
            } else if (auto raw = file_.get(key)) {
                value = parse_value<T>(key, *raw);
            }
        }
        if (value) snapshot_[key] = secret ? Json("<redacted>") : Json(*value);
        return value;
    }

    const Json& snapshot() const { return snapshot_; }

private:
    ConfigFile file_;
    Json snapshot_ = Json::object();
};

struct Manifest {
    std::string command_line;
    Json seeds = Json::object();
    std::string backend;
    std::string transcript;
};

void write_manifest(const fs::path& path, const Manifest& m, const Settings& settings, double seconds)
{
    Json j;
    j["command_line"] = m.command_line;
    j["config"] = settings.snapshot();
    j["seeds"] = m.seeds;
    j["backend"] = m.backend;
    j["transcript"] = m.transcript;
    j["version"] = version();
    j["duration_seconds"] = seconds;
    io::write_file_atomic(path, j.dump(2) + "\n");
}

fs::path manifest_for(const fs::path& output)
{
    auto p = output;
    p += ".manifest.json";
    return p;
}

// Options shared by the commands that talk to a chat backend.
struct BackendFlags {
    Flag<std::string> kind;
    Flag<std::string> transcript;
    Flag<std::string> endpoint;
    Flag<std::string> model;
    Flag<double> temperature;
    Flag<int> max_retries;
    Flag<int> timeout_ms;
    Flag<std::string> image_root;
    Flag<std::string> script;
    Flag<std::string> schema;
    Flag<std::uint64_t> seed;
    Flag<double> error_rate;
    Flag<std::string> subject;

    void attach(CLI::App& app)
    {
        add(app, "--backend", kind, "Chat backend: http|scripted|oracle|replay");
        add(app, "--transcript", transcript, "Transcript to record into (or to replay from with --backend replay)");
        add(app, "--endpoint", endpoint, "Chat-completions URL for the http backend (env CTGI_ENDPOINT)");
        add(app, "--model", model, "Model name for the http backend");
        add(app, "--temperature", temperature, "Sampling temperature (default 0.01)");
        add(app, "--max-retries", max_retries, "Transport retries for the http backend");
        add(app, "--timeout-ms", timeout_ms, "Per-request timeout for the http backend");
        add(app, "--image-root", image_root, "Directory holding gallery images for the http backend");
        add(app, "--script", script, "Script file for the scripted backend");
        add(app, "--schema", schema, "Attribute schema JSON (default: built-in schema)");
        add(app, "--seed", seed, "Oracle seed");
        add(app, "--error-rate", error_rate, "Oracle alignment-judgment error rate");
        add(app, "--subject", subject, "Bind the oracle's alignment judge to this gallery identity");
    }
};

struct BackendHandle {
    std::unique_ptr<chat::ChatBackend> backend;
    std::unique_ptr<chat::Transcript> transcript;
    chat::BackendKind kind = chat::BackendKind::Scripted;
};

sim::AttributeSchema resolve_schema(Settings& s, const BackendFlags& f)
{
    const auto path = s.get_optional<std::string>("world.schema", f.schema.given());
    return path ? sim::AttributeSchema::load(*path) : sim::AttributeSchema::defaults();
}

BackendHandle make_backend(Settings& s, const BackendFlags& f, const Gallery& gallery,
                           const sim::AttributeSchema& schema, const mtg::MTGConfig& mtg_cfg,
                           const mti::MTIConfig& mti_cfg, Manifest& manifest)
{
    BackendHandle h;
    h.kind = chat::parse_kind(s.get<std::string>("backend.kind", f.kind.given(), "oracle"));
    manifest.backend = std::string(chat::kind_name(h.kind));
    const auto transcript = s.get_optional<std::string>("backend.transcript", f.transcript.given());
    manifest.transcript = transcript.value_or("");

    switch (h.kind) {
    case chat::BackendKind::Http: {
        chat::ChatBackendConfig cfg;
        cfg.kind = chat::BackendKind::Http;
        cfg.endpoint = s.get_optional<std::string>("backend.endpoint", f.endpoint.given(), "CTGI_ENDPOINT");
        cfg.model_name = s.get_optional<std::string>("backend.model", f.model.given());
        cfg.api_key = s.get_optional<std::string>("backend.api_key", std::optional<std::string>{}, "CTGI_API_KEY", true);
        cfg.temperature = s.get<double>("backend.temperature", f.temperature.given(), 0.01);
        cfg.max_retries = s.get<int>("backend.max_retries", f.max_retries.given(), 3);
        cfg.timeout = std::chrono::milliseconds(s.get<int>("backend.timeout_ms", f.timeout_ms.given(), 60000));
        if (auto root = s.get_optional<std::string>("backend.image_root", f.image_root.given())) cfg.image_root = *root;
        h.backend = std::make_unique<chat::HttpBackend>(cfg);
        break;
    }
    case chat::BackendKind::Scripted: {
        const auto script = s.get_optional<std::string>("backend.script", f.script.given());
        if (!script) throw Error(Errc::UsageError, "--backend scripted needs --script");
        h.backend = chat::ScriptedBackend::load(*script);
        break;
    }
    case chat::BackendKind::Oracle: {
        sim::OracleConfig cfg;
        cfg.seed = s.get<std::uint64_t>("oracle.seed", f.seed.given(), cfg.seed);
        cfg.yes_no_error_rate = s.get<double>("oracle.error_rate", f.error_rate.given(), cfg.yes_no_error_rate);
        manifest.seeds["oracle"] = cfg.seed;
        const auto world = sim::world_from_gallery(gallery, schema);
        sim::OracleChat oracle(world, cfg, sim::OraclePrompts::from(mtg_cfg, mti_cfg), mti_cfg.lexicon);
        if (auto subject = s.get_optional<std::string>("oracle.subject", f.subject.given())) {
            const auto* identity = world.find(*subject);
            if (!identity) throw Error(Errc::UnknownImage, "no identity '" + *subject + "'");
            h.backend = std::make_unique<sim::OracleChat>(oracle.bound_to(identity->attributes));
        } else {
            h.backend = std::make_unique<sim::OracleChat>(std::move(oracle));
        }
        break;
    }
    case chat::BackendKind::Replay:
        if (!transcript) throw Error(Errc::UsageError, "--backend replay needs --transcript");
        h.backend = chat::ReplayBackend::load(*transcript);
        return h;
    }

    h.transcript = std::make_unique<chat::Transcript>(
        h.kind == chat::BackendKind::Http ? chat::Transcript::Clock::Wall : chat::Transcript::Clock::Logical);
    if (transcript) h.transcript->record_to(*transcript);
    return h;
}

std::string joined_command_line(int argc, const char* const* argv)
{
    std::vector<std::string> parts(argv, argv + argc);
    return text::join(parts, " ");
}

RelevanceMap load_truth(const fs::path& path)
{
    RelevanceMap out;
    try {
        const auto j = nlohmann::json::parse(io::read_file(path));
        for (const auto& [key, value] : j.items()) {
            auto ids = value.is_array() ? value.get<std::vector<std::string>>()
                                        : std::vector<std::string>{value.get<std::string>()};
            out[key] = std::set<std::string>(ids.begin(), ids.end());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
    return out;
}

std::vector<Ranking> load_rankings(const fs::path& path)
{
    std::vector<Ranking> out;
    const auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(lines[i]);
            out.push_back(j.contains("final_ranking") ? j.at("final_ranking").get<Ranking>() : j.get<Ranking>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string rankings_jsonl(const std::vector<Ranking>& rankings)
{
    std::string out;
    for (const auto& r : rankings) {
        out += nlohmann::json(r).dump();
        out += '\n';
    }
    return out;
}

std::string relevance_json(const RelevanceMap& relevance)
{
    Json j = Json::object();
    for (const auto& [query, ids] : relevance) j[query] = std::vector<std::string>(ids.begin(), ids.end());
    return j.dump(2) + "\n";
}

std::string metrics_line(double r1, double r5, double r10, double map)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f %.4f %.4f %.4f", r1, r5, r10, map);
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Chat-driven text-based person search toolkit", "ctgi"};
    app.set_version_flag("--version", "ctgi " + version());
    app.require_subcommand(1);
    Flag<std::string> config_path;
    add(app, "--config", config_path, "Key-value config file (flags > env > config > defaults)");

    // stretch-pe
    auto* stretch_cmd = app.add_subcommand("stretch-pe", "Stretch a positional-embedding table to a longer context");
    std::string pe_in;
    std::string pe_out;
    Flag<std::size_t> pe_keep;
    Flag<std::size_t> pe_dst;
    Flag<int> pe_jobs;
    stretch_cmd->add_option("--in", pe_in, "Input PEM file")->required();
    stretch_cmd->add_option("--out", pe_out, "Output PEM file")->required();
    add(*stretch_cmd, "--keep", pe_keep, "Leading positions copied unchanged (default 20)");
    add(*stretch_cmd, "--dst", pe_dst, "Target number of positions (default 248)");
    add(*stretch_cmd, "--jobs", pe_jobs, "Threads (default 1)");

    // generate-captions
    auto* gen_cmd = app.add_subcommand("generate-captions", "Generate pseudo-captions for every gallery image");
    std::string gen_gallery;
    std::string gen_out;
    Flag<std::string> gen_pool;
    Flag<std::size_t> gen_rounds;
    Flag<std::size_t> gen_max_tokens;
    Flag<double> gen_threshold;
    Flag<int> gen_jobs;
    BackendFlags gen_backend;
    gen_cmd->add_option("--gallery", gen_gallery, "Gallery JSONL")->required();
    gen_cmd->add_option("--out", gen_out, "Caption store JSONL")->required();
    add(*gen_cmd, "--pool", gen_pool, "Question pool file (default: built-in pool)");
    add(*gen_cmd, "--rounds", gen_rounds, "Question rounds per image (default 6)");
    add(*gen_cmd, "--max-tokens", gen_max_tokens, "Token budget of the final caption (default 248)");
    add(*gen_cmd, "--redundancy", gen_threshold, "Jaccard threshold for redundant answers (default 0.7)");
    add(*gen_cmd, "--jobs", gen_jobs, "Images processed concurrently (default 1)");
    gen_backend.attach(*gen_cmd);

    // search
    auto* search_cmd = app.add_subcommand("search", "Refine queries against a gallery and re-rank");
    std::string s_gallery;
    Flag<std::string> s_query;
    Flag<std::string> s_queries;
    Flag<std::string> s_query_id;
    Flag<double> s_lambda;
    Flag<std::size_t> s_topk;
    Flag<double> s_xi;
    Flag<int> s_jobs;
    std::string s_log;
    BackendFlags s_backend;
    search_cmd->add_option("--gallery", s_gallery, "Gallery JSONL")->required();
    add(*search_cmd, "--query", s_query, "Query text");
    add(*search_cmd, "--queries", s_queries, "File with one query per line (query ids q0000, q0001, ...)");
    add(*search_cmd, "--query-id", s_query_id, "Id recorded for --query (default q0000)");
    add(*search_cmd, "--lambda", s_lambda, "Fusion weight of the original query (default 0.5)");
    add(*search_cmd, "--topk", s_topk, "Candidates probed for an anchor (default 20)");
    add(*search_cmd, "--xi", s_xi, "Early-stop similarity threshold (default 0.85)");
    add(*search_cmd, "--jobs", s_jobs, "Scoring threads (default 1)");
    search_cmd->add_option("--session-log", s_log, "Session log JSONL")->required();
    s_backend.attach(*search_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Rank-1/5/10 and mAP of a rankings or session file");
    std::string e_rankings;
    std::string e_truth;
    eval_cmd->add_option("--rankings", e_rankings, "Rankings or session log JSONL")->required();
    eval_cmd->add_option("--truth", e_truth, "JSON map query_id -> relevant ids")->required();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic world and run the four-arm ablation");
    Flag<std::uint64_t> sim_seed;
    Flag<std::size_t> sim_n;
    Flag<std::string> sim_schema;
    Flag<double> sim_error;
    Flag<double> sim_lambda;
    Flag<std::size_t> sim_topk;
    Flag<double> sim_xi;
    Flag<std::size_t> sim_rounds;
    Flag<int> sim_jobs;
    std::string sim_out;
    bool sim_no_ablation = false;
    add(*sim_cmd, "--seed", sim_seed, "World and oracle seed (default 7)");
    add(*sim_cmd, "--identities", sim_n, "Number of identities (default 200)");
    add(*sim_cmd, "--schema", sim_schema, "Attribute schema JSON (default: built-in schema)");
    add(*sim_cmd, "--error-rate", sim_error, "Oracle alignment-judgment error rate (default 0.1)");
    add(*sim_cmd, "--lambda", sim_lambda, "Fusion weight (default 0.5)");
    add(*sim_cmd, "--topk", sim_topk, "Anchor candidates (default 20)");
    add(*sim_cmd, "--xi", sim_xi, "Early-stop threshold (default 0.85)");
    add(*sim_cmd, "--rounds", sim_rounds, "Question rounds per image (default 6)");
    add(*sim_cmd, "--jobs", sim_jobs, "Queries processed concurrently (default 1)");
    sim_cmd->add_option("--out", sim_out, "Output directory")->required();
    sim_cmd->add_flag("--no-ablation", sim_no_ablation, "Only write the world");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    Settings settings(config_path.given() ? ConfigFile::load(*config_path.given()) : ConfigFile{});
    Manifest manifest;
    manifest.command_line = joined_command_line(argc, argv);
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

    if (*stretch_cmd) {
        const auto input = pe::load_pe(pe_in);
        const pe::StretchSpec spec(settings.get<std::size_t>("pe.keep", pe_keep.given(), 20), input.rows(),
                                   settings.get<std::size_t>("pe.dst", pe_dst.given(), 248));
        const int jobs = settings.get<int>("jobs", pe_jobs.given(), 1);
        pe::save_pe(pe::stretch(input, spec, jobs), pe_out);
        manifest.backend = "none";
        write_manifest(manifest_for(pe_out), manifest, settings, elapsed());
        return 0;
    }

    if (*gen_cmd) {
        const auto gallery = load_gallery(gen_gallery);
        mtg::MTGConfig cfg;
        cfg.rounds_n = settings.get<std::size_t>("mtg.rounds", gen_rounds.given(), cfg.rounds_n);
        cfg.max_tokens = settings.get<std::size_t>("mtg.max_tokens", gen_max_tokens.given(), cfg.max_tokens);
        cfg.redundancy_threshold = settings.get<double>("mtg.redundancy", gen_threshold.given(), cfg.redundancy_threshold);
        cfg.validate();
        const auto pool_path = settings.get_optional<std::string>("mtg.pool", gen_pool.given());
        const auto pool = pool_path ? mtg::QuestionPool::load(*pool_path) : mtg::QuestionPool::defaults();
        const auto schema = resolve_schema(settings, gen_backend);
        auto h = make_backend(settings, gen_backend, gallery, schema, cfg, mti::MTIConfig{}, manifest);
        int jobs = settings.get<int>("jobs", gen_jobs.given(), 1);
        // Replay serves exchanges strictly in order.
        if (h.kind == chat::BackendKind::Replay) jobs = 1;

        std::vector<std::string> ids;
        for (const auto& item : gallery.items()) ids.push_back(item.id);
        std::vector<mtg::PseudoLabel> labels;
        try {
            labels = mtg::generate_batch(ids, pool, cfg, *h.backend, h.transcript.get(), jobs);
        } catch (...) {
            if (h.transcript) h.transcript->finish();
            throw;
        }
        if (h.transcript) h.transcript->finish();
        io::write_file_atomic(gen_out, mtg::to_caption_store(labels));
        write_manifest(manifest_for(gen_out), manifest, settings, elapsed());
        return 0;
    }

    if (*search_cmd) {
        const auto gallery = load_gallery(s_gallery);
        mti::MTIConfig cfg;
        cfg.fusion_lambda = settings.get<double>("mti.lambda", s_lambda.given(), cfg.fusion_lambda);
        cfg.top_k = settings.get<std::size_t>("mti.topk", s_topk.given(), cfg.top_k);
        cfg.early_stop_xi = settings.get<double>("mti.xi", s_xi.given(), cfg.early_stop_xi);
        cfg.threads = settings.get<int>("jobs", s_jobs.given(), 1);
        cfg.validate();

        std::vector<std::pair<std::string, std::string>> queries; // (id, text)
        if (s_query.given()) {
            queries.emplace_back(s_query_id.given().value_or("q0000"), *s_query.given());
        } else if (s_queries.given()) {
            for (const auto& line : io::read_lines(*s_queries.given())) {
                const auto q = text::trim(line);
                if (q.empty()) continue;
                char id[32];
                std::snprintf(id, sizeof id, "q%04zu", queries.size());
                queries.emplace_back(id, q);
            }
        } else {
            throw Error(Errc::UsageError, "search needs --query or --queries");
        }

        const auto schema = resolve_schema(settings, s_backend);
        const sim::AttributeEmbedder embedder(schema);
        if (embedder.dim() != gallery.dim()) {
            throw Error(Errc::DimMismatch, "schema has " + std::to_string(embedder.dim()) + " attributes, gallery dim is "
                                               + std::to_string(gallery.dim()));
        }
        const mti::TextEmbedder embed = [&](std::string_view t) { return embedder.embed_text(t); };
        auto h = make_backend(settings, s_backend, gallery, schema, mtg::MTGConfig{}, cfg, manifest);
        chat::ChatGateway gateway(*h.backend, h.transcript.get());

        std::string log;
        try {
            for (const auto& [id, q] : queries) {
                log += mti::session_to_line(mti::search(q, gallery, cfg, gateway, embed, id));
                log += '\n';
            }
        } catch (...) {
            if (h.transcript) h.transcript->finish();
            throw;
        }
        if (h.transcript) h.transcript->finish();
        io::write_file_atomic(s_log, log);
        write_manifest(manifest_for(s_log), manifest, settings, elapsed());
        return 0;
    }

    if (*eval_cmd) {
        const auto rankings = load_rankings(e_rankings);
        const auto truth = load_truth(e_truth);
        for (const auto& r : rankings) {
            if (!truth.contains(r.query_id)) {
                throw Error(Errc::IdMismatch, "query '" + r.query_id + "' is missing from " + e_truth);
            }
        }
        out << "rank1 rank5 rank10 map\n"
            << metrics_line(rank_k_accuracy(rankings, truth, 1), rank_k_accuracy(rankings, truth, 5),
                            rank_k_accuracy(rankings, truth, 10), mean_average_precision(rankings, truth))
            << "\n";
        return 0;
    }

    if (*sim_cmd) {
        const auto seed = settings.get<std::uint64_t>("world.seed", sim_seed.given(), 7);
        const auto n = settings.get<std::size_t>("world.identities", sim_n.given(), 200);
        const auto schema_path = settings.get_optional<std::string>("world.schema", sim_schema.given());
        const auto schema = schema_path ? sim::AttributeSchema::load(*schema_path) : sim::AttributeSchema::defaults();
        manifest.seeds["world"] = seed;
        manifest.backend = "oracle";

        const auto world = sim::generate_world(seed, n, schema);
        const fs::path dir = sim_out;
        sim::save_world(world, dir);
        io::write_file_atomic(dir / "relevance.json", relevance_json(world.relevance));

        if (!sim_no_ablation) {
            sim::AblationConfig cfg;
            cfg.oracle.seed = settings.get<std::uint64_t>("oracle.seed", std::optional<std::uint64_t>{}, seed);
            cfg.oracle.yes_no_error_rate = settings.get<double>("oracle.error_rate", sim_error.given(), 0.1);
            cfg.mti.fusion_lambda = settings.get<double>("mti.lambda", sim_lambda.given(), cfg.mti.fusion_lambda);
            cfg.mti.top_k = settings.get<std::size_t>("mti.topk", sim_topk.given(), cfg.mti.top_k);
            cfg.mti.early_stop_xi = settings.get<double>("mti.xi", sim_xi.given(), cfg.mti.early_stop_xi);
            cfg.mtg.rounds_n = settings.get<std::size_t>("mtg.rounds", sim_rounds.given(), cfg.mtg.rounds_n);
            cfg.jobs = settings.get<int>("jobs", sim_jobs.given(), 1);
            manifest.seeds["oracle"] = cfg.oracle.seed;

            const auto result = sim::run_ablation(world, cfg);
            io::write_file_atomic(dir / "captions.jsonl", mtg::to_caption_store(result.labels));
            for (std::size_t a = 0; a < result.arms.size(); ++a) {
                io::write_file_atomic(dir / ("rankings_" + result.arms[a].arm + ".jsonl"),
                                      rankings_jsonl(result.rankings[a]));
            }
            const auto csv = sim::ablation_csv(result.arms);
            io::write_file_atomic(dir / "ablation.csv", csv);
            out << csv;
        }
        write_manifest(dir / "manifest.json", manifest, settings, elapsed());
        return 0;
    }
    return 2;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    try {
        return run(argc, argv, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == Errc::UsageError ? 2 : 1;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ctgi::cli
