// sm - zero-shot multimodal composition CLI: captioning, world-state history,
// question answering, retrieval index management, video-to-text evaluation,
// and unsupervised model selection.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "socratic/http_backend.hpp"
#include "socratic/mock.hpp"
#include "socratic/prompts.hpp"
#include "socratic/reasoning.hpp"
#include "socratic/replay.hpp"
#include "socratic/selection.hpp"
#include "socratic/smeb.hpp"
#include "socratic/v2t.hpp"
#include "socratic/world_state.hpp"

using namespace socratic;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    bool pretty = false;
    std::uint64_t seed = 7;
    std::string data_dir = SM_SOURCE_DATA_DIR;
    std::string backend = "mock";
    std::string world_path;
    std::vector<std::string> rules_paths;
    std::string replay_dir;
    std::string vlm_template;
    std::string config_path;
};

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream is(path);
    if (!is) throw InputError(std::string("cannot open ") + what + ": " + path);
    std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return out;
}

// Config file keys merge under flags: a key applies only when the matching
// flag was not given on the command line.
void merge_config_file(GlobalOpts& g, const CLI::App& app) {
    if (g.config_path.empty()) return;
    json cfg = json::parse(read_text_file(g.config_path, "config file"), nullptr, false);
    if (cfg.is_discarded()) throw ConfigError("config file is not valid JSON: " + g.config_path);
    auto unset = [&](const char* flag) { return app.get_option(flag)->count() == 0; };
    if (cfg.contains("seed") && unset("--seed")) g.seed = cfg.at("seed").get<std::uint64_t>();
    if (cfg.contains("backend") && unset("--backend")) g.backend = cfg.at("backend").get<std::string>();
    if (cfg.contains("world") && unset("--world")) g.world_path = cfg.at("world").get<std::string>();
    if (cfg.contains("rules") && unset("--rules"))
        g.rules_paths = cfg.at("rules").get<std::vector<std::string>>();
    if (cfg.contains("replay_dir") && unset("--replay-dir"))
        g.replay_dir = cfg.at("replay_dir").get<std::string>();
    if (cfg.contains("data_dir") && unset("--data-dir"))
        g.data_dir = cfg.at("data_dir").get<std::string>();
    if (cfg.contains("vlm_template") && unset("--vlm-template"))
        g.vlm_template = cfg.at("vlm_template").get<std::string>();
}

std::string dump(const json& j, const GlobalOpts& g) { return j.dump(g.pretty ? 2 : -1); }

void emit(const json& j, const GlobalOpts& g) { std::cout << dump(j, g) << "\n"; }

json config_echo(const GlobalOpts& g, const char* command) {
    return json{{"command", command},
                {"backend", g.backend},
                {"seed", g.seed},
                {"world", g.world_path},
                {"rules", g.rules_paths}};
}

struct Runtime {
    std::shared_ptr<const SyntheticWorld> world;
    AdapterSet adapters;
};

Runtime make_runtime(GlobalOpts& g) {
    Runtime rt;
    if (g.world_path.empty()) g.world_path = g.data_dir + "/mock_world.json";
    if (g.rules_paths.empty()) g.rules_paths = {g.data_dir + "/mock_lm_rules.json"};

    auto wrap_vlm = [&](std::shared_ptr<const VisualLanguageModel> vlm)
        -> std::shared_ptr<const VisualLanguageModel> {
        if (g.vlm_template.empty()) return vlm;
        return std::make_shared<PromptTemplateVlm>(std::move(vlm), g.vlm_template);
    };
    if (g.backend == "mock") {
        rt.world = std::make_shared<SyntheticWorld>(SyntheticWorld::from_json_file(g.world_path));
        auto lm = std::make_shared<MockLm>(g.seed, "mock-lm");
        for (const auto& p : g.rules_paths) lm->load_rules_json(p);
        rt.adapters.lm_generate = lm;
        rt.adapters.lm_embed = std::make_shared<MockSentenceEmbedder>(mix_seed(g.seed, "sentence"));
        rt.adapters.vlm = wrap_vlm(std::make_shared<MockVlm>(rt.world, "mock-vlm"));
        rt.adapters.alm = std::make_shared<MockAlm>(rt.world, "mock-alm");
        return rt;
    }
    if (g.backend == "http") {
        rt.adapters.lm_generate =
            std::make_shared<HttpTextCompleter>(http_options_from_env("SM_LM_ENDPOINT"));
        rt.adapters.lm_embed =
            std::make_shared<HttpSentenceEmbedder>(http_options_from_env("SM_LM_ENDPOINT"));
        rt.adapters.vlm = wrap_vlm(std::make_shared<HttpVlm>(http_options_from_env("SM_VLM_ENDPOINT")));
        rt.adapters.alm = std::make_shared<HttpAlm>(http_options_from_env("SM_ALM_ENDPOINT"));
        return rt;
    }
    if (g.backend == "replay") {
        if (g.replay_dir.empty()) throw ConfigError("--replay-dir is required with --backend replay");
        ReplayStore store(g.replay_dir);
        rt.adapters.lm_generate = std::make_shared<ReplayTextCompleter>(store);
        rt.adapters.lm_embed = std::make_shared<ReplaySentenceEmbedder>(store);
        rt.adapters.vlm = wrap_vlm(std::make_shared<ReplayVlm>(store));
        rt.adapters.alm = std::make_shared<ReplayAlm>(store);
        return rt;
    }
    throw ConfigError("unknown backend: " + g.backend + " (expected mock, http, or replay)");
}

Embedding load_query_embedding(const std::string& path_or_id, const Runtime& rt) {
    if (fs::exists(path_or_id)) {
        json j = json::parse(read_text_file(path_or_id, "embedding file"), nullptr, false);
        if (j.is_discarded() || !j.contains("embedding"))
            throw InputError("embedding file must hold {\"embedding\": [...]}: " + path_or_id);
        const auto& vals = j.at("embedding");
        Vec v(static_cast<Eigen::Index>(vals.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = vals[static_cast<std::size_t>(i)].get<float>();
        return Embedding{std::move(v), true};
    }
    if (!rt.adapters.vlm) throw InputError("image file not found: " + path_or_id);
    return rt.adapters.vlm->embed_image(MediaRef::image(path_or_id));
}

FrameStream load_stream(const std::string& frames_path, const Runtime& rt) {
    if (!frames_path.empty()) return FrameStream::from_jsonl(frames_path);
    if (!rt.world) throw ConfigError("either --frames or a mock world is required");
    return stream_from_world(*rt.world);
}

// --- caption -----------------------------------------------------------------

int cmd_caption(GlobalOpts& g, const std::string& image, int candidates, float temperature,
                const std::string& places_path, const std::string& objects_path) {
    Runtime rt = make_runtime(g);
    require_adapters(rt.adapters, {AdapterRole::lm_generate, AdapterRole::vlm});

    InternetVocabs vocabs{
        EntityVocabulary::load(places_path.empty() ? g.data_dir + "/vocab/places365.txt" : places_path),
        EntityVocabulary::load(objects_path.empty() ? g.data_dir + "/vocab/objects600.txt" : objects_path),
        EntityVocabulary::load(g.data_dir + "/vocab/image_types.txt"),
        EntityVocabulary::load(g.data_dir + "/vocab/people_counts.txt")};

    CaptionConfig cfg = CaptionConfig::internet();
    if (candidates > 0) cfg.caption_candidates = candidates;
    if (temperature >= 0.0f) cfg.caption_temperature = temperature;

    Embedding e = load_query_embedding(image, rt);
    auto result = caption_internet_image(e, vocabs, *rt.adapters.lm_generate, *rt.adapters.vlm, cfg);
    json out = internet_caption_json(result);
    out["config"] = config_echo(g, "caption");
    out["config"]["candidates"] = cfg.caption_candidates;
    out["config"]["temperature"] = cfg.caption_temperature;
    emit(out, g);
    return 0;
}

// --- history -----------------------------------------------------------------

int cmd_history(GlobalOpts& g, const std::string& frames_path, const std::string& mode,
                std::int64_t interval_ms, const std::string& question, const std::string& out_path,
                int n_per_entity, int window, bool equilibrium) {
    if (mode != "uniform" && mode != "search")
        throw ConfigError("--mode must be uniform or search");
    Runtime rt = make_runtime(g);
    FrameStream stream = load_stream(frames_path, rt);

    EgoCaptioner captioner(rt.adapters, EntityVocabulary::load(g.data_dir + "/vocab/places365.txt"),
                           EntityVocabulary::load(g.data_dir + "/vocab/objects600.txt"),
                           CaptionConfig{}, equilibrium);

    std::vector<std::size_t> indices;
    HistorySource source = HistorySource::uniform;
    std::optional<std::vector<std::string>> entities;
    if (mode == "uniform") {
        if (interval_ms <= 0) throw ConfigError("--interval must be a positive millisecond count");
        indices = select_uniform(stream, interval_ms);
    } else {
        if (question.empty()) throw ConfigError("--question is required in search mode");
        std::string block = read_text_file(g.data_dir + "/routing_few_shot.txt", "routing block");
        RoutedQuery routed = route_question(Question::of(question), *rt.adapters.lm_generate, block);
        std::string entity = routed.search_entity.value_or(question);
        entities = std::vector<std::string>{entity};
        KeyMatrix keys = routed.modality == AnswerModality::audio_search && rt.adapters.alm
                             ? build_audio_keys(stream, *rt.adapters.alm)
                             : build_image_keys(stream);
        indices = select_by_search(stream, *entities,
                                   routed.modality == AnswerModality::audio_search
                                       ? SearchModality::audio
                                       : SearchModality::image,
                                   n_per_entity, keys, *rt.adapters.vlm, window);
        source = HistorySource::search;
    }

    WorldStateHistory history = compile_history(stream, indices, captioner, source);
    history.search_entities = entities;
    json out = history_to_json(history);
    out["config"] = config_echo(g, "history");
    out["config"]["mode"] = mode;
    if (mode == "uniform") out["config"]["interval_ms"] = interval_ms;
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::trunc);
        os << dump(out, g) << "\n";
        if (!os) throw InputError("cannot write event log: " + out_path);
    }
    emit(out, g);
    return 0;
}

// --- ask ----------------------------------------------------------------------

KeyMatrix keys_from_bundle(const IndexBundle& bundle, const char* which) {
    if (bundle.keys) return *bundle.keys;
    if (bundle.lsh) return bundle.lsh->keys();
    throw ConfigError(std::string("the ") + which +
                      " index holds no raw keys (use an exact or lsh index for search answers)");
}

int cmd_ask(GlobalOpts& g, const std::string& history_path, const std::string& question,
            bool explain, const std::string& frames_path, const std::string& image_index_dir,
            const std::string& audio_index_dir, int top_n, int window) {
    Runtime rt = make_runtime(g);
    require_adapters(rt.adapters, {AdapterRole::lm_generate});
    WorldStateHistory history = history_load(history_path);
    std::string block = read_text_file(g.data_dir + "/routing_few_shot.txt", "routing block");

    SearchIndexes indexes;
    indexes.top_n = top_n;
    indexes.window = window;
    std::optional<FrameStream> stream;
    if (!image_index_dir.empty())
        indexes.image_keys = keys_from_bundle(load_index(image_index_dir), "image");
    if (!audio_index_dir.empty())
        indexes.audio_keys = keys_from_bundle(load_index(audio_index_dir), "audio");
    if (!frames_path.empty() || rt.world) stream = load_stream(frames_path, rt);

    auto answer_one = [&](const std::string& text) {
        Question q = Question::of(text);
        RoutedQuery routed = route_question(q, *rt.adapters.lm_generate, block);
        if (routed.modality == AnswerModality::image_search && !indexes.image_keys)
            throw ConfigError("question routed to image search but no image index is loaded "
                              "(pass --index)");
        if (routed.modality == AnswerModality::audio_search && !indexes.audio_keys)
            throw ConfigError("question routed to audio search but no audio index is loaded "
                              "(pass --audio-index)");
        if (routed.modality != AnswerModality::text_answer && !stream)
            throw ConfigError("search answers need --frames (or a mock world)");
        FrameStream empty;
        Answer a = execute(q, stream ? *stream : empty, history, indexes, rt.adapters, block);
        if (!explain) a.explanation.reset();
        json out = answer_to_json(a);
        out["config"] = config_echo(g, "ask");
        out["config"]["question"] = text;
        emit(out, g);
    };

    if (!question.empty()) {
        answer_one(question);
        return 0;
    }
    // REPL: one question per line until end of input.
    std::string line;
    while (std::getline(std::cin, line)) {
        if (trim(line).empty()) continue;
        answer_one(line);
    }
    return 0;
}

// --- index --------------------------------------------------------------------

int cmd_index_build(GlobalOpts& g, const std::string& keys_path, const std::string& out_dir,
                    const std::string& algo, SrpLshParams lsh, int m) {
    SmebFile f = smeb_read(keys_path);
    IndexBuildParams params;
    params.algo = index_algo_from_name(algo);
    params.seed = g.seed;
    params.lsh = lsh;
    params.feature_count = m;
    IndexBundle bundle = build_index(KeyMatrix::from_rows(std::move(f.rows), std::move(f.ids)), params);
    save_index(bundle, out_dir);
    json out{{"out", out_dir},
             {"algo", algo},
             {"config", config_echo(g, "index build")}};
    emit(out, g);
    return 0;
}

int cmd_index_query(GlobalOpts& g, const std::string& index_dir, const std::string& query_path,
                    int k, int probe_radius, int samples) {
    IndexBundle bundle = load_index(index_dir);
    SmebFile q = smeb_read(query_path);
    json results = json::array();
    for (Eigen::Index r = 0; r < q.rows.rows(); ++r) {
        Embedding query{q.rows.row(r).transpose(), true};
        switch (bundle.algo) {
            case IndexAlgo::exact: {
                json one = json::array();
                for (const auto& s : mips_exact(query, *bundle.keys, k)) {
                    json item{{"index", s.index}, {"score", s.score}};
                    if (bundle.keys->ids) item["id"] = (*bundle.keys->ids)[s.index];
                    one.push_back(std::move(item));
                }
                results.push_back(std::move(one));
                break;
            }
            case IndexAlgo::lsh: {
                json one = json::array();
                for (const auto& s : bundle.lsh->query(query, k, probe_radius)) {
                    json item{{"index", s.index}, {"score", s.score}};
                    if (bundle.lsh->keys().ids) item["id"] = (*bundle.lsh->keys().ids)[s.index];
                    one.push_back(std::move(item));
                }
                results.push_back(std::move(one));
                break;
            }
            case IndexAlgo::mem: {
                results.push_back(json{{"energy", memory_energy(*bundle.memory, query)}});
                break;
            }
            case IndexAlgo::rft: {
                auto sampler = bundle.tree->sampler(query);
                Rng rng(mix_seed(g.seed, "rft-query/" + std::to_string(r)));
                json draws = json::array();
                for (int s = 0; s < samples; ++s) draws.push_back(sampler.sample(rng));
                results.push_back(json{{"samples", std::move(draws)}});
                break;
            }
        }
    }
    json out{{"results", std::move(results)}, {"config", config_echo(g, "index query")}};
    out["config"]["k"] = k;
    emit(out, g);
    return 0;
}

int cmd_index_recall(GlobalOpts& g, const std::string& keys_path, const std::string& queries_path,
                     SrpLshParams lsh) {
    SmebFile kf = smeb_read(keys_path);
    SmebFile qf = smeb_read(queries_path);
    KeyMatrix keys = KeyMatrix::from_rows(std::move(kf.rows), std::move(kf.ids));
    SrpLshIndex index = SrpLshIndex::build(keys, lsh, g.seed);
    std::size_t hits = 0;
    for (Eigen::Index r = 0; r < qf.rows.rows(); ++r) {
        Embedding query{qf.rows.row(r).transpose(), true};
        auto truth = mips_exact(query, keys, 1);
        auto got = index.query(query, 1);
        if (!got.empty() && got[0].index == truth[0].index) ++hits;
    }
    json out{{"recall_at_1", static_cast<double>(hits) / static_cast<double>(qf.rows.rows())},
             {"queries", qf.rows.rows()},
             {"config", config_echo(g, "index recall")}};
    out["config"]["tables"] = lsh.tables;
    out["config"]["bits"] = lsh.bits;
    out["config"]["probe_radius"] = lsh.probe_radius;
    emit(out, g);
    return 0;
}

int cmd_index_synth(GlobalOpts& g, int count, int dim, const std::string& out_path,
                    const std::string& near_path, float noise) {
    Mat rows(count, dim);
    if (near_path.empty()) {
        Rng rng(mix_seed(g.seed, "synth"));
        for (int r = 0; r < count; ++r) {
            for (int c = 0; c < dim; ++c) rows(r, c) = static_cast<float>(rng.normal());
            rows.row(r) /= rows.row(r).norm();
        }
    } else {
        SmebFile base = smeb_read(near_path);
        if (base.rows.cols() != dim) throw InputError("--near file dimension mismatch");
        Rng rng(mix_seed(g.seed, "synth-near"));
        for (int r = 0; r < count; ++r) {
            Eigen::Index src = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(base.rows.rows())));
            for (int c = 0; c < dim; ++c)
                rows(r, c) = base.rows(src, c) + noise * static_cast<float>(rng.normal());
            rows.row(r) /= rows.row(r).norm();
        }
    }
    smeb_write(out_path, rows);
    emit(json{{"out", out_path}, {"count", count}, {"dim", dim},
              {"config", config_echo(g, "index synth")}}, g);
    return 0;
}

// --- v2t ------------------------------------------------------------------------

int cmd_v2t(GlobalOpts& g, const std::string& videos_path, const std::string& captions_path,
            const std::string& transcripts_path, std::size_t gate, bool subset) {
    Runtime rt = make_runtime(g);
    require_adapters(rt.adapters, {AdapterRole::lm_generate, AdapterRole::lm_embed, AdapterRole::vlm});
    V2tConfig cfg;
    cfg.gate_chars = gate;

    std::map<std::string, std::string> transcripts;
    if (!transcripts_path.empty()) transcripts = load_transcripts_jsonl(transcripts_path);
    VideoCorpus videos = build_video_corpus(videos_path, transcripts, rt.adapters.lm_generate.get(),
                                            rt.adapters.lm_embed.get(), cfg);
    CaptionCorpus captions = load_captions_tsv(captions_path, *rt.adapters.vlm, *rt.adapters.lm_embed);

    json out = metrics_to_json(evaluate(videos.videos, captions.captions, captions.truth));
    if (subset)
        out["long_transcript_subset"] = metrics_to_json(
            evaluate_subset_long_transcript(videos.videos, captions.captions, captions.truth, cfg));
    out["warnings"] = videos.warnings;
    out["config"] = config_echo(g, "v2t");
    out["config"]["gate"] = gate;
    emit(out, g);
    return 0;
}

// --- select -----------------------------------------------------------------------

int cmd_select(GlobalOpts& g, const std::vector<std::string>& sigmas,
               const std::string& baseline_sigma, int frame_limit,
               const std::string& weak_rules, const std::string& strong_rules,
               std::uint64_t heldout_seed) {
    Runtime rt = make_runtime(g);
    if (!rt.world) throw ConfigError("model selection runs over the mock world (--backend mock)");
    if (sigmas.size() < 2) throw ConfigError("need at least 2 candidate VLMs (--vlms)");

    SelectionInputs inputs;
    for (const auto& spec : rt.world->frames()) {
        inputs.frames.push_back(MediaRef::image(spec.id));
        if (frame_limit > 0 && static_cast<int>(inputs.frames.size()) >= frame_limit) break;
    }

    auto make_vlm = [&](const std::string& sigma_text) {
        float sigma = std::stof(sigma_text);
        std::string id = "mock-vlm[s=" + sigma_text + "]";
        return VlmCandidate{id, std::make_shared<MockVlm>(rt.world, id, sigma,
                                                          mix_seed(g.seed, "vlm/" + sigma_text))};
    };
    for (const auto& s : sigmas) inputs.candidates.push_back(make_vlm(s));
    inputs.baseline_vlm = make_vlm(baseline_sigma);

    auto weak = std::make_shared<MockLm>(g.seed, "mock-lm-weak");
    auto strong = std::make_shared<MockLm>(g.seed, "mock-lm-strong");
    if (!weak_rules.empty()) weak->load_rules_json(weak_rules);
    if (!strong_rules.empty()) strong->load_rules_json(strong_rules);
    for (const auto& p : g.rules_paths) {
        weak->load_rules_json(p);
        strong->load_rules_json(p);
    }
    inputs.weak_lm = weak;
    inputs.strong_lm = strong;
    inputs.heldout_embedder = std::make_shared<MockSentenceEmbedder>(
        heldout_seed ? heldout_seed : mix_seed(g.seed, "heldout"));
    inputs.places = EntityVocabulary::load(g.data_dir + "/vocab/places365.txt");
    inputs.objects = EntityVocabulary::load(g.data_dir + "/vocab/objects600.txt");

    SelectionReport report = run_selection(inputs);
    json out = selection_report_json(report);
    out["ranking"] = report.ranking();
    out["config"] = config_echo(g, "select");
    out["config"]["vlms"] = sigmas;
    out["config"]["baseline"] = baseline_sigma;
    emit(out, g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Socratic multimodal composition toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_flag("--pretty", g.pretty, "pretty-print JSON output");
    app.add_option("--seed", g.seed, "global deterministic seed");
    app.add_option("--data-dir", g.data_dir, "data directory (vocabularies, rules, prompts)");
    app.add_option("--backend", g.backend, "adapter backend: mock, http, or replay");
    app.add_option("--world", g.world_path, "mock world JSON file");
    app.add_option("--rules", g.rules_paths, "mock LM rule table(s), first match wins");
    app.add_option("--replay-dir", g.replay_dir, "replay fixture directory");
    app.add_option("--config", g.config_path, "JSON config file merged under flags");
    app.add_option("--vlm-template", g.vlm_template,
                   "wrap VLM label text in this template ({} is the label)");

    // caption
    auto* cap = app.add_subcommand("caption", "caption one image");
    std::string cap_image, cap_places, cap_objects;
    int cap_candidates = -1;
    float cap_temperature = -1.0f;
    cap->add_option("--image", cap_image, "embedding JSON file or mock frame id")->required();
    cap->add_option("--candidates", cap_candidates, "caption candidates to sample");
    cap->add_option("--temperature", cap_temperature, "caption sampling temperature");
    cap->add_option("--places", cap_places, "places vocabulary file");
    cap->add_option("--objects", cap_objects, "objects vocabulary file");

    // history
    auto* hist = app.add_subcommand("history", "compile a world-state history");
    std::string hist_frames, hist_mode = "uniform", hist_question, hist_out;
    std::int64_t hist_interval = 0;
    int hist_n = 3, hist_window = 1;
    bool hist_equilibrium = false;
    hist->add_option("--frames", hist_frames, "frames JSONL file (defaults to the mock world)");
    hist->add_option("--mode", hist_mode, "uniform or search");
    hist->add_option("--interval", hist_interval, "uniform sampling interval in ms");
    hist->add_option("--question", hist_question, "question driving search-based selection");
    hist->add_option("--out", hist_out, "write the event log JSON here");
    hist->add_option("--n-per-entity", hist_n, "peaks per search entity");
    hist->add_option("--window", hist_window, "local-maxima window");
    hist->add_flag("--equilibrium", hist_equilibrium, "run the entity expansion loop");

    // ask
    auto* ask = app.add_subcommand("ask", "answer questions over a history");
    std::string ask_history, ask_question, ask_frames, ask_index, ask_audio_index;
    bool ask_explain = false;
    int ask_n = 3, ask_window = 1;
    ask->add_option("--history", ask_history, "event log JSON")->required();
    ask->add_option("--question", ask_question, "question (omit for a REPL)");
    ask->add_flag("--explain", ask_explain, "include an explanation for text answers");
    ask->add_option("--frames", ask_frames, "frames JSONL (for search answers)");
    ask->add_option("--index", ask_index, "image index directory");
    ask->add_option("--audio-index", ask_audio_index, "audio index directory");
    ask->add_option("--top-n", ask_n, "retrieved frames per search answer");
    ask->add_option("--window", ask_window, "local-maxima window");

    // index
    auto* idx = app.add_subcommand("index", "build and query retrieval indexes");
    idx->require_subcommand(1);
    std::string idx_keys, idx_out, idx_algo = "exact", idx_dir, idx_query, idx_queries;
    SrpLshParams idx_lsh;
    int idx_m = 1024, idx_k = 10, idx_probe = -1, idx_samples = 1, idx_count = 1000, idx_dim = 64;
    std::string idx_near;
    float idx_noise = 0.2f;
    auto* idx_build = idx->add_subcommand("build", "build and persist an index");
    idx_build->add_option("--keys", idx_keys, "SMEB key matrix")->required();
    idx_build->add_option("--out", idx_out, "output directory")->required();
    idx_build->add_option("--algo", idx_algo, "exact, lsh, mem, or rft");
    idx_build->add_option("--tables", idx_lsh.tables, "LSH tables");
    idx_build->add_option("--bits", idx_lsh.bits, "LSH bits per table");
    idx_build->add_option("--probe-radius", idx_lsh.probe_radius, "LSH multi-probe radius");
    idx_build->add_option("--m", idx_m, "random feature count (mem/rft)");
    auto* idx_q = idx->add_subcommand("query", "query a persisted index");
    idx_q->add_option("--index", idx_dir, "index directory")->required();
    idx_q->add_option("--query", idx_query, "SMEB query rows")->required();
    idx_q->add_option("--k", idx_k, "results per query");
    idx_q->add_option("--probe-radius", idx_probe, "override LSH probe radius");
    idx_q->add_option("--samples", idx_samples, "samples per query (rft)");
    auto* idx_r = idx->add_subcommand("recall", "LSH recall against exact search");
    idx_r->add_option("--keys", idx_keys, "SMEB key matrix")->required();
    idx_r->add_option("--queries", idx_queries, "SMEB query rows")->required();
    idx_r->add_option("--tables", idx_lsh.tables, "LSH tables");
    idx_r->add_option("--bits", idx_lsh.bits, "LSH bits per table");
    idx_r->add_option("--probe-radius", idx_lsh.probe_radius, "LSH multi-probe radius");
    auto* idx_s = idx->add_subcommand("synth", "generate a deterministic key/query fixture");
    idx_s->add_option("--count", idx_count, "rows");
    idx_s->add_option("--dim", idx_dim, "dimension");
    idx_s->add_option("--out", idx_out, "output SMEB path")->required();
    idx_s->add_option("--near", idx_near, "perturb rows of this SMEB file instead");
    idx_s->add_option("--noise", idx_noise, "perturbation scale with --near");

    // v2t
    auto* v2t = app.add_subcommand("v2t", "video-to-text retrieval evaluation");
    std::string v2t_videos, v2t_captions, v2t_transcripts;
    std::size_t v2t_gate = 100;
    bool v2t_subset = false;
    v2t->add_option("--videos", v2t_videos, "SMEB video embeddings with id sidecar")->required();
    v2t->add_option("--captions", v2t_captions, "captions TSV")->required();
    v2t->add_option("--transcripts", v2t_transcripts, "transcripts JSONL");
    v2t->add_option("--gate", v2t_gate, "transcript character gate");
    v2t->add_flag("--subset", v2t_subset, "also report the long-transcript subset");

    // select
    auto* sel = app.add_subcommand("select", "unsupervised model selection");
    std::vector<std::string> sel_sigmas;
    std::string sel_baseline = "0.0";
    int sel_frames = 0;
    sel->add_option("--vlms", sel_sigmas, "candidate VLM noise levels")->delimiter(',');
    sel->add_option("--baseline-vlm", sel_baseline, "baseline VLM noise level");
    sel->add_option("--frames", sel_frames, "limit the number of world frames");
    std::string sel_weak_rules, sel_strong_rules;
    std::uint64_t sel_heldout = 0;
    sel->add_option("--weak-lm", sel_weak_rules, "extra rule table for the weak LM");
    sel->add_option("--strong-lm", sel_strong_rules, "extra rule table for the strong LM");
    sel->add_option("--heldout", sel_heldout, "seed for the held-out sentence embedder");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors share the config exit code
    }

    try {
        merge_config_file(g, app);
        if (*cap)
            return cmd_caption(g, cap_image, cap_candidates, cap_temperature, cap_places, cap_objects);
        if (*hist)
            return cmd_history(g, hist_frames, hist_mode, hist_interval, hist_question, hist_out,
                               hist_n, hist_window, hist_equilibrium);
        if (*ask)
            return cmd_ask(g, ask_history, ask_question, ask_explain, ask_frames, ask_index,
                           ask_audio_index, ask_n, ask_window);
        if (*idx_build) return cmd_index_build(g, idx_keys, idx_out, idx_algo, idx_lsh, idx_m);
        if (*idx_q) return cmd_index_query(g, idx_dir, idx_query, idx_k, idx_probe, idx_samples);
        if (*idx_r) return cmd_index_recall(g, idx_keys, idx_queries, idx_lsh);
        if (*idx_s) return cmd_index_synth(g, idx_count, idx_dim, idx_out, idx_near, idx_noise);
        if (*v2t) return cmd_v2t(g, v2t_videos, v2t_captions, v2t_transcripts, v2t_gate, v2t_subset);
        if (*sel)
            return cmd_select(g, sel_sigmas, sel_baseline, sel_frames, sel_weak_rules,
                              sel_strong_rules, sel_heldout);
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
