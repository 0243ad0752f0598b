#include "socratic/caption.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "socratic/prompts.hpp"

namespace socratic {

namespace {

constexpr int kListMaxTokens = 64;
constexpr int kSummaryMaxTokens = 96;

bool scored_less(const ScoredLabel& a, const ScoredLabel& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.label < b.label;
}

float mean_score(const RankedEntities& r) {
    double s = 0.0;
    for (const auto& it : r.items) s += it.score;
    return static_cast<float>(s / static_cast<double>(r.items.size()));
}

// One completion with a single retry; empty text after the retry is an error
// carrying the raw completion.
std::string complete_or_throw(const TextCompleter& lm, const std::string& prompt,
                              CompletionParams params, const char* what) {
    params.sample_count = 1;
    std::string raw;
    for (int attempt = 0; attempt < 2; ++attempt) {
        raw = lm.complete(prompt, params).at(0);
        if (!trim(raw).empty()) return raw;
    }
    throw BackendError(std::string(what) + ": empty completion after retry (raw: \"" + raw + "\")");
}

float vlm_cosine(const Embedding& image, const VisualLanguageModel& vlm, const std::string& text) {
    return static_cast<float>(cosine_score(image, vlm.embed_text(text)));
}

}  // namespace

const char* category_name(Category c) {
    switch (c) {
        case Category::place: return "place";
        case Category::object: return "object";
        case Category::activity: return "activity";
        case Category::sound: return "sound";
        case Category::image_type: return "image_type";
        case Category::people_count: return "people_count";
    }
    return "?";
}

std::vector<std::string> RankedEntities::labels(std::size_t top_n) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < items.size() && i < top_n; ++i) out.push_back(items[i].label);
    return out;
}

bool RankedEntities::contains_normalized(const std::string& normalized_label) const {
    for (const auto& it : items)
        if (normalize_entity(it.label) == normalized_label) return true;
    return false;
}

void RankedEntities::sort_items() { std::stable_sort(items.begin(), items.end(), scored_less); }

void CaptionConfig::validate() const {
    if (n_places <= 0 || n_objects <= 0 || n_activities <= 0 || n_sounds <= 0)
        throw ConfigError("caption top-n counts must be positive");
    if (caption_candidates <= 0) throw ConfigError("caption_candidates must be positive");
    if (caption_temperature < 0.0f) throw ConfigError("caption_temperature must be >= 0");
    if (equilibrium_max_rounds <= 0) throw ConfigError("equilibrium_max_rounds must be positive");
    if (rerank_keep_threshold < -1.0f || rerank_keep_threshold > 1.0f)
        throw ConfigError("rerank_keep_threshold must lie in [-1, 1]");
}

RankedEntities rank_vocabulary(const Embedding& image, const EntityVocabulary& vocab,
                               const VisualLanguageModel& vlm, int top_k, Category category) {
    if (vocab.labels.empty()) throw InputError("rank_vocabulary: empty vocabulary");
    if (top_k <= 0 || static_cast<std::size_t>(top_k) > vocab.size())
        throw InputError("rank_vocabulary: top_k out of range");
    double inorm = det_norm(image.values);
    if (inorm == 0.0) throw InputError("rank_vocabulary: zero-norm image embedding");

    const Mat* rows = vocab.cached_text_embeddings ? &*vocab.cached_text_embeddings : nullptr;
    if (rows && rows->cols() != image.dim())
        throw InputError("rank_vocabulary: embedding dimension mismatch");

    RankedEntities out{category, {}};
    out.items.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        double dot = 0.0;
        if (rows) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            for (Eigen::Index c = 0; c < rows->cols(); ++c)
                dot += static_cast<double>((*rows)(r, c)) * static_cast<double>(image.values[c]);
        } else {
            Embedding label = vlm.embed_text(vocab.labels[i]);
            if (label.dim() != image.dim())
                throw InputError("rank_vocabulary: embedding dimension mismatch");
            dot = det_dot(label.values, image.values);
        }
        out.items.push_back({vocab.labels[i], static_cast<float>(dot / inorm)});
    }
    out.sort_items();
    out.items.resize(static_cast<std::size_t>(top_k));
    return out;
}

namespace {

// Drops leading "- ", "* " bullets and "3." / "3)" numbering.
std::string strip_bullet(std::string t) {
    if (t.size() >= 2 && (t[0] == '-' || t[0] == '*') && t[1] == ' ') return trim(t.substr(2));
    std::size_t p = 0;
    while (p < t.size() && std::isdigit(static_cast<unsigned char>(t[p]))) ++p;
    if (p > 0 && p < t.size() && (t[p] == '.' || t[p] == ')')) return trim(t.substr(p + 1));
    return t;
}

}  // namespace

namespace {

// LMs sometimes echo the list header ("Activities: cooking"); drop it.
std::string strip_list_header(std::string t) {
    std::size_t colon = t.find(':');
    if (colon == std::string::npos || colon + 1 >= t.size()) return t;
    for (std::size_t i = 0; i < colon; ++i)
        if (!std::isalpha(static_cast<unsigned char>(t[i])) && t[i] != ' ') return t;
    return trim(t.substr(colon + 1));
}

}  // namespace

std::vector<std::string> parse_entity_list(const std::string& completion) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::string piece;
    bool first = true;
    auto flush = [&] {
        std::string t = strip_bullet(trim(piece));
        piece.clear();
        if (first) {
            t = strip_list_header(t);
            first = false;
        }
        std::string norm = normalize_entity(t);
        if (!norm.empty() && seen.insert(norm).second) out.push_back(norm);
    };
    for (char c : completion) {
        if (c == ',' || c == '\n') flush();
        else piece.push_back(c);
    }
    flush();
    return out;
}

std::vector<std::string> generate_activities(const RankedEntities& places,
                                             const RankedEntities& objects,
                                             const TextCompleter& lm, const CaptionConfig& cfg) {
    cfg.validate();
    if (places.items.empty() || objects.items.empty())
        throw InputError("generate_activities: places and objects must be nonempty");
    std::string prompt = prompts::activities(places.labels(), objects.labels());
    CompletionParams p;
    p.max_tokens = kListMaxTokens;
    std::string raw;
    for (int attempt = 0; attempt < 2; ++attempt) {
        raw = lm.complete(prompt, p).at(0);
        auto parsed = parse_entity_list(raw);
        if (!parsed.empty()) return parsed;
    }
    throw BackendError("generate_activities: unparseable completion after retry (raw: \"" + raw +
                       "\")");
}

RankedEntities rerank_candidates(const Embedding& image, const std::vector<std::string>& candidates,
                                 const VisualLanguageModel& vlm, int top_k, Category category) {
    if (candidates.empty()) throw InputError("rerank_candidates: empty candidate list");
    if (top_k <= 0) throw InputError("rerank_candidates: top_k must be positive");
    RankedEntities out{category, {}};
    for (const auto& c : candidates) out.items.push_back({c, vlm_cosine(image, vlm, c)});
    out.sort_items();
    if (out.items.size() > static_cast<std::size_t>(top_k))
        out.items.resize(static_cast<std::size_t>(top_k));
    return out;
}

ExpansionResult expand_to_equilibrium(CaptionState& state, const TextCompleter& lm,
                                      const VisualLanguageModel& vlm, const Embedding& image,
                                      const CaptionConfig& cfg) {
    cfg.validate();
    if (state.places.items.empty() && state.objects.items.empty() && state.activities.items.empty())
        throw InputError("expand_to_equilibrium: state has no entities");

    auto propose = [&](const std::string& prompt) {
        CompletionParams p;
        p.max_tokens = kListMaxTokens;
        return parse_entity_list(lm.complete(prompt, p).at(0));
    };

    auto absorb = [&](RankedEntities& target, const std::vector<std::string>& proposals) {
        if (proposals.empty()) return false;
        float threshold = target.items.empty() ? cfg.rerank_keep_threshold : mean_score(target);
        bool added = false;
        for (const auto& label : proposals) {
            if (target.contains_normalized(label)) continue;
            float score = vlm_cosine(image, vlm, label);
            if (score >= threshold) {
                target.items.push_back({label, score});
                added = true;
            }
        }
        if (added) target.sort_items();
        return added;
    };

    ExpansionResult result;
    bool added_last_round = false;
    for (int round = 0; round < cfg.equilibrium_max_rounds; ++round) {
        bool added = false;
        if (!state.places.items.empty() && !state.objects.items.empty())
            added |= absorb(state.activities,
                            propose(prompts::activities(state.places.labels(), state.objects.labels())));
        if (!state.activities.items.empty()) {
            const std::string& top_activity = state.activities.items[0].label;
            added |= absorb(state.objects, propose(prompts::expand_objects(top_activity)));
            added |= absorb(state.places, propose(prompts::expand_places(top_activity)));
        }
        result.rounds_used = round + 1;
        added_last_round = added;
        if (!added) break;
    }
    result.truncated = added_last_round && result.rounds_used == cfg.equilibrium_max_rounds;
    return result;
}

std::string summarize_moment(const CaptionState& state, const TextCompleter& lm) {
    if (state.places.items.empty() || state.activities.items.empty())
        throw InputError("summarize_moment: needs at least one place and one activity");
    std::string prompt = prompts::moment_summary(state.places.labels(), state.objects.labels(),
                                                 state.activities.items[0].label);
    CompletionParams p;
    p.max_tokens = kSummaryMaxTokens;
    p.stop = {"\n"};
    return trim(complete_or_throw(lm, prompt, p, "summarize_moment"));
}

std::vector<std::string> suggest_sounds(const CaptionState& state, const TextCompleter& lm,
                                        const CaptionConfig& cfg) {
    cfg.validate();
    std::string prompt = prompts::possible_sounds(state.places.labels(), state.objects.labels(),
                                                  state.activities.labels(), cfg.n_sounds);
    CompletionParams p;
    p.max_tokens = kListMaxTokens;
    std::string raw;
    for (int attempt = 0; attempt < 2; ++attempt) {
        raw = lm.complete(prompt, p).at(0);
        auto parsed = parse_entity_list(raw);
        if (!parsed.empty()) {
            if (parsed.size() > static_cast<std::size_t>(cfg.n_sounds))
                parsed.resize(static_cast<std::size_t>(cfg.n_sounds));
            return parsed;
        }
    }
    throw BackendError("suggest_sounds: unparseable completion after retry (raw: \"" + raw + "\")");
}

ScoredLabel pick_sound(const Embedding& audio, const std::vector<std::string>& candidates,
                       const VisualLanguageModel& text_space) {
    if (candidates.empty()) throw InputError("pick_sound: empty candidate list");
    RankedEntities ranked{Category::sound, {}};
    for (const auto& c : candidates) ranked.items.push_back({c, vlm_cosine(audio, text_space, c)});
    ranked.sort_items();
    return ranked.items.front();
}

std::string summarize_moment_with_audio(const CaptionState& state,
                                        const std::optional<ScoredLabel>& sound,
                                        const TextCompleter& lm) {
    if (!sound) return summarize_moment(state, lm);
    if (state.places.items.empty() || state.activities.items.empty())
        throw InputError("summarize_moment_with_audio: needs at least one place and one activity");
    std::string prompt =
        prompts::moment_summary_with_audio(state.places.labels(), state.objects.labels(),
                                           sound->label, state.activities.items[0].label);
    CompletionParams p;
    p.max_tokens = kSummaryMaxTokens;
    p.stop = {"\n"};
    return trim(complete_or_throw(lm, prompt, p, "summarize_moment_with_audio"));
}

namespace {

void check_fixed_vocab(const EntityVocabulary& vocab, const std::set<std::string>& expected,
                       const char* what) {
    std::set<std::string> got(vocab.labels.begin(), vocab.labels.end());
    if (got != expected) throw ConfigError(std::string(what) + " vocabulary does not match the fixed label set");
}

}  // namespace

InternetCaptionResult caption_internet_image(const Embedding& image, InternetVocabs& vocabs,
                                             const TextCompleter& lm,
                                             const VisualLanguageModel& vlm,
                                             const CaptionConfig& cfg) {
    cfg.validate();
    check_fixed_vocab(vocabs.image_types, {"photo", "cartoon", "sketch", "painting"}, "image_types");
    check_fixed_vocab(vocabs.people_counts,
                      {"are no people", "is one person", "are two people", "are three people",
                       "are several people", "are many people"},
                      "people_counts");

    vocabs.places.ensure_text_embeddings(vlm);
    vocabs.objects.ensure_text_embeddings(vlm);
    vocabs.image_types.ensure_text_embeddings(vlm);
    vocabs.people_counts.ensure_text_embeddings(vlm);

    InternetCaptionResult r;
    r.image_type = rank_vocabulary(image, vocabs.image_types, vlm, 1, Category::image_type).items[0];
    r.people = rank_vocabulary(image, vocabs.people_counts, vlm, 1, Category::people_count).items[0];
    int n_places = std::min<int>(cfg.n_places, static_cast<int>(vocabs.places.size()));
    int n_objects = std::min<int>(cfg.n_objects, static_cast<int>(vocabs.objects.size()));
    r.places = rank_vocabulary(image, vocabs.places, vlm, n_places, Category::place);
    r.objects = rank_vocabulary(image, vocabs.objects, vlm, n_objects, Category::object);

    std::string prompt = prompts::internet_caption(r.image_type.label, r.people.label,
                                                   r.places.labels(), r.objects.labels());
    CompletionParams p;
    p.temperature = cfg.caption_temperature;
    p.sample_count = cfg.caption_candidates;
    p.max_tokens = kSummaryMaxTokens;
    p.stop = {"\n"};

    std::vector<std::string> texts;
    for (int attempt = 0; attempt < 2 && texts.empty(); ++attempt) {
        std::set<std::string> seen;
        for (const auto& c : lm.complete(prompt, p)) {
            std::string t = trim(c);
            if (!t.empty() && seen.insert(t).second) texts.push_back(t);
        }
    }
    if (texts.empty()) throw BackendError("caption_internet_image: all candidates empty after retry");

    for (const auto& t : texts) r.candidates.push_back({t, vlm_cosine(image, vlm, t)});
    std::stable_sort(r.candidates.begin(), r.candidates.end(), scored_less);
    r.caption = r.candidates.front().label;
    return r;
}

nlohmann::json ranked_to_json(const RankedEntities& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& it : r.items) arr.push_back({{"label", it.label}, {"score", it.score}});
    return arr;
}

RankedEntities ranked_from_json(const nlohmann::json& j, Category category) {
    RankedEntities out{category, {}};
    for (const auto& it : j)
        out.items.push_back({it.at("label").get<std::string>(), it.at("score").get<float>()});
    return out;
}

nlohmann::json internet_caption_json(const InternetCaptionResult& r) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) cands.push_back({{"text", c.label}, {"score", c.score}});
    return nlohmann::json{
        {"caption", r.caption},
        {"candidates", std::move(cands)},
        {"detections",
         {{"places", ranked_to_json(r.places)},
          {"objects", ranked_to_json(r.objects)},
          {"image_type", {{"label", r.image_type.label}, {"score", r.image_type.score}}},
          {"people", {{"label", r.people.label}, {"score", r.people.score}}}}}};
}

EgoCaptioner::EgoCaptioner(AdapterSet adapters, EntityVocabulary places, EntityVocabulary objects,
                           CaptionConfig cfg, bool use_equilibrium)
    : adapters_(std::move(adapters)),
      places_(std::move(places)),
      objects_(std::move(objects)),
      cfg_(cfg),
      use_equilibrium_(use_equilibrium) {
    cfg_.validate();
    require_adapters(adapters_, {AdapterRole::lm_generate, AdapterRole::vlm});
    // Caches fill here so summarize_frame stays const-and-concurrent.
    places_.ensure_text_embeddings(*adapters_.vlm);
    objects_.ensure_text_embeddings(*adapters_.vlm);
}

MomentSummary EgoCaptioner::summarize_frame(const Embedding& image,
                                            const std::optional<MediaRef>& audio,
                                            std::int64_t t_ms) const {
    if (audio) require_adapters(adapters_, {AdapterRole::alm});
    const TextCompleter& lm = *adapters_.lm_generate;
    const VisualLanguageModel& vlm = *adapters_.vlm;

    CaptionState state;
    int n_places = std::min<int>(cfg_.n_places, static_cast<int>(places_.size()));
    int n_objects = std::min<int>(cfg_.n_objects, static_cast<int>(objects_.size()));
    state.places = rank_vocabulary(image, places_, vlm, n_places, Category::place);
    state.objects = rank_vocabulary(image, objects_, vlm, n_objects, Category::object);
    auto candidates = generate_activities(state.places, state.objects, lm, cfg_);
    state.activities = rerank_candidates(image, candidates, vlm, cfg_.n_activities, Category::activity);
    if (use_equilibrium_) expand_to_equilibrium(state, lm, vlm, image, cfg_);

    MomentSummary m;
    m.timestamp_ms = t_ms;
    if (audio) {
        auto sounds = suggest_sounds(state, lm, cfg_);
        m.sound = pick_sound(adapters_.alm->embed_audio(*audio), sounds, vlm);
        m.summary_text = summarize_moment_with_audio(state, m.sound, lm);
    } else {
        m.summary_text = summarize_moment(state, lm);
    }
    // Event-log lines read as full sentences; completions follow "I am most
    // likely" so they usually lack the subject.
    if (m.summary_text.rfind("I am", 0) != 0) m.summary_text = "I am " + m.summary_text;
    m.places = std::move(state.places);
    m.objects = std::move(state.objects);
    m.activities = std::move(state.activities);
    return m;
}

MomentSummary EgoCaptioner::summarize_ref(const MediaRef& image_ref,
                                          const std::optional<MediaRef>& audio,
                                          std::int64_t t_ms) const {
    return summarize_frame(adapters_.vlm->embed_image(image_ref), audio, t_ms);
}

}  // namespace socratic
