#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "socratic/adapters.hpp"
#include "socratic/vocab.hpp"

namespace socratic {

enum class Category { place, object, activity, sound, image_type, people_count };

const char* category_name(Category c);

struct ScoredLabel {
    std::string label;
    float score = 0.0f;
};

// Scored label list, sorted score-descending with lexicographic tie order.
struct RankedEntities {
    Category category = Category::place;
    std::vector<ScoredLabel> items;

    std::vector<std::string> labels(std::size_t top_n = SIZE_MAX) const;
    bool contains_normalized(const std::string& normalized_label) const;
    void sort_items();
};

struct CaptionConfig {
    int n_places = 3;
    int n_objects = 3;
    int n_activities = 3;
    int n_sounds = 5;
    int caption_candidates = 8;
    float caption_temperature = 0.9f;
    int equilibrium_max_rounds = 3;
    float rerank_keep_threshold = 0.0f;

    // Internet images rank a larger object list into the caption prompt.
    static CaptionConfig internet() {
        CaptionConfig c;
        c.n_objects = 10;
        return c;
    }

    void validate() const;
};

// Detected entity state of one image; grows during equilibrium expansion.
struct CaptionState {
    RankedEntities places{Category::place, {}};
    RankedEntities objects{Category::object, {}};
    RankedEntities activities{Category::activity, {}};
};

struct MomentSummary {
    std::int64_t timestamp_ms = 0;
    RankedEntities places{Category::place, {}};
    RankedEntities objects{Category::object, {}};
    RankedEntities activities{Category::activity, {}};
    std::optional<ScoredLabel> sound;
    std::string summary_text;
    std::string origin = "observed";
};

// --- Core operations -------------------------------------------------------

// Uses the vocabulary's cached text embeddings when present; otherwise each
// label is embedded on the fly (callers that rank repeatedly should call
// ensure_text_embeddings first).
RankedEntities rank_vocabulary(const Embedding& image, const EntityVocabulary& vocab,
                               const VisualLanguageModel& vlm, int top_k, Category category);

// Splits an LM list completion on commas and newlines, strips bullets and
// numbering, trims terminal punctuation, normalizes and dedups.
std::vector<std::string> parse_entity_list(const std::string& completion);

std::vector<std::string> generate_activities(const RankedEntities& places,
                                             const RankedEntities& objects,
                                             const TextCompleter& lm, const CaptionConfig& cfg);

RankedEntities rerank_candidates(const Embedding& image, const std::vector<std::string>& candidates,
                                 const VisualLanguageModel& vlm, int top_k, Category category);

struct ExpansionResult {
    int rounds_used = 0;
    bool truncated = false;
};

// (LM generate, VLM re-rank, repeat) until a round adds no new entity or the
// round budget runs out.
ExpansionResult expand_to_equilibrium(CaptionState& state, const TextCompleter& lm,
                                      const VisualLanguageModel& vlm, const Embedding& image,
                                      const CaptionConfig& cfg);

std::string summarize_moment(const CaptionState& state, const TextCompleter& lm);

std::vector<std::string> suggest_sounds(const CaptionState& state, const TextCompleter& lm,
                                        const CaptionConfig& cfg);

ScoredLabel pick_sound(const Embedding& audio, const std::vector<std::string>& candidates,
                       const VisualLanguageModel& text_space);

std::string summarize_moment_with_audio(const CaptionState& state,
                                        const std::optional<ScoredLabel>& sound,
                                        const TextCompleter& lm);

// --- Internet image captioning ---------------------------------------------

struct InternetVocabs {
    EntityVocabulary places;
    EntityVocabulary objects;
    EntityVocabulary image_types;
    EntityVocabulary people_counts;
};

struct InternetCaptionResult {
    std::string caption;
    std::vector<ScoredLabel> candidates;  // score desc
    ScoredLabel image_type;
    ScoredLabel people;
    RankedEntities places{Category::place, {}};
    RankedEntities objects{Category::object, {}};
};

InternetCaptionResult caption_internet_image(const Embedding& image, InternetVocabs& vocabs,
                                             const TextCompleter& lm,
                                             const VisualLanguageModel& vlm,
                                             const CaptionConfig& cfg);

nlohmann::json internet_caption_json(const InternetCaptionResult& r);

// --- Egocentric frame pipeline ---------------------------------------------

// Bundles adapters, vocabularies and config into the per-frame summarizer
// used when compiling world-state history.
class EgoCaptioner {
public:
    EgoCaptioner(AdapterSet adapters, EntityVocabulary places, EntityVocabulary objects,
                 CaptionConfig cfg = {}, bool use_equilibrium = false);

    MomentSummary summarize_frame(const Embedding& image, const std::optional<MediaRef>& audio,
                                  std::int64_t t_ms) const;

    // Embeds the frame through the VLM first; the path model selection takes.
    MomentSummary summarize_ref(const MediaRef& image_ref, const std::optional<MediaRef>& audio,
                                std::int64_t t_ms) const;

    const AdapterSet& adapters() const { return adapters_; }
    const CaptionConfig& config() const { return cfg_; }

private:
    AdapterSet adapters_;
    EntityVocabulary places_;
    EntityVocabulary objects_;
    CaptionConfig cfg_;
    bool use_equilibrium_;
};

nlohmann::json ranked_to_json(const RankedEntities& r);
RankedEntities ranked_from_json(const nlohmann::json& j, Category category);

}  // namespace socratic
