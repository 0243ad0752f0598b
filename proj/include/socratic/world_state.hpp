#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socratic/caption.hpp"
#include "socratic/retrieval.hpp"

namespace socratic {

struct Frame {
    std::int64_t t_ms = 0;
    Embedding image;
    std::optional<MediaRef> audio;
};

// Time-ordered frames with precomputed image embeddings.
struct FrameStream {
    std::vector<Frame> frames;

    void validate() const;

    // JSONL, one frame per line: {"t_ms": ..., "embedding": [...], "audio": "locator"?}
    static FrameStream from_jsonl(const std::string& path);
    void to_jsonl(const std::string& path) const;
};

class SyntheticWorld;
FrameStream stream_from_world(const SyntheticWorld& world);

enum class HistorySource { uniform, search };

struct WorldStateHistory {
    std::vector<MomentSummary> events;
    HistorySource source = HistorySource::uniform;
    std::optional<std::vector<std::string>> search_entities;
};

// Key-moment selection ------------------------------------------------------

// Grid walk from the first timestamp: for each grid point take the first
// frame at or after it. Sorted and duplicate-free.
std::vector<std::size_t> select_uniform(const FrameStream& stream, std::int64_t interval_ms);

enum class SearchModality { image, audio };

// Union of per-entity local-maxima peaks, sorted by timestamp. `keys` holds
// one row per frame in the matching modality's embedding space.
std::vector<std::size_t> select_by_search(const FrameStream& stream,
                                          const std::vector<std::string>& entities,
                                          SearchModality modality, int n_per_entity,
                                          const KeyMatrix& keys,
                                          const VisualLanguageModel& text_space, int window = 1);

KeyMatrix build_image_keys(const FrameStream& stream);
// Frames without audio contribute an all-zero row (they never win a ranking).
KeyMatrix build_audio_keys(const FrameStream& stream, const AudioLanguageModel& alm);

// Compilation and rendering --------------------------------------------------

WorldStateHistory compile_history(const FrameStream& stream, const std::vector<std::size_t>& indices,
                                  const EgoCaptioner& captioner,
                                  HistorySource source = HistorySource::uniform);

enum class ClockFormat { twelve_hour, twenty_four_hour };

std::string render_history(const WorldStateHistory& history,
                           ClockFormat format = ClockFormat::twelve_hour);

struct RecursiveSummaryConfig {
    std::size_t context_budget_chars = 4000;
    std::size_t chunk_size = 6;
};

// Condenses contiguous chunks of events into synthetic "condensed" events
// until the rendered history fits the budget. Errors when a single event
// cannot be reduced below budget.
WorldStateHistory recursive_summarize(const WorldStateHistory& history, const TextCompleter& lm,
                                      const RecursiveSummaryConfig& cfg);

// Event-log JSON; round-trips losslessly.
nlohmann::json history_to_json(const WorldStateHistory& history);
WorldStateHistory history_from_json(const nlohmann::json& j);
void history_save(const WorldStateHistory& history, const std::string& path);
WorldStateHistory history_load(const std::string& path);

}  // namespace socratic
