#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socratic/world_state.hpp"

namespace socratic {

enum class AnswerModality { text_answer, image_search, audio_search };

const char* answer_modality_name(AnswerModality m);

struct Question {
    std::string text;
    std::optional<AnswerModality> requested_outputs;

    static Question of(std::string text) {
        Question q{std::move(text), {}};
        q.text = trim(q.text);
        if (q.text.empty()) throw InputError("question text must be nonempty");
        return q;
    }
};

struct RoutedQuery {
    AnswerModality modality = AnswerModality::text_answer;
    std::optional<std::string> search_entity;  // required for search modalities
    bool subjective = false;
    bool fallback = false;  // set when the LM output was unparseable
};

struct RetrievedFrame {
    std::size_t frame_index = 0;
    std::int64_t t_ms = 0;
    float score = 0.0f;
};

struct Answer {
    std::optional<std::string> text;
    std::optional<std::string> explanation;
    std::optional<std::vector<RetrievedFrame>> retrieved;
    AnswerModality modality = AnswerModality::text_answer;
    std::vector<std::string> warnings;
};

std::string answer_question(const std::string& history_text, const Question& q,
                            const TextCompleter& lm);

std::string explain_answer(const std::string& history_text, const Question& q,
                           const std::string& answer, const TextCompleter& lm);

std::string summarize_day(const std::string& history_text, const TextCompleter& lm);

// Parses "H:MM AM: text" lines into (ms-of-day, text) pairs, skipping lines
// that do not match.
std::vector<std::pair<std::int64_t, std::string>> parse_event_lines(const std::string& text);

struct ForecastResult {
    std::vector<std::pair<std::int64_t, std::string>> predictions;
    std::vector<std::int64_t> missing;
};

// World-state completion: the prompt appends the first future clock stamp and
// the parsed continuation is matched back against the requested timestamps.
// Timestamps are milliseconds since the log day's midnight.
ForecastResult forecast(const std::string& history_text,
                        const std::vector<std::int64_t>& future_timestamps,
                        const TextCompleter& lm);

std::string apply_correction(const std::string& context_text, const std::string& original_summary,
                             const std::string& correction, const TextCompleter& lm);

// Few-shot modality routing. Total: anything unparseable falls back to a
// text answer with the fallback flag set.
RoutedQuery route_question(const Question& q, const TextCompleter& lm,
                           const std::string& few_shot_block);

struct SearchIndexes {
    std::optional<KeyMatrix> image_keys;
    std::optional<KeyMatrix> audio_keys;
    int top_n = 3;
    int window = 1;
};

Answer execute(const Question& q, const FrameStream& stream, const WorldStateHistory& history,
               const SearchIndexes& indexes, const AdapterSet& adapters,
               const std::string& few_shot_block);

nlohmann::json answer_to_json(const Answer& a);

}  // namespace socratic
