#include "socratic/reasoning.hpp"

#include <algorithm>

#include "socratic/prompts.hpp"

namespace socratic {

namespace {

std::string complete_once(const TextCompleter& lm, const std::string& prompt,
                          CompletionParams params, const char* what) {
    params.sample_count = 1;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string text = trim(lm.complete(prompt, params).at(0));
        if (!text.empty()) return text;
    }
    throw BackendError(std::string(what) + ": empty completion after retry");
}

}  // namespace

const char* answer_modality_name(AnswerModality m) {
    switch (m) {
        case AnswerModality::text_answer: return "text";
        case AnswerModality::image_search: return "image";
        case AnswerModality::audio_search: return "audio";
    }
    return "?";
}

std::string answer_question(const std::string& history_text, const Question& q,
                            const TextCompleter& lm) {
    require_nonempty_text(history_text, "history");
    require_nonempty_text(q.text, "question");
    CompletionParams p;
    p.max_tokens = 64;
    p.stop = {"\nQ:"};
    return complete_once(lm, prompts::question_answer(history_text, q.text), p, "answer_question");
}

std::string explain_answer(const std::string& history_text, const Question& q,
                           const std::string& answer, const TextCompleter& lm) {
    require_nonempty_text(answer, "answer");
    CompletionParams p;
    p.max_tokens = 64;
    p.stop = {"\n"};
    return complete_once(lm, prompts::explanation(history_text, q.text, answer), p,
                         "explain_answer");
}

std::string summarize_day(const std::string& history_text, const TextCompleter& lm) {
    require_nonempty_text(history_text, "history");
    CompletionParams p;
    p.max_tokens = 96;
    p.stop = {"\n"};
    return complete_once(lm, prompts::day_summary(history_text), p, "summarize_day");
}

std::vector<std::pair<std::int64_t, std::string>> parse_event_lines(const std::string& text) {
    std::vector<std::pair<std::int64_t, std::string>> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        // Clock stamp ends at the colon after the AM/PM marker.
        std::size_t mark = line.find("M:");
        if (mark == std::string::npos || mark < 4) continue;
        std::int64_t t = parse_clock_12h(line.substr(0, mark + 1));
        if (t < 0) continue;
        out.emplace_back(t, trim(line.substr(mark + 2)));
    }
    return out;
}

ForecastResult forecast(const std::string& history_text,
                        const std::vector<std::int64_t>& future_timestamps,
                        const TextCompleter& lm) {
    require_nonempty_text(history_text, "history");
    if (future_timestamps.empty()) throw InputError("forecast: no future timestamps given");

    auto history_events = parse_event_lines(history_text);
    std::int64_t last_ms = history_events.empty() ? -1 : history_events.back().first;
    std::vector<std::int64_t> wanted = future_timestamps;
    std::sort(wanted.begin(), wanted.end());
    for (std::int64_t t : wanted)
        if (t <= last_ms)
            throw InputError("forecast: timestamps must lie strictly after the last history event");

    std::string first_clock = clock_12h(wanted.front());
    std::string prompt = prompts::forecast(history_text, first_clock);
    CompletionParams p;
    p.max_tokens = 128;
    // Keep the raw completion: a leading newline means the LM skipped the
    // prompt's clock slot, which the parse below must see.
    std::string completion;
    for (int attempt = 0; attempt < 2; ++attempt) {
        completion = lm.complete(prompt, p).at(0);
        if (!trim(completion).empty()) break;
    }
    if (trim(completion).empty()) throw BackendError("forecast: empty completion after retry");

    // The first line continues the prompt's clock stamp; later lines carry
    // their own stamps.
    std::size_t nl = completion.find('\n');
    std::string head = trim(nl == std::string::npos ? completion : completion.substr(0, nl));
    std::string rest = nl == std::string::npos ? std::string() : completion.substr(nl + 1);
    std::vector<std::pair<std::int64_t, std::string>> parsed;
    if (!head.empty())
        parsed.emplace_back(((wanted.front() % 86400000) + 86400000) % 86400000, head);
    for (auto& line : parse_event_lines(rest)) parsed.push_back(std::move(line));
    if (parsed.empty())
        throw BackendError("forecast: unparseable completion (raw: \"" + completion + "\")");

    ForecastResult result;
    std::size_t cursor = 0;
    for (std::int64_t t : wanted) {
        std::int64_t day_ms = ((t % 86400000) + 86400000) % 86400000;
        bool found = false;
        for (std::size_t i = cursor; i < parsed.size(); ++i) {
            if (parsed[i].first == day_ms) {
                result.predictions.emplace_back(t, parsed[i].second);
                cursor = i + 1;
                found = true;
                break;
            }
        }
        if (!found) result.missing.push_back(t);
    }
    return result;
}

std::string apply_correction(const std::string& context_text, const std::string& original_summary,
                             const std::string& correction, const TextCompleter& lm) {
    require_nonempty_text(context_text, "context");
    require_nonempty_text(original_summary, "original summary");
    require_nonempty_text(correction, "correction");
    CompletionParams p;
    p.max_tokens = 96;
    p.stop = {"\n"};
    return complete_once(lm, prompts::correction(context_text, original_summary, correction), p,
                         "apply_correction");
}

RoutedQuery route_question(const Question& q, const TextCompleter& lm,
                           const std::string& few_shot_block) {
    require_nonempty_text(few_shot_block, "few-shot routing block");
    require_nonempty_text(q.text, "question");

    CompletionParams p;
    p.max_tokens = 24;
    p.stop = {"\n"};
    std::string raw;
    try {
        raw = trim(lm.complete(prompts::route(few_shot_block, q.text), p).at(0));
    } catch (const Error&) {
        raw.clear();
    }

    RoutedQuery fallback;
    fallback.fallback = true;

    std::size_t bar = raw.find('|');
    std::string modality = to_lower(trim(bar == std::string::npos ? raw : raw.substr(0, bar)));
    std::string entity = bar == std::string::npos ? "" : trim(raw.substr(bar + 1));

    RoutedQuery out;
    if (modality == "text") {
        out.modality = AnswerModality::text_answer;
        if (entity == "subjective") out.subjective = true;
        return out;
    }
    if (modality == "image" || modality == "audio") {
        if (entity.empty() || entity == "-") return fallback;
        out.modality = modality == "image" ? AnswerModality::image_search
                                           : AnswerModality::audio_search;
        out.search_entity = entity;
        return out;
    }
    return fallback;
}

namespace {

Answer run_search(const FrameStream& stream, const KeyMatrix& keys, const std::string& entity,
                  AnswerModality modality, const SearchIndexes& indexes,
                  const VisualLanguageModel& text_space) {
    if (keys.count() != static_cast<Eigen::Index>(stream.frames.size()))
        throw InputError("execute: index size does not match stream length");
    Embedding query = text_space.embed_text(entity);
    if (query.dim() != keys.dim()) throw InputError("execute: index dimension mismatch");
    std::vector<float> scores(static_cast<std::size_t>(keys.count()));
    for (Eigen::Index r = 0; r < keys.count(); ++r)
        scores[static_cast<std::size_t>(r)] =
            static_cast<float>(det_dot(keys.rows.row(r).transpose(), query.values));
    Answer a;
    a.modality = modality;
    a.retrieved.emplace();
    for (std::size_t idx : top_n_local_maxima(scores, indexes.top_n, indexes.window))
        a.retrieved->push_back({idx, stream.frames[idx].t_ms, scores[idx]});
    return a;
}

}  // namespace

Answer execute(const Question& q, const FrameStream& stream, const WorldStateHistory& history,
               const SearchIndexes& indexes, const AdapterSet& adapters,
               const std::string& few_shot_block) {
    require_adapters(adapters, {AdapterRole::lm_generate});

    RoutedQuery routed;
    if (q.requested_outputs && *q.requested_outputs == AnswerModality::text_answer) {
        routed.modality = AnswerModality::text_answer;
    } else {
        routed = route_question(q, *adapters.lm_generate, few_shot_block);
        if (q.requested_outputs && *q.requested_outputs != routed.modality) {
            routed.modality = *q.requested_outputs;
            if (!routed.search_entity) {
                routed.search_entity = q.text;
                routed.fallback = true;
            }
        }
    }

    Answer answer;
    switch (routed.modality) {
        case AnswerModality::text_answer: {
            if (history.events.empty())
                throw InputError("execute: text answer requires a nonempty history");
            std::string history_text = render_history(history);
            answer.modality = AnswerModality::text_answer;
            answer.text = answer_question(history_text, q, *adapters.lm_generate);
            answer.explanation = explain_answer(history_text, q, *answer.text, *adapters.lm_generate);
            break;
        }
        case AnswerModality::image_search: {
            require_adapters(adapters, {AdapterRole::vlm});
            if (!indexes.image_keys)
                throw ConfigError("execute: image search requested but no image index is loaded");
            answer = run_search(stream, *indexes.image_keys, *routed.search_entity,
                                AnswerModality::image_search, indexes, *adapters.vlm);
            break;
        }
        case AnswerModality::audio_search: {
            require_adapters(adapters, {AdapterRole::vlm});
            if (!indexes.audio_keys)
                throw ConfigError("execute: audio search requested but no audio index is loaded");
            answer = run_search(stream, *indexes.audio_keys, *routed.search_entity,
                                AnswerModality::audio_search, indexes, *adapters.vlm);
            break;
        }
    }
    if (routed.subjective) answer.warnings.push_back("subjective");
    if (routed.fallback) answer.warnings.push_back("routing_fallback");
    return answer;
}

nlohmann::json answer_to_json(const Answer& a) {
    nlohmann::json j{{"modality", answer_modality_name(a.modality)},
                     {"warnings", a.warnings}};
    if (a.text) j["text"] = *a.text;
    if (a.explanation) j["explanation"] = *a.explanation;
    if (a.retrieved) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : *a.retrieved)
            arr.push_back({{"t_ms", r.t_ms}, {"score", r.score}});
        j["retrieved"] = std::move(arr);
    }
    return j;
}

}  // namespace socratic
