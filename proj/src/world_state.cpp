#include "socratic/world_state.hpp"

#include <fstream>

#include "socratic/mock.hpp"
#include "socratic/prompts.hpp"

namespace socratic {

void FrameStream::validate() const {
    if (frames.empty()) throw InputError("frame stream is empty");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].image.dim() == 0) throw InputError("frame has an empty embedding");
        if (i > 0 && frames[i].t_ms <= frames[i - 1].t_ms)
            throw InputError("frame timestamps must be strictly increasing");
    }
}

FrameStream FrameStream::from_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open frames file: " + path);
    FrameStream stream;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("frames file line " + std::to_string(lineno) + " is not valid JSON");
        Frame f;
        f.t_ms = j.at("t_ms").get<std::int64_t>();
        const auto& vals = j.at("embedding");
        Vec v(static_cast<Eigen::Index>(vals.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = vals[static_cast<std::size_t>(i)].get<float>();
        f.image = Embedding{std::move(v), true};
        if (j.contains("audio")) f.audio = MediaRef::audio(j.at("audio").get<std::string>());
        stream.frames.push_back(std::move(f));
    }
    stream.validate();
    return stream;
}

void FrameStream::to_jsonl(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw InputError("cannot open frames file for write: " + path);
    for (const auto& f : frames) {
        nlohmann::json vals = nlohmann::json::array();
        for (int i = 0; i < f.image.dim(); ++i) vals.push_back(f.image.values[i]);
        nlohmann::json j{{"t_ms", f.t_ms}, {"embedding", std::move(vals)}};
        if (f.audio) j["audio"] = f.audio->locator;
        os << j.dump() << "\n";
    }
}

FrameStream stream_from_world(const SyntheticWorld& world) {
    FrameStream stream;
    for (const auto& spec : world.frames()) {
        Frame f;
        f.t_ms = spec.t_ms;
        f.image = world.frame_embedding(spec.id);
        if (!spec.audio_id.empty()) f.audio = MediaRef::audio(spec.audio_id);
        stream.frames.push_back(std::move(f));
    }
    stream.validate();
    return stream;
}

std::vector<std::size_t> select_uniform(const FrameStream& stream, std::int64_t interval_ms) {
    stream.validate();
    if (interval_ms <= 0) throw InputError("select_uniform: interval must be positive");
    std::vector<std::size_t> out;
    const auto& frames = stream.frames;
    std::int64_t last_ts = frames.back().t_ms;
    std::size_t cursor = 0;
    for (std::int64_t grid = frames.front().t_ms; grid <= last_ts; grid += interval_ms) {
        while (cursor < frames.size() && frames[cursor].t_ms < grid) ++cursor;
        if (cursor >= frames.size()) break;
        if (out.empty() || out.back() != cursor) out.push_back(cursor);
    }
    return out;
}

KeyMatrix build_image_keys(const FrameStream& stream) {
    stream.validate();
    Mat rows(static_cast<Eigen::Index>(stream.frames.size()), stream.frames[0].image.dim());
    for (std::size_t i = 0; i < stream.frames.size(); ++i) {
        if (stream.frames[i].image.dim() != rows.cols())
            throw InputError("frame stream has mixed embedding dimensions");
        rows.row(static_cast<Eigen::Index>(i)) = stream.frames[i].image.values.transpose();
    }
    return KeyMatrix::from_rows(std::move(rows));
}

KeyMatrix build_audio_keys(const FrameStream& stream, const AudioLanguageModel& alm) {
    stream.validate();
    Mat rows;
    bool sized = false;
    for (std::size_t i = 0; i < stream.frames.size(); ++i) {
        if (!stream.frames[i].audio) continue;
        Embedding e = alm.embed_audio(*stream.frames[i].audio);
        if (!sized) {
            rows = Mat::Zero(static_cast<Eigen::Index>(stream.frames.size()), e.dim());
            sized = true;
        }
        rows.row(static_cast<Eigen::Index>(i)) = e.values.transpose();
    }
    if (!sized) throw InputError("no frame in the stream carries audio");
    return KeyMatrix::from_rows(std::move(rows));
}

std::vector<std::size_t> select_by_search(const FrameStream& stream,
                                          const std::vector<std::string>& entities,
                                          SearchModality modality, int n_per_entity,
                                          const KeyMatrix& keys,
                                          const VisualLanguageModel& text_space, int window) {
    stream.validate();
    (void)modality;  // both modalities rank entity text against the supplied keys
    if (entities.empty()) throw InputError("select_by_search: no search entities");
    if (n_per_entity < 1) throw InputError("select_by_search: n_per_entity must be >= 1");
    if (keys.count() != static_cast<Eigen::Index>(stream.frames.size()))
        throw InputError("select_by_search: index size does not match stream length");

    std::vector<std::size_t> selected;
    for (const auto& entity : entities) {
        Embedding q = text_space.embed_text(entity);
        if (q.dim() != keys.dim()) throw InputError("select_by_search: dimension mismatch");
        std::vector<float> scores(static_cast<std::size_t>(keys.count()));
        for (Eigen::Index r = 0; r < keys.count(); ++r)
            scores[static_cast<std::size_t>(r)] =
                static_cast<float>(det_dot(keys.rows.row(r).transpose(), q.values));
        for (std::size_t idx : top_n_local_maxima(scores, n_per_entity, window))
            selected.push_back(idx);
    }
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    return selected;  // frame index order == timestamp order
}

WorldStateHistory compile_history(const FrameStream& stream,
                                  const std::vector<std::size_t>& indices,
                                  const EgoCaptioner& captioner, HistorySource source) {
    stream.validate();
    if (indices.empty()) throw InputError("compile_history: no key moments selected");
    for (std::size_t i = 0; i + 1 < indices.size(); ++i)
        if (indices[i] >= indices[i + 1]) throw InputError("compile_history: indices must be sorted");
    if (indices.back() >= stream.frames.size())
        throw InputError("compile_history: index out of range");

    WorldStateHistory history;
    history.source = source;
    history.events.reserve(indices.size());
    for (std::size_t idx : indices) {
        const Frame& f = stream.frames[idx];
        try {
            history.events.push_back(captioner.summarize_frame(f.image, f.audio, f.t_ms));
        } catch (const Error& e) {
            throw BackendError("frame " + std::to_string(idx) + ": " + e.what());
        }
    }
    return history;
}

std::string render_history(const WorldStateHistory& history, ClockFormat format) {
    if (history.events.empty()) throw InputError("render_history: empty history");
    std::string out;
    for (std::size_t i = 0; i < history.events.size(); ++i) {
        const MomentSummary& e = history.events[i];
        if (i) out += "\n";
        if (format == ClockFormat::twelve_hour) {
            out += clock_12h(e.timestamp_ms);
        } else {
            std::int64_t minutes = (e.timestamp_ms / 60000) % (24 * 60);
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%lld:%02lld", static_cast<long long>(minutes / 60),
                          static_cast<long long>(minutes % 60));
            out += buf;
        }
        out += ": " + e.summary_text;
    }
    return out;
}

WorldStateHistory recursive_summarize(const WorldStateHistory& history, const TextCompleter& lm,
                                      const RecursiveSummaryConfig& cfg) {
    if (cfg.context_budget_chars == 0) throw ConfigError("context budget must be positive");
    if (cfg.chunk_size < 2) throw ConfigError("chunk_size must be >= 2");
    if (history.events.empty()) throw InputError("recursive_summarize: empty history");

    WorldStateHistory current = history;
    while (render_history(current).size() > cfg.context_budget_chars) {
        if (current.events.size() == 1)
            throw InputError("recursive_summarize: a single event exceeds the context budget");
        WorldStateHistory condensed;
        condensed.source = current.source;
        condensed.search_entities = current.search_entities;
        for (std::size_t begin = 0; begin < current.events.size(); begin += cfg.chunk_size) {
            std::size_t end = std::min(begin + cfg.chunk_size, current.events.size());
            WorldStateHistory chunk;
            chunk.events.assign(current.events.begin() + static_cast<std::ptrdiff_t>(begin),
                                current.events.begin() + static_cast<std::ptrdiff_t>(end));
            std::string prompt = prompts::chunk_summary(render_history(chunk));
            CompletionParams p;
            p.max_tokens = 96;
            p.stop = {"\n"};
            std::string text = trim(lm.complete(prompt, p).at(0));
            if (text.empty()) {
                p.stop.clear();
                text = trim(lm.complete(prompt, p).at(0));
            }
            if (text.empty())
                throw BackendError("recursive_summarize: empty chunk summary completion");
            MomentSummary synthetic;
            synthetic.timestamp_ms = chunk.events.front().timestamp_ms;
            synthetic.summary_text = text;
            synthetic.origin = "condensed";
            condensed.events.push_back(std::move(synthetic));
        }
        current = std::move(condensed);
    }
    return current;
}

namespace {

nlohmann::json event_to_json(const MomentSummary& e) {
    nlohmann::json j{{"t_ms", e.timestamp_ms},
                     {"places", ranked_to_json(e.places)},
                     {"objects", ranked_to_json(e.objects)},
                     {"activities", ranked_to_json(e.activities)},
                     {"summary", e.summary_text},
                     {"origin", e.origin}};
    if (e.sound) j["sound"] = {{"label", e.sound->label}, {"score", e.sound->score}};
    return j;
}

MomentSummary event_from_json(const nlohmann::json& j) {
    MomentSummary e;
    e.timestamp_ms = j.at("t_ms").get<std::int64_t>();
    e.places = ranked_from_json(j.at("places"), Category::place);
    e.objects = ranked_from_json(j.at("objects"), Category::object);
    e.activities = ranked_from_json(j.at("activities"), Category::activity);
    e.summary_text = j.at("summary").get<std::string>();
    e.origin = j.value("origin", "observed");
    if (j.contains("sound"))
        e.sound = ScoredLabel{j.at("sound").at("label").get<std::string>(),
                              j.at("sound").at("score").get<float>()};
    return e;
}

}  // namespace

nlohmann::json history_to_json(const WorldStateHistory& history) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : history.events) events.push_back(event_to_json(e));
    nlohmann::json j{{"source", history.source == HistorySource::uniform ? "uniform" : "search"},
                     {"events", std::move(events)}};
    if (history.search_entities) j["search_entities"] = *history.search_entities;
    return j;
}

WorldStateHistory history_from_json(const nlohmann::json& j) {
    WorldStateHistory h;
    std::string source = j.at("source").get<std::string>();
    if (source == "uniform") h.source = HistorySource::uniform;
    else if (source == "search") h.source = HistorySource::search;
    else throw InputError("unknown history source: " + source);
    if (j.contains("search_entities"))
        h.search_entities = j.at("search_entities").get<std::vector<std::string>>();
    for (const auto& e : j.at("events")) h.events.push_back(event_from_json(e));
    return h;
}

void history_save(const WorldStateHistory& history, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw InputError("cannot write history file: " + path);
    os << history_to_json(history).dump(2) << "\n";
}

WorldStateHistory history_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open history file: " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw InputError("history file is not valid JSON: " + path);
    return history_from_json(j);
}

}  // namespace socratic
