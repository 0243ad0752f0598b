#include "socratic/mock.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

namespace socratic {

namespace {

Vec seeded_gaussian(std::uint64_t seed, int dim) {
    Rng rng(seed);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = static_cast<float>(rng.normal());
    return v;
}

std::string strip_locator_scheme(const std::string& locator, const char* scheme) {
    std::string prefix = std::string(scheme) + ":";
    if (locator.rfind(prefix, 0) == 0) return locator.substr(prefix.size());
    return locator;
}

}  // namespace

void SyntheticWorld::add_frame(FrameSpec f) {
    if (f.id.empty()) throw InputError("frame id must be nonempty");
    if (frame_index_.count(f.id)) throw InputError("duplicate frame id: " + f.id);
    frame_index_[f.id] = frames_.size();
    frames_.push_back(std::move(f));
}

void SyntheticWorld::add_audio(AudioSpec a) {
    if (a.id.empty()) throw InputError("audio id must be nonempty");
    if (!audio_.emplace(a.id, a).second) throw InputError("duplicate audio id: " + a.id);
}

Embedding SyntheticWorld::entity_vector(const std::string& label) const {
    if (trim(label).empty()) throw InputError("entity label must be nonempty");
    Vec v = seeded_gaussian(mix_seed(seed_, "entity/" + normalize_entity(label)), dim_);
    return Embedding::unit(std::move(v));
}

Embedding SyntheticWorld::frame_embedding(const std::string& frame_id) const {
    const FrameSpec& f = frame(frame_id);
    Vec sum = Vec::Zero(dim_);
    for (const auto& e : f.entities) sum += entity_vector(e).values;
    if (frame_noise_ > 0.0f)
        sum += frame_noise_ * seeded_gaussian(mix_seed(seed_, "frame-noise/" + frame_id), dim_);
    return Embedding::unit(std::move(sum));
}

Embedding SyntheticWorld::audio_embedding(const std::string& audio_id) const {
    const AudioSpec& a = audio(audio_id);
    if (a.sounds.empty()) throw InputError("audio clip has no sound entities: " + audio_id);
    Vec sum = Vec::Zero(dim_);
    for (const auto& s : a.sounds) sum += entity_vector(s).values;
    if (frame_noise_ > 0.0f)
        sum += frame_noise_ * seeded_gaussian(mix_seed(seed_, "audio-noise/" + audio_id), dim_);
    return Embedding::unit(std::move(sum));
}

const SyntheticWorld::FrameSpec& SyntheticWorld::frame(const std::string& frame_id) const {
    auto it = frame_index_.find(frame_id);
    if (it == frame_index_.end()) throw InputError("unknown frame locator: " + frame_id);
    return frames_[it->second];
}

const SyntheticWorld::AudioSpec& SyntheticWorld::audio(const std::string& audio_id) const {
    auto it = audio_.find(audio_id);
    if (it == audio_.end()) throw InputError("unknown audio locator: " + audio_id);
    return it->second;
}

SyntheticWorld SyntheticWorld::from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open world file: " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw InputError("world file is not valid JSON: " + path);
    SyntheticWorld world(j.value("seed", 7ULL), j.value("dim", 256), j.value("frame_noise", 0.0f));
    for (const auto& jf : j.value("frames", nlohmann::json::array())) {
        FrameSpec f;
        f.id = jf.at("id").get<std::string>();
        f.t_ms = jf.value("t_ms", 0LL);
        f.entities = jf.value("entities", std::vector<std::string>{});
        f.audio_id = jf.value("audio", std::string());
        world.add_frame(std::move(f));
    }
    for (const auto& ja : j.value("audio", nlohmann::json::array())) {
        AudioSpec a;
        a.id = ja.at("id").get<std::string>();
        a.sounds = ja.value("sounds", std::vector<std::string>{});
        a.transcript = ja.value("transcript", std::string());
        world.add_audio(std::move(a));
    }
    return world;
}

Embedding MockVlm::embed_text(const std::string& label) const {
    return world_->entity_vector(label);
}

Embedding MockVlm::embed_image(const MediaRef& ref) const {
    if (ref.kind != MediaKind::image) throw InputError("embed_image expects an image ref");
    std::string id = strip_locator_scheme(ref.locator, "frame");
    Vec v = world_->frame_embedding(id).values;
    if (sigma_ > 0.0f)
        v += sigma_ * seeded_gaussian(mix_seed(seed_, "vlm-noise/" + id_ + "/" + id), world_->dim());
    return Embedding::unit(std::move(v));
}

Embedding MockAlm::embed_audio(const MediaRef& ref) const {
    if (ref.kind != MediaKind::audio) throw InputError("embed_audio expects an audio ref");
    std::string id = strip_locator_scheme(ref.locator, "audio");
    Vec v = world_->audio_embedding(id).values;
    if (sigma_ > 0.0f)
        v += sigma_ * seeded_gaussian(mix_seed(seed_, "alm-noise/" + id_ + "/" + id), world_->dim());
    return Embedding::unit(std::move(v));
}

std::string MockAlm::transcribe(const MediaRef& ref) const {
    if (ref.kind != MediaKind::audio) throw InputError("transcribe expects an audio ref");
    return world_->audio(strip_locator_scheme(ref.locator, "audio")).transcript;
}

std::vector<std::string> MockSentenceEmbedder::tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

int MockSentenceEmbedder::token_coordinate(const std::string& token) const {
    return static_cast<int>(fnv1a64(token, seed_ ^ 0xA5A5A5A5A5A5A5A5ULL) % static_cast<std::uint64_t>(dim_));
}

Embedding MockSentenceEmbedder::embed(const std::string& text) const {
    require_nonempty_text(text, "text");
    auto tokens = tokenize(text);
    if (tokens.empty()) throw InputError("text has no tokens");
    Vec v = Vec::Zero(dim_);
    for (const auto& t : tokens) v[token_coordinate(t)] += 1.0f;
    return Embedding::unit(std::move(v));
}

void MockLm::add_rule(Rule rule) {
    if (!rule.regex_text.empty())
        rule.regex = std::regex(rule.regex_text, std::regex::ECMAScript);
    rules_.push_back(std::move(rule));
}

void MockLm::load_rules_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open rule table: " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw InputError("rule table is not valid JSON: " + path);
    for (const auto& jr : j.at("rules")) {
        Rule r;
        r.name = jr.value("name", std::string());
        r.suffix = jr.value("suffix", std::string());
        r.contains = jr.value("contains", std::vector<std::string>{});
        r.tail_anchor = jr.value("tail_anchor", std::string("Q:"));
        r.tail_contains = jr.value("tail_contains", std::vector<std::string>{});
        r.regex_text = jr.value("regex", std::string());
        if (jr.contains("responses"))
            r.responses = jr.at("responses").get<std::vector<std::string>>();
        else if (jr.contains("response"))
            r.responses = {jr.at("response").get<std::string>()};
        add_rule(std::move(r));
    }
}

const MockLm::Rule* MockLm::match(const std::string& prompt, std::smatch& m) const {
    for (const auto& r : rules_) {
        if (!r.suffix.empty()) {
            if (prompt.size() < r.suffix.size() ||
                prompt.compare(prompt.size() - r.suffix.size(), r.suffix.size(), r.suffix) != 0)
                continue;
        }
        bool ok = true;
        for (const auto& c : r.contains)
            if (prompt.find(c) == std::string::npos) { ok = false; break; }
        if (!ok) continue;
        if (!r.tail_contains.empty()) {
            std::size_t pos = r.tail_anchor.empty() ? 0 : prompt.rfind(r.tail_anchor);
            std::string_view tail =
                pos == std::string::npos ? std::string_view(prompt)
                                         : std::string_view(prompt).substr(pos);
            for (const auto& c : r.tail_contains)
                if (tail.find(c) == std::string_view::npos) { ok = false; break; }
            if (!ok) continue;
        }
        if (r.regex) {
            if (!std::regex_search(prompt, m, *r.regex)) continue;
        }
        return &r;
    }
    return nullptr;
}

std::string apply_completion_limits(std::string text, const CompletionParams& params) {
    std::size_t cut = std::string::npos;
    for (const auto& stop : params.stop) {
        if (stop.empty()) continue;
        std::size_t pos = text.find(stop);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut != std::string::npos) text.resize(cut);
    // Token cap: whitespace-separated words.
    int count = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool ws = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!ws && !in_token) {
            ++count;
            if (count > params.max_tokens) {
                text.resize(i);
                break;
            }
        }
        in_token = !ws;
    }
    return text;
}

std::vector<std::string> MockLm::complete(const std::string& prompt,
                                          const CompletionParams& params) const {
    require_nonempty_text(prompt, "prompt");
    params.validate();
    check_prompt_fits(*this, prompt);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(params.sample_count));
    std::smatch m;
    const Rule* rule = match(prompt, m);
    for (int i = 0; i < params.sample_count; ++i) {
        std::string text;
        if (rule && !rule->responses.empty()) {
            std::size_t idx = 0;
            if (params.temperature > 0.0f && rule->responses.size() > 1) {
                Rng pick(mix_seed(seed_ ^ fnv1a64(prompt), "sample/" + std::to_string(i)));
                idx = pick.below(rule->responses.size());
            }
            text = rule->responses[idx];
            if (rule->regex) {
                // $1..$9 substitution from the regex captures.
                std::string rendered;
                for (std::size_t p = 0; p < text.size(); ++p) {
                    if (text[p] == '$' && p + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[p + 1]))) {
                        std::size_t g = static_cast<std::size_t>(text[p + 1] - '0');
                        if (g < m.size()) rendered += m[g].str();
                        ++p;
                    } else {
                        rendered.push_back(text[p]);
                    }
                }
                text = std::move(rendered);
            }
        }
        out.push_back(apply_completion_limits(std::move(text), params));
    }
    return out;
}

}  // namespace socratic
