#include "socratic/replay.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include <json.hpp>

namespace socratic {

namespace {

using nlohmann::json;

json complete_request(const std::string& prompt, const CompletionParams& p) {
    return json{{"prompt", prompt},
                {"temperature", p.temperature},
                {"max_tokens", p.max_tokens},
                {"stop", p.stop},
                {"n", p.sample_count}};
}

json embed_request(const std::string& kind, const std::string& payload) {
    return json{{"kind", kind}, {"payload", payload}};
}

Embedding embedding_from_record(const json& j) {
    const auto& vals = j.at("values");
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = vals[static_cast<std::size_t>(i)].get<float>();
    return Embedding{std::move(v), true};
}

json embedding_to_record(const Embedding& e) {
    json vals = json::array();
    for (int i = 0; i < e.dim(); ++i) vals.push_back(e.values[i]);
    return json{{"values", std::move(vals)}};
}

}  // namespace

struct ReplayStore::Impl {
    std::string dir;
    std::map<std::string, std::string> records;  // key -> response json text
    mutable std::mutex mu;

    static std::string key_of(const std::string& op, const std::string& request_json) {
        return op + "\n" + request_json;
    }
};

ReplayStore::ReplayStore(std::string dir, bool load_existing) : impl_(std::make_shared<Impl>()) {
    impl_->dir = std::move(dir);
    if (!load_existing) return;
    if (!std::filesystem::is_directory(impl_->dir))
        throw ConfigError("replay directory does not exist: " + impl_->dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(impl_->dir))
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        std::ifstream is(p);
        json j = json::parse(is, nullptr, false);
        if (j.is_discarded()) throw InputError("replay fixture is not valid JSON: " + p.string());
        std::string op = j.at("op").get<std::string>();
        // Round-trip through nlohmann canonicalizes key order.
        std::string req = j.at("request").dump();
        impl_->records[Impl::key_of(op, req)] = j.at("response").dump();
    }
}

std::optional<std::string> ReplayStore::lookup(const std::string& op,
                                               const std::string& request_json) const {
    if (!impl_) return std::nullopt;
    std::lock_guard lock(impl_->mu);
    auto it = impl_->records.find(Impl::key_of(op, request_json));
    if (it == impl_->records.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::record(const std::string& op, const std::string& request_json,
                         const std::string& response_json) {
    if (!impl_) throw ConfigError("replay store is not attached to a directory");
    std::lock_guard lock(impl_->mu);
    impl_->records[Impl::key_of(op, request_json)] = response_json;
    std::filesystem::create_directories(impl_->dir);
    json j{{"op", op},
           {"request", json::parse(request_json)},
           {"response", json::parse(response_json)}};
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.json",
                  static_cast<unsigned long long>(fnv1a64(Impl::key_of(op, request_json))));
    std::ofstream os(std::filesystem::path(impl_->dir) / name, std::ios::trunc);
    os << j.dump(2) << "\n";
    if (!os) throw InputError("failed to write replay fixture in " + impl_->dir);
}

std::size_t ReplayStore::size() const {
    if (!impl_) return 0;
    std::lock_guard lock(impl_->mu);
    return impl_->records.size();
}

std::vector<std::string> ReplayTextCompleter::complete(const std::string& prompt,
                                                       const CompletionParams& params) const {
    require_nonempty_text(prompt, "prompt");
    params.validate();
    std::string req = complete_request(prompt, params).dump();
    if (auto hit = store_.lookup("complete", req)) {
        json j = json::parse(*hit);
        return j.at("choices").get<std::vector<std::string>>();
    }
    if (!fallback_) throw BackendError("replay miss for /v1/complete request");
    auto out = fallback_->complete(prompt, params);
    store_.record("complete", req, json{{"choices", out}}.dump());
    return out;
}

Embedding ReplaySentenceEmbedder::embed(const std::string& text) const {
    require_nonempty_text(text, "text");
    std::string req = embed_request("sentence", text).dump();
    if (auto hit = store_.lookup("embed", req)) return embedding_from_record(json::parse(*hit));
    if (!fallback_) throw BackendError("replay miss for sentence embed request");
    Embedding e = fallback_->embed(text);
    store_.record("embed", req, embedding_to_record(e).dump());
    return e;
}

Embedding ReplayVlm::embed_text(const std::string& label) const {
    require_nonempty_text(label, "label");
    std::string req = embed_request("text", label).dump();
    if (auto hit = store_.lookup("embed", req)) return embedding_from_record(json::parse(*hit));
    if (!fallback_) throw BackendError("replay miss for VLM text embed request");
    Embedding e = fallback_->embed_text(label);
    store_.record("embed", req, embedding_to_record(e).dump());
    return e;
}

Embedding ReplayVlm::embed_image(const MediaRef& ref) const {
    std::string req = embed_request("image", ref.locator).dump();
    if (auto hit = store_.lookup("embed", req)) return embedding_from_record(json::parse(*hit));
    if (!fallback_) throw BackendError("replay miss for VLM image embed request");
    Embedding e = fallback_->embed_image(ref);
    store_.record("embed", req, embedding_to_record(e).dump());
    return e;
}

Embedding ReplayAlm::embed_audio(const MediaRef& ref) const {
    std::string req = embed_request("audio", ref.locator).dump();
    if (auto hit = store_.lookup("embed", req)) return embedding_from_record(json::parse(*hit));
    if (!fallback_) throw BackendError("replay miss for ALM embed request");
    Embedding e = fallback_->embed_audio(ref);
    store_.record("embed", req, embedding_to_record(e).dump());
    return e;
}

std::string ReplayAlm::transcribe(const MediaRef& ref) const {
    std::string req = json{{"payload", ref.locator}}.dump();
    if (auto hit = store_.lookup("transcribe", req)) {
        return json::parse(*hit).at("text").get<std::string>();
    }
    if (!fallback_) throw BackendError("replay miss for transcribe request");
    std::string text = fallback_->transcribe(ref);
    store_.record("transcribe", req, json{{"text", text}}.dump());
    return text;
}

}  // namespace socratic
