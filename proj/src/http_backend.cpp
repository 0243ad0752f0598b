#include "socratic/http_backend.hpp"

#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace socratic {

namespace {

using nlohmann::json;

json embedding_to_json(const Embedding& e) {
    json values = json::array();
    for (int i = 0; i < e.dim(); ++i) values.push_back(e.values[i]);
    return json{{"dim", e.dim()}, {"values", std::move(values)}};
}

Embedding embedding_from_json(const json& j) {
    int dim = j.at("dim").get<int>();
    const auto& vals = j.at("values");
    if (static_cast<int>(vals.size()) != dim)
        throw BackendError("embed response: dim does not match value count");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = vals[static_cast<std::size_t>(i)].get<float>();
    Embedding out{std::move(v), true};
    if (!out.values.allFinite()) throw BackendError("embed response: non-finite values");
    return out;
}

const char* kind_name(MediaKind k) {
    switch (k) {
        case MediaKind::image: return "image";
        case MediaKind::audio: return "audio";
        case MediaKind::text: return "text";
    }
    return "text";
}

// One client per adapter; a counting semaphore caps in-flight requests.
struct HttpClient {
    explicit HttpClient(HttpOptions o)
        : opts(std::move(o)), gate(std::max(1, opts.max_in_flight)) {
        if (opts.endpoint.empty()) throw ConfigError("HTTP backend endpoint is empty");
    }

    json post(const std::string& path, const json& body) const {
        gate.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{gate};

        httplib::Client cli(opts.endpoint);
        cli.set_connection_timeout(opts.timeout_ms / 1000, (opts.timeout_ms % 1000) * 1000);
        cli.set_read_timeout(opts.timeout_ms / 1000, (opts.timeout_ms % 1000) * 1000);
        auto res = cli.Post(path, body.dump(), "application/json");
        if (!res)
            throw BackendError("backend unavailable: POST " + opts.endpoint + path + " (" +
                               httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw BackendError("backend error " + std::to_string(res->status) + " from " + path +
                               ": " + res->body);
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw BackendError("backend returned invalid JSON from " + path);
        return j;
    }

    HttpOptions opts;
    mutable std::counting_semaphore<> gate;
};

json media_payload(const MediaRef& ref) {
    json j{{"kind", kind_name(ref.kind)}, {"payload", ref.locator}};
    if (ref.time_span_ms)
        j["span_ms"] = json::array({ref.time_span_ms->first, ref.time_span_ms->second});
    return j;
}

}  // namespace

HttpOptions http_options_from_env(const char* endpoint_var) {
    HttpOptions o;
    if (const char* ep = std::getenv(endpoint_var)) o.endpoint = ep;
    if (const char* t = std::getenv("SM_HTTP_TIMEOUT_MS")) o.timeout_ms = std::atoi(t);
    if (o.endpoint.empty())
        throw ConfigError(std::string("environment variable ") + endpoint_var + " is not set");
    return o;
}

struct HttpTextCompleter::Impl : HttpClient { using HttpClient::HttpClient; };
struct HttpSentenceEmbedder::Impl : HttpClient { using HttpClient::HttpClient; };
struct HttpVlm::Impl : HttpClient { using HttpClient::HttpClient; };
struct HttpAlm::Impl : HttpClient { using HttpClient::HttpClient; };

HttpTextCompleter::HttpTextCompleter(HttpOptions opts) : impl_(new Impl(std::move(opts))) {}
HttpTextCompleter::~HttpTextCompleter() = default;
std::string HttpTextCompleter::id() const { return "http-lm@" + impl_->opts.endpoint; }

std::vector<std::string> HttpTextCompleter::complete(const std::string& prompt,
                                                     const CompletionParams& params) const {
    require_nonempty_text(prompt, "prompt");
    params.validate();
    json body{{"prompt", prompt},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens},
              {"stop", params.stop},
              {"n", params.sample_count}};
    json res = impl_->post("/v1/complete", body);
    std::vector<std::string> out;
    for (const auto& c : res.at("choices")) out.push_back(c.at("text").get<std::string>());
    if (out.empty()) throw BackendError("complete: backend returned no choices");
    return out;
}

HttpSentenceEmbedder::HttpSentenceEmbedder(HttpOptions opts) : impl_(new Impl(std::move(opts))) {}
HttpSentenceEmbedder::~HttpSentenceEmbedder() = default;
std::string HttpSentenceEmbedder::id() const { return "http-embed@" + impl_->opts.endpoint; }

Embedding HttpSentenceEmbedder::embed(const std::string& text) const {
    require_nonempty_text(text, "text");
    return embedding_from_json(impl_->post("/v1/embed", json{{"kind", "text"}, {"payload", text}}));
}

HttpVlm::HttpVlm(HttpOptions opts) : impl_(new Impl(std::move(opts))) {}
HttpVlm::~HttpVlm() = default;
std::string HttpVlm::id() const { return "http-vlm@" + impl_->opts.endpoint; }

Embedding HttpVlm::embed_text(const std::string& label) const {
    require_nonempty_text(label, "label");
    return embedding_from_json(impl_->post("/v1/embed", json{{"kind", "text"}, {"payload", label}}));
}

Embedding HttpVlm::embed_image(const MediaRef& ref) const {
    if (ref.kind != MediaKind::image) throw InputError("embed_image expects an image ref");
    return embedding_from_json(impl_->post("/v1/embed", media_payload(ref)));
}

HttpAlm::HttpAlm(HttpOptions opts) : impl_(new Impl(std::move(opts))) {}
HttpAlm::~HttpAlm() = default;
std::string HttpAlm::id() const { return "http-alm@" + impl_->opts.endpoint; }

Embedding HttpAlm::embed_audio(const MediaRef& ref) const {
    if (ref.kind != MediaKind::audio) throw InputError("embed_audio expects an audio ref");
    return embedding_from_json(impl_->post("/v1/embed", media_payload(ref)));
}

std::string HttpAlm::transcribe(const MediaRef& ref) const {
    if (ref.kind != MediaKind::audio) throw InputError("transcribe expects an audio ref");
    json res = impl_->post("/v1/transcribe", json{{"payload", ref.locator}});
    return res.at("text").get<std::string>();
}

struct ModelServer::Impl {
    AdapterSet adapters;
    httplib::Server server;
    std::thread worker;
    int port = 0;
};

ModelServer::ModelServer(AdapterSet adapters) : impl_(new Impl) {
    impl_->adapters = std::move(adapters);

    auto reply_error = [](httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        res.set_content(json{{"error", msg}}.dump(), "application/json");
    };

    impl_->server.Post("/v1/complete", [this, reply_error](const httplib::Request& req,
                                                           httplib::Response& res) {
        try {
            if (!impl_->adapters.lm_generate) throw BackendError("no completion model mounted");
            json body = json::parse(req.body);
            CompletionParams p;
            p.temperature = body.value("temperature", 0.0f);
            p.max_tokens = body.value("max_tokens", 256);
            p.stop = body.value("stop", std::vector<std::string>{});
            p.sample_count = body.value("n", 1);
            auto texts = impl_->adapters.lm_generate->complete(body.at("prompt").get<std::string>(), p);
            json choices = json::array();
            for (const auto& t : texts) choices.push_back(json{{"text", t}});
            res.set_content(json{{"choices", std::move(choices)}}.dump(), "application/json");
        } catch (const std::exception& e) {
            reply_error(res, 400, e.what());
        }
    });

    impl_->server.Post("/v1/embed", [this, reply_error](const httplib::Request& req,
                                                        httplib::Response& res) {
        try {
            json body = json::parse(req.body);
            std::string kind = body.at("kind").get<std::string>();
            std::string payload = body.at("payload").get<std::string>();
            Embedding e;
            if (kind == "text") {
                if (impl_->adapters.vlm) e = impl_->adapters.vlm->embed_text(payload);
                else if (impl_->adapters.lm_embed) e = impl_->adapters.lm_embed->embed(payload);
                else throw BackendError("no text embedding model mounted");
            } else if (kind == "image") {
                if (!impl_->adapters.vlm) throw BackendError("no VLM mounted");
                e = impl_->adapters.vlm->embed_image(MediaRef::image(payload));
            } else if (kind == "audio") {
                if (!impl_->adapters.alm) throw BackendError("no ALM mounted");
                e = impl_->adapters.alm->embed_audio(MediaRef::audio(payload));
            } else {
                throw InputError("unknown embed kind: " + kind);
            }
            res.set_content(embedding_to_json(e).dump(), "application/json");
        } catch (const std::exception& e) {
            reply_error(res, 400, e.what());
        }
    });

    impl_->server.Post("/v1/transcribe", [this, reply_error](const httplib::Request& req,
                                                             httplib::Response& res) {
        try {
            if (!impl_->adapters.alm) throw BackendError("no ALM mounted");
            json body = json::parse(req.body);
            std::string text =
                impl_->adapters.alm->transcribe(MediaRef::audio(body.at("payload").get<std::string>()));
            res.set_content(json{{"text", text}}.dump(), "application/json");
        } catch (const std::exception& e) {
            reply_error(res, 400, e.what());
        }
    });
}

ModelServer::~ModelServer() { stop(); }

int ModelServer::start() {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw BackendError("ModelServer: failed to bind a port");
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void ModelServer::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

std::string ModelServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace socratic
