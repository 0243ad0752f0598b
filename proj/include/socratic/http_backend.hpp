#pragma once

#include <memory>
#include <string>

#include "socratic/adapters.hpp"

namespace socratic {

// JSON-over-HTTP model protocol:
//   POST /v1/complete   {prompt, temperature, max_tokens, stop, n} -> {choices:[{text}]}
//   POST /v1/embed      {kind:"text"|"image"|"audio", payload}     -> {dim, values}
//   POST /v1/transcribe {payload}                                  -> {text}
// Endpoints come from SM_LM_ENDPOINT / SM_VLM_ENDPOINT / SM_ALM_ENDPOINT and
// the timeout from SM_HTTP_TIMEOUT_MS when not given explicitly.

struct HttpOptions {
    std::string endpoint;          // e.g. "http://127.0.0.1:8080"
    int timeout_ms = 30000;
    int max_in_flight = 8;
};

HttpOptions http_options_from_env(const char* endpoint_var);

class HttpTextCompleter final : public TextCompleter {
public:
    explicit HttpTextCompleter(HttpOptions opts);
    ~HttpTextCompleter() override;
    std::vector<std::string> complete(const std::string& prompt,
                                      const CompletionParams& params) const override;
    std::string id() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpSentenceEmbedder final : public SentenceEmbedder {
public:
    explicit HttpSentenceEmbedder(HttpOptions opts);
    ~HttpSentenceEmbedder() override;
    Embedding embed(const std::string& text) const override;
    std::string id() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpVlm final : public VisualLanguageModel {
public:
    explicit HttpVlm(HttpOptions opts);
    ~HttpVlm() override;
    Embedding embed_text(const std::string& label) const override;
    Embedding embed_image(const MediaRef& ref) const override;
    std::string id() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpAlm final : public AudioLanguageModel {
public:
    explicit HttpAlm(HttpOptions opts);
    ~HttpAlm() override;
    Embedding embed_audio(const MediaRef& ref) const override;
    std::string transcribe(const MediaRef& ref) const override;
    std::string id() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Serves a set of local adapters over the wire protocol. Used by tests to
// check protocol conformance and by anyone who wants to expose the mock world
// to another process.
class ModelServer {
public:
    explicit ModelServer(AdapterSet adapters);
    ~ModelServer();

    // Binds 127.0.0.1 on an ephemeral port and serves from a background
    // thread. Returns the bound port.
    int start();
    void stop();
    std::string endpoint() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace socratic
