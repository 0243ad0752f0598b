#pragma once

#include <memory>
#include <optional>
#include <string>

#include "socratic/adapters.hpp"

namespace socratic {

// Content-addressed record/replay of backend responses. A store is a
// directory of JSON records {op, request, response}; lookups key on the
// canonical request JSON, so file names are irrelevant when loading and
// recorded files are named by request hash. Replaying a missing request is a
// backend error unless a fallback adapter is attached (record mode).
class ReplayStore {
public:
    ReplayStore() = default;
    explicit ReplayStore(std::string dir, bool load_existing = true);

    std::optional<std::string> lookup(const std::string& op, const std::string& request_json) const;
    void record(const std::string& op, const std::string& request_json,
                const std::string& response_json);
    std::size_t size() const;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

class ReplayTextCompleter final : public TextCompleter {
public:
    ReplayTextCompleter(ReplayStore store, std::shared_ptr<const TextCompleter> fallback = nullptr)
        : store_(std::move(store)), fallback_(std::move(fallback)) {}
    std::vector<std::string> complete(const std::string& prompt,
                                      const CompletionParams& params) const override;
    std::string id() const override { return "replay-lm"; }

private:
    mutable ReplayStore store_;
    std::shared_ptr<const TextCompleter> fallback_;
};

class ReplaySentenceEmbedder final : public SentenceEmbedder {
public:
    ReplaySentenceEmbedder(ReplayStore store, std::shared_ptr<const SentenceEmbedder> fallback = nullptr)
        : store_(std::move(store)), fallback_(std::move(fallback)) {}
    Embedding embed(const std::string& text) const override;
    std::string id() const override { return "replay-embed"; }

private:
    mutable ReplayStore store_;
    std::shared_ptr<const SentenceEmbedder> fallback_;
};

class ReplayVlm final : public VisualLanguageModel {
public:
    ReplayVlm(ReplayStore store, std::shared_ptr<const VisualLanguageModel> fallback = nullptr)
        : store_(std::move(store)), fallback_(std::move(fallback)) {}
    Embedding embed_text(const std::string& label) const override;
    Embedding embed_image(const MediaRef& ref) const override;
    std::string id() const override { return "replay-vlm"; }

private:
    mutable ReplayStore store_;
    std::shared_ptr<const VisualLanguageModel> fallback_;
};

class ReplayAlm final : public AudioLanguageModel {
public:
    ReplayAlm(ReplayStore store, std::shared_ptr<const AudioLanguageModel> fallback = nullptr)
        : store_(std::move(store)), fallback_(std::move(fallback)) {}
    Embedding embed_audio(const MediaRef& ref) const override;
    std::string transcribe(const MediaRef& ref) const override;
    std::string id() const override { return "replay-alm"; }

private:
    mutable ReplayStore store_;
    std::shared_ptr<const AudioLanguageModel> fallback_;
};

}  // namespace socratic
