#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socratic/embedding.hpp"

namespace socratic {

struct CompletionParams {
    float temperature = 0.0f;
    int max_tokens = 256;
    std::vector<std::string> stop;
    int sample_count = 1;

    void validate() const {
        if (temperature < 0.0f) throw ConfigError("temperature must be >= 0");
        if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
        if (sample_count <= 0) throw ConfigError("sample_count must be positive");
    }
};

enum class MediaKind { image, audio, text };

// Audio-language models are trained on 5-second clips; audio refs without an
// explicit span default to that window.
constexpr std::int64_t kDefaultAudioSpanMs = 5000;

struct MediaRef {
    MediaKind kind = MediaKind::image;
    std::string locator;
    std::optional<std::pair<std::int64_t, std::int64_t>> time_span_ms;

    static MediaRef image(std::string loc) { return MediaRef{MediaKind::image, std::move(loc), {}}; }
    static MediaRef audio(std::string loc,
                          std::optional<std::pair<std::int64_t, std::int64_t>> span = {}) {
        MediaRef r{MediaKind::audio, std::move(loc), span};
        if (!r.time_span_ms) r.time_span_ms = {0, kDefaultAudioSpanMs};
        return r;
    }
};

// Generative language model: prompt in, sample_count completions out.
class TextCompleter {
public:
    virtual ~TextCompleter() = default;
    virtual std::vector<std::string> complete(const std::string& prompt,
                                              const CompletionParams& params) const = 0;
    virtual std::string id() const = 0;
    // Maximum prompt size in characters; 0 means unlimited.
    virtual std::size_t context_limit() const { return 0; }
};

// Sentence embedder (the masked-LM role). Output is normalized.
class SentenceEmbedder {
public:
    virtual ~SentenceEmbedder() = default;
    virtual Embedding embed(const std::string& text) const = 0;
    virtual std::string id() const = 0;
};

// Visual-language model: images and text share one embedding space.
class VisualLanguageModel {
public:
    virtual ~VisualLanguageModel() = default;
    virtual Embedding embed_text(const std::string& label) const = 0;
    virtual Embedding embed_image(const MediaRef& ref) const = 0;
    virtual std::string id() const = 0;
};

// Audio-language model: clips embedded into the shared VLM space, plus
// speech-to-text.
class AudioLanguageModel {
public:
    virtual ~AudioLanguageModel() = default;
    virtual Embedding embed_audio(const MediaRef& ref) const = 0;
    virtual std::string transcribe(const MediaRef& ref) const = 0;
    virtual std::string id() const = 0;
};

struct AdapterSet {
    std::shared_ptr<const TextCompleter> lm_generate;
    std::shared_ptr<const SentenceEmbedder> lm_embed;
    std::shared_ptr<const VisualLanguageModel> vlm;
    std::shared_ptr<const AudioLanguageModel> alm;
};

// Wraps label text in a prompt template before embedding ("a photo of {}").
// Labels are embedded raw by default everywhere; this decorator is the opt-in.
class PromptTemplateVlm final : public VisualLanguageModel {
public:
    PromptTemplateVlm(std::shared_ptr<const VisualLanguageModel> inner, std::string label_template)
        : inner_(std::move(inner)), template_(std::move(label_template)) {
        if (template_.find("{}") == std::string::npos)
            throw ConfigError("VLM label template must contain a {} placeholder");
    }

    Embedding embed_text(const std::string& label) const override {
        std::string wrapped = template_;
        wrapped.replace(wrapped.find("{}"), 2, label);
        return inner_->embed_text(wrapped);
    }
    Embedding embed_image(const MediaRef& ref) const override { return inner_->embed_image(ref); }
    std::string id() const override { return inner_->id() + "+template"; }

private:
    std::shared_ptr<const VisualLanguageModel> inner_;
    std::string template_;
};

enum class AdapterRole { lm_generate, lm_embed, vlm, alm };

// Pipelines declare their required handles up front; a missing one fails
// before any work starts.
void require_adapters(const AdapterSet& set, std::initializer_list<AdapterRole> roles);

// Shared precondition helpers.
inline void require_nonempty_text(const std::string& text, const char* what) {
    if (trim(text).empty()) throw InputError(std::string(what) + " must be nonempty");
}

inline void check_prompt_fits(const TextCompleter& lm, const std::string& prompt) {
    std::size_t limit = lm.context_limit();
    if (limit > 0 && prompt.size() > limit)
        throw BackendError("prompt exceeds backend context limit: " + std::to_string(prompt.size()) +
                           " > " + std::to_string(limit) + " chars");
}

}  // namespace socratic
