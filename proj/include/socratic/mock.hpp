#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "socratic/adapters.hpp"
#include "socratic/rng.hpp"

namespace socratic {

// A closed synthetic world: every vocabulary entity owns a fixed seeded unit
// vector, and a frame embedding is the normalized sum of its ground-truth
// entity vectors plus optional Gaussian noise. With noise 0 the ranking of
// the full vocabulary against a frame recovers the planted entity set, which
// gives every downstream pipeline an exact oracle.
class SyntheticWorld {
public:
    struct FrameSpec {
        std::string id;
        std::int64_t t_ms = 0;
        std::vector<std::string> entities;
        std::string audio_id;  // empty = no audio
    };
    struct AudioSpec {
        std::string id;
        std::vector<std::string> sounds;
        std::string transcript;
    };

    explicit SyntheticWorld(std::uint64_t seed, int dim = 256, float frame_noise = 0.0f)
        : seed_(seed), dim_(dim), frame_noise_(frame_noise) {}

    void add_frame(FrameSpec f);
    void add_audio(AudioSpec a);

    std::uint64_t seed() const { return seed_; }
    int dim() const { return dim_; }
    float frame_noise() const { return frame_noise_; }

    // Deterministic unit vector for a label; any string is an entity.
    Embedding entity_vector(const std::string& label) const;

    Embedding frame_embedding(const std::string& frame_id) const;
    Embedding audio_embedding(const std::string& audio_id) const;

    const FrameSpec& frame(const std::string& frame_id) const;
    const AudioSpec& audio(const std::string& audio_id) const;
    const std::vector<FrameSpec>& frames() const { return frames_; }

    static SyntheticWorld from_json_file(const std::string& path);

private:
    std::uint64_t seed_;
    int dim_;
    float frame_noise_;
    std::vector<FrameSpec> frames_;
    std::map<std::string, std::size_t> frame_index_;
    std::map<std::string, AudioSpec> audio_;
};

// VLM over the synthetic world. Text embeddings are exact entity vectors;
// image embeddings get per-model Gaussian noise of strength `sigma`, which is
// the knob the model-selection harness turns.
class MockVlm final : public VisualLanguageModel {
public:
    MockVlm(std::shared_ptr<const SyntheticWorld> world, std::string id, float sigma = 0.0f,
            std::uint64_t seed = 1)
        : world_(std::move(world)), id_(std::move(id)), sigma_(sigma), seed_(seed) {}

    Embedding embed_text(const std::string& label) const override;
    Embedding embed_image(const MediaRef& ref) const override;
    std::string id() const override { return id_; }

private:
    std::shared_ptr<const SyntheticWorld> world_;
    std::string id_;
    float sigma_;
    std::uint64_t seed_;
};

class MockAlm final : public AudioLanguageModel {
public:
    MockAlm(std::shared_ptr<const SyntheticWorld> world, std::string id, float sigma = 0.0f,
            std::uint64_t seed = 2)
        : world_(std::move(world)), id_(std::move(id)), sigma_(sigma), seed_(seed) {}

    Embedding embed_audio(const MediaRef& ref) const override;
    std::string transcribe(const MediaRef& ref) const override;
    std::string id() const override { return id_; }

private:
    std::shared_ptr<const SyntheticWorld> world_;
    std::string id_;
    float sigma_;
    std::uint64_t seed_;
};

// Normalized hashed bag-of-tokens sentence embedder. Seeded independently of
// the VLM space so scoring stays decoupled from the models under evaluation.
class MockSentenceEmbedder final : public SentenceEmbedder {
public:
    explicit MockSentenceEmbedder(std::uint64_t seed, int dim = 4096, std::string id = "")
        : seed_(seed), dim_(dim), id_(id.empty() ? "mock-embed-" + std::to_string(seed) : std::move(id)) {}

    Embedding embed(const std::string& text) const override;
    std::string id() const override { return id_; }

    // Coordinate a token lands on; lets tests verify disjointness by construction.
    int token_coordinate(const std::string& token) const;

    static std::vector<std::string> tokenize(const std::string& text);

private:
    std::uint64_t seed_;
    int dim_;
    std::string id_;
};

// Pattern-matching rule engine standing in for a generative LM. Rules load
// from a JSON table; the first matching rule answers. Matching conditions:
//   suffix        - prompt must end with this string
//   contains      - every substring present anywhere in the prompt
//   tail_contains - substrings present after the last `tail_anchor` occurrence
//   regex         - ECMAScript regex searched in the prompt; $1..$9 usable in
//                   the response template
// A rule carries either `response` or a `responses` list; with temperature 0
// the first entry always answers, otherwise one is picked per sample from the
// seeded stream.
class MockLm final : public TextCompleter {
public:
    struct Rule {
        std::string name;
        std::string suffix;
        std::vector<std::string> contains;
        std::string tail_anchor = "Q:";
        std::vector<std::string> tail_contains;
        std::string regex_text;
        std::optional<std::regex> regex;
        std::vector<std::string> responses;
    };

    explicit MockLm(std::uint64_t seed = 0, std::string id = "mock-lm",
                    std::size_t context_limit = 32768)
        : seed_(seed), id_(std::move(id)), context_limit_(context_limit) {}

    void add_rule(Rule rule);
    void load_rules_json(const std::string& path);
    std::size_t rule_count() const { return rules_.size(); }

    std::vector<std::string> complete(const std::string& prompt,
                                      const CompletionParams& params) const override;
    std::string id() const override { return id_; }
    std::size_t context_limit() const override { return context_limit_; }

private:
    const Rule* match(const std::string& prompt, std::smatch& m) const;

    std::uint64_t seed_;
    std::string id_;
    std::size_t context_limit_;
    std::vector<Rule> rules_;
};

// Truncation shared by mock and HTTP-stub paths: cut at the first stop
// sequence, then cap at max_tokens whitespace-separated tokens.
std::string apply_completion_limits(std::string text, const CompletionParams& params);

}  // namespace socratic
