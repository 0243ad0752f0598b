#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socratic/adapters.hpp"

namespace socratic {

// Label set rankable against an image. Text embeddings are cached row-aligned
// with the labels since vocabularies are ranked against many frames.
struct EntityVocabulary {
    std::string name;
    std::vector<std::string> labels;
    std::optional<Mat> cached_text_embeddings;

    std::size_t size() const { return labels.size(); }

    static EntityVocabulary from_labels(std::string name, std::vector<std::string> labels);

    // One label per line, '#' starts a comment, blank lines skipped.
    static EntityVocabulary load(const std::string& path);

    void ensure_text_embeddings(const VisualLanguageModel& vlm);
};

}  // namespace socratic
