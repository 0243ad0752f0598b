#include "socratic/vocab.hpp"

#include <fstream>
#include <set>

namespace socratic {

EntityVocabulary EntityVocabulary::from_labels(std::string name, std::vector<std::string> labels) {
    if (labels.empty()) throw InputError("vocabulary '" + name + "' is empty");
    std::set<std::string> seen;
    for (const auto& l : labels) {
        std::string norm = normalize_entity(l);
        if (norm.empty()) throw InputError("vocabulary '" + name + "' has a blank label");
        if (!seen.insert(norm).second)
            throw InputError("vocabulary '" + name + "' has duplicate label: " + l);
    }
    return EntityVocabulary{std::move(name), std::move(labels), std::nullopt};
}

EntityVocabulary EntityVocabulary::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open vocabulary file: " + path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(is, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = trim(line);
        if (!t.empty()) labels.push_back(std::move(t));
    }
    std::string name = path;
    std::size_t slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    return from_labels(std::move(name), std::move(labels));
}

void EntityVocabulary::ensure_text_embeddings(const VisualLanguageModel& vlm) {
    if (cached_text_embeddings) return;
    if (labels.empty()) throw InputError("cannot embed an empty vocabulary");
    Embedding first = vlm.embed_text(labels[0]);
    Mat m(static_cast<Eigen::Index>(labels.size()), first.dim());
    m.row(0) = first.values.transpose();
    for (std::size_t i = 1; i < labels.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = vlm.embed_text(labels[i]).values.transpose();
    cached_text_embeddings = std::move(m);
}

}  // namespace socratic
