#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "socratic/caption.hpp"

namespace socratic {

// Unsupervised model selection: candidate VLMs are paired with a weak LM and
// scored against pseudo ground truth from a baseline VLM paired with a strong
// LM; a held-out sentence embedder judges similarity. A candidate sharing the
// baseline VLM is flagged excluded (its visual grounding is biased toward the
// truth) and never ranked.

struct VlmCandidate {
    std::string vlm_id;
    std::shared_ptr<const VisualLanguageModel> vlm;
};

struct SelectionInputs {
    std::vector<MediaRef> frames;
    std::vector<VlmCandidate> candidates;
    std::shared_ptr<const TextCompleter> weak_lm;
    std::shared_ptr<const TextCompleter> strong_lm;
    VlmCandidate baseline_vlm;
    std::shared_ptr<const SentenceEmbedder> heldout_embedder;
    EntityVocabulary places;
    EntityVocabulary objects;
    CaptionConfig caption_cfg;
};

struct SelectionReport {
    std::map<std::string, double> rows;  // vlm_id -> mean similarity
    std::set<std::string> excluded;
    std::string truth_baseline_vlm_id;
    std::string truth_lm_id;
    std::map<std::string, std::vector<double>> per_frame_scores;

    // Non-excluded ids ordered by score descending.
    std::vector<std::string> ranking() const;
};

std::vector<std::string> generate_pseudo_truth(const std::vector<MediaRef>& frames,
                                               const EgoCaptioner& truth_captioner);

double score_candidate(const std::vector<std::string>& candidate_summaries,
                       const std::vector<std::string>& truth_summaries,
                       const SentenceEmbedder& heldout, std::vector<double>* per_frame = nullptr);

SelectionReport run_selection(const SelectionInputs& inputs);

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

nlohmann::json selection_report_json(const SelectionReport& report,
                                     const std::map<std::string, double>* reference_scores = nullptr,
                                     const std::string& reference_name = "");

}  // namespace socratic
