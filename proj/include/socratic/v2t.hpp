#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "socratic/adapters.hpp"

namespace socratic {

// Video-to-text retrieval with transcript-aware score fusion. A video whose
// transcript reaches `gate_chars` characters gets an LM summary whose
// sentence embedding re-weights the visual ranking; everything else falls
// back to the pure visual dot product.

struct V2tConfig {
    std::size_t gate_chars = 100;
};

struct VideoRecord {
    std::string id;
    Embedding visual;  // mean per-frame VLM feature, normalized
    std::optional<std::string> transcript;
    std::optional<std::string> summary;
    std::optional<Embedding> summary_embedding;

    bool fused() const { return summary_embedding.has_value(); }
};

struct CaptionRecord {
    std::string id;
    std::string text;
    Embedding vlm_embedding;
    Embedding sentence_embedding;
};

struct RetrievalMetrics {
    std::map<int, double> r_at;  // k -> percentage
    double median_rank = 0.0;
    std::size_t n_queries = 0;
    std::size_t n_fused = 0;
};

std::string summarize_transcript(const std::string& transcript, const TextCompleter& lm,
                                 const V2tConfig& cfg = {});

double fused_score(const VideoRecord& video, const CaptionRecord& caption);

// Caption ids sorted by fused score, ties by id ascending.
std::vector<std::string> rank_captions_for_video(const VideoRecord& video,
                                                 const std::vector<CaptionRecord>& captions);

using GroundTruth = std::map<std::string, std::set<std::string>>;  // video id -> caption ids

RetrievalMetrics evaluate(const std::vector<VideoRecord>& videos,
                          const std::vector<CaptionRecord>& captions, const GroundTruth& truth,
                          const std::vector<int>& ks = {1, 5, 10});

RetrievalMetrics evaluate_subset_long_transcript(const std::vector<VideoRecord>& videos,
                                                 const std::vector<CaptionRecord>& captions,
                                                 const GroundTruth& truth, const V2tConfig& cfg = {},
                                                 const std::vector<int>& ks = {1, 5, 10});

nlohmann::json metrics_to_json(const RetrievalMetrics& m);

// --- Corpus assembly ---------------------------------------------------------

// Captions TSV: caption_id \t video_id \t text. Returns (records, ground truth).
struct CaptionCorpus {
    std::vector<CaptionRecord> captions;
    GroundTruth truth;
};

CaptionCorpus load_captions_tsv(const std::string& path, const VisualLanguageModel& vlm,
                                const SentenceEmbedder& embedder);

// Transcripts JSONL: {"video_id": ..., "transcript": ...}
std::map<std::string, std::string> load_transcripts_jsonl(const std::string& path);

// Video embeddings arrive as SMEB rows with the id sidecar. Gating, transcript
// summarization and summary embedding happen here; an empty summary demotes
// the video to the visual path with a warning instead of failing.
struct VideoCorpus {
    std::vector<VideoRecord> videos;
    std::vector<std::string> warnings;
};

VideoCorpus build_video_corpus(const std::string& smeb_path,
                               const std::map<std::string, std::string>& transcripts,
                               const TextCompleter* lm, const SentenceEmbedder* embedder,
                               const V2tConfig& cfg = {});

}  // namespace socratic
