#include "socratic/v2t.hpp"

#include <algorithm>
#include <fstream>

#include "socratic/prompts.hpp"
#include "socratic/smeb.hpp"

namespace socratic {

std::string summarize_transcript(const std::string& transcript, const TextCompleter& lm,
                                 const V2tConfig& cfg) {
    if (transcript.size() < cfg.gate_chars)
        throw InputError("summarize_transcript: transcript below the " +
                         std::to_string(cfg.gate_chars) + "-character gate");
    std::string prompt = prompts::transcript_summary(transcript);
    CompletionParams p;
    p.max_tokens = 64;
    p.stop = {"\n"};
    std::string completion;
    for (int attempt = 0; attempt < 2; ++attempt) {
        completion = trim(lm.complete(prompt, p).at(0));
        if (!completion.empty()) break;
    }
    if (completion.empty())
        throw BackendError("summarize_transcript: empty completion after retry");
    return "In this video, " + completion;
}

double fused_score(const VideoRecord& video, const CaptionRecord& caption) {
    double visual = unit_dot(caption.vlm_embedding, video.visual);
    if (!video.fused()) return visual;
    double sentence = unit_dot(caption.sentence_embedding, *video.summary_embedding);
    return visual * sentence;
}

std::vector<std::string> rank_captions_for_video(const VideoRecord& video,
                                                 const std::vector<CaptionRecord>& captions) {
    if (captions.empty()) throw InputError("rank_captions_for_video: no captions");
    std::vector<std::size_t> order(captions.size());
    std::vector<double> scores(captions.size());
    for (std::size_t i = 0; i < captions.size(); ++i) {
        order[i] = i;
        scores[i] = fused_score(video, captions[i]);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return captions[a].id < captions[b].id;
    });
    std::vector<std::string> out(captions.size());
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = captions[order[i]].id;
    return out;
}

namespace {

RetrievalMetrics metrics_from_ranks(std::vector<double> ranks, const std::vector<int>& ks,
                                    std::size_t n_fused) {
    RetrievalMetrics m;
    m.n_queries = ranks.size();
    m.n_fused = n_fused;
    for (int k : ks) {
        std::size_t hits = 0;
        for (double r : ranks)
            if (r <= k) ++hits;
        m.r_at[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
    }
    std::sort(ranks.begin(), ranks.end());
    std::size_t n = ranks.size();
    m.median_rank = n % 2 == 1 ? ranks[n / 2] : 0.5 * (ranks[n / 2 - 1] + ranks[n / 2]);
    return m;
}

}  // namespace

RetrievalMetrics evaluate(const std::vector<VideoRecord>& videos,
                          const std::vector<CaptionRecord>& captions, const GroundTruth& truth,
                          const std::vector<int>& ks) {
    if (videos.empty()) throw InputError("evaluate: no videos");
    if (captions.empty()) throw InputError("evaluate: no captions");

    std::set<std::string> caption_pool;
    for (const auto& c : captions) caption_pool.insert(c.id);

    std::vector<double> ranks;
    std::size_t n_fused = 0;
    for (const auto& v : videos) {
        auto it = truth.find(v.id);
        if (it == truth.end() || it->second.empty())
            throw InputError("evaluate: video has no ground-truth caption: " + v.id);
        for (const auto& cid : it->second)
            if (!caption_pool.count(cid))
                throw InputError("evaluate: ground-truth caption missing from pool: " + cid);
        if (v.fused()) ++n_fused;
        auto ranked = rank_captions_for_video(v, captions);
        std::size_t best = ranked.size();
        for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
            if (it->second.count(ranked[pos])) {
                best = pos;
                break;
            }
        }
        ranks.push_back(static_cast<double>(best + 1));
    }
    return metrics_from_ranks(std::move(ranks), ks, n_fused);
}

RetrievalMetrics evaluate_subset_long_transcript(const std::vector<VideoRecord>& videos,
                                                 const std::vector<CaptionRecord>& captions,
                                                 const GroundTruth& truth, const V2tConfig& cfg,
                                                 const std::vector<int>& ks) {
    std::vector<VideoRecord> subset;
    for (const auto& v : videos)
        if (v.transcript && v.transcript->size() >= cfg.gate_chars) subset.push_back(v);
    if (subset.empty()) throw InputError("evaluate_subset_long_transcript: empty subset");
    return evaluate(subset, captions, truth, ks);
}

nlohmann::json metrics_to_json(const RetrievalMetrics& m) {
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [k, v] : m.r_at) r[std::to_string(k)] = v;
    return nlohmann::json{{"r_at", std::move(r)},
                          {"mdr", m.median_rank},
                          {"n_queries", m.n_queries},
                          {"n_fused", m.n_fused}};
}

CaptionCorpus load_captions_tsv(const std::string& path, const VisualLanguageModel& vlm,
                                const SentenceEmbedder& embedder) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open captions file: " + path);
    CaptionCorpus corpus;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen_ids;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw InputError("captions line " + std::to_string(lineno) +
                             " is not caption_id\\tvideo_id\\ttext");
        CaptionRecord c;
        c.id = line.substr(0, t1);
        std::string video_id = line.substr(t1 + 1, t2 - t1 - 1);
        c.text = line.substr(t2 + 1);
        if (c.id.empty() || video_id.empty() || trim(c.text).empty())
            throw InputError("captions line " + std::to_string(lineno) + " has empty fields");
        if (!seen_ids.insert(c.id).second)
            throw InputError("duplicate caption id: " + c.id);
        c.vlm_embedding = vlm.embed_text(c.text);
        c.sentence_embedding = embedder.embed(c.text);
        corpus.truth[video_id].insert(c.id);
        corpus.captions.push_back(std::move(c));
    }
    if (corpus.captions.empty()) throw InputError("captions file is empty: " + path);
    return corpus;
}

std::map<std::string, std::string> load_transcripts_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open transcripts file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("transcripts line " + std::to_string(lineno) + " is not valid JSON");
        out[j.at("video_id").get<std::string>()] = j.at("transcript").get<std::string>();
    }
    return out;
}

VideoCorpus build_video_corpus(const std::string& smeb_path,
                               const std::map<std::string, std::string>& transcripts,
                               const TextCompleter* lm, const SentenceEmbedder* embedder,
                               const V2tConfig& cfg) {
    SmebFile f = smeb_read(smeb_path);
    if (!f.ids) throw InputError("video embeddings need the SMEB id sidecar: " + smeb_path);
    VideoCorpus corpus;
    for (Eigen::Index r = 0; r < f.rows.rows(); ++r) {
        VideoRecord v;
        v.id = (*f.ids)[static_cast<std::size_t>(r)];
        v.visual = Embedding{f.rows.row(r).transpose(), true};
        auto it = transcripts.find(v.id);
        if (it != transcripts.end()) {
            v.transcript = it->second;
            if (it->second.size() >= cfg.gate_chars) {
                if (!lm || !embedder)
                    throw ConfigError("long transcripts present but no LM/embedder configured");
                try {
                    v.summary = summarize_transcript(it->second, *lm, cfg);
                    v.summary_embedding = embedder->embed(*v.summary);
                } catch (const BackendError& e) {
                    corpus.warnings.push_back("video " + v.id + " fell back to visual-only: " +
                                              e.what());
                    v.summary.reset();
                    v.summary_embedding.reset();
                }
            }
        }
        corpus.videos.push_back(std::move(v));
    }
    return corpus;
}

}  // namespace socratic
