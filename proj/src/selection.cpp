#include "socratic/selection.hpp"

#include <cmath>
#include <future>

namespace socratic {

std::vector<std::string> generate_pseudo_truth(const std::vector<MediaRef>& frames,
                                               const EgoCaptioner& truth_captioner) {
    if (frames.empty()) throw InputError("generate_pseudo_truth: no frames");
    std::vector<std::string> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        out.push_back(truth_captioner
                          .summarize_ref(frames[i], std::nullopt, static_cast<std::int64_t>(i))
                          .summary_text);
    return out;
}

double score_candidate(const std::vector<std::string>& candidate_summaries,
                       const std::vector<std::string>& truth_summaries,
                       const SentenceEmbedder& heldout, std::vector<double>* per_frame) {
    if (candidate_summaries.size() != truth_summaries.size())
        throw InputError("score_candidate: summary count mismatch");
    if (candidate_summaries.empty()) throw InputError("score_candidate: no summaries");
    double total = 0.0;
    if (per_frame) per_frame->clear();
    for (std::size_t i = 0; i < candidate_summaries.size(); ++i) {
        double s = cosine_score(heldout.embed(candidate_summaries[i]),
                                heldout.embed(truth_summaries[i]));
        total += s;
        if (per_frame) per_frame->push_back(s);
    }
    return total / static_cast<double>(candidate_summaries.size());
}

SelectionReport run_selection(const SelectionInputs& inputs) {
    if (inputs.frames.empty()) throw InputError("run_selection: no frames");
    if (inputs.candidates.size() < 2) throw ConfigError("run_selection: need at least 2 candidates");
    if (!inputs.weak_lm || !inputs.strong_lm) throw ConfigError("run_selection: missing LMs");
    if (!inputs.baseline_vlm.vlm) throw ConfigError("run_selection: missing baseline VLM");
    if (!inputs.heldout_embedder) throw ConfigError("run_selection: missing held-out embedder");

    // The judge must be a distinct model from everything under evaluation,
    // otherwise scores correlate with the scorer instead of the task.
    std::string heldout_id = inputs.heldout_embedder->id();
    if (heldout_id == inputs.weak_lm->id() || heldout_id == inputs.strong_lm->id())
        throw ConfigError("run_selection: held-out embedder must differ from the LMs under test");
    for (const auto& c : inputs.candidates)
        if (heldout_id == c.vlm->id())
            throw ConfigError("run_selection: held-out embedder must differ from candidate VLMs");

    auto make_captioner = [&](std::shared_ptr<const VisualLanguageModel> vlm,
                              std::shared_ptr<const TextCompleter> lm) {
        AdapterSet set;
        set.vlm = std::move(vlm);
        set.lm_generate = std::move(lm);
        return EgoCaptioner(std::move(set), inputs.places, inputs.objects, inputs.caption_cfg);
    };

    EgoCaptioner truth_captioner = make_captioner(inputs.baseline_vlm.vlm, inputs.strong_lm);
    std::vector<std::string> truth = generate_pseudo_truth(inputs.frames, truth_captioner);

    SelectionReport report;
    report.truth_baseline_vlm_id = inputs.baseline_vlm.vlm_id;
    report.truth_lm_id = inputs.strong_lm->id();

    // Candidates are independent; evaluate them concurrently and assemble in
    // declaration order.
    std::vector<std::future<std::pair<double, std::vector<double>>>> jobs;
    for (const auto& candidate : inputs.candidates) {
        jobs.push_back(std::async(std::launch::async, [&, candidate] {
            EgoCaptioner captioner = make_captioner(candidate.vlm, inputs.weak_lm);
            std::vector<std::string> summaries = generate_pseudo_truth(inputs.frames, captioner);
            std::vector<double> per_frame;
            double mean = score_candidate(summaries, truth, *inputs.heldout_embedder, &per_frame);
            return std::make_pair(mean, std::move(per_frame));
        }));
    }
    for (std::size_t i = 0; i < inputs.candidates.size(); ++i) {
        auto [mean, per_frame] = jobs[i].get();
        const std::string& id = inputs.candidates[i].vlm_id;
        if (report.rows.count(id)) throw ConfigError("run_selection: duplicate candidate id: " + id);
        report.rows[id] = mean;
        report.per_frame_scores[id] = std::move(per_frame);
        if (id == inputs.baseline_vlm.vlm_id) report.excluded.insert(id);
    }
    return report;
}

std::vector<std::string> SelectionReport::ranking() const {
    std::vector<std::string> ids;
    for (const auto& [id, score] : rows)
        if (!excluded.count(id)) ids.push_back(id);
    std::stable_sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        double sa = rows.at(a), sb = rows.at(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    return ids;
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw InputError("pearson_correlation: length mismatch");
    if (xs.size() < 2) throw InputError("pearson_correlation: need at least 2 points");
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx == 0.0 || vy == 0.0) throw InputError("pearson_correlation: zero variance");
    return cov / std::sqrt(vx * vy);
}

nlohmann::json selection_report_json(const SelectionReport& report,
                                     const std::map<std::string, double>* reference_scores,
                                     const std::string& reference_name) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [id, score] : report.rows)
        rows.push_back({{"vlm", id},
                        {"score", score},
                        {"excluded", report.excluded.count(id) > 0}});
    nlohmann::json j{{"truth", {{"vlm", report.truth_baseline_vlm_id}, {"lm", report.truth_lm_id}}},
                     {"rows", std::move(rows)}};
    if (reference_scores) {
        std::vector<double> xs, ys;
        for (const auto& [id, score] : report.rows) {
            if (report.excluded.count(id)) continue;
            auto it = reference_scores->find(id);
            if (it == reference_scores->end()) continue;
            xs.push_back(it->second);
            ys.push_back(score);
        }
        if (xs.size() >= 2)
            j["correlation"] = {{"reference_name", reference_name},
                                {"value", pearson_correlation(xs, ys)}};
    }
    return j;
}

}  // namespace socratic
