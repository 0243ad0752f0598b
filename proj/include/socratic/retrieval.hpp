#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "socratic/embedding.hpp"
#include "socratic/rng.hpp"

namespace socratic {

// Immutable key set for maximum-inner-product search.
struct KeyMatrix {
    Mat rows;  // count x dim, float32
    std::optional<std::vector<std::string>> ids;

    Eigen::Index count() const { return rows.rows(); }
    Eigen::Index dim() const { return rows.cols(); }

    static KeyMatrix from_rows(Mat rows, std::optional<std::vector<std::string>> ids = {});
};

struct ScoredIndex {
    std::uint32_t index = 0;
    float score = 0.0f;
};

// Exact top-k by dot product; ties break toward the lower index.
std::vector<ScoredIndex> mips_exact(const Embedding& query, const KeyMatrix& keys, int k);

// Local-maxima selection over a score sequence. Index t qualifies when its
// score is >= every score within `window` and strictly above the neighborhood
// minimum; plateaus count once at their first index. Returns up to n indices
// by score (earlier index wins ties); if nothing qualifies, falls back to the
// first global argmax.
std::vector<std::size_t> top_n_local_maxima(const std::vector<float>& scores, int n, int window);

// --- SRP-LSH ----------------------------------------------------------------

struct SrpLshParams {
    int tables = 16;        // L
    int bits = 12;          // b, <= 64
    int probe_radius = 1;
};

// Sign-random-projection hashing with multi-probe querying. Unnormalized keys
// are lifted to the sphere with the standard augmentation
// x -> (x, sqrt(M^2 - |x|^2)) / M, M = max key norm, before hashing; re-rank
// always uses raw dot products.
class SrpLshIndex {
public:
    static SrpLshIndex build(KeyMatrix keys, SrpLshParams params, std::uint64_t seed);

    // Candidate gathering + exact re-rank. probe_radius < 0 uses the build
    // parameter. May return fewer than k when candidates are scarce.
    std::vector<ScoredIndex> query(const Embedding& query, int k, int probe_radius = -1) const;

    // Union of candidate indices, ascending. Exposed for recall analysis.
    std::vector<std::uint32_t> candidates(const Embedding& query, int probe_radius) const;
    std::vector<std::uint32_t> table_bucket(int table, const Embedding& query) const;
    std::uint64_t code(int table, const Embedding& query) const;

    const SrpLshParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    const KeyMatrix& keys() const { return keys_; }
    const Mat& projections() const { return projections_; }  // (L*b) x hash_dim
    bool augmented() const { return augmented_; }
    float max_norm() const { return max_norm_; }

    // Reassembles the bucket maps from keys + projections (used after load).
    static SrpLshIndex from_parts(KeyMatrix keys, SrpLshParams params, std::uint64_t seed,
                                  Mat projections, bool augmented, float max_norm);

private:
    SrpLshIndex() = default;
    Vec hash_point(const Eigen::Ref<const Vec>& x, bool is_query) const;
    void fill_buckets();

    KeyMatrix keys_;
    SrpLshParams params_;
    std::uint64_t seed_ = 0;
    Mat projections_;
    bool augmented_ = false;
    float max_norm_ = 1.0f;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
};

// --- FAVOR+ positive random features ----------------------------------------

// phi(x) = m^(-1/2) * exp(-|x|^2 / 2) * (exp(w_i . x))_i with w_i ~ N(0, I).
// E[phi(x) . phi(y)] = exp(x . y); all coordinates are strictly positive,
// which is what lets tree branch weights and memory summaries stay valid.
class RandomFeatureMap {
public:
    RandomFeatureMap(int m, int dim, std::uint64_t seed);
    static RandomFeatureMap from_weights(Mat weights, std::uint64_t seed);

    Vec features(const Eigen::Ref<const Vec>& x) const;

    int m() const { return static_cast<int>(weights_.rows()); }
    int dim() const { return static_cast<int>(weights_.cols()); }
    std::uint64_t seed() const { return seed_; }
    const Mat& weights() const { return weights_; }

private:
    Mat weights_;  // m x dim
    std::uint64_t seed_;
};

Vec rf_features(const RandomFeatureMap& map, const Embedding& x);

// --- Compressed associative memory ------------------------------------------

// All stored patterns collapse into one m-vector S = sum_i phi(k_i); the
// energy estimate -phi(q) . S approximates -sum_i exp(q . k_i) at query cost
// independent of the pattern count.
struct CompressedMemory {
    std::shared_ptr<const RandomFeatureMap> feature_map;
    Vec summary;
    std::size_t pattern_count = 0;
};

CompressedMemory memory_store(const KeyMatrix& keys,
                              std::shared_ptr<const RandomFeatureMap> map);

// op_count, when given, receives the number of multiply-accumulates executed.
double memory_energy(const CompressedMemory& mem, const Embedding& query,
                     std::uint64_t* op_count = nullptr);

// --- Random feature tree -----------------------------------------------------

// Balanced binary tree over phi(k_i); internal nodes hold subtree feature
// sums, so a root-to-leaf walk samples exactly the linearized softmax
// distribution P(i) = phi(q).phi(k_i) / sum_j phi(q).phi(k_j).
class RandomFeatureTree {
public:
    static RandomFeatureTree build(const KeyMatrix& keys,
                                   std::shared_ptr<const RandomFeatureMap> map);
    static RandomFeatureTree from_features(Mat leaf_features,
                                           std::shared_ptr<const RandomFeatureMap> map);

    struct Node {
        Vec sum;
        int left = -1;
        int right = -1;
        int key_index = -1;  // >= 0 marks a leaf
    };

    std::size_t leaf_count() const { return leaf_count_; }
    int depth() const { return depth_; }  // == ceil(log2 leaf_count)
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }
    const Mat& leaf_features() const { return leaf_features_; }
    const RandomFeatureMap& map() const { return *map_; }
    std::shared_ptr<const RandomFeatureMap> map_ptr() const { return map_; }

    // Per-query sampler; phi(query) is computed once.
    class Sampler {
    public:
        // Returns a key index; node_visits, when given, receives the number
        // of tree nodes touched for this sample.
        int sample(Rng& rng, int* node_visits = nullptr) const;

    private:
        friend class RandomFeatureTree;
        const RandomFeatureTree* tree_ = nullptr;
        Vec u_;
    };

    Sampler sampler(const Embedding& query) const;

    // Closed-form linearized softmax law, for testing the sampler against.
    Eigen::VectorXd distribution_exact(const Embedding& query) const;

private:
    int build_range(int lo, int hi, int level);

    std::vector<Node> nodes_;
    int root_ = -1;
    int depth_ = 0;
    std::size_t leaf_count_ = 0;
    Mat leaf_features_;
    std::shared_ptr<const RandomFeatureMap> map_;
};

// --- Index persistence -------------------------------------------------------

// On-disk layout: directory with meta.json plus SMEB matrices. Rebuilding
// from (keys, seed) byte-matches the persisted form.
enum class IndexAlgo { exact, lsh, mem, rft };

IndexAlgo index_algo_from_name(const std::string& name);
const char* index_algo_name(IndexAlgo algo);

struct IndexBundle {
    IndexAlgo algo = IndexAlgo::exact;
    std::uint64_t seed = 0;
    std::optional<KeyMatrix> keys;             // exact, lsh, rft
    std::optional<SrpLshIndex> lsh;
    std::optional<CompressedMemory> memory;
    std::optional<RandomFeatureTree> tree;
};

struct IndexBuildParams {
    IndexAlgo algo = IndexAlgo::exact;
    std::uint64_t seed = 0;
    SrpLshParams lsh;
    int feature_count = 1024;  // m for mem/rft
};

IndexBundle build_index(KeyMatrix keys, const IndexBuildParams& params);
void save_index(const IndexBundle& bundle, const std::string& dir);
IndexBundle load_index(const std::string& dir);

}  // namespace socratic
