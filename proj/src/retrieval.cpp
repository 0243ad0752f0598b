#include "socratic/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace socratic {

KeyMatrix KeyMatrix::from_rows(Mat rows, std::optional<std::vector<std::string>> ids) {
    if (rows.rows() == 0 || rows.cols() == 0) throw InputError("KeyMatrix: empty matrix");
    if (!rows.allFinite()) throw InputError("KeyMatrix: non-finite entries");
    if (ids && static_cast<Eigen::Index>(ids->size()) != rows.rows())
        throw InputError("KeyMatrix: id count does not match row count");
    return KeyMatrix{std::move(rows), std::move(ids)};
}

std::vector<ScoredIndex> mips_exact(const Embedding& query, const KeyMatrix& keys, int k) {
    if (query.dim() != keys.dim()) throw InputError("mips_exact: dimension mismatch");
    if (k < 1 || k > keys.count()) throw InputError("mips_exact: k out of range");
    Vec scores = keys.rows * query.values;
    std::vector<std::uint32_t> order(static_cast<std::size_t>(keys.count()));
    std::iota(order.begin(), order.end(), 0u);
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    std::vector<ScoredIndex> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = {order[static_cast<std::size_t>(i)], scores[order[static_cast<std::size_t>(i)]]};
    return out;
}

std::vector<std::size_t> top_n_local_maxima(const std::vector<float>& scores, int n, int window) {
    if (scores.empty()) throw InputError("top_n_local_maxima: empty scores");
    if (n < 1) throw InputError("top_n_local_maxima: n must be >= 1");
    if (window < 1) throw InputError("top_n_local_maxima: window must be >= 1");
    const std::size_t count = scores.size();
    std::vector<std::size_t> peaks;
    for (std::size_t t = 0; t < count; ++t) {
        if (t > 0 && scores[t - 1] == scores[t]) continue;  // plateau continuation
        std::size_t lo = t >= static_cast<std::size_t>(window) ? t - static_cast<std::size_t>(window) : 0;
        std::size_t hi = std::min(count - 1, t + static_cast<std::size_t>(window));
        float neighborhood_max = scores[lo];
        float neighborhood_min = scores[lo];
        for (std::size_t u = lo + 1; u <= hi; ++u) {
            neighborhood_max = std::max(neighborhood_max, scores[u]);
            neighborhood_min = std::min(neighborhood_min, scores[u]);
        }
        if (scores[t] >= neighborhood_max && scores[t] > neighborhood_min) peaks.push_back(t);
    }
    if (peaks.empty()) {
        // Flat (or near-flat) sequence: fall back to the first global argmax.
        std::size_t best = 0;
        for (std::size_t t = 1; t < count; ++t)
            if (scores[t] > scores[best]) best = t;
        return {best};
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (peaks.size() > static_cast<std::size_t>(n)) peaks.resize(static_cast<std::size_t>(n));
    return peaks;
}

// --- SRP-LSH ----------------------------------------------------------------

namespace {

Mat sample_projections(int rows, int cols, std::uint64_t seed, const char* tag) {
    Rng rng(mix_seed(seed, tag));
    Mat w(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = static_cast<float>(rng.normal());
    return w;
}

}  // namespace

SrpLshIndex SrpLshIndex::build(KeyMatrix keys, SrpLshParams params, std::uint64_t seed) {
    if (params.bits < 1 || params.bits > 64) throw ConfigError("SRP-LSH: bits must lie in [1, 64]");
    if (params.tables < 1) throw ConfigError("SRP-LSH: tables must be >= 1");
    if (params.probe_radius < 0) throw ConfigError("SRP-LSH: probe_radius must be >= 0");
    if (keys.count() == 0) throw InputError("SRP-LSH: no keys");

    SrpLshIndex index;
    index.params_ = params;
    index.seed_ = seed;

    // MIP -> angular reduction when keys are off the unit sphere.
    float max_norm = 0.0f;
    bool unit = true;
    for (Eigen::Index r = 0; r < keys.count(); ++r) {
        float n = keys.rows.row(r).norm();
        max_norm = std::max(max_norm, n);
        if (std::abs(n - 1.0f) > 1e-3f) unit = false;
    }
    index.augmented_ = !unit;
    index.max_norm_ = index.augmented_ ? max_norm : 1.0f;

    int hash_dim = static_cast<int>(keys.dim()) + (index.augmented_ ? 1 : 0);
    index.projections_ =
        sample_projections(params.tables * params.bits, hash_dim, seed, "srp-lsh");
    index.keys_ = std::move(keys);
    index.fill_buckets();
    return index;
}

SrpLshIndex SrpLshIndex::from_parts(KeyMatrix keys, SrpLshParams params, std::uint64_t seed,
                                    Mat projections, bool augmented, float max_norm) {
    SrpLshIndex index;
    index.params_ = params;
    index.seed_ = seed;
    index.projections_ = std::move(projections);
    index.augmented_ = augmented;
    index.max_norm_ = max_norm;
    index.keys_ = std::move(keys);
    index.fill_buckets();
    return index;
}

Vec SrpLshIndex::hash_point(const Eigen::Ref<const Vec>& x, bool is_query) const {
    if (!augmented_) return x;
    Vec out(x.size() + 1);
    out.head(x.size()) = x;
    if (is_query) {
        out[x.size()] = 0.0f;
    } else {
        float n2 = x.squaredNorm();
        float rest = max_norm_ * max_norm_ - n2;
        out[x.size()] = rest > 0.0f ? std::sqrt(rest) : 0.0f;
    }
    out /= max_norm_;
    return out;
}

void SrpLshIndex::fill_buckets() {
    buckets_.assign(static_cast<std::size_t>(params_.tables), {});
    for (Eigen::Index r = 0; r < keys_.count(); ++r) {
        Vec h = hash_point(keys_.rows.row(r).transpose(), false);
        Vec margins = projections_ * h;
        for (int t = 0; t < params_.tables; ++t) {
            std::uint64_t c = 0;
            for (int b = 0; b < params_.bits; ++b)
                if (margins[t * params_.bits + b] >= 0.0f) c |= (1ULL << b);
            buckets_[static_cast<std::size_t>(t)][c].push_back(static_cast<std::uint32_t>(r));
        }
    }
}

std::uint64_t SrpLshIndex::code(int table, const Embedding& query) const {
    Vec h = hash_point(query.values, true);
    std::uint64_t c = 0;
    for (int b = 0; b < params_.bits; ++b) {
        float margin = projections_.row(table * params_.bits + b).dot(h);
        if (margin >= 0.0f) c |= (1ULL << b);
    }
    return c;
}

std::vector<std::uint32_t> SrpLshIndex::table_bucket(int table, const Embedding& query) const {
    auto it = buckets_[static_cast<std::size_t>(table)].find(code(table, query));
    if (it == buckets_[static_cast<std::size_t>(table)].end()) return {};
    return it->second;
}

std::vector<std::uint32_t> SrpLshIndex::candidates(const Embedding& query, int probe_radius) const {
    if (buckets_.empty()) throw InputError("SRP-LSH: index is not built");
    if (query.dim() != keys_.dim()) throw InputError("SRP-LSH: dimension mismatch");
    if (probe_radius < 0) probe_radius = params_.probe_radius;

    Vec h = hash_point(query.values, true);
    Vec margins = projections_ * h;

    std::vector<char> seen(static_cast<std::size_t>(keys_.count()), 0);
    std::vector<std::uint32_t> out;

    // Probe order per table: exact code first, then codes at Hamming distance
    // d <= radius ordered by total flipped |margin| (least confident bits
    // flip first).
    std::vector<int> bit_order(static_cast<std::size_t>(params_.bits));
    for (int t = 0; t < params_.tables; ++t) {
        std::uint64_t base = 0;
        for (int b = 0; b < params_.bits; ++b)
            if (margins[t * params_.bits + b] >= 0.0f) base |= (1ULL << b);

        std::iota(bit_order.begin(), bit_order.end(), 0);
        std::sort(bit_order.begin(), bit_order.end(), [&](int a, int b) {
            float ma = std::abs(margins[t * params_.bits + a]);
            float mb = std::abs(margins[t * params_.bits + b]);
            if (ma != mb) return ma < mb;
            return a < b;
        });

        std::vector<std::pair<double, std::uint64_t>> probes{{0.0, base}};
        std::vector<std::pair<double, std::uint64_t>> frontier{{0.0, base}};
        for (int d = 0; d < probe_radius; ++d) {
            std::vector<std::pair<double, std::uint64_t>> next;
            for (const auto& [cost, c] : frontier) {
                for (int b : bit_order) {
                    std::uint64_t flipped = c ^ (1ULL << b);
                    // Flip sets are built in ascending bit-order position to
                    // avoid duplicate subsets.
                    if ((c != base) && ((flipped & (1ULL << b)) == (base & (1ULL << b)))) continue;
                    bool already = false;
                    for (const auto& p : probes)
                        if (p.second == flipped) { already = true; break; }
                    if (already) continue;
                    double ncost = cost + std::abs(margins[t * params_.bits + b]);
                    next.emplace_back(ncost, flipped);
                    probes.emplace_back(ncost, flipped);
                }
            }
            frontier = std::move(next);
        }
        std::stable_sort(probes.begin(), probes.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        const auto& table_map = buckets_[static_cast<std::size_t>(t)];
        for (const auto& [cost, c] : probes) {
            auto it = table_map.find(c);
            if (it == table_map.end()) continue;
            for (std::uint32_t idx : it->second) {
                if (!seen[idx]) {
                    seen[idx] = 1;
                    out.push_back(idx);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ScoredIndex> SrpLshIndex::query(const Embedding& query, int k, int probe_radius) const {
    if (k < 1) throw InputError("SRP-LSH: k must be >= 1");
    auto cand = candidates(query, probe_radius);
    std::vector<ScoredIndex> scored;
    scored.reserve(cand.size());
    for (std::uint32_t idx : cand) {
        float s = static_cast<float>(
            det_dot(keys_.rows.row(idx).transpose(), query.values));
        scored.push_back({idx, s});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredIndex& a, const ScoredIndex& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.index < b.index;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
    return scored;
}

// --- FAVOR+ -----------------------------------------------------------------

RandomFeatureMap::RandomFeatureMap(int m, int dim, std::uint64_t seed) : seed_(seed) {
    if (m < 1 || dim < 1) throw ConfigError("RandomFeatureMap: m and dim must be positive");
    weights_ = sample_projections(m, dim, seed, "rf-map");
}

RandomFeatureMap RandomFeatureMap::from_weights(Mat weights, std::uint64_t seed) {
    if (weights.rows() < 1 || weights.cols() < 1)
        throw InputError("RandomFeatureMap: empty weight matrix");
    RandomFeatureMap map(1, 1, 0);
    map.weights_ = std::move(weights);
    map.seed_ = seed;
    return map;
}

Vec RandomFeatureMap::features(const Eigen::Ref<const Vec>& x) const {
    if (x.size() != weights_.cols()) throw InputError("rf_features: dimension mismatch");
    Vec wx = weights_ * x;
    float scale = static_cast<float>(std::exp(-0.5 * det_dot(x, x)) /
                                     std::sqrt(static_cast<double>(weights_.rows())));
    Vec out(weights_.rows());
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = scale * std::exp(wx[i]);
    return out;
}

Vec rf_features(const RandomFeatureMap& map, const Embedding& x) { return map.features(x.values); }

// --- Compressed associative memory ------------------------------------------

CompressedMemory memory_store(const KeyMatrix& keys, std::shared_ptr<const RandomFeatureMap> map) {
    if (!map) throw ConfigError("memory_store: null feature map");
    if (keys.dim() != map->dim()) throw InputError("memory_store: dimension mismatch");
    CompressedMemory mem;
    mem.feature_map = std::move(map);
    mem.summary = Vec::Zero(mem.feature_map->m());
    for (Eigen::Index r = 0; r < keys.count(); ++r)
        mem.summary += mem.feature_map->features(keys.rows.row(r).transpose());
    mem.pattern_count = static_cast<std::size_t>(keys.count());
    return mem;
}

double memory_energy(const CompressedMemory& mem, const Embedding& query,
                     std::uint64_t* op_count) {
    if (mem.pattern_count == 0) throw InputError("memory_energy: memory holds no patterns");
    Vec u = mem.feature_map->features(query.values);
    double acc = 0.0;
    std::uint64_t ops = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u[i]) * static_cast<double>(mem.summary[i]);
        ++ops;
    }
    if (op_count) *op_count = ops;
    return -acc;
}

// --- Random feature tree ------------------------------------------------------

RandomFeatureTree RandomFeatureTree::build(const KeyMatrix& keys,
                                           std::shared_ptr<const RandomFeatureMap> map) {
    if (!map) throw ConfigError("rft_build: null feature map");
    if (keys.count() == 0) throw InputError("rft_build: no keys");
    if (keys.dim() != map->dim()) throw InputError("rft_build: dimension mismatch");
    Mat features(keys.count(), map->m());
    for (Eigen::Index r = 0; r < keys.count(); ++r)
        features.row(r) = map->features(keys.rows.row(r).transpose()).transpose();
    return from_features(std::move(features), std::move(map));
}

RandomFeatureTree RandomFeatureTree::from_features(Mat leaf_features,
                                                   std::shared_ptr<const RandomFeatureMap> map) {
    RandomFeatureTree tree;
    tree.map_ = std::move(map);
    tree.leaf_features_ = std::move(leaf_features);
    tree.leaf_count_ = static_cast<std::size_t>(tree.leaf_features_.rows());
    if (tree.leaf_count_ == 0) throw InputError("rft_build: no leaves");
    tree.nodes_.reserve(2 * tree.leaf_count_);
    tree.root_ = tree.build_range(0, static_cast<int>(tree.leaf_count_), 0);
    return tree;
}

int RandomFeatureTree::build_range(int lo, int hi, int level) {
    depth_ = std::max(depth_, level);
    if (hi - lo == 1) {
        Node leaf;
        leaf.key_index = lo;
        leaf.sum = leaf_features_.row(lo).transpose();
        nodes_.push_back(std::move(leaf));
        return static_cast<int>(nodes_.size()) - 1;
    }
    int mid = lo + (hi - lo + 1) / 2;
    int left = build_range(lo, mid, level + 1);
    int right = build_range(mid, hi, level + 1);
    Node inner;
    inner.left = left;
    inner.right = right;
    inner.sum = nodes_[static_cast<std::size_t>(left)].sum + nodes_[static_cast<std::size_t>(right)].sum;
    nodes_.push_back(std::move(inner));
    return static_cast<int>(nodes_.size()) - 1;
}

RandomFeatureTree::Sampler RandomFeatureTree::sampler(const Embedding& query) const {
    Sampler s;
    s.tree_ = this;
    s.u_ = map_->features(query.values);
    return s;
}

int RandomFeatureTree::Sampler::sample(Rng& rng, int* node_visits) const {
    const auto& nodes = tree_->nodes_;
    int visits = 0;
    int node = tree_->root_;
    while (true) {
        ++visits;
        const Node& n = nodes[static_cast<std::size_t>(node)];
        if (n.key_index >= 0) {
            if (node_visits) *node_visits = visits;
            return n.key_index;
        }
        double wl = det_dot(u_, nodes[static_cast<std::size_t>(n.left)].sum);
        double wr = det_dot(u_, nodes[static_cast<std::size_t>(n.right)].sum);
        double total = wl + wr;
        node = rng.uniform01() * total < wl ? n.left : n.right;
    }
}

Eigen::VectorXd RandomFeatureTree::distribution_exact(const Embedding& query) const {
    Vec u = map_->features(query.values);
    Eigen::VectorXd p(leaf_features_.rows());
    for (Eigen::Index r = 0; r < leaf_features_.rows(); ++r)
        p[r] = det_dot(u, leaf_features_.row(r).transpose());
    double total = p.sum();
    if (total <= 0.0) throw InputError("rft distribution: non-positive normalizer");
    return p / total;
}

}  // namespace socratic
