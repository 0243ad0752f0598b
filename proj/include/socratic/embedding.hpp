#pragma once

#include <Eigen/Core>
#include <cmath>

#include "socratic/common.hpp"

namespace socratic {

using Vec = Eigen::VectorXf;
using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Sequential double-accumulator dot product. Score paths that end up in
// output artifacts go through this instead of Eigen's vectorized reductions,
// so the bytes of a run do not depend on the SIMD width of the host.
inline double det_dot(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

inline double det_norm(const Eigen::Ref<const Vec>& a) {
    return std::sqrt(det_dot(a, a));
}

// Vector in the shared similarity space. `normalized` marks unit vectors; all
// adapter outputs set it.
struct Embedding {
    Vec values;
    bool normalized = false;

    int dim() const { return static_cast<int>(values.size()); }

    static Embedding raw(Vec v) { return Embedding{std::move(v), false}; }

    // Scales to unit norm. Throws on zero or non-finite input.
    static Embedding unit(Vec v) {
        if (!v.allFinite()) throw InputError("embedding has non-finite values");
        double n = det_norm(v);
        if (n == 0.0) throw InputError("cannot normalize zero-norm embedding");
        Vec out = (v.cast<double>() / n).cast<float>();
        return Embedding{std::move(out), true};
    }
};

inline double cosine_score(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim())
        throw InputError("cosine_score: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()) + ")");
    double na = det_norm(a.values);
    double nb = det_norm(b.values);
    if (na == 0.0 || nb == 0.0) throw InputError("cosine_score: zero-norm input");
    return det_dot(a.values, b.values) / (na * nb);
}

// Plain dot of two unit embeddings; equals cosine when both are normalized.
inline double unit_dot(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) throw InputError("unit_dot: dimension mismatch");
    return det_dot(a.values, b.values);
}

}  // namespace socratic
