#include "sighedge/sig/signature.hpp"

#include <cmath>

namespace sighedge::sig {

size_t level_size(int dim, int level) {
    size_t s = 1;
    for (int i = 0; i < level; ++i) s *= static_cast<size_t>(dim);
    return s;
}

size_t flat_size(int dim, int depth) {
    size_t s = 0;
    for (int i = 1; i <= depth; ++i) s += level_size(dim, i);
    return s;
}

TruncatedSignature TruncatedSignature::identity(int dim, int depth) {
    TruncatedSignature out;
    out.dim = dim;
    out.depth = depth;
    out.levels.resize(depth);
    for (int i = 1; i <= depth; ++i) out.levels[i - 1].assign(level_size(dim, i), 0.0);
    return out;
}

bool TruncatedSignature::all_finite() const {
    for (const auto& lv : levels)
        for (double v : lv)
            if (!std::isfinite(v)) return false;
    return true;
}

TruncatedSignature tensor_exp(const std::vector<double>& increment, int depth) {
    require(depth >= 1, "tensor_exp: depth must be >= 1");
    require(!increment.empty(), "tensor_exp: empty increment");
    for (double v : increment)
        require(std::isfinite(v), "tensor_exp: non-finite increment");

    const int dim = static_cast<int>(increment.size());
    TruncatedSignature out = TruncatedSignature::identity(dim, depth);
    out.levels[0] = increment;
    for (int lv = 2; lv <= depth; ++lv) {
        const auto& prev = out.levels[lv - 2];
        auto& cur = out.levels[lv - 1];
        const double inv = 1.0 / lv;
        size_t idx = 0;
        for (double p : prev)
            for (int j = 0; j < dim; ++j) cur[idx++] = p * increment[j] * inv;
    }
    return out;
}

TruncatedSignature chen_product(const TruncatedSignature& a, const TruncatedSignature& b) {
    require(a.dim == b.dim && a.depth == b.depth, "chen_product: dim/depth mismatch");
    const int dim = a.dim;
    const int depth = a.depth;
    TruncatedSignature out = TruncatedSignature::identity(dim, depth);
    for (int n = 1; n <= depth; ++n) {
        auto& cn = out.levels[n - 1];
        // i = 0 and j = 0 terms (level-0 scalar is 1 on both sides)
        const auto& an = a.levels[n - 1];
        const auto& bn = b.levels[n - 1];
        for (size_t t = 0; t < cn.size(); ++t) cn[t] = an[t] + bn[t];
        // cross terms a_i (x) b_{n-i}
        for (int i = 1; i < n; ++i) {
            const auto& ai = a.levels[i - 1];
            const auto& bj = b.levels[n - i - 1];
            size_t idx = 0;
            for (double av : ai)
                for (double bv : bj) cn[idx++] += av * bv;
        }
    }
    return out;
}

TruncatedSignature signature(const PathSeries& path, int depth) {
    require(depth >= 1, "signature: depth must be >= 1");
    require(path.rows >= 1 && path.cols >= 1, "signature: empty path");
    require(path.all_finite(), "signature: non-finite path");

    const int dim = path.cols;
    TruncatedSignature acc = TruncatedSignature::identity(dim, depth);
    std::vector<double> inc(dim);
    for (int k = 1; k < path.rows; ++k) {
        for (int j = 0; j < dim; ++j) inc[j] = path(k, j) - path(k - 1, j);
        acc = chen_product(acc, tensor_exp(inc, depth));
    }
    return acc;
}

SignatureStream stream_signature(const PathSeries& path, int depth) {
    require(path.rows >= 2, "stream_signature: need at least two points");
    require(path.all_finite(), "stream_signature: non-finite path");

    const int dim = path.cols;
    SignatureStream out;
    out.steps.reserve(path.rows - 1);
    TruncatedSignature acc = TruncatedSignature::identity(dim, depth);
    std::vector<double> inc(dim);
    for (int k = 1; k < path.rows; ++k) {
        for (int j = 0; j < dim; ++j) inc[j] = path(k, j) - path(k - 1, j);
        acc = chen_product(acc, tensor_exp(inc, depth));
        out.steps.push_back(acc);
    }
    return out;
}

const std::vector<double>& flatten_level(const TruncatedSignature& s, int level) {
    if (level < 1 || level > s.depth) throw std::out_of_range("flatten_level: level out of range");
    return s.levels[level - 1];
}

std::vector<double> flatten_all(const TruncatedSignature& s) {
    std::vector<double> out;
    out.reserve(flat_size(s.dim, s.depth));
    for (const auto& lv : s.levels) out.insert(out.end(), lv.begin(), lv.end());
    return out;
}

PathSeries scale_path(const PathSeries& path, double lambda) {
    PathSeries out = path;
    for (auto& v : out.a) v *= lambda;
    return out;
}

}  // namespace sighedge::sig
