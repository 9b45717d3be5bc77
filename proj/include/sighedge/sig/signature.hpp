#pragma once

#include <vector>

#include "sighedge/core/mat.hpp"

namespace sighedge::sig {

// Piecewise-linear path: one row per time stamp, one column per coordinate.
using PathSeries = Mat<double>;

// Truncated signature of a path, levels 1..depth. Level i is a flat array of
// dim^i entries in row-major multi-index order: index (j1,...,ji) with
// 0-based j sits at position sum_k j_k * dim^(i-k). The level-0 scalar is
// always 1 and is not stored.
struct TruncatedSignature {
    int dim = 0;
    int depth = 0;
    std::vector<std::vector<double>> levels;  // levels[i-1] has dim^i entries

    static TruncatedSignature identity(int dim, int depth);
    bool all_finite() const;
};

// Signatures of all prefixes of a path: steps[k] covers samples 0..k+1, so
// steps.size() == n_points - 1.
struct SignatureStream {
    std::vector<TruncatedSignature> steps;
};

size_t level_size(int dim, int level);
size_t flat_size(int dim, int depth);  // sum over levels 1..depth

// Signature of a single linear segment: level i = increment^{(x)i} / i!.
TruncatedSignature tensor_exp(const std::vector<double>& increment, int depth);

// Chen's identity: signature of the concatenated path.
TruncatedSignature chen_product(const TruncatedSignature& a, const TruncatedSignature& b);

// Left fold of chen_product over the segment exponentials. A path with fewer
// than two points yields the identity signature.
TruncatedSignature signature(const PathSeries& path, int depth);

SignatureStream stream_signature(const PathSeries& path, int depth);

// Accessor for one level (1-based) in the documented flattening order.
const std::vector<double>& flatten_level(const TruncatedSignature& s, int level);

// Concatenation of all levels 1..depth into one vector of flat_size entries.
std::vector<double> flatten_all(const TruncatedSignature& s);

PathSeries scale_path(const PathSeries& path, double lambda);

}  // namespace sighedge::sig
