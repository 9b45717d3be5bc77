#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sighedge/autodiff/tape.hpp"
#include "sighedge/core/rng.hpp"

namespace sighedge::nn {

// Flat, enumerable parameter collection. Every scalar has a stable flat
// index (registration order), which the gradient checks rely on.
template <typename T>
class ParamStore {
public:
    struct Seg {
        std::string name;
        size_t offset;
        int rows, cols;
    };

    int add(const std::string& name, int rows, int cols) {
        Seg s{name, theta_.size(), rows, cols};
        theta_.resize(theta_.size() + static_cast<size_t>(rows) * cols, T(0));
        grad_.resize(theta_.size(), T(0));
        segs_.push_back(s);
        return static_cast<int>(segs_.size()) - 1;
    }

    size_t size() const { return theta_.size(); }
    std::vector<T>& theta() { return theta_; }
    const std::vector<T>& theta() const { return theta_; }
    std::vector<T>& grad() { return grad_; }
    const std::vector<Seg>& segments() const { return segs_; }

    void zero_grad() { std::fill(grad_.begin(), grad_.end(), T(0)); }

    ad::Var leaf(ad::Tape<T>& tape, int seg) const {
        const Seg& s = segs_[seg];
        return tape.param(s.rows, s.cols, theta_.data() + s.offset, grad_sink(seg));
    }

    void init_glorot(Rng& rng, int seg) {
        const Seg& s = segs_[seg];
        double bound = std::sqrt(6.0 / (s.rows + s.cols));
        for (size_t i = 0; i < static_cast<size_t>(s.rows) * s.cols; ++i)
            theta_[s.offset + i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    }

    void init_const(int seg, T v) {
        const Seg& s = segs_[seg];
        for (size_t i = 0; i < static_cast<size_t>(s.rows) * s.cols; ++i) theta_[s.offset + i] = v;
    }

private:
    T* grad_sink(int seg) const {
        return const_cast<T*>(grad_.data()) + segs_[seg].offset;
    }

    std::vector<T> theta_;
    mutable std::vector<T> grad_;
    std::vector<Seg> segs_;
};

}  // namespace sighedge::nn
