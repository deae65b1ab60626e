#pragma once

#include <vector>

#include "parocs/errors.hpp"

namespace parocs {

/// Symmetric-bandwidth banded matrix with in-place LU (no pivoting; every
/// matrix factored here is strictly diagonally dominant with positive
/// diagonal).  Bandwidth 1 reproduces the Thomas algorithm.
class BandedMatrix {
public:
    BandedMatrix(int n, int bw)
        : n_(n), bw_(bw), a_(static_cast<std::size_t>(n) * (2 * bw + 1), 0.0) {}

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

    double& operator()(int i, int j) { return a_[idx(i, j)]; }
    double operator()(int i, int j) const {
        if (j < i - bw_ || j > i + bw_) return 0.0;
        return a_[idx(i, j)];
    }

    void add(int i, int j, double v) { a_[idx(i, j)] += v; }

    std::vector<double> apply(const std::vector<double>& x) const;

    /// Factor in place.  Throws SolverFailure on a (near-)zero pivot.
    void factorize();
    /// Solve with the factored matrix.
    std::vector<double> solve(const std::vector<double>& rhs) const;

    bool factored() const { return factored_; }

private:
    std::size_t idx(int i, int j) const {
        // row-major band storage: entry (i, j) lives at column offset j-i+bw
        return static_cast<std::size_t>(i) * (2 * bw_ + 1) + (j - i + bw_);
    }
    int n_;
    int bw_;
    std::vector<double> a_;
    bool factored_ = false;
};

}  // namespace parocs
