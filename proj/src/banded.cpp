#include "parocs/banded.hpp"

#include <algorithm>
#include <cmath>

namespace parocs {

std::vector<double> BandedMatrix::apply(const std::vector<double>& x) const {
    if (factored_) throw Error("BandedMatrix::apply called after factorize");
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const int lo = std::max(0, i - bw_), hi = std::min(n_ - 1, i + bw_);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += a_[idx(i, j)] * x[j];
        y[i] = s;
    }
    return y;
}

void BandedMatrix::factorize() {
    for (int k = 0; k < n_; ++k) {
        const double piv = a_[idx(k, k)];
        if (std::abs(piv) < 1e-300)
            throw SolverFailure("banded factorization: zero pivot", k, piv);
        const int iend = std::min(n_ - 1, k + bw_);
        for (int i = k + 1; i <= iend; ++i) {
            const double m = a_[idx(i, k)] / piv;
            a_[idx(i, k)] = m;
            const int jend = std::min(n_ - 1, k + bw_);
            for (int j = k + 1; j <= jend; ++j) a_[idx(i, j)] -= m * a_[idx(k, j)];
        }
    }
    factored_ = true;
}

std::vector<double> BandedMatrix::solve(const std::vector<double>& rhs) const {
    if (!factored_) throw Error("BandedMatrix::solve called before factorize");
    std::vector<double> x = rhs;
    for (int i = 0; i < n_; ++i) {
        const int lo = std::max(0, i - bw_);
        double s = x[i];
        for (int j = lo; j < i; ++j) s -= a_[idx(i, j)] * x[j];
        x[i] = s;
    }
    for (int i = n_ - 1; i >= 0; --i) {
        const int hi = std::min(n_ - 1, i + bw_);
        double s = x[i];
        for (int j = i + 1; j <= hi; ++j) s -= a_[idx(i, j)] * x[j];
        x[i] = s / a_[idx(i, i)];
    }
    return x;
}

}  // namespace parocs
