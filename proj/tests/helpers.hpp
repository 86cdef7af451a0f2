#pragma once

#include "iamcf/norm.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

inline iamcf::Vec v2(double x, double y)
{
    iamcf::Vec v(2);
    v << x, y;
    return v;
}

inline iamcf::Mat diag2(double a, double b)
{
    iamcf::Mat A = iamcf::Mat::Zero(2, 2);
    A(0, 0) = a;
    A(1, 1) = b;
    return A;
}

/// A fixed non-diagonal SPD matrix used across suites.
inline iamcf::Mat tilted()
{
    iamcf::Mat A(2, 2);
    A << 3.0, 0.8, 0.8, 1.5;
    return A;
}

inline iamcf::Vec random_vec(std::mt19937_64& rng, int n, double scale = 3.0)
{
    std::uniform_real_distribution<double> U(-scale, scale);
    iamcf::Vec v(n);
    do {
        for (int i = 0; i < n; ++i) v[i] = U(rng);
    } while (v.norm() < 1e-3);
    return v;
}

/// The three built-in planar families.
inline std::vector<iamcf::MinkowskiNorm> builtin_norms()
{
    return {iamcf::MinkowskiNorm::euclidean(2), iamcf::MinkowskiNorm::ellipsoidal(tilted()),
            iamcf::MinkowskiNorm::lq(2, 4.0, 0.05)};
}

} // namespace testing
