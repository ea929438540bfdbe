#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "crnet/tensor.hpp"

namespace crnet::test {

inline Tensor4 random_tensor(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Tensor4 t(s);
    for (double& v : t.data()) v = d(rng);
    return t;
}

inline FilterBank random_bank(std::size_t out, std::size_t in, std::size_t k, std::mt19937_64& rng) {
    return FilterBank(random_tensor(Shape{out, in, k, k}, rng));
}

/// Direct zero-padded cross-correlation with explicit bounds checks.
inline Tensor4 naive_conv(const Tensor4& x, const Tensor4& w) {
    const auto N = x.batch(), C = x.channels(), H = x.height(), W = x.width();
    const auto O = w.batch(), K = w.height();
    const long p = static_cast<long>(K - 1) / 2;
    Tensor4 out(Shape{N, O, H, W});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t o = 0; o < O; ++o)
            for (long i = 0; i < static_cast<long>(H); ++i)
                for (long j = 0; j < static_cast<long>(W); ++j) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < C; ++c)
                        for (long u = 0; u < static_cast<long>(K); ++u)
                            for (long v = 0; v < static_cast<long>(K); ++v) {
                                const long si = i + u - p, sj = j + v - p;
                                if (si < 0 || sj < 0 || si >= static_cast<long>(H) || sj >= static_cast<long>(W)) continue;
                                acc += w(o, c, u, v) * x(n, c, si, sj);
                            }
                    out(n, o, i, j) = acc;
                }
    return out;
}

inline std::filesystem::path temp_path(const std::string& name) {
#ifdef CRNET_TEST_TMPDIR
    std::filesystem::path dir = CRNET_TEST_TMPDIR;
#else
    std::filesystem::path dir = std::filesystem::temp_directory_path();
#endif
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace crnet::test
