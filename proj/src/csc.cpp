#include "crnet/csc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "crnet/errors.hpp"
#include "crnet/ops.hpp"

namespace crnet {

void CscProblem::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("csc: lambda must be >= 0");
    if (f.in_channels() != y.channels()) {
        throw ShapeError("csc: dictionary expects " + std::to_string(f.in_channels()) + " signal channels, y has " +
                         std::to_string(y.channels()));
    }
}

Tensor4 csc_synthesize(const FilterBank& f, const Tensor4& z) { return conv2d_adjoint(z, f); }
Tensor4 csc_analyze(const FilterBank& f, const Tensor4& y) { return conv2d_same(y, f); }

double csc_objective(const CscProblem& p, const Tensor4& z) {
    p.validate();
    if (!(z.shape() == p.code_shape())) {
        throw ShapeError("csc_objective: code shape " + z.shape().str() + ", expected " + p.code_shape().str());
    }
    Tensor4 r = p.y - csc_synthesize(p.f, z);
    double l1 = 0.0;
    for (double v : z.data()) l1 += std::abs(v);
    return 0.5 * norm2_squared(r) + p.lambda * l1;
}

LipschitzEstimate estimate_lipschitz(const FilterBank& f, Shape code_shape, double tol, std::size_t max_iters,
                                     std::uint64_t seed) {
    if (!(tol > 0.0)) throw ConfigError("estimate_lipschitz: tol must be positive");
    if (code_shape.c != f.out_channels()) {
        throw ShapeError("estimate_lipschitz: code has " + std::to_string(code_shape.c) + " channels, dictionary " +
                         std::to_string(f.out_channels()));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Tensor4 v(code_shape);
    for (double& x : v.data()) x = normal(rng);
    v *= 1.0 / std::sqrt(norm2_squared(v));

    LipschitzEstimate est;
    double prev = 0.0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        Tensor4 w = csc_analyze(f, csc_synthesize(f, v));
        const double rayleigh = inner(v, w);
        const double wn = std::sqrt(norm2_squared(w));
        est.iterations = it;
        est.L = rayleigh;
        if (wn == 0.0) {
            est.residual = 0.0;
            break;
        }
        Tensor4 res = w;
        res.axpy(-rayleigh, v);
        est.residual = std::sqrt(norm2_squared(res)) / std::max(rayleigh, std::numeric_limits<double>::min());
        v = (1.0 / wn) * std::move(w);
        if (it > 1 && std::abs(rayleigh - prev) <= tol * std::abs(rayleigh)) {
            est.converged = true;
            break;
        }
        prev = rayleigh;
    }
    if (!(est.L > 0.0)) throw ConfigError("estimate_lipschitz: dictionary is identically zero");
    return est;
}

Tensor4 csc_threshold(const Tensor4& a, double theta, bool nonnegative) {
    return nonnegative ? nonneg_soft_threshold(a, theta) : soft_threshold(a, theta);
}

CistaIterator::CistaIterator(const CscProblem& problem, double L)
    : problem_(problem), inv_L_(1.0 / L), theta_(problem.lambda / L), drive_(csc_analyze(problem.f, problem.y)) {
    problem.validate();
    if (!(L > 0.0)) throw ConfigError("cista: L must be positive");
    drive_ *= inv_L_;
}

Tensor4 CistaIterator::apply_s(const Tensor4& z) const {
    Tensor4 out = z;
    out.axpy(-inv_L_, csc_analyze(problem_.f, csc_synthesize(problem_.f, z)));
    return out;
}

CistaState CistaIterator::step(const CistaState& state) const {
    Tensor4 pre = drive_ + apply_s(state.z);
    CistaState next;
    next.z = csc_threshold(pre, theta_, problem_.nonnegative);
    next.iteration = state.iteration + 1;
    next.objective = csc_objective(problem_, next.z);
    return next;
}

CistaState CistaIterator::initial() const {
    CistaState s;
    s.z = csc_threshold(drive_, theta_, problem_.nonnegative);
    s.iteration = 1;
    s.objective = csc_objective(problem_, s.z);
    return s;
}

CistaState cista_step(const CscProblem& p, const CistaState& state, double L) {
    return CistaIterator(p, L).step(state);
}

SolveResult solve(const CscProblem& p, const SolveOptions& opts) {
    p.validate();
    if (opts.max_iters == 0) throw ConfigError("solve: max_iters must be >= 1");
    SolveResult result;
    if (opts.fixed_L > 0.0) {
        result.L = opts.fixed_L;
    } else {
        result.L = opts.lipschitz_margin * estimate_lipschitz(p.f, p.code_shape(), opts.lipschitz_tol).L;
    }
    CistaIterator iter(p, result.L);
    CistaState state = iter.initial();
    result.objective_trace.push_back(state.objective);
    while (state.iteration < opts.max_iters) {
        CistaState next = iter.step(state);
        const double change = std::abs(next.objective - state.objective);
        const double scale = std::max(std::abs(state.objective), std::numeric_limits<double>::min());
        state = std::move(next);
        result.objective_trace.push_back(state.objective);
        if (opts.tol > 0.0 && change / scale < opts.tol) break;
    }
    result.state = std::move(state);
    return result;
}

Eigen::MatrixXd build_convolution_matrix(const FilterBank& f, std::size_t h, std::size_t w, std::size_t max_entries) {
    const std::size_t rows = f.out_channels() * h * w;
    const std::size_t cols = f.in_channels() * h * w;
    if (rows * cols > max_entries) {
        throw ConfigError("build_convolution_matrix: " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " exceeds the dense size guard");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const auto k = static_cast<std::ptrdiff_t>(f.kernel_size());
    const std::ptrdiff_t pad = (k - 1) / 2;
    const auto H = static_cast<std::ptrdiff_t>(h);
    const auto W = static_cast<std::ptrdiff_t>(w);
    for (std::size_t o = 0; o < f.out_channels(); ++o)
        for (std::ptrdiff_t i = 0; i < H; ++i)
            for (std::ptrdiff_t j = 0; j < W; ++j) {
                const auto row = static_cast<Eigen::Index>((static_cast<std::ptrdiff_t>(o) * H + i) * W + j);
                for (std::size_t c = 0; c < f.in_channels(); ++c)
                    for (std::ptrdiff_t u = 0; u < k; ++u)
                        for (std::ptrdiff_t v = 0; v < k; ++v) {
                            const std::ptrdiff_t si = i + u - pad;
                            const std::ptrdiff_t sj = j + v - pad;
                            if (si < 0 || si >= H || sj < 0 || sj >= W) continue;
                            const auto col = static_cast<Eigen::Index>((static_cast<std::ptrdiff_t>(c) * H + si) * W + sj);
                            m(row, col) += f(o, c, static_cast<std::size_t>(u), static_cast<std::size_t>(v));
                        }
            }
    return m;
}

Eigen::VectorXd flatten(const Tensor4& x) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) v(static_cast<Eigen::Index>(k)) = x.data()[k];
    return v;
}

Tensor4 unflatten(const Eigen::VectorXd& v, Shape shape) {
    std::vector<double> data(v.data(), v.data() + v.size());
    return Tensor4(shape, std::move(data));
}

FilterBank delta_kernel(std::size_t channels, std::size_t k) {
    if (k % 2 == 0) throw ConfigError("delta_kernel: kernel size must be odd");
    FilterBank d(channels, channels, k);
    for (std::size_t c = 0; c < channels; ++c) d(c, c, k / 2, k / 2) = 1.0;
    return d;
}

FilterBank cista_s_filter(const FilterBank& f, double L) {
    // F^T F z = conv2d_same(conv2d_same(z, adjoint_bank(f)), f) in the interior.
    Tensor4 gram = compose_filters(f.weights(), adjoint_bank(f.weights()));
    FilterBank s = delta_kernel(f.out_channels(), gram.height());
    s.weights().axpy(-1.0 / L, gram);
    return s;
}

}  // namespace crnet
