#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crnet/tensor.hpp"

namespace crnet {

/// Convolutional sparse coding instance
///   min_z  1/2 || y - sum_i f_i * z_i ||^2 + lambda * sum_i ||z_i||_1    (optionally z >= 0).
///
/// The dictionary is stored in analysis orientation, m x c x s x s, so that
///   F^T y = conv2d_same(y, f)       (m feature maps from c signal channels)
///   F z   = conv2d_adjoint(z, f)    (true convolution of each z_i with f_i, summed)
struct CscProblem {
    Tensor4 y;
    FilterBank f;
    double lambda = 0.0;
    bool nonnegative = false;

    std::size_t code_channels() const { return f.out_channels(); }
    Shape code_shape() const { return Shape{y.batch(), f.out_channels(), y.height(), y.width()}; }
    /// Throws on negative lambda or a signal/dictionary channel mismatch.
    void validate() const;
};

struct CistaState {
    Tensor4 z;
    std::size_t iteration = 0;
    double objective = 0.0;
};

struct LipschitzEstimate {
    double L = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;  // ||F^T F v - L v|| / L at the final iterate
    bool converged = false;
};

/// F z for a code tensor of shape n x m x h x w.
Tensor4 csc_synthesize(const FilterBank& f, const Tensor4& z);
/// F^T y.
Tensor4 csc_analyze(const FilterBank& f, const Tensor4& y);

double csc_objective(const CscProblem& p, const Tensor4& z);

/// Power iteration on z -> F^T F z over codes of `code_shape`. Returns the largest eigenvalue of F^T F.
LipschitzEstimate estimate_lipschitz(const FilterBank& f, Shape code_shape, double tol,
                                     std::size_t max_iters = 20000, std::uint64_t seed = 7);

/// h_theta: signed soft threshold, or max(a - theta, 0) in nonnegative mode.
Tensor4 csc_threshold(const Tensor4& a, double theta, bool nonnegative);

/// The convolutional ISTA recursion  z_{k+1} = h(W (x) y + S (x) z_k)  with
///   W (x) y = (1/L) F^T y          (computed once)
///   S (x) z = z - (1/L) F^T F z    (identity filter minus flipped-dictionary-times-dictionary)
/// S is applied as the two zero-padded convolutions it is made of, so the recursion reproduces
/// matrix ISTA on the zero-padded operator exactly.
class CistaIterator {
public:
    CistaIterator(const CscProblem& problem, double L);

    const Tensor4& drive() const { return drive_; }
    double threshold() const { return theta_; }
    Tensor4 apply_s(const Tensor4& z) const;
    CistaState step(const CistaState& state) const;
    /// z_0 = h(W (x) y), the step from an all-zero code.
    CistaState initial() const;

private:
    const CscProblem& problem_;
    double inv_L_;
    double theta_;
    Tensor4 drive_;
};

CistaState cista_step(const CscProblem& p, const CistaState& state, double L);

struct SolveOptions {
    std::size_t max_iters = 500;
    double tol = 0.0;             // stop when |delta objective| / objective < tol; 0 disables
    double lipschitz_margin = 1.05;
    double lipschitz_tol = 1e-10;
    double fixed_L = 0.0;         // > 0 bypasses power iteration
};

struct SolveResult {
    CistaState state;
    double L = 0.0;
    std::vector<double> objective_trace;  // objective after each iteration, starting with z_0
};

SolveResult solve(const CscProblem& p, const SolveOptions& opts = {});

/// Dense matrix of x -> conv2d_same(x, f) on a single h x w image, rows (o, i, j) and columns
/// (c, i, j) in row-major order. Test utility; refuses more than `max_entries` entries.
Eigen::MatrixXd build_convolution_matrix(const FilterBank& f, std::size_t h, std::size_t w,
                                         std::size_t max_entries = 50'000'000);

/// Row-major flattening of a 1 x c x h x w tensor, matching build_convolution_matrix.
Eigen::VectorXd flatten(const Tensor4& x);
Tensor4 unflatten(const Eigen::VectorXd& v, Shape shape);

/// Per-channel identity filter: 1 at the spatial centre of its own channel.
FilterBank delta_kernel(std::size_t channels, std::size_t k);

/// Single (2s-1)-tap filter n - (1/L) flip(f) (x) f. Matches S (x) z away from the border only;
/// CistaIterator::apply_s is the exact operator.
FilterBank cista_s_filter(const FilterBank& f, double L);

}  // namespace crnet
