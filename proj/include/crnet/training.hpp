#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "crnet/autodiff.hpp"
#include "crnet/models.hpp"
#include "crnet/ops.hpp"
#include "crnet/tensor.hpp"

namespace crnet {

using Rng = std::mt19937_64;

// --- data ----------------------------------------------------------------------

struct PatchPair {
    Tensor4 input;   // ILR patch (CRNet-A) or LR patch (CRNet-B)
    Tensor4 target;  // HR patch
    std::size_t scale = 1;
};

/// Number of patch positions along an axis of length `len`.
std::size_t patch_positions(std::size_t len, std::size_t patch, std::size_t stride);

/// Cuts aligned training pairs from HR images (each 1 x c x H x W).
/// HR is cropped to a multiple of `scale`, LR = bicubic(HR, 1/scale). For CRNet-A the input is
/// ILR = bicubic(LR, scale) tiled like the HR image; for CRNet-B the input is the LR tile of size
/// patch/scale. `patch` and `stride` are in HR pixels.
std::vector<PatchPair> make_patch_pairs(const std::vector<Tensor4>& images, std::size_t scale, std::size_t patch,
                                        std::size_t stride, ModelKind kind);

/// One random dihedral draw (horizontal flip, then k quarter turns), applied to both tensors.
PatchPair augment(const PatchPair& pair, Rng& rng);
PatchPair augment_with(const PatchPair& pair, Dihedral t);

/// Picks the training scale for each minibatch uniformly from `scales`.
class ScaleSchedule {
public:
    ScaleSchedule(std::vector<std::size_t> scales, std::uint64_t seed);
    std::size_t next();
    const std::vector<std::size_t>& scales() const { return scales_; }

private:
    std::vector<std::size_t> scales_;
    Rng rng_;
};

/// Converts images to the model's channel layout (RGB -> Y for single-channel models).
std::vector<Tensor4> to_model_channels(const std::vector<Tensor4>& images, std::size_t channels);

/// Deterministic piecewise-smooth test images (gradients, discs, bars, texture) in [0,1].
std::vector<Tensor4> synthetic_images(std::size_t count, std::size_t height, std::size_t width, std::size_t channels,
                                      std::uint64_t seed);

// --- configuration -------------------------------------------------------------------

enum class LossKind { l2, l1 };
enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    ModelKind model = ModelKind::crnet_a;
    CrnetAConfig a;
    CrnetBConfig b;

    LossKind loss = LossKind::l2;
    OptimizerKind optimizer = OptimizerKind::sgd;
    double lr = 0.1;
    double lr_factor = 0.1;
    std::size_t lr_period = 10;  // epochs; 0 keeps lr constant
    double momentum = 0.9;
    double weight_decay = 0.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Global-norm clipping threshold; 0 disables.
    double grad_clip = 0.4;
    /// Divide grad_clip by the current learning rate (adjustable clipping).
    bool clip_scale_by_lr = true;

    std::size_t batch_size = 64;
    std::size_t epochs = 35;
    std::size_t max_steps = 0;  // 0 = no limit
    std::size_t patch = 41;     // HR patch size
    std::size_t stride = 41;
    std::vector<std::size_t> scales{2, 3, 4};
    bool augment = true;
    std::uint64_t seed = 1;

    std::filesystem::path data_dir;
    std::size_t synthetic_count = 0;  // > 0 trains on generated images instead of data_dir
    std::size_t synthetic_size = 64;
    std::filesystem::path output_dir = "runs";
    std::size_t checkpoint_every = 1;  // epochs; 0 = only at the end

    /// The pre-upsampling recipe: SGD, lr 0.1 divided by 10 every 10 epochs, L2, 35 epochs.
    static TrainConfig recipe_a();
    /// The post-upsampling recipe: Adam, lr 1e-4 halved every 200 epochs, L1, 800 epochs.
    static TrainConfig recipe_b();

    void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Keys not given keep the defaults of the
/// recipe selected by the `model` key (recipe A when absent). Unknown keys are rejected.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::filesystem::path& path);
/// Serialises every key understood by parse_train_config.
std::string format_train_config(const TrainConfig& cfg);

/// lr0 * factor ^ floor(epoch / period).
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

// --- optimisation -------------------------------------------------------------------

struct OptimizerState {
    std::size_t steps = 0;
    TensorMap first;   // momentum buffer (sgd) or first moment (adam)
    TensorMap second;  // second moment (adam)
};

/// Scales `grads` in place so their joint L2 norm is at most `max_norm`. Returns the norm before clipping.
double clip_global_norm(TensorMap& grads, double max_norm);

/// One update of every trainable parameter that has a gradient.
void optimizer_update(ParameterStore& params, const TensorMap& grads, OptimizerState& state, const TrainConfig& cfg,
                      double lr);

struct Batch {
    Tensor4 input;
    Tensor4 target;
    std::size_t scale = 1;
};

Batch make_batch(const std::vector<PatchPair>& pairs);

struct StepResult {
    double loss = 0.0;
    double grad_norm = 0.0;
};

/// forward -> loss -> backward -> optional clip -> update. Throws DivergenceError on a non-finite loss.
StepResult train_step(Model& model, const Batch& batch, OptimizerState& state, const TrainConfig& cfg, double lr);

/// Loss of the model on a batch without updating anything.
double evaluate_loss(const Model& model, const Batch& batch, LossKind loss);

struct LossRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
};

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& trace);

Model make_model(const TrainConfig& cfg);

struct TrainHooks {
    std::function<void(const LossRecord&)> on_step;
    /// Called after each completed epoch (1-based count).
    std::function<void(std::size_t epoch, const Model&)> on_epoch;
};

/// Runs the full loop over pre-extracted patches. Epoch = one pass over the patch list
/// (for CRNet-B: over the patches of every scale, each batch drawn from one scale).
std::vector<LossRecord> train(Model& model, const std::vector<Tensor4>& hr_images, const TrainConfig& cfg,
                              const TrainHooks& hooks = {});

}  // namespace crnet
