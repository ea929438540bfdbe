#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crnet/autodiff.hpp"
#include "crnet/tensor.hpp"

namespace crnet {

/// Pre-upsampling network: consumes the bicubic-interpolated image at target resolution.
struct CrnetAConfig {
    std::size_t channels = 1;  // c
    std::size_t n0 = 128;      // feature width
    std::size_t m0 = 256;      // code width
    std::size_t kernel = 3;    // s
    std::size_t recursions = 25;  // K
    bool global_residual = true;  // output I_y + R; false gives the plain output R

    void validate() const;
};

/// Post-upsampling network with scale-specific pre-processing and upsampling paths.
struct CrnetBConfig {
    std::size_t channels = 3;
    std::size_t n0 = 64;
    std::size_t m0 = 1024;
    std::size_t kernel = 3;
    std::size_t recursions = 25;
    std::vector<std::size_t> scales{2, 3, 4};

    void validate() const;
    bool supports(std::size_t scale) const;
};

struct InitOptions {
    /// Zero the last (HR filter) layer so the untrained network's residual is exactly 0.
    bool zero_residual = false;
};

/// He-normal initialisation, std = sqrt(2 / (in_channels * s * s)), deterministic per seed.
ParameterStore init_crneta(const CrnetAConfig& cfg, std::uint64_t seed, const InitOptions& opts = {});
ParameterStore init_crnetb(const CrnetBConfig& cfg, std::uint64_t seed, const InitOptions& opts = {});

/// s^2 (n0 c + n0^2 + m0 n0 + m0^2 + n0 m0 + c n0).
std::size_t crneta_parameter_count(const CrnetAConfig& cfg);

/// Shapes every CRNet-A parameter must have, in store order.
std::vector<std::pair<std::string, Shape>> crneta_parameter_shapes(const CrnetAConfig& cfg);
std::vector<std::pair<std::string, Shape>> crnetb_parameter_shapes(const CrnetBConfig& cfg);

/// Unrolled CISTA: z_0 = relu(Wl (x) y), z_{k+1} = relu(Wl (x) y + S (x) z_k), K times.
/// Wl (x) y is evaluated once. Returns z_K.
NodeId cista_block(Graph& g, NodeId features, NodeId wl, NodeId s, std::size_t recursions);

struct CrnetANodes {
    NodeId features;  // y
    NodeId code;      // z_K
    NodeId residual;  // R
    NodeId output;    // I_y + R (or R)
};

CrnetANodes build_crneta(Graph& g, const CrnetAConfig& cfg, NodeId input);
Tensor4 crneta_forward(const ParameterStore& params, const CrnetAConfig& cfg, const Tensor4& ilr);

struct CrnetBNodes {
    NodeId head;
    NodeId preprocessed;
    NodeId trunk;
    NodeId upsampled;
    NodeId output;
};

CrnetBNodes build_crnetb(Graph& g, const CrnetBConfig& cfg, NodeId input, std::size_t scale);
Tensor4 crnetb_forward(const ParameterStore& params, const CrnetBConfig& cfg, const Tensor4& lr, std::size_t scale);

enum class ModelKind { crnet_a, crnet_b };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// A configured network together with its parameters.
struct Model {
    ModelKind kind = ModelKind::crnet_a;
    CrnetAConfig a;
    CrnetBConfig b;
    ParameterStore params;

    std::size_t channels() const { return kind == ModelKind::crnet_a ? a.channels : b.channels; }
    /// Adds the network to `g`; `input` is an ILR batch (A) or LR batch (B).
    NodeId build(Graph& g, NodeId input, std::size_t scale) const;
    /// Maps a network input batch to its output.
    Tensor4 run(const Tensor4& input, std::size_t scale) const;
};

}  // namespace crnet
