#include "crnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "crnet/errors.hpp"

namespace crnet {

namespace {

Shape bank(std::size_t out, std::size_t in, std::size_t k) { return Shape{out, in, k, k}; }

void check_common(std::size_t c, std::size_t n0, std::size_t m0, std::size_t k, std::size_t recursions) {
    if (c == 0 || n0 == 0 || m0 == 0) throw ConfigError("channel widths must be >= 1");
    if (k % 2 == 0) throw ConfigError("kernel size must be odd");
    if (recursions == 0) throw ConfigError("recursions K must be >= 1");
}

std::string scale_tag(std::size_t s) { return "x" + std::to_string(s); }

ParameterStore he_init(const std::vector<std::pair<std::string, Shape>>& shapes, std::uint64_t seed,
                       const std::string& zero_name) {
    std::mt19937_64 rng(seed);
    ParameterStore store;
    for (const auto& [name, shape] : shapes) {
        Tensor4 t(shape);
        if (name != zero_name) {
            const double stddev = std::sqrt(2.0 / static_cast<double>(shape.c * shape.h * shape.w));
            std::normal_distribution<double> normal(0.0, stddev);
            for (double& v : t.data()) v = normal(rng);
        }
        store.add(name, std::move(t));
    }
    return store;
}

}  // namespace

void CrnetAConfig::validate() const { check_common(channels, n0, m0, kernel, recursions); }

void CrnetBConfig::validate() const {
    check_common(channels, n0, m0, kernel, recursions);
    if (scales.empty()) throw ConfigError("CRNet-B needs at least one scale");
    for (std::size_t s : scales) {
        if (s < 2 || s > 4) throw ConfigError("CRNet-B scales must be in {2,3,4}, got " + std::to_string(s));
    }
    std::vector<std::size_t> sorted = scales;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("duplicate CRNet-B scale");
}

bool CrnetBConfig::supports(std::size_t scale) const {
    return std::find(scales.begin(), scales.end(), scale) != scales.end();
}

std::vector<std::pair<std::string, Shape>> crneta_parameter_shapes(const CrnetAConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.kernel;
    return {
        {"F0", bank(cfg.n0, cfg.channels, k)}, {"F1", bank(cfg.n0, cfg.n0, k)},
        {"Wl", bank(cfg.m0, cfg.n0, k)},       {"S", bank(cfg.m0, cfg.m0, k)},
        {"Wh", bank(cfg.n0, cfg.m0, k)},       {"H", bank(cfg.channels, cfg.n0, k)},
    };
}

std::vector<std::pair<std::string, Shape>> crnetb_parameter_shapes(const CrnetBConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.kernel;
    const std::size_t n0 = cfg.n0;
    const std::size_t c = cfg.channels;
    std::vector<std::size_t> scales = cfg.scales;
    std::sort(scales.begin(), scales.end());

    std::vector<std::pair<std::string, Shape>> out;
    out.emplace_back("head", bank(n0, c, k));
    for (std::size_t s : scales) {
        out.emplace_back("pre_" + scale_tag(s) + ".conv1", bank(n0, n0, k));
        out.emplace_back("pre_" + scale_tag(s) + ".conv2", bank(n0, n0, k));
    }
    out.emplace_back("F0", bank(n0, n0, k));
    out.emplace_back("F1", bank(n0, n0, k));
    out.emplace_back("Wl", bank(cfg.m0, n0, k));
    out.emplace_back("S", bank(cfg.m0, cfg.m0, k));
    out.emplace_back("Wh", bank(n0, cfg.m0, k));
    out.emplace_back("H", bank(n0, n0, k));
    for (std::size_t s : scales) {
        if (s == 4) {
            out.emplace_back("up_x4.conv1", bank(c * 4, n0, k));
            out.emplace_back("up_x4.conv2", bank(c * 4, c, k));
        } else {
            out.emplace_back("up_" + scale_tag(s) + ".conv", bank(c * s * s, n0, k));
        }
    }
    out.emplace_back("tail", bank(c, c, k));
    return out;
}

ParameterStore init_crneta(const CrnetAConfig& cfg, std::uint64_t seed, const InitOptions& opts) {
    return he_init(crneta_parameter_shapes(cfg), seed, opts.zero_residual ? "H" : "");
}

ParameterStore init_crnetb(const CrnetBConfig& cfg, std::uint64_t seed, const InitOptions& opts) {
    return he_init(crnetb_parameter_shapes(cfg), seed, opts.zero_residual ? "H" : "");
}

std::size_t crneta_parameter_count(const CrnetAConfig& cfg) {
    const std::size_t s2 = cfg.kernel * cfg.kernel;
    const std::size_t n0 = cfg.n0, m0 = cfg.m0, c = cfg.channels;
    return s2 * (n0 * c + n0 * n0 + m0 * n0 + m0 * m0 + n0 * m0 + c * n0);
}

NodeId cista_block(Graph& g, NodeId features, NodeId wl, NodeId s, std::size_t recursions) {
    if (recursions == 0) throw ConfigError("cista_block: K must be >= 1");
    const NodeId drive = g.conv2d(features, wl);
    NodeId z = g.relu(drive);
    for (std::size_t k = 0; k < recursions; ++k) z = g.relu(g.add(drive, g.conv2d(z, s)));
    return z;
}

CrnetANodes build_crneta(Graph& g, const CrnetAConfig& cfg, NodeId input) {
    cfg.validate();
    CrnetANodes nodes{};
    const NodeId f0 = g.parameter("F0");
    const NodeId f1 = g.parameter("F1");
    const NodeId wl = g.parameter("Wl");
    const NodeId s = g.parameter("S");
    const NodeId wh = g.parameter("Wh");
    const NodeId h = g.parameter("H");
    nodes.features = g.relu(g.conv2d(g.relu(g.conv2d(input, f0)), f1));
    nodes.code = cista_block(g, nodes.features, wl, s, cfg.recursions);
    nodes.residual = g.conv2d(g.relu(g.conv2d(nodes.code, wh)), h);
    nodes.output = cfg.global_residual ? g.add(input, nodes.residual) : nodes.residual;
    g.set_output(nodes.output);
    return nodes;
}

Tensor4 crneta_forward(const ParameterStore& params, const CrnetAConfig& cfg, const Tensor4& ilr) {
    if (ilr.channels() != cfg.channels) {
        throw ShapeError("crneta_forward: input has " + std::to_string(ilr.channels()) + " channels, model expects " +
                         std::to_string(cfg.channels));
    }
    Graph g;
    const NodeId in = g.input("input");
    build_crneta(g, cfg, in);
    return g.forward({{"input", ilr}}, params);
}

CrnetBNodes build_crnetb(Graph& g, const CrnetBConfig& cfg, NodeId input, std::size_t scale) {
    cfg.validate();
    if (!cfg.supports(scale)) throw ConfigError("CRNet-B has no path for scale " + std::to_string(scale));
    const std::string tag = scale_tag(scale);
    CrnetBNodes nodes{};

    nodes.head = g.conv2d(input, g.parameter("head"));

    // Pre-activation residual unit.
    const NodeId pre1 = g.parameter("pre_" + tag + ".conv1");
    const NodeId pre2 = g.parameter("pre_" + tag + ".conv2");
    const NodeId branch = g.conv2d(g.relu(g.conv2d(g.relu(nodes.head), pre1)), pre2);
    nodes.preprocessed = g.add(nodes.head, branch);

    // CRNet-A trunk at LR feature resolution, skip taken from the pre-processing output.
    const NodeId f0 = g.parameter("F0");
    const NodeId f1 = g.parameter("F1");
    const NodeId y = g.relu(g.conv2d(g.relu(g.conv2d(nodes.preprocessed, f0)), f1));
    const NodeId z = cista_block(g, y, g.parameter("Wl"), g.parameter("S"), cfg.recursions);
    const NodeId r = g.conv2d(g.relu(g.conv2d(z, g.parameter("Wh"))), g.parameter("H"));
    nodes.trunk = g.add(nodes.preprocessed, r);

    if (scale == 4) {
        const NodeId half = g.pixel_shuffle(g.conv2d(nodes.trunk, g.parameter("up_x4.conv1")), 2);
        nodes.upsampled = g.pixel_shuffle(g.conv2d(half, g.parameter("up_x4.conv2")), 2);
    } else {
        nodes.upsampled = g.pixel_shuffle(g.conv2d(nodes.trunk, g.parameter("up_" + tag + ".conv")), scale);
    }
    nodes.output = g.conv2d(nodes.upsampled, g.parameter("tail"));
    g.set_output(nodes.output);
    return nodes;
}

Tensor4 crnetb_forward(const ParameterStore& params, const CrnetBConfig& cfg, const Tensor4& lr, std::size_t scale) {
    if (lr.channels() != cfg.channels) {
        throw ShapeError("crnetb_forward: input has " + std::to_string(lr.channels()) + " channels, model expects " +
                         std::to_string(cfg.channels));
    }
    Graph g;
    const NodeId in = g.input("input");
    build_crnetb(g, cfg, in, scale);
    return g.forward({{"input", lr}}, params);
}

const char* model_kind_name(ModelKind kind) { return kind == ModelKind::crnet_a ? "crnet-a" : "crnet-b"; }

ModelKind parse_model_kind(const std::string& name) {
    if (name == "crnet-a" || name == "a" || name == "A") return ModelKind::crnet_a;
    if (name == "crnet-b" || name == "b" || name == "B") return ModelKind::crnet_b;
    throw ConfigError("unknown model kind '" + name + "'");
}

NodeId Model::build(Graph& g, NodeId input, std::size_t scale) const {
    if (kind == ModelKind::crnet_a) return build_crneta(g, a, input).output;
    return build_crnetb(g, b, input, scale).output;
}

Tensor4 Model::run(const Tensor4& input, std::size_t scale) const {
    if (kind == ModelKind::crnet_a) return crneta_forward(params, a, input);
    return crnetb_forward(params, b, input, scale);
}

}  // namespace crnet
