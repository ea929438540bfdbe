#include "crnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "crnet/color.hpp"
#include "crnet/errors.hpp"
#include "crnet/ops.hpp"
#include "crnet/resize.hpp"

namespace crnet {

// --- data ----------------------------------------------------------------------

std::size_t patch_positions(std::size_t len, std::size_t patch, std::size_t stride) {
    if (patch == 0 || stride == 0) throw ConfigError("patch and stride must be >= 1");
    if (len < patch) return 0;
    return (len - patch) / stride + 1;
}

std::vector<PatchPair> make_patch_pairs(const std::vector<Tensor4>& images, std::size_t scale, std::size_t patch,
                                        std::size_t stride, ModelKind kind) {
    if (scale < 1 || scale > 4) throw ConfigError("scale must be in 1..4");
    if (patch == 0 || stride == 0) throw ConfigError("patch and stride must be >= 1");
    if (kind == ModelKind::crnet_b && (patch % scale != 0 || stride % scale != 0)) {
        throw ConfigError("CRNet-B patch and stride must be multiples of the scale");
    }
    std::vector<PatchPair> pairs;
    for (const Tensor4& raw : images) {
        if (raw.batch() != 1) throw ShapeError("make_patch_pairs expects single images");
        const Tensor4 hr = modcrop(raw, scale);
        if (hr.height() < patch || hr.width() < patch) {
            throw ConfigError("image " + hr.shape().str() + " is smaller than patch " + std::to_string(patch));
        }
        const Tensor4 lr = bicubic_resize(hr, Ratio::down(scale));
        const Tensor4 input_plane = kind == ModelKind::crnet_a ? bicubic_resize(lr, Ratio::up(scale)) : lr;
        const std::size_t rows = patch_positions(hr.height(), patch, stride);
        const std::size_t cols = patch_positions(hr.width(), patch, stride);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t top = r * stride;
                const std::size_t left = c * stride;
                PatchPair p;
                p.scale = scale;
                p.target = crop(hr, top, left, patch, patch);
                if (kind == ModelKind::crnet_a) {
                    p.input = crop(input_plane, top, left, patch, patch);
                } else {
                    p.input = crop(input_plane, top / scale, left / scale, patch / scale, patch / scale);
                }
                pairs.push_back(std::move(p));
            }
    }
    return pairs;
}

PatchPair augment_with(const PatchPair& pair, Dihedral t) {
    return PatchPair{apply_dihedral(pair.input, t), apply_dihedral(pair.target, t), pair.scale};
}

PatchPair augment(const PatchPair& pair, Rng& rng) {
    std::uniform_int_distribution<int> turns(0, 3);
    std::bernoulli_distribution flip(0.5);
    Dihedral t;
    t.flip = flip(rng);
    t.quarter_turns = turns(rng);
    return augment_with(pair, t);
}

ScaleSchedule::ScaleSchedule(std::vector<std::size_t> scales, std::uint64_t seed)
    : scales_(std::move(scales)), rng_(seed) {
    if (scales_.empty()) throw ConfigError("scale schedule needs at least one scale");
}

std::size_t ScaleSchedule::next() {
    if (scales_.size() == 1) return scales_.front();
    std::uniform_int_distribution<std::size_t> pick(0, scales_.size() - 1);
    return scales_[pick(rng_)];
}

std::vector<Tensor4> to_model_channels(const std::vector<Tensor4>& images, std::size_t channels) {
    std::vector<Tensor4> out;
    out.reserve(images.size());
    for (const Tensor4& im : images) {
        if (im.channels() == channels) {
            out.push_back(im);
        } else if (channels == 1 && im.channels() == 3) {
            out.push_back(rgb_to_ycbcr_y(im));
        } else {
            throw ConfigError("cannot feed a " + std::to_string(im.channels()) + "-channel image to a " +
                              std::to_string(channels) + "-channel model");
        }
    }
    return out;
}

std::vector<Tensor4> synthetic_images(std::size_t count, std::size_t height, std::size_t width, std::size_t channels,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Tensor4> out;
    out.reserve(count);
    const double H = static_cast<double>(height);
    const double W = static_cast<double>(width);
    for (std::size_t k = 0; k < count; ++k) {
        Tensor4 im(Shape{1, channels, height, width});
        const double base = 0.2 + 0.4 * unit(rng);
        const double gx = (unit(rng) - 0.5) * 0.4;
        const double gy = (unit(rng) - 0.5) * 0.4;
        const double freq = 0.3 + 1.2 * unit(rng);
        const double angle = unit(rng) * 3.14159265358979;
        const double amp = 0.03 + 0.07 * unit(rng);
        struct Disc {
            double ci, cj, r, v;
        };
        std::vector<Disc> discs(3 + static_cast<std::size_t>(unit(rng) * 3));
        for (auto& d : discs) d = {unit(rng) * H, unit(rng) * W, (0.08 + 0.25 * unit(rng)) * std::min(H, W), unit(rng) - 0.5};
        struct Bar {
            double i0, j0, i1, j1, v;
        };
        std::vector<Bar> bars(2 + static_cast<std::size_t>(unit(rng) * 3));
        for (auto& b : bars) {
            const double i0 = unit(rng) * H, j0 = unit(rng) * W;
            b = {i0, j0, i0 + (0.1 + 0.4 * unit(rng)) * H, j0 + (0.05 + 0.3 * unit(rng)) * W, unit(rng) - 0.5};
        }
        std::vector<double> tint(channels);
        for (auto& t : tint) t = channels == 1 ? 0.0 : (unit(rng) - 0.5) * 0.2;

        for (std::size_t i = 0; i < height; ++i)
            for (std::size_t j = 0; j < width; ++j) {
                const double y = static_cast<double>(i), x = static_cast<double>(j);
                double v = base + gx * x / W + gy * y / H;
                v += amp * std::sin(freq * (x * std::cos(angle) + y * std::sin(angle)));
                for (const auto& d : discs)
                    if ((y - d.ci) * (y - d.ci) + (x - d.cj) * (x - d.cj) < d.r * d.r) v += 0.5 * d.v;
                for (const auto& b : bars)
                    if (y >= b.i0 && y < b.i1 && x >= b.j0 && x < b.j1) v += 0.4 * b.v;
                for (std::size_t c = 0; c < channels; ++c) im(0, c, i, j) = std::clamp(v + tint[c], 0.0, 1.0);
            }
        out.push_back(std::move(im));
    }
    return out;
}

// --- configuration -------------------------------------------------------------------

TrainConfig TrainConfig::recipe_a() { return TrainConfig{}; }

TrainConfig TrainConfig::recipe_b() {
    TrainConfig c;
    c.model = ModelKind::crnet_b;
    c.loss = LossKind::l1;
    c.optimizer = OptimizerKind::adam;
    c.lr = 1e-4;
    c.lr_factor = 0.5;
    c.lr_period = 200;
    c.grad_clip = 0.0;
    c.clip_scale_by_lr = false;
    c.batch_size = 16;
    c.epochs = 800;
    c.patch = 48;
    c.stride = 48;
    return c;
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (scales.empty()) throw ConfigError("at least one training scale is required");
    for (std::size_t s : scales)
        if (s < 2 || s > 4) throw ConfigError("training scales must be in {2,3,4}");
    if (patch == 0 || stride == 0) throw ConfigError("patch and stride must be >= 1");
    if (grad_clip < 0.0) throw ConfigError("grad_clip must be >= 0");
    if (model == ModelKind::crnet_a) {
        a.validate();
    } else {
        CrnetBConfig check = b;
        check.scales = scales;
        check.validate();
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    }
}

std::size_t to_size(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d < 0 || d != std::floor(d)) throw ConfigError("config key '" + key + "': '" + v + "' is not a count");
    return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_size(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
    return out;
}

}  // namespace

TrainConfig parse_train_config(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    TrainConfig cfg = TrainConfig::recipe_a();
    for (const auto& [k, v] : entries)
        if (k == "model" && parse_model_kind(v) == ModelKind::crnet_b) cfg = TrainConfig::recipe_b();

    for (const auto& [k, v] : entries) {
        const bool is_a = cfg.model == ModelKind::crnet_a;
        if (k == "model") continue;
        else if (k == "channels") (is_a ? cfg.a.channels : cfg.b.channels) = to_size(k, v);
        else if (k == "n0") (is_a ? cfg.a.n0 : cfg.b.n0) = to_size(k, v);
        else if (k == "m0") (is_a ? cfg.a.m0 : cfg.b.m0) = to_size(k, v);
        else if (k == "kernel") (is_a ? cfg.a.kernel : cfg.b.kernel) = to_size(k, v);
        else if (k == "recursions") (is_a ? cfg.a.recursions : cfg.b.recursions) = to_size(k, v);
        else if (k == "global_residual") cfg.a.global_residual = to_bool(k, v);
        else if (k == "scales") cfg.scales = to_list(k, v);
        else if (k == "loss") {
            if (v == "l2" || v == "L2") cfg.loss = LossKind::l2;
            else if (v == "l1" || v == "L1") cfg.loss = LossKind::l1;
            else throw ConfigError("loss must be l2 or l1");
        } else if (k == "optimizer") {
            if (v == "sgd") cfg.optimizer = OptimizerKind::sgd;
            else if (v == "adam") cfg.optimizer = OptimizerKind::adam;
            else throw ConfigError("optimizer must be sgd or adam");
        }
        else if (k == "lr") cfg.lr = to_double(k, v);
        else if (k == "lr_factor") cfg.lr_factor = to_double(k, v);
        else if (k == "lr_period") cfg.lr_period = to_size(k, v);
        else if (k == "momentum") cfg.momentum = to_double(k, v);
        else if (k == "weight_decay") cfg.weight_decay = to_double(k, v);
        else if (k == "adam_beta1") cfg.adam_beta1 = to_double(k, v);
        else if (k == "adam_beta2") cfg.adam_beta2 = to_double(k, v);
        else if (k == "adam_eps") cfg.adam_eps = to_double(k, v);
        else if (k == "grad_clip") cfg.grad_clip = to_double(k, v);
        else if (k == "clip_scale_by_lr") cfg.clip_scale_by_lr = to_bool(k, v);
        else if (k == "batch_size") cfg.batch_size = to_size(k, v);
        else if (k == "epochs") cfg.epochs = to_size(k, v);
        else if (k == "max_steps") cfg.max_steps = to_size(k, v);
        else if (k == "patch") cfg.patch = to_size(k, v);
        else if (k == "stride") cfg.stride = to_size(k, v);
        else if (k == "augment") cfg.augment = to_bool(k, v);
        else if (k == "seed") cfg.seed = to_size(k, v);
        else if (k == "data_dir") cfg.data_dir = v;
        else if (k == "synthetic_count") cfg.synthetic_count = to_size(k, v);
        else if (k == "synthetic_size") cfg.synthetic_size = to_size(k, v);
        else if (k == "output_dir") cfg.output_dir = v;
        else if (k == "checkpoint_every") cfg.checkpoint_every = to_size(k, v);
        else throw ConfigError("unknown config key '" + k + "'");
    }
    cfg.b.scales = cfg.scales;
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_train_config(in);
}

std::string format_train_config(const TrainConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    const bool is_a = cfg.model == ModelKind::crnet_a;
    os << "model = " << model_kind_name(cfg.model) << "\n";
    os << "channels = " << (is_a ? cfg.a.channels : cfg.b.channels) << "\n";
    os << "n0 = " << (is_a ? cfg.a.n0 : cfg.b.n0) << "\n";
    os << "m0 = " << (is_a ? cfg.a.m0 : cfg.b.m0) << "\n";
    os << "kernel = " << (is_a ? cfg.a.kernel : cfg.b.kernel) << "\n";
    os << "recursions = " << (is_a ? cfg.a.recursions : cfg.b.recursions) << "\n";
    os << "global_residual = " << (cfg.a.global_residual ? "true" : "false") << "\n";
    os << "scales = ";
    for (std::size_t k = 0; k < cfg.scales.size(); ++k) os << (k ? "," : "") << cfg.scales[k];
    os << "\n";
    os << "loss = " << (cfg.loss == LossKind::l2 ? "l2" : "l1") << "\n";
    os << "optimizer = " << (cfg.optimizer == OptimizerKind::sgd ? "sgd" : "adam") << "\n";
    os << "lr = " << cfg.lr << "\n";
    os << "lr_factor = " << cfg.lr_factor << "\n";
    os << "lr_period = " << cfg.lr_period << "\n";
    os << "momentum = " << cfg.momentum << "\n";
    os << "weight_decay = " << cfg.weight_decay << "\n";
    os << "adam_beta1 = " << cfg.adam_beta1 << "\n";
    os << "adam_beta2 = " << cfg.adam_beta2 << "\n";
    os << "adam_eps = " << cfg.adam_eps << "\n";
    os << "grad_clip = " << cfg.grad_clip << "\n";
    os << "clip_scale_by_lr = " << (cfg.clip_scale_by_lr ? "true" : "false") << "\n";
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "epochs = " << cfg.epochs << "\n";
    os << "max_steps = " << cfg.max_steps << "\n";
    os << "patch = " << cfg.patch << "\n";
    os << "stride = " << cfg.stride << "\n";
    os << "augment = " << (cfg.augment ? "true" : "false") << "\n";
    os << "seed = " << cfg.seed << "\n";
    if (!cfg.data_dir.empty()) os << "data_dir = " << cfg.data_dir.string() << "\n";
    os << "synthetic_count = " << cfg.synthetic_count << "\n";
    os << "synthetic_size = " << cfg.synthetic_size << "\n";
    os << "output_dir = " << cfg.output_dir.string() << "\n";
    os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    return os.str();
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
    if (cfg.lr_period == 0) return cfg.lr;
    return cfg.lr * std::pow(cfg.lr_factor, static_cast<double>(epoch / cfg.lr_period));
}

// --- optimisation -------------------------------------------------------------------

double clip_global_norm(TensorMap& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, g] : grads) sq += norm2_squared(g);
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double factor = max_norm / norm;
        for (auto& [name, g] : grads) g *= factor;
    }
    return norm;
}

void optimizer_update(ParameterStore& params, const TensorMap& grads, OptimizerState& state, const TrainConfig& cfg,
                      double lr) {
    ++state.steps;
    const double t = static_cast<double>(state.steps);
    for (Parameter& p : params) {
        if (!p.trainable) continue;
        auto git = grads.find(p.name);
        if (git == grads.end()) continue;
        Tensor4 g = git->second;
        if (cfg.weight_decay != 0.0) g.axpy(cfg.weight_decay, p.tensor);

        auto [mit, fresh] = state.first.try_emplace(p.name, p.tensor.shape());
        Tensor4& m = mit->second;
        if (cfg.optimizer == OptimizerKind::sgd) {
            if (cfg.momentum == 0.0) {
                m = g;
            } else if (fresh) {
                m = g;
            } else {
                m *= cfg.momentum;
                m += g;
            }
            p.tensor.axpy(-lr, m);
        } else {
            Tensor4& v = state.second.try_emplace(p.name, p.tensor.shape()).first->second;
            const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
            const double c1 = 1.0 - std::pow(b1, t);
            const double c2 = 1.0 - std::pow(b2, t);
            auto md = m.data();
            auto vd = v.data();
            auto gd = g.data();
            auto wd = p.tensor.data();
            for (std::size_t k = 0; k < gd.size(); ++k) {
                md[k] = b1 * md[k] + (1.0 - b1) * gd[k];
                vd[k] = b2 * vd[k] + (1.0 - b2) * gd[k] * gd[k];
                const double mhat = md[k] / c1;
                const double vhat = vd[k] / c2;
                wd[k] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        }
    }
}

Batch make_batch(const std::vector<PatchPair>& pairs) {
    if (pairs.empty()) throw ShapeError("make_batch: no pairs");
    std::vector<Tensor4> inputs, targets;
    inputs.reserve(pairs.size());
    targets.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.scale != pairs.front().scale && !(p.input.shape() == pairs.front().input.shape())) {
            throw ShapeError("make_batch: pairs of different shapes");
        }
        inputs.push_back(p.input);
        targets.push_back(p.target);
    }
    return Batch{concat_batch(inputs), concat_batch(targets), pairs.front().scale};
}

namespace {

struct LossGraph {
    Graph graph;
    NodeId loss = 0;
};

void build_loss(LossGraph& lg, const Model& model, std::size_t scale, LossKind kind) {
    const NodeId in = lg.graph.input("input");
    const NodeId target = lg.graph.input("target");
    const NodeId out = model.build(lg.graph, in, scale);
    lg.loss = kind == LossKind::l2 ? lg.graph.mse_loss(out, target) : lg.graph.mae_loss(out, target);
    lg.graph.set_output(lg.loss);
}

}  // namespace

StepResult train_step(Model& model, const Batch& batch, OptimizerState& state, const TrainConfig& cfg, double lr) {
    LossGraph lg;
    build_loss(lg, model, batch.scale, cfg.loss);
    const double loss = lg.graph.forward({{"input", batch.input}, {"target", batch.target}}, model.params).data()[0];
    if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite training loss (" + std::to_string(loss) + ") at optimizer step " +
                              std::to_string(state.steps + 1) + ", lr " + std::to_string(lr));
    }
    TensorMap grads = lg.graph.backward();
    StepResult result;
    result.loss = loss;
    if (cfg.grad_clip > 0.0) {
        const double max_norm = cfg.clip_scale_by_lr ? (lr > 0.0 ? cfg.grad_clip / lr
                                                                 : std::numeric_limits<double>::infinity())
                                                     : cfg.grad_clip;
        result.grad_norm = clip_global_norm(grads, max_norm);
    } else {
        double sq = 0.0;
        for (const auto& [name, g] : grads) sq += norm2_squared(g);
        result.grad_norm = std::sqrt(sq);
    }
    optimizer_update(model.params, grads, state, cfg, lr);
    return result;
}

double evaluate_loss(const Model& model, const Batch& batch, LossKind loss) {
    LossGraph lg;
    build_loss(lg, model, batch.scale, loss);
    return lg.graph.forward({{"input", batch.input}, {"target", batch.target}}, model.params).data()[0];
}

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& trace) {
    out << "step,epoch,lr,loss\n";
    out << std::setprecision(17);
    for (const auto& r : trace) out << r.step << "," << r.epoch << "," << r.lr << "," << r.loss << "\n";
}

Model make_model(const TrainConfig& cfg) {
    Model m;
    m.kind = cfg.model;
    m.a = cfg.a;
    m.b = cfg.b;
    m.b.scales = cfg.scales;
    m.params = cfg.model == ModelKind::crnet_a ? init_crneta(m.a, cfg.seed) : init_crnetb(m.b, cfg.seed);
    return m;
}

std::vector<LossRecord> train(Model& model, const std::vector<Tensor4>& hr_images, const TrainConfig& cfg,
                              const TrainHooks& hooks) {
    cfg.validate();
    const std::vector<Tensor4> images = to_model_channels(hr_images, model.channels());
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    // Per-scale patch lists. CRNet-A mixes every scale into one stream.
    std::map<std::size_t, std::vector<PatchPair>> by_scale;
    for (std::size_t s : cfg.scales) {
        if (model.kind == ModelKind::crnet_a) {
            auto pairs = make_patch_pairs(images, s, cfg.patch, cfg.stride, ModelKind::crnet_a);
            auto& all = by_scale[0];
            all.insert(all.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
        } else {
            by_scale[s] = make_patch_pairs(images, s, cfg.patch * s, cfg.stride * s, ModelKind::crnet_b);
        }
    }
    std::size_t total = 0;
    for (const auto& [s, list] : by_scale) {
        if (list.empty()) throw ConfigError("no training patches: images are smaller than the patch size");
        total += list.size();
    }
    const std::size_t steps_per_epoch = (total + cfg.batch_size - 1) / cfg.batch_size;

    ScaleSchedule schedule(model.kind == ModelKind::crnet_a ? std::vector<std::size_t>{0} : cfg.scales, cfg.seed + 1);
    std::map<std::size_t, std::vector<std::size_t>> order;
    std::map<std::size_t, std::size_t> cursor;
    auto reshuffle = [&](std::size_t s) {
        auto& o = order[s];
        o.resize(by_scale[s].size());
        std::iota(o.begin(), o.end(), std::size_t{0});
        std::shuffle(o.begin(), o.end(), rng);
        cursor[s] = 0;
    };
    for (const auto& [s, list] : by_scale) reshuffle(s);

    OptimizerState state;
    std::vector<LossRecord> trace;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        if (model.kind == ModelKind::crnet_a) reshuffle(0);
        for (std::size_t k = 0; k < steps_per_epoch; ++k) {
            if (cfg.max_steps && step >= cfg.max_steps) return trace;
            const std::size_t s = schedule.next();
            const auto& list = by_scale[s];
            std::vector<PatchPair> picked;
            picked.reserve(cfg.batch_size);
            for (std::size_t b = 0; b < cfg.batch_size; ++b) {
                if (cursor[s] == list.size()) {
                    if (model.kind == ModelKind::crnet_a) break;  // partial last batch of the epoch
                    reshuffle(s);
                }
                const PatchPair& p = list[order[s][cursor[s]++]];
                picked.push_back(cfg.augment ? augment(p, rng) : p);
            }
            if (picked.empty()) break;
            const StepResult r = train_step(model, make_batch(picked), state, cfg, lr);
            LossRecord rec{++step, epoch, lr, r.loss};
            trace.push_back(rec);
            if (hooks.on_step) hooks.on_step(rec);
        }
        if (hooks.on_epoch) hooks.on_epoch(epoch + 1, model);
    }
    return trace;
}

}  // namespace crnet
