#include "crnet/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "crnet/errors.hpp"
#include "crnet/ops.hpp"

namespace crnet {

// --- ParameterStore ----------------------------------------------------------

Parameter& ParameterStore::add(std::string name, Tensor4 tensor, bool trainable) {
    if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
    index_.emplace(name, params_.size());
    params_.push_back(Parameter{std::move(name), std::move(tensor), trainable});
    return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw BindingError("unknown parameter '" + name + "'");
    return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw BindingError("unknown parameter '" + name + "'");
    return params_[it->second];
}

std::size_t ParameterStore::element_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.tensor.size();
    return total;
}

std::vector<std::string> ParameterStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.name);
    return out;
}

bool ParameterStore::operator==(const ParameterStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        const auto& a = params_[k];
        const auto& b = other.params_[k];
        if (a.name != b.name || a.trainable != b.trainable || !(a.tensor == b.tensor)) return false;
    }
    return true;
}

// --- Graph -------------------------------------------------------------------

const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::input: return "input";
        case OpKind::parameter: return "parameter";
        case OpKind::conv2d: return "conv2d";
        case OpKind::conv2d_adjoint: return "conv2d_adjoint";
        case OpKind::relu: return "relu";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::scalar_mul: return "scalar_mul";
        case OpKind::pixel_shuffle: return "pixel_shuffle";
        case OpKind::mse_loss: return "mse_loss";
        case OpKind::mae_loss: return "mae_loss";
    }
    return "?";
}

void Graph::check_id(NodeId id) const {
    if (id >= nodes_.size()) throw UsageError("node id " + std::to_string(id) + " does not exist");
}

NodeId Graph::push(Node node) {
    for (NodeId in : node.inputs) check_id(in);
    nodes_.push_back(std::move(node));
    evaluated_ = false;
    return nodes_.size() - 1;
}

NodeId Graph::input(std::string name) { return push(Node{OpKind::input, {}, std::move(name)}); }
NodeId Graph::parameter(std::string name) { return push(Node{OpKind::parameter, {}, std::move(name)}); }
NodeId Graph::conv2d(NodeId x, NodeId w) { return push(Node{OpKind::conv2d, {x, w}}); }
NodeId Graph::conv2d_adjoint(NodeId x, NodeId w) { return push(Node{OpKind::conv2d_adjoint, {x, w}}); }
NodeId Graph::relu(NodeId x) { return push(Node{OpKind::relu, {x}}); }
NodeId Graph::add(NodeId a, NodeId b) { return push(Node{OpKind::add, {a, b}}); }
NodeId Graph::sub(NodeId a, NodeId b) { return push(Node{OpKind::sub, {a, b}}); }
NodeId Graph::mse_loss(NodeId p, NodeId t) { return push(Node{OpKind::mse_loss, {p, t}}); }
NodeId Graph::mae_loss(NodeId p, NodeId t) { return push(Node{OpKind::mae_loss, {p, t}}); }

NodeId Graph::scalar_mul(NodeId x, double s) {
    Node n{OpKind::scalar_mul, {x}};
    n.scalar = s;
    return push(std::move(n));
}

NodeId Graph::pixel_shuffle(NodeId x, std::size_t r) {
    if (r == 0) throw ConfigError("pixel_shuffle factor must be >= 1");
    Node n{OpKind::pixel_shuffle, {x}};
    n.factor = r;
    return push(std::move(n));
}

void Graph::set_output(NodeId id) {
    check_id(id);
    output_ = id;
}

NodeId Graph::output() const {
    if (output_) return *output_;
    if (nodes_.empty()) throw UsageError("graph is empty");
    return nodes_.size() - 1;
}

const Tensor4& Graph::node_value(const Node& n) const {
    if (n.external) return *n.external;
    if (!n.value) throw UsageError("node value requested before forward()");
    return *n.value;
}

const Tensor4& Graph::value(NodeId id) const {
    check_id(id);
    return node_value(nodes_[id]);
}

Tensor4 Graph::grad(NodeId id) const {
    check_id(id);
    const Node& n = nodes_[id];
    if (n.grad) return *n.grad;
    return Tensor4(node_value(n).shape());
}

namespace {

void require_same_shape(const Tensor4& a, const Tensor4& b, const char* op) {
    if (!(a.shape() == b.shape())) {
        throw ShapeError(std::string(op) + ": " + a.shape().str() + " vs " + b.shape().str());
    }
}

Tensor4 scalar(double v) { return Tensor4(Shape{1, 1, 1, 1}, v); }

}  // namespace

const Tensor4& Graph::forward(const TensorMap& inputs, const ParameterStore& params) {
    if (nodes_.empty()) throw UsageError("forward() on an empty graph");
    params_ = &params;
    for (Node& n : nodes_) {
        n.grad.reset();
        n.external = nullptr;
        switch (n.op) {
            case OpKind::input: {
                auto it = inputs.find(n.name);
                if (it == inputs.end()) throw BindingError("input '" + n.name + "' is not bound");
                n.value = it->second;
                n.needs_grad = false;
                break;
            }
            case OpKind::parameter: {
                const Parameter& p = params.get(n.name);
                n.value.reset();
                n.external = &p.tensor;
                n.needs_grad = p.trainable;
                break;
            }
            default: {
                n.needs_grad = std::any_of(n.inputs.begin(), n.inputs.end(),
                                           [this](NodeId in) { return nodes_[in].needs_grad; });
                const Tensor4& a = node_value(nodes_[n.inputs[0]]);
                switch (n.op) {
                    case OpKind::conv2d: n.value = conv2d_same(a, node_value(nodes_[n.inputs[1]])); break;
                    case OpKind::conv2d_adjoint: n.value = crnet::conv2d_adjoint(a, node_value(nodes_[n.inputs[1]])); break;
                    case OpKind::relu: n.value = crnet::relu(a); break;
                    case OpKind::add: {
                        const Tensor4& b = node_value(nodes_[n.inputs[1]]);
                        require_same_shape(a, b, "add");
                        n.value = a + b;
                        break;
                    }
                    case OpKind::sub: {
                        const Tensor4& b = node_value(nodes_[n.inputs[1]]);
                        require_same_shape(a, b, "sub");
                        n.value = a - b;
                        break;
                    }
                    case OpKind::scalar_mul: n.value = n.scalar * a; break;
                    case OpKind::pixel_shuffle: n.value = crnet::pixel_shuffle(a, n.factor); break;
                    case OpKind::mse_loss: {
                        const Tensor4& b = node_value(nodes_[n.inputs[1]]);
                        require_same_shape(a, b, "mse_loss");
                        double acc = 0.0;
                        for (std::size_t k = 0; k < a.size(); ++k) {
                            const double d = a.data()[k] - b.data()[k];
                            acc += d * d;
                        }
                        n.value = scalar(0.5 * acc / static_cast<double>(a.size()));
                        break;
                    }
                    case OpKind::mae_loss: {
                        const Tensor4& b = node_value(nodes_[n.inputs[1]]);
                        require_same_shape(a, b, "mae_loss");
                        double acc = 0.0;
                        for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a.data()[k] - b.data()[k]);
                        n.value = scalar(acc / static_cast<double>(a.size()));
                        break;
                    }
                    default: break;
                }
            }
        }
    }
    evaluated_ = true;
    return node_value(nodes_[output()]);
}

void Graph::accumulate(NodeId id, const Tensor4& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad) {
        *n.grad += g;
    } else {
        n.grad = g;
    }
}

TensorMap Graph::backward() {
    if (!evaluated_) throw UsageError("backward() called before forward()");
    const NodeId root = output();
    const Tensor4& root_value = node_value(nodes_[root]);
    if (!(root_value.shape() == Shape{1, 1, 1, 1})) {
        throw UsageError("backward() requires a scalar output, got " + root_value.shape().str());
    }
    for (Node& n : nodes_) n.grad.reset();
    if (nodes_[root].needs_grad) nodes_[root].grad = scalar(1.0);

    for (NodeId id = root + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.grad || n.op == OpKind::input || n.op == OpKind::parameter) continue;
        const Tensor4 g = *n.grad;
        const NodeId ia = n.inputs[0];
        const Tensor4& a = node_value(nodes_[ia]);
        switch (n.op) {
            case OpKind::conv2d: {
                const NodeId iw = n.inputs[1];
                const Tensor4& w = node_value(nodes_[iw]);
                if (nodes_[ia].needs_grad) accumulate(ia, crnet::conv2d_adjoint(g, w));
                if (nodes_[iw].needs_grad) accumulate(iw, conv2d_weight_grad(a, g, w.shape().h));
                break;
            }
            case OpKind::conv2d_adjoint: {
                // y = conv2d_same(x, adjoint_bank(w)); d/dx is conv2d_same(g, w).
                const NodeId iw = n.inputs[1];
                const Tensor4& w = node_value(nodes_[iw]);
                if (nodes_[ia].needs_grad) accumulate(ia, conv2d_same(g, w));
                if (nodes_[iw].needs_grad) accumulate(iw, adjoint_bank(conv2d_weight_grad(a, g, w.shape().h)));
                break;
            }
            case OpKind::relu: {
                Tensor4 d = g;
                for (std::size_t k = 0; k < d.size(); ++k)
                    if (!(a.data()[k] > 0.0)) d.data()[k] = 0.0;
                accumulate(ia, d);
                break;
            }
            case OpKind::add:
                accumulate(ia, g);
                accumulate(n.inputs[1], g);
                break;
            case OpKind::sub:
                accumulate(ia, g);
                if (nodes_[n.inputs[1]].needs_grad) accumulate(n.inputs[1], -1.0 * g);
                break;
            case OpKind::scalar_mul: accumulate(ia, n.scalar * g); break;
            case OpKind::pixel_shuffle: accumulate(ia, pixel_unshuffle(g, n.factor)); break;
            case OpKind::mse_loss:
            case OpKind::mae_loss: {
                const Tensor4& b = node_value(nodes_[n.inputs[1]]);
                const double upstream = g.data()[0] / static_cast<double>(a.size());
                Tensor4 d(a.shape());
                for (std::size_t k = 0; k < a.size(); ++k) {
                    const double diff = a.data()[k] - b.data()[k];
                    if (n.op == OpKind::mse_loss) {
                        d.data()[k] = upstream * diff;
                    } else {
                        d.data()[k] = diff > 0.0 ? upstream : (diff < 0.0 ? -upstream : 0.0);
                    }
                }
                if (nodes_[n.inputs[1]].needs_grad) accumulate(n.inputs[1], -1.0 * d);
                accumulate(ia, d);
                break;
            }
            default: break;
        }
    }

    TensorMap grads;
    for (const Node& n : nodes_) {
        if (n.op != OpKind::parameter) continue;
        const Parameter& p = params_->get(n.name);
        if (!p.trainable) continue;
        auto it = grads.find(n.name);
        if (it == grads.end()) {
            grads.emplace(n.name, n.grad ? *n.grad : Tensor4(p.tensor.shape()));
        } else if (n.grad) {
            it->second += *n.grad;
        }
    }
    return grads;
}

// --- gradient check ------------------------------------------------------------

bool GradCheckReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

GradCheckReport grad_check(Graph& graph, const TensorMap& inputs, const ParameterStore& params,
                           const GradCheckOptions& opts) {
    ParameterStore work = params;
    graph.forward(inputs, work);
    const TensorMap analytic = graph.backward();

    GradCheckReport report;
    report.tolerance = opts.tolerance;
    for (Parameter& p : work) {
        if (!p.trainable) continue;
        GradCheckEntry entry;
        entry.name = p.name;
        entry.elements = p.tensor.size();
        auto it = analytic.find(p.name);
        const Tensor4 zero(p.tensor.shape());
        const Tensor4& ga = it != analytic.end() ? it->second : zero;
        for (std::size_t k = 0; k < p.tensor.size(); ++k) {
            double& slot = p.tensor.data()[k];
            const double saved = slot;
            slot = saved + opts.step;
            const double up = graph.forward(inputs, work).data()[0];
            slot = saved - opts.step;
            const double down = graph.forward(inputs, work).data()[0];
            slot = saved;
            const double numeric = (up - down) / (2.0 * opts.step);
            const double a = ga.data()[k];
            const double abs_err = std::abs(a - numeric);
            const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
            entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
            entry.max_rel_error = std::max(entry.max_rel_error, abs_err / denom);
        }
        entry.passed = entry.max_rel_error <= opts.tolerance;
        report.entries.push_back(entry);
    }
    graph.forward(inputs, params);
    return report;
}

}  // namespace crnet
