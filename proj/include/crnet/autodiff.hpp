#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crnet/tensor.hpp"

namespace crnet {

using TensorMap = std::map<std::string, Tensor4>;

struct Parameter {
    std::string name;
    Tensor4 tensor;
    bool trainable = true;
};

/// Named, ordered collection of model parameters.
class ParameterStore {
public:
    Parameter& add(std::string name, Tensor4 tensor, bool trainable = true);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    Tensor4& tensor(const std::string& name) { return get(name).tensor; }
    const Tensor4& tensor(const std::string& name) const { return get(name).tensor; }

    std::size_t size() const { return params_.size(); }
    /// Total number of scalar entries over all parameters.
    std::size_t element_count() const;
    std::vector<std::string> names() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    bool operator==(const ParameterStore& other) const;

private:
    std::vector<Parameter> params_;
    std::map<std::string, std::size_t> index_;
};

enum class OpKind {
    input,
    parameter,
    conv2d,
    conv2d_adjoint,
    relu,
    add,
    sub,
    scalar_mul,
    pixel_shuffle,
    mse_loss,
    mae_loss,
};

const char* op_name(OpKind op);

using NodeId = std::size_t;

/// Reverse-mode tape. Nodes are appended in evaluation order, so the graph is acyclic by
/// construction. Parameters are referenced by name and may be used by any number of nodes;
/// their gradients accumulate over every use.
class Graph {
public:
    NodeId input(std::string name);
    NodeId parameter(std::string name);
    /// Zero-padded cross-correlation of `x` with the filter bank held by `weights`.
    NodeId conv2d(NodeId x, NodeId weights);
    /// Transpose of conv2d with respect to its input, used as a forward operation.
    NodeId conv2d_adjoint(NodeId x, NodeId weights);
    NodeId relu(NodeId x);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId scalar_mul(NodeId x, double s);
    NodeId pixel_shuffle(NodeId x, std::size_t r);
    /// 0.5 * mean((pred - target)^2), a 1x1x1x1 scalar.
    NodeId mse_loss(NodeId pred, NodeId target);
    /// mean(|pred - target|), a 1x1x1x1 scalar.
    NodeId mae_loss(NodeId pred, NodeId target);

    /// The node returned by forward(); defaults to the most recently added node.
    void set_output(NodeId id);
    NodeId output() const;

    /// Evaluates every node. `params` must outlive the following backward() call.
    const Tensor4& forward(const TensorMap& inputs, const ParameterStore& params);
    /// Gradients of the (scalar) output with respect to each trainable parameter.
    TensorMap backward();

    const Tensor4& value(NodeId id) const;
    /// Upstream gradient of a node after backward(); zero-filled if the node does not influence
    /// any trainable parameter's gradient path.
    Tensor4 grad(NodeId id) const;

    std::size_t size() const { return nodes_.size(); }
    OpKind op(NodeId id) const { return nodes_.at(id).op; }

private:
    struct Node {
        OpKind op;
        std::vector<NodeId> inputs;
        std::string name;
        double scalar = 0.0;
        std::size_t factor = 1;
        std::optional<Tensor4> value;
        const Tensor4* external = nullptr;  // parameter value owned by the store
        std::optional<Tensor4> grad;
        bool needs_grad = false;
    };

    NodeId push(Node node);
    void check_id(NodeId id) const;
    const Tensor4& node_value(const Node& n) const;
    void accumulate(NodeId id, const Tensor4& g);

    std::vector<Node> nodes_;
    std::optional<NodeId> output_;
    const ParameterStore* params_ = nullptr;
    bool evaluated_ = false;
};

struct GradCheckEntry {
    std::string name;
    std::size_t elements = 0;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    bool passed = false;
};

struct GradCheckReport {
    double tolerance = 0.0;
    std::vector<GradCheckEntry> entries;  // trainable parameters only, in store order
    bool passed() const;
};

struct GradCheckOptions {
    double tolerance = 1e-4;
    double step = 1e-5;
    /// Denominator floor: error is |a - n| / max(|a|, |n|, abs_floor).
    double abs_floor = 1e-6;
};

/// Compares backward() with central differences for every entry of every trainable parameter.
GradCheckReport grad_check(Graph& graph, const TensorMap& inputs, const ParameterStore& params,
                           const GradCheckOptions& opts = {});

}  // namespace crnet
