/**
 * graph.hpp - static computation graph with named parameters and reverse-mode gradients
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdru/nn_ops.hpp"
#include "hdru/tensor.hpp"

namespace hdru::nn {

struct Param {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
    bool trainable = true;
};

class ParamStore {
public:
    /// Adds a zero-initialized parameter; names must be unique.
    Param& add(const std::string& name, std::vector<std::uint32_t> dims, bool trainable = true);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;

    std::vector<Param>& params() noexcept { return params_; }
    const std::vector<Param>& params() const noexcept { return params_; }

    /// Total number of scalars (trainable or not).
    std::size_t scalar_count() const;
    std::size_t trainable_count() const;

    void set_trainable(const std::string& prefix, bool trainable);

private:
    std::vector<Param> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

using GradientSet = std::map<std::string, std::vector<float>>;

/// Copies every parameter of `src` into `dst`. Throws naming the parameter when
/// one is missing from `src`, unknown to `dst`, or differs in shape.
void assign_params(ParamStore& dst, const ParamStore& src);

enum class OpKind { input, conv, activation, add, mul, concat, normalize, scale, global_max_pool };

struct Node {
    OpKind kind = OpKind::input;
    std::string name;
    std::vector<int> inputs;
    ConvSpec conv;
    int like = -1;  ///< upsample convs take their spatial size from this node
    Activation act = Activation::identity;
    float scalar = 0.0f;  ///< scale factor or normalization epsilon
    int channels = 0;     ///< declared channel count of the node's output
};

/// Values of every node from a retained forward pass.
struct Tape {
    std::vector<Tensor4> values;
};

struct Gradients {
    GradientSet params;
    TensorMap inputs;
};

struct BackwardOptions {
    bool params = true;  ///< gradients of trainable parameters
    bool inputs = true;  ///< gradients of graph inputs
};

class Graph {
public:
    int input(const std::string& name, int channels);
    /// Creates "<name>.kernel" [out,in,kh,kw] and "<name>.bias" [out].
    int conv(const std::string& name, int x, const ConvSpec& spec, int like = -1);
    int activation(int x, Activation a);
    int add(int a, int b);
    int mul(int a, int b);
    int concat(const std::vector<int>& xs);
    /// Per-pixel across-channel normalization: (relu(x_c)+eps) / sum_j (relu(x_j)+eps).
    int normalize(int x, float eps);
    int scale(int x, float factor);
    int global_max_pool(int x);
    void mark_output(const std::string& name, int node);

    ParamStore& params() noexcept { return params_; }
    const ParamStore& params() const noexcept { return params_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::map<std::string, int>& outputs() const noexcept { return outputs_; }
    int channels(int node) const { return nodes_.at(node).channels; }

    /// Evaluates in insertion (topological) order. Inputs without graph
    /// outputs are passed through. With a tape, every node value is retained.
    TensorMap forward(const TensorMap& inputs, Tape* tape = nullptr) const;

    /// Reverse pass from the given output gradients over a retained tape.
    Gradients backward(const Tape& tape, const TensorMap& output_grads, const BackwardOptions& opts = {}) const;

private:
    int push(Node node);

    std::vector<Node> nodes_;
    std::map<std::string, int> inputs_;
    std::map<std::string, int> outputs_;
    ParamStore params_;
};

}  // namespace hdru::nn
