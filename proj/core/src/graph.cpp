/**
 * graph.cpp - node evaluation and reverse sweep
 */

#include "hdru/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hdru::nn {

Param& ParamStore::add(const std::string& name, std::vector<std::uint32_t> dims, bool trainable) {
    if (contains(name)) throw std::invalid_argument("parameter defined twice: " + name);
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    index_[name] = params_.size();
    params_.push_back(Param{name, std::move(dims), std::vector<float>(n, 0.0f), trainable});
    return params_.back();
}

Param& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return params_[it->second];
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.values.size();
    return n;
}

std::size_t ParamStore::trainable_count() const {
    std::size_t n = 0;
    for (const auto& p : params_)
        if (p.trainable) n += p.values.size();
    return n;
}

void ParamStore::set_trainable(const std::string& prefix, bool trainable) {
    for (auto& p : params_)
        if (p.name.compare(0, prefix.size(), prefix) == 0) p.trainable = trainable;
}

void assign_params(ParamStore& dst, const ParamStore& src) {
    for (const auto& p : src.params())
        if (!dst.contains(p.name)) throw std::invalid_argument("weights contain unknown parameter '" + p.name + "'");
    for (auto& p : dst.params()) {
        if (!src.contains(p.name)) throw std::invalid_argument("weights are missing parameter '" + p.name + "'");
        const Param& s = src.at(p.name);
        if (s.dims != p.dims) throw std::invalid_argument("parameter '" + p.name + "' has a different shape");
        p.values = s.values;
    }
}

int Graph::push(Node node) {
    for (int in : node.inputs)
        if (in < 0 || in >= static_cast<int>(nodes_.size()))
            throw std::invalid_argument("graph: node input refers to an undefined node");
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int Graph::input(const std::string& name, int channels) {
    if (inputs_.count(name)) throw std::invalid_argument("graph: duplicate input " + name);
    Node n;
    n.kind = OpKind::input;
    n.name = name;
    n.channels = channels;
    const int id = push(n);
    inputs_[name] = id;
    return id;
}

int Graph::conv(const std::string& name, int x, const ConvSpec& spec, int like) {
    if (channels(x) != spec.in_ch)
        throw std::invalid_argument("graph: conv " + name + " expects " + std::to_string(spec.in_ch) +
                                    " input channels, got " + std::to_string(channels(x)));
    Node n;
    n.kind = OpKind::conv;
    n.name = name;
    n.inputs = {x};
    n.conv = spec;
    n.like = like;
    n.channels = spec.out_ch;
    params_.add(name + ".kernel", {static_cast<std::uint32_t>(spec.out_ch), static_cast<std::uint32_t>(spec.in_ch),
                                   static_cast<std::uint32_t>(spec.kh), static_cast<std::uint32_t>(spec.kw)});
    params_.add(name + ".bias", {static_cast<std::uint32_t>(spec.out_ch)});
    return push(n);
}

int Graph::activation(int x, Activation a) {
    Node n;
    n.kind = OpKind::activation;
    n.inputs = {x};
    n.act = a;
    n.channels = channels(x);
    return push(n);
}

int Graph::add(int a, int b) {
    if (channels(a) != channels(b)) throw std::invalid_argument("graph: add of mismatched channels");
    Node n;
    n.kind = OpKind::add;
    n.inputs = {a, b};
    n.channels = channels(a);
    return push(n);
}

int Graph::mul(int a, int b) {
    if (channels(a) != channels(b)) throw std::invalid_argument("graph: mul of mismatched channels");
    Node n;
    n.kind = OpKind::mul;
    n.inputs = {a, b};
    n.channels = channels(a);
    return push(n);
}

int Graph::concat(const std::vector<int>& xs) {
    if (xs.empty()) throw std::invalid_argument("graph: empty concat");
    Node n;
    n.kind = OpKind::concat;
    n.inputs = xs;
    for (int x : xs) n.channels += channels(x);
    return push(n);
}

int Graph::normalize(int x, float eps) {
    Node n;
    n.kind = OpKind::normalize;
    n.inputs = {x};
    n.scalar = eps;
    n.channels = channels(x);
    return push(n);
}

int Graph::scale(int x, float factor) {
    Node n;
    n.kind = OpKind::scale;
    n.inputs = {x};
    n.scalar = factor;
    n.channels = channels(x);
    return push(n);
}

int Graph::global_max_pool(int x) {
    Node n;
    n.kind = OpKind::global_max_pool;
    n.inputs = {x};
    n.channels = channels(x);
    return push(n);
}

void Graph::mark_output(const std::string& name, int node) {
    if (node < 0 || node >= static_cast<int>(nodes_.size())) throw std::invalid_argument("graph: bad output node");
    outputs_[name] = node;
}

namespace {

void require_same(const Tensor4& a, const Tensor4& b, const char* op) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string("graph: ") + op + " shape mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
}

void accumulate(Tensor4& dst, const Tensor4& src) {
    if (dst.empty()) {
        dst = src;
        return;
    }
    auto d = dst.values();
    auto s = src.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

TensorMap Graph::forward(const TensorMap& inputs, Tape* tape) const {
    const std::size_t count = nodes_.size();
    std::vector<Tensor4> values(count);
    std::vector<int> last_use(count, -1);
    for (std::size_t i = 0; i < count; ++i) {
        for (int in : nodes_[i].inputs) last_use[in] = static_cast<int>(i);
        if (nodes_[i].like >= 0) last_use[nodes_[i].like] = static_cast<int>(i);
    }
    for (const auto& [name, id] : outputs_) last_use[id] = static_cast<int>(count);

    for (std::size_t i = 0; i < count; ++i) {
        const Node& node = nodes_[i];
        Tensor4& out = values[i];
        switch (node.kind) {
            case OpKind::input: {
                auto it = inputs.find(node.name);
                if (it == inputs.end()) throw std::invalid_argument("graph: unbound input '" + node.name + "'");
                if (it->second.shape().c != node.channels)
                    throw std::invalid_argument("graph: input '" + node.name + "' has shape " +
                                                it->second.shape().str());
                out = it->second;
                break;
            }
            case OpKind::conv: {
                const Param& k = params_.at(node.name + ".kernel");
                const Param& b = params_.at(node.name + ".bias");
                int oh = -1, ow = -1;
                if (node.like >= 0) {
                    oh = values[node.like].shape().h;
                    ow = values[node.like].shape().w;
                }
                out = conv2d_forward(values[node.inputs[0]], k.values, b.values, node.conv, oh, ow);
                break;
            }
            case OpKind::activation: out = activate(values[node.inputs[0]], node.act); break;
            case OpKind::add:
            case OpKind::mul: {
                const Tensor4& a = values[node.inputs[0]];
                const Tensor4& b = values[node.inputs[1]];
                require_same(a, b, node.kind == OpKind::add ? "add" : "mul");
                out = a;
                auto o = out.values();
                auto bv = b.values();
                if (node.kind == OpKind::add)
                    for (std::size_t j = 0; j < o.size(); ++j) o[j] += bv[j];
                else
                    for (std::size_t j = 0; j < o.size(); ++j) o[j] *= bv[j];
                break;
            }
            case OpKind::concat: {
                const Shape4 first = values[node.inputs[0]].shape();
                Shape4 s = first;
                s.c = 0;
                for (int in : node.inputs) {
                    const Shape4& is = values[in].shape();
                    if (is.n != first.n || is.h != first.h || is.w != first.w)
                        throw std::invalid_argument("graph: concat shape mismatch " + is.str());
                    s.c += is.c;
                }
                out = Tensor4(s);
                for (int n = 0; n < s.n; ++n) {
                    int c0 = 0;
                    for (int in : node.inputs) {
                        const Tensor4& t = values[in];
                        for (int c = 0; c < t.shape().c; ++c)
                            std::copy(t.plane(n, c), t.plane(n, c) + s.plane(), out.plane(n, c0 + c));
                        c0 += t.shape().c;
                    }
                }
                break;
            }
            case OpKind::normalize: {
                const Tensor4& x = values[node.inputs[0]];
                const Shape4& s = x.shape();
                out = Tensor4(s);
                const float eps = node.scalar;
                for (int n = 0; n < s.n; ++n)
                    for (std::size_t p = 0; p < s.plane(); ++p) {
                        float total = 0.0f;
                        for (int c = 0; c < s.c; ++c) total += std::max(x.plane(n, c)[p], 0.0f) + eps;
                        for (int c = 0; c < s.c; ++c) out.plane(n, c)[p] = (std::max(x.plane(n, c)[p], 0.0f) + eps) / total;
                    }
                break;
            }
            case OpKind::scale: {
                out = values[node.inputs[0]];
                for (float& v : out.values()) v *= node.scalar;
                break;
            }
            case OpKind::global_max_pool: {
                const Tensor4& x = values[node.inputs[0]];
                const Shape4& s = x.shape();
                out = Tensor4(Shape4{s.n, s.c, 1, 1});
                for (int n = 0; n < s.n; ++n)
                    for (int c = 0; c < s.c; ++c)
                        out.at(n, c, 0, 0) = *std::max_element(x.plane(n, c), x.plane(n, c) + s.plane());
                break;
            }
        }
        if (!tape) {
            for (int in : node.inputs)
                if (last_use[in] == static_cast<int>(i)) values[in] = Tensor4();
            if (node.like >= 0 && last_use[node.like] == static_cast<int>(i)) values[node.like] = Tensor4();
        }
    }

    TensorMap result;
    if (outputs_.empty()) {
        result = inputs;
    } else {
        for (const auto& [name, id] : outputs_) result[name] = values[id];
    }
    if (tape) tape->values = std::move(values);
    return result;
}

Gradients Graph::backward(const Tape& tape, const TensorMap& output_grads, const BackwardOptions& opts) const {
    const std::size_t count = nodes_.size();
    if (tape.values.size() != count) throw std::logic_error("graph: backward requires a retained forward pass");

    // A node needs a gradient when something requested lies upstream of it.
    std::vector<char> wants(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        const Node& node = nodes_[i];
        if (node.kind == OpKind::input) {
            wants[i] = opts.inputs;
            continue;
        }
        if (node.kind == OpKind::conv && opts.params && params_.at(node.name + ".kernel").trainable) wants[i] = 1;
        for (int in : node.inputs) wants[i] = wants[i] || wants[in];
    }

    std::vector<Tensor4> grads(count);
    for (const auto& [name, g] : output_grads) {
        auto it = outputs_.find(name);
        if (it == outputs_.end()) throw std::invalid_argument("graph: no output named '" + name + "'");
        if (g.shape() != tape.values[it->second].shape())
            throw std::invalid_argument("graph: output gradient for '" + name + "' has shape " + g.shape().str());
        accumulate(grads[it->second], g);
    }

    Gradients result;
    for (std::size_t r = count; r-- > 0;) {
        const Node& node = nodes_[r];
        if (grads[r].empty() || !wants[r]) continue;
        const Tensor4& g = grads[r];
        auto give = [&](int in, Tensor4 t) {
            if (wants[in]) accumulate(grads[in], t);
        };
        switch (node.kind) {
            case OpKind::input:
                if (opts.inputs) result.inputs[node.name] = g;
                break;
            case OpKind::conv: {
                const Param& k = params_.at(node.name + ".kernel");
                const Param& b = params_.at(node.name + ".bias");
                const int in = node.inputs[0];
                std::vector<float> gk(k.values.size(), 0.0f), gb(b.values.size(), 0.0f);
                Tensor4 gin;
                if (wants[in]) gin = Tensor4(tape.values[in].shape());
                conv2d_backward(tape.values[in], k.values, node.conv, g, wants[in] ? &gin : nullptr, gk, gb);
                if (opts.params && k.trainable) {
                    auto& dk = result.params[k.name];
                    auto& db = result.params[b.name];
                    if (dk.empty()) dk.assign(gk.size(), 0.0f);
                    if (db.empty()) db.assign(gb.size(), 0.0f);
                    for (std::size_t j = 0; j < gk.size(); ++j) dk[j] += gk[j];
                    for (std::size_t j = 0; j < gb.size(); ++j) db[j] += gb[j];
                }
                if (wants[in]) give(in, std::move(gin));
                break;
            }
            case OpKind::activation: {
                const int in = node.inputs[0];
                give(in, activation_backward(tape.values[in], tape.values[r], g, node.act));
                break;
            }
            case OpKind::add:
                give(node.inputs[0], g);
                give(node.inputs[1], g);
                break;
            case OpKind::mul: {
                const int a = node.inputs[0], b = node.inputs[1];
                Tensor4 ga = g, gb = g;
                auto av = tape.values[a].values();
                auto bv = tape.values[b].values();
                auto gav = ga.values();
                auto gbv = gb.values();
                for (std::size_t j = 0; j < gav.size(); ++j) {
                    gav[j] *= bv[j];
                    gbv[j] *= av[j];
                }
                give(a, std::move(ga));
                give(b, std::move(gb));
                break;
            }
            case OpKind::concat: {
                const Shape4& s = g.shape();
                int c0 = 0;
                for (int in : node.inputs) {
                    const Shape4& is = tape.values[in].shape();
                    if (wants[in]) {
                        Tensor4 part(is);
                        for (int n = 0; n < s.n; ++n)
                            for (int c = 0; c < is.c; ++c)
                                std::copy(g.plane(n, c0 + c), g.plane(n, c0 + c) + s.plane(), part.plane(n, c));
                        give(in, std::move(part));
                    }
                    c0 += is.c;
                }
                break;
            }
            case OpKind::normalize: {
                const int in = node.inputs[0];
                const Tensor4& x = tape.values[in];
                const Tensor4& y = tape.values[r];
                const Shape4& s = x.shape();
                Tensor4 gin(s);
                const float eps = node.scalar;
                for (int n = 0; n < s.n; ++n)
                    for (std::size_t p = 0; p < s.plane(); ++p) {
                        float total = 0.0f, gy = 0.0f;
                        for (int c = 0; c < s.c; ++c) {
                            total += std::max(x.plane(n, c)[p], 0.0f) + eps;
                            gy += g.plane(n, c)[p] * y.plane(n, c)[p];
                        }
                        for (int c = 0; c < s.c; ++c)
                            gin.plane(n, c)[p] =
                                x.plane(n, c)[p] > 0.0f ? (g.plane(n, c)[p] - gy) / total : 0.0f;
                    }
                give(in, std::move(gin));
                break;
            }
            case OpKind::scale: {
                Tensor4 gin = g;
                for (float& v : gin.values()) v *= node.scalar;
                give(node.inputs[0], std::move(gin));
                break;
            }
            case OpKind::global_max_pool: {
                const int in = node.inputs[0];
                const Tensor4& x = tape.values[in];
                const Shape4& s = x.shape();
                Tensor4 gin(s);
                for (int n = 0; n < s.n; ++n)
                    for (int c = 0; c < s.c; ++c) {
                        const float* p = x.plane(n, c);
                        const std::size_t arg = static_cast<std::size_t>(std::max_element(p, p + s.plane()) - p);
                        gin.plane(n, c)[arg] = g.at(n, c, 0, 0);
                    }
                give(in, std::move(gin));
                break;
            }
        }
    }
    if (opts.inputs)
        for (const auto& [name, id] : inputs_)
            if (!result.inputs.count(name)) result.inputs[name] = Tensor4(tape.values[id].shape());
    if (opts.params)
        for (const auto& p : params_.params())
            if (p.trainable && !result.params.count(p.name)) result.params[p.name].assign(p.values.size(), 0.0f);
    return result;
}

}  // namespace hdru::nn
