/**
 * training.cpp - discriminator pretraining, GAN loop, checkpoint selection
 */

#include "hdru/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hdru/fusion.hpp"
#include "hdru/image_io.hpp"
#include "hdru/metrics.hpp"
#include "hdru/optim.hpp"
#include "hdru/parallel.hpp"
#include "hdru/pipeline.hpp"
#include "hdru/rng.hpp"
#include "hdru/weights_io.hpp"

namespace hdru {

namespace {

using nn::Tensor4;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::map<std::string, std::string> parse_kv(const std::string& text, char sep) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        if (sep == '\n') {
            while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
            if (tok.empty() || tok[0] == '#') continue;
        }
        std::stringstream ts(tok);
        std::string item;
        while (ts >> item) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + item + "'");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return kv;
}

Tensor4 image_batch(const std::vector<const GrayImage*>& imgs) {
    const int w = imgs.front()->width(), h = imgs.front()->height();
    Tensor4 t(nn::Shape4{static_cast<int>(imgs.size()), 1, h, w});
    for (std::size_t i = 0; i < imgs.size(); ++i)
        std::copy(imgs[i]->data().begin(), imgs[i]->data().end(), t.plane(static_cast<int>(i), 0));
    return t;
}

Tensor4 burst_batch(const std::vector<const TrainSample*>& batch) {
    std::vector<const Burst*> bursts;
    for (const auto* s : batch) bursts.push_back(&s->tiles);
    return stack_bursts(bursts);
}

Tensor4 scene_batch(const std::vector<const TrainSample*>& batch) {
    std::vector<const GrayImage*> imgs;
    for (const auto* s : batch) imgs.push_back(&s->scene);
    return image_batch(imgs);
}

Tensor4 mertens_batch(const std::vector<const TrainSample*>& batch) {
    std::vector<const GrayImage*> imgs;
    for (const auto* s : batch) imgs.push_back(&s->mertens);
    return image_batch(imgs);
}

template <typename T>
std::vector<std::vector<const T*>> chunks(const std::vector<T>& items, const std::vector<std::size_t>& order,
                                          int batch_size) {
    std::vector<std::vector<const T*>> out;
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
        std::vector<const T*> b;
        for (std::size_t j = i; j < std::min(order.size(), i + batch_size); ++j) b.push_back(&items[order[j]]);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<std::size_t> identity_order(std::size_t n) {
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), 0);
    return o;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
    auto o = identity_order(n);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(o[i - 1], o[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
    return o;
}

void scale_tensor(Tensor4& t, float f) {
    for (float& v : t.values()) v *= f;
}

void check_finite(double loss, const nn::GradientSet& grads, const char* who, int epoch, std::size_t batch) {
    bool ok = std::isfinite(loss);
    for (const auto& [name, g] : grads)
        for (float v : g) ok = ok && std::isfinite(v);
    if (!ok)
        throw TrainingError(std::string("non-finite ") + who + " loss or gradient at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch));
}

// Mean BCE of D on a batch, with parameter gradients scaled by `weight`.
double disc_term(const NuNet& d, const Tensor4& candidates, float label, float weight, nn::GradientSet* grads) {
    nn::Tape tape;
    const auto out = d.graph.forward({{"candidate", candidates}}, grads ? &tape : nullptr);
    Tensor4 g;
    const double loss = bce_with_logits(out.at("logit"), label, grads ? &g : nullptr);
    if (grads) {
        scale_tensor(g, weight);
        auto back = d.graph.backward(tape, {{"logit", g}}, {true, false});
        nn::add_gradients(*grads, back.params);
    }
    return loss;
}

// One discriminator update; returns 0.5 * (BCE(real, 1) + BCE(fake, 0)).
double disc_step(NuNet& d, nn::AdamState& st, const Tensor4& real, const Tensor4& fake, const TrainConfig& cfg,
                 int epoch, std::size_t batch) {
    nn::GradientSet grads;
    const double loss =
        0.5 * (disc_term(d, real, 1.0f, 0.5f, &grads) + disc_term(d, fake, 0.0f, 0.5f, &grads));
    check_finite(loss, grads, "discriminator", epoch, batch);
    nn::adam_step(d.graph.params(), nn::clip_gradients(std::move(grads), cfg.clipnorm), st);
    return loss;
}

struct GenLoss {
    double adversarial = 0.0;
    double content = 0.0;
    double penalty = 0.0;
    double total() const { return adversarial + content + penalty; }
};

// Generator objective on a batch; fills d(loss)/d(output) when requested.
GenLoss gen_objective(const NuNet& d, const Tensor4& fused, const Tensor4& mertens, const TrainConfig& cfg,
                      Tensor4* grad_fused) {
    GenLoss l;
    nn::Tape tape;
    const auto out = d.graph.forward({{"candidate", fused}}, grad_fused ? &tape : nullptr);
    Tensor4 gl;
    l.adversarial = bce_with_logits(out.at("logit"), 1.0f, grad_fused ? &gl : nullptr);
    if (grad_fused) *grad_fused = d.graph.backward(tape, {{"logit", gl}}, {false, true}).inputs.at("candidate");

    const auto f = fused.values();
    const auto m = mertens.values();
    double sum = 0.0;
    const double scale = cfg.content_weight / static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double diff = static_cast<double>(f[i]) - m[i];
        sum += std::fabs(diff);
        if (grad_fused) grad_fused->values()[i] += static_cast<float>(scale * ((diff > 0) - (diff < 0)));
    }
    l.content = scale * sum;
    return l;
}

Tensor4 generate(const MuNet& g, const Tensor4& bursts) { return g.graph.forward({{"burst", bursts}}).at("fused"); }

std::vector<Tensor4> generate_all(const MuNet& g, const std::vector<std::vector<const TrainSample*>>& batches) {
    std::vector<Tensor4> out(batches.size());
    for (std::size_t b = 0; b < batches.size(); ++b) out[b] = generate(g, burst_batch(batches[b]));
    return out;
}

nn::AdamState make_adam(const TrainConfig& cfg) {
    nn::AdamState st;
    st.lr = cfg.lr;
    st.lr_decay = cfg.lr_decay;
    st.epsilon = cfg.adam_epsilon;
    return st;
}

const std::vector<TrainSample>& eval_split(const TrainingSet& data) { return data.val.empty() ? data.train : data.val; }

void write_reports(const std::filesystem::path& path, const TrainResult& r) {
    std::string text = r.baseline.to_line() + "\n";
    for (const auto& e : r.epochs) text += e.to_line() + "\n";
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw IoError("cannot write reports: " + tmp);
        f << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void TrainConfig::validate() const {
    if (!seed) throw std::invalid_argument("training requires an explicit seed");
    if (epochs < 0 || pretrain_epochs < 0) throw std::invalid_argument("epoch counts must be nonnegative");
    if (!(lr > 0.0) || !(adam_epsilon > 0.0) || !(clipnorm > 0.0))
        throw std::invalid_argument("lr, adam_epsilon and clipnorm must be positive");
    if (lr_decay < 0.0 || l1_lambda < 0.0 || content_weight < 0.0)
        throw std::invalid_argument("lr_decay, l1_lambda and content_weight must be nonnegative");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
    if (!(divergence_threshold > 0.0)) throw std::invalid_argument("divergence_threshold must be positive");
    if (relative_step_floor < 0.0) throw std::invalid_argument("relative_step_floor must be nonnegative");
}

std::string TrainConfig::to_text() const {
    std::ostringstream o;
    o << "epochs=" << epochs << "\n"
      << "pretrain_epochs=" << pretrain_epochs << "\n"
      << "lr=" << fmt(lr) << "\n"
      << "lr_decay=" << fmt(lr_decay) << "\n"
      << "adam_epsilon=" << fmt(adam_epsilon) << "\n"
      << "l1_lambda=" << fmt(l1_lambda) << "\n"
      << "clipnorm=" << fmt(clipnorm) << "\n"
      << "batch_size=" << batch_size << "\n";
    if (seed) o << "seed=" << *seed << "\n";
    o << "content_weight=" << fmt(content_weight) << "\n"
      << "divergence_threshold=" << fmt(divergence_threshold) << "\n"
      << "relative_step_floor=" << fmt(relative_step_floor) << "\n";
    return o.str();
}

TrainConfig TrainConfig::parse(const std::string& text) {
    TrainConfig c;
    for (const auto& [k, v] : parse_kv(text, '\n')) {
        if (k == "epochs") c.epochs = std::stoi(v);
        else if (k == "pretrain_epochs") c.pretrain_epochs = std::stoi(v);
        else if (k == "lr") c.lr = std::stod(v);
        else if (k == "lr_decay") c.lr_decay = std::stod(v);
        else if (k == "adam_epsilon") c.adam_epsilon = std::stod(v);
        else if (k == "l1_lambda") c.l1_lambda = std::stod(v);
        else if (k == "clipnorm") c.clipnorm = std::stod(v);
        else if (k == "batch_size") c.batch_size = std::stoi(v);
        else if (k == "seed") c.seed = std::stoull(v);
        else if (k == "content_weight") c.content_weight = std::stod(v);
        else if (k == "divergence_threshold") c.divergence_threshold = std::stod(v);
        else if (k == "relative_step_floor") c.relative_step_floor = std::stod(v);
        else throw std::invalid_argument("unknown training config key '" + k + "'");
    }
    return c;
}

std::string EpochReport::to_line() const {
    return "epoch=" + std::to_string(epoch) + " g_loss=" + fmt(g_loss) + " d_loss=" + fmt(d_loss) +
           " mertens_dev=" + fmt(mertens_dev) + " train_g_loss=" + fmt(train_g_loss) +
           " train_d_loss=" + fmt(train_d_loss) + " checkpoint=" + (checkpoint.empty() ? "-" : checkpoint);
}

EpochReport EpochReport::parse_line(const std::string& line) {
    const auto kv = parse_kv(line, ' ');
    EpochReport r;
    try {
        r.epoch = std::stoi(kv.at("epoch"));
        r.g_loss = std::stod(kv.at("g_loss"));
        r.d_loss = std::stod(kv.at("d_loss"));
        r.mertens_dev = std::stod(kv.at("mertens_dev"));
        if (kv.count("train_g_loss")) r.train_g_loss = std::stod(kv.at("train_g_loss"));
        if (kv.count("train_d_loss")) r.train_d_loss = std::stod(kv.at("train_d_loss"));
        r.checkpoint = kv.at("checkpoint");
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("incomplete epoch report: " + line);
    }
    if (r.checkpoint == "-") r.checkpoint.clear();
    return r;
}

TrainSample make_train_sample(const Burst& frames, const GrayImage& scene, bool glare, std::size_t index,
                              double beta) {
    TrainSample s;
    s.index = index;
    s.tiles = register_burst(frames, beta).tiles;
    s.scene = scene;
    s.mertens = mertens_fuse(s.tiles, kDefaultSigma, kDefaultPyramidLevels);
    s.glare = glare;
    return s;
}

TrainingSet load_training_set(const std::filesystem::path& corpus_dir, double beta) {
    const Manifest m = read_manifest(corpus_dir);
    std::vector<TrainSample> all(m.entries.size());
    parallel_for(all.size(), [&](std::size_t i) {
        const LoadedSample s = load_sample(corpus_dir, m, i);
        all[i] = make_train_sample(s.frames, s.scene, s.entry.glare, s.entry.index, beta);
    });
    TrainingSet set;
    for (std::size_t i = 0; i < all.size(); ++i)
        (m.entries[i].split == Split::val ? set.val : set.train).push_back(std::move(all[i]));
    return set;
}

TrainingSet make_training_set(const SimParams& params, std::uint64_t seed, std::size_t n) {
    std::vector<TrainSample> all(n);
    parallel_for(n, [&](std::size_t i) {
        const SynthSample s = make_sample(params, sample_seed(seed, i));
        all[i] = make_train_sample(s.burst, s.scene, s.glare, i);
    });
    TrainingSet set;
    for (std::size_t i = 0; i < n; ++i) (split_for(i) == Split::val ? set.val : set.train).push_back(std::move(all[i]));
    return set;
}

PretrainResult pretrain_discriminator(NuNet& d, const MuNet& g, const TrainingSet& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.train.empty()) throw std::invalid_argument("pretrain_discriminator: empty dataset");
    const auto& eval = eval_split(data);
    const auto eval_batches = chunks(eval, identity_order(eval.size()), cfg.batch_size);
    const auto eval_fakes = generate_all(g, eval_batches);
    auto eval_loss = [&] {
        double total = 0.0;
        std::size_t n = 0;
        for (std::size_t b = 0; b < eval_batches.size(); ++b) {
            const double k = static_cast<double>(eval_batches[b].size());
            total += k * 0.5 * (disc_term(d, scene_batch(eval_batches[b]), 1.0f, 1.0f, nullptr) +
                                disc_term(d, eval_fakes[b], 0.0f, 1.0f, nullptr));
            n += eval_batches[b].size();
        }
        return total / static_cast<double>(n);
    };

    PretrainResult r;
    r.losses.push_back(eval_loss());
    if (cfg.pretrain_epochs == 0) return r;

    // The generator is frozen here, so its outputs are computed once per sample.
    std::vector<Tensor4> fakes(data.train.size());
    for (const auto& batch : chunks(data.train, identity_order(data.train.size()), cfg.batch_size)) {
        const Tensor4 out = generate(g, burst_batch(batch));
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Tensor4 one(nn::Shape4{1, 1, out.shape().h, out.shape().w});
            std::copy(out.plane(static_cast<int>(i), 0), out.plane(static_cast<int>(i), 0) + out.shape().plane(),
                      one.plane(0, 0));
            fakes[static_cast<std::size_t>(batch[i] - data.train.data())] = std::move(one);
        }
    }

    nn::AdamState st = make_adam(cfg);
    for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
        const auto order = shuffled_order(data.train.size(), mix_seed(*cfg.seed, 0x1000 + epoch));
        const auto batches = chunks(data.train, order, cfg.batch_size);
        std::size_t pos = 0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& batch = batches[b];
            const auto& first = fakes[order[pos]];
            Tensor4 fake(nn::Shape4{static_cast<int>(batch.size()), 1, first.shape().h, first.shape().w});
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Tensor4& f = fakes[order[pos + i]];
                std::copy(f.values().begin(), f.values().end(), fake.plane(static_cast<int>(i), 0));
            }
            pos += batch.size();
            disc_step(d, st, scene_batch(batch), fake, cfg, epoch, b);
        }
        r.losses.push_back(eval_loss());
    }
    return r;
}

EpochReport evaluate_epoch(const MuNet& g, const NuNet& d, const std::vector<TrainSample>& eval,
                           const TrainConfig& cfg) {
    EpochReport r;
    if (eval.empty()) return r;
    const double penalty = nn::l1_penalty(g.graph.params(), cfg.l1_lambda).loss;
    double gl = 0.0, dl = 0.0, dev = 0.0;
    for (const auto& batch : chunks(eval, identity_order(eval.size()), cfg.batch_size)) {
        const Tensor4 fused = generate(g, burst_batch(batch));
        const Tensor4 mert = mertens_batch(batch);
        const double k = static_cast<double>(batch.size());
        gl += k * (gen_objective(d, fused, mert, cfg, nullptr).total() + penalty);
        dl += k * 0.5 * (disc_term(d, scene_batch(batch), 1.0f, 1.0f, nullptr) + disc_term(d, fused, 0.0f, 1.0f, nullptr));
        for (std::size_t i = 0; i < batch.size(); ++i)
            dev += max_abs_diff(clamp(tensor_plane(fused, static_cast<int>(i))), batch[i]->mertens);
    }
    const double n = static_cast<double>(eval.size());
    r.g_loss = gl / n;
    r.d_loss = dl / n;
    r.mertens_dev = dev / n;
    return r;
}

TrainResult train_gan(MuNet& g, NuNet& d, const TrainingSet& data, const TrainConfig& cfg,
                      const std::filesystem::path& checkpoint_dir) {
    cfg.validate();
    if (data.train.empty()) throw std::invalid_argument("train_gan: empty dataset");
    std::error_code ec;
    std::filesystem::create_directories(checkpoint_dir, ec);
    if (ec || !std::filesystem::is_directory(checkpoint_dir))
        throw IoError("cannot create checkpoint directory: " + checkpoint_dir.string());

    const auto& eval = eval_split(data);
    TrainResult result;
    result.baseline = evaluate_epoch(g, d, eval, cfg);
    result.baseline.epoch = 0;

    nn::AdamState gst = make_adam(cfg), dst = make_adam(cfg);
    if (cfg.relative_step_floor > 0.0) gst.step_scale = nn::relative_step_scales(g.graph.params(), cfg.relative_step_floor);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = shuffled_order(data.train.size(), mix_seed(*cfg.seed, 0x2000 + epoch));
        const auto batches = chunks(data.train, order, cfg.batch_size);
        double g_sum = 0.0, d_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& batch = batches[b];
            const Tensor4 bursts = burst_batch(batch);
            nn::Tape tape;
            const Tensor4 fused = g.graph.forward({{"burst", bursts}}, &tape).at("fused");

            d_sum += disc_step(d, dst, scene_batch(batch), fused, cfg, epoch, b) * static_cast<double>(batch.size());

            Tensor4 grad_fused;
            const GenLoss gl = gen_objective(d, fused, mertens_batch(batch), cfg, &grad_fused);
            auto grads = g.graph.backward(tape, {{"fused", grad_fused}}, {true, false}).params;
            const auto pen = nn::l1_penalty(g.graph.params(), cfg.l1_lambda);
            nn::add_gradients(grads, pen.grads);
            const double loss = gl.total() + pen.loss;
            check_finite(loss, grads, "generator", epoch, b);
            nn::adam_step(g.graph.params(), nn::clip_gradients(std::move(grads), cfg.clipnorm), gst);
            g_sum += loss * static_cast<double>(batch.size());
        }

        EpochReport rep = evaluate_epoch(g, d, eval, cfg);
        rep.epoch = epoch;
        rep.train_g_loss = g_sum / static_cast<double>(data.train.size());
        rep.train_d_loss = d_sum / static_cast<double>(data.train.size());
        char name[64];
        std::snprintf(name, sizeof name, "gen_epoch_%03d.munw", epoch);
        rep.checkpoint = name;
        nn::save_weights(g.graph.params(), checkpoint_dir / name);
        if (!std::isfinite(rep.g_loss) || !std::isfinite(rep.d_loss))
            throw TrainingError("non-finite validation loss after epoch " + std::to_string(epoch));
        result.epochs.push_back(rep);
        write_reports(checkpoint_dir / "reports.txt", result);
    }
    nn::save_weights(d.graph.params(), checkpoint_dir / "discriminator.munw");
    return result;
}

SelectionPolicy parse_policy(const std::string& name) {
    if (name == "min_generator_loss") return SelectionPolicy::min_generator_loss;
    if (name == "max_epoch_before_divergence") return SelectionPolicy::max_epoch_before_divergence;
    throw std::invalid_argument("unknown selection policy '" + name + "'");
}

std::string select_checkpoint(const std::vector<EpochReport>& reports, SelectionPolicy policy, double threshold) {
    if (reports.empty()) throw std::invalid_argument("select_checkpoint: no epoch reports");
    if (policy == SelectionPolicy::min_generator_loss) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < reports.size(); ++i)
            if (reports[i].g_loss <= reports[best].g_loss) best = i;
        return reports[best].checkpoint;
    }
    for (std::size_t i = reports.size(); i-- > 0;)
        if (reports[i].mertens_dev < threshold) return reports[i].checkpoint;
    throw TrainingError("degenerate run: every epoch deviates from Mertens by at least " + std::to_string(threshold));
}

std::vector<EpochReport> read_reports(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open reports: " + path.string());
    std::vector<EpochReport> out;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty()) out.push_back(EpochReport::parse_line(line));
    return out;
}

}  // namespace hdru
