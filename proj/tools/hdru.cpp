/**
 * hdru.cpp - command-line front end: simulate, register, fuse, init-weights, train, eval
 *
 * Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
 */

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hdru/eval.hpp"
#include "hdru/image_io.hpp"
#include "hdru/munet.hpp"
#include "hdru/nunet.hpp"
#include "hdru/pipeline.hpp"
#include "hdru/rng.hpp"
#include "hdru/synth.hpp"
#include "hdru/training.hpp"
#include "hdru/weights_io.hpp"

namespace fs = std::filesystem;
using namespace hdru;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

void require_parent(const fs::path& out) {
    const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) throw IoError("output directory does not exist: " + parent.string());
}

ExposureSpec parse_exposures(const std::string& text) {
    ExposureSpec e;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            e.t.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("--exposures: not a number: '" + item + "'");
        }
    }
    if (e.t.size() != 3) throw UsageError("--exposures needs three comma-separated values");
    return e;
}

MuNet load_generator(const std::string& weights) {
    MuNet net = build_munet();
    nn::load_weights_into(net.graph.params(), weights);
    return net;
}

struct SimulateArgs {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::string out;
    SimParams params;
};

int run_simulate(const SimulateArgs& a) {
    SimParams p = a.params;
    p.seed = a.seed;
    const Manifest m = generate_corpus(a.count, p, a.seed, a.out);
    std::size_t val = 0, glare = 0;
    for (const auto& e : m.entries) {
        val += e.split == Split::val;
        glare += e.glare;
    }
    std::cout << "samples=" << m.entries.size() << " train=" << m.entries.size() - val << " val=" << val
              << " glare=" << glare << " out=" << a.out << "\n";
    return 0;
}

struct RegisterArgs {
    std::vector<std::string> inputs;
    std::string out;
    double beta = kDefaultKaiserBeta;
    int size = kTileSize;
};

int run_register(const RegisterArgs& a) {
    if (!fs::is_directory(a.out)) throw IoError("output directory does not exist: " + a.out);
    Burst frames;
    for (const auto& p : a.inputs) frames.push_back(load_image(p));
    const RegisteredBurst r = register_burst(frames, a.beta, a.size);
    for (int k = 0; k < 3; ++k) {
        save_image(r.tiles[k], fs::path(a.out) / ("cam" + std::to_string(k + 1) + ".pgm"), BitDepth::u16);
        std::printf("camera=%d dx=%d dy=%d confidence=%.6f\n", k + 1, r.shifts[k].dx, r.shifts[k].dy,
                    r.shifts[k].confidence);
    }
    return 0;
}

struct FuseArgs {
    std::string method;
    std::vector<std::string> inputs;
    std::string out;
    bool do_register = false;
    std::string weights;
    float sigma = 0.2f;
    int levels = 8;
    std::string exposures;
    double beta = kDefaultKaiserBeta;
    int bit_depth = 8;
};

int run_fuse(const FuseArgs& a) {
    FusionMethod method;
    try {
        method = parse_method(a.method);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (method == FusionMethod::munet && a.weights.empty()) throw UsageError("--method munet requires --weights");
    FuseOptions opt;
    opt.sigma = a.sigma;
    opt.levels = a.levels;
    if (!a.exposures.empty()) opt.exposures = parse_exposures(a.exposures);
    require_parent(a.out);

    std::optional<MuNet> net;
    if (method == FusionMethod::munet) {
        net = load_generator(a.weights);
        opt.net = &*net;
    }
    Burst tiles;
    for (const auto& p : a.inputs) tiles.push_back(load_image(p));
    if (a.do_register) tiles = register_burst(tiles, a.beta).tiles;
    const GrayImage out = fuse(method, tiles, opt);
    save_image(out, a.out, a.bit_depth == 16 ? BitDepth::u16 : BitDepth::u8);
    return 0;
}

struct InitArgs {
    std::string out;
    float sigma = 0.2f;
};

int run_init_weights(const InitArgs& a) {
    require_parent(a.out);
    MuNet net = build_munet();
    init_mertens(net, a.sigma);
    nn::save_weights(net.graph.params(), a.out);
    std::cout << "parameters=" << param_count(net) << " out=" << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string data_dir;
    std::string out = "checkpoints";
    std::string init;
    std::string policy = "max_epoch_before_divergence";
    std::uint64_t seed = 0;
    TrainConfig cfg;
};

int run_train(TrainArgs a) {
    a.cfg.seed = a.seed;
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    SelectionPolicy policy;
    try {
        policy = parse_policy(a.policy);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec || !fs::is_directory(a.out)) throw IoError("cannot create checkpoint directory: " + a.out);

    const TrainingSet data = load_training_set(a.data_dir);
    MuNet g = build_munet();
    if (a.init.empty()) init_mertens(g);
    else nn::load_weights_into(g.graph.params(), a.init);
    NuNet d = build_nunet(mix_seed(*a.cfg.seed, 0xD15C));
    write_file(fs::path(a.out) / "config.txt", a.cfg.to_text());

    const PretrainResult pre = pretrain_discriminator(d, g, data, a.cfg);
    for (std::size_t e = 0; e < pre.losses.size(); ++e)
        std::printf("pretrain epoch=%zu d_loss=%.6f\n", e, pre.losses[e]);
    const TrainResult r = train_gan(g, d, data, a.cfg, a.out);
    std::cout << r.baseline.to_line() << "\n";
    for (const auto& e : r.epochs) std::cout << e.to_line() << "\n";
    if (!r.epochs.empty()) {
        try {
            std::cout << "selected=" << select_checkpoint(r.epochs, policy, a.cfg.divergence_threshold) << "\n";
        } catch (const TrainingError& e) {
            std::cerr << "warning: " << e.what() << "\n";
        }
    }
    return 0;
}

struct EvalArgs {
    std::string data_dir;
    std::string report;
    std::string weights;
    std::vector<std::string> methods{"mertens", "munet", "debevec", "single"};
    std::string filter = "all";
    std::size_t limit = 0;
    double beta = kDefaultKaiserBeta;
    float sigma = 0.2f;
    int levels = 8;
};

int run_eval(const EvalArgs& a) {
    EvalOptions opt;
    opt.methods.clear();
    try {
        for (const auto& m : a.methods) opt.methods.push_back(parse_method(m));
        opt.filter = parse_filter(a.filter);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    opt.limit = a.limit;
    opt.beta = a.beta;
    opt.fuse.sigma = a.sigma;
    opt.fuse.levels = a.levels;
    if (!a.report.empty()) require_parent(a.report);

    std::optional<MuNet> net;
    for (auto m : opt.methods)
        if (m == FusionMethod::munet && !net) {
            if (a.weights.empty()) {
                net = build_munet();
                init_mertens(*net);
            } else {
                net = load_generator(a.weights);
            }
        }
    if (net) opt.fuse.net = &*net;

    const EvalReport report = evaluate_corpus(a.data_dir, opt);
    const std::string text = format_report(report);
    if (!a.report.empty()) {
        write_file(a.report, text);
        write_file(a.report + ".timing", format_timings(report));
    }
    for (const auto& s : report.summary)
        std::printf("rank=%d method=%s count=%zu mean_psnr=%.4f mean_ssim=%.5f mean_ms=%.2f\n", s.rank,
                    s.method.c_str(), s.count, s.mean_psnr, s.mean_ssim, s.mean_millis);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hdru - grayscale HDR exposure fusion toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic burst corpus");
    simulate->add_option("--count", sim.count, "Number of samples")->required();
    simulate->add_option("--seed", sim.seed, "Corpus seed")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--glare-probability", sim.params.glare_probability)->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--noise-sigma", sim.params.noise_sigma)->check(CLI::NonNegativeNumber);
    simulate->add_option("--base-exposure", sim.params.base_exposure)->check(CLI::PositiveNumber);
    simulate->add_option("--gamma", sim.params.gamma)->check(CLI::PositiveNumber);

    RegisterArgs reg;
    auto* registr = app.add_subcommand("register", "Align three frames to camera 2 and crop");
    registr->add_option("--inputs", reg.inputs, "cam1 cam2 cam3")->required()->expected(3);
    registr->add_option("--out", reg.out, "Output directory")->required();
    registr->add_option("--beta", reg.beta, "Kaiser window beta")->check(CLI::NonNegativeNumber);
    registr->add_option("--size", reg.size, "Crop size")->check(CLI::PositiveNumber);

    FuseArgs fu;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a three-image burst");
    fuse_cmd->add_option("--method", fu.method, "mertens | munet | debevec | single")->required();
    fuse_cmd->add_option("--inputs", fu.inputs, "cam1 cam2 cam3")->required()->expected(3);
    fuse_cmd->add_option("--out", fu.out, "Output image (.png or .pgm)")->required();
    fuse_cmd->add_flag("--register", fu.do_register, "Register full frames to camera 2 and crop 256x256 first");
    fuse_cmd->add_option("--weights", fu.weights, "MU-Net weights (munet)");
    fuse_cmd->add_option("--sigma", fu.sigma, "Well-exposedness sigma")->check(CLI::PositiveNumber);
    fuse_cmd->add_option("--levels", fu.levels, "Pyramid levels")->check(CLI::PositiveNumber);
    fuse_cmd->add_option("--exposures", fu.exposures, "t1,t2,t3 (debevec)");
    fuse_cmd->add_option("--beta", fu.beta, "Kaiser window beta")->check(CLI::NonNegativeNumber);
    fuse_cmd->add_option("--bit-depth", fu.bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

    InitArgs ini;
    auto* init = app.add_subcommand("init-weights", "Write Mertens-initialized MU-Net weights");
    init->add_option("--out", ini.out, "Weights file")->required();
    init->add_option("--sigma", ini.sigma, "Well-exposedness sigma")->check(CLI::PositiveNumber);

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Adversarial fine-tuning on a corpus");
    train->add_option("--data-dir", tr.data_dir, "Corpus directory")->required();
    train->add_option("--seed", tr.seed, "Training seed")->required();
    train->add_option("--out", tr.out, "Checkpoint directory");
    train->add_option("--init-weights", tr.init, "Starting generator weights (default: Mertens init)");
    train->add_option("--policy", tr.policy, "min_generator_loss | max_epoch_before_divergence");
    train->add_option("--epochs", tr.cfg.epochs)->check(CLI::NonNegativeNumber);
    train->add_option("--pretrain-epochs", tr.cfg.pretrain_epochs)->check(CLI::NonNegativeNumber);
    train->add_option("--lr", tr.cfg.lr)->check(CLI::PositiveNumber);
    train->add_option("--lr-decay", tr.cfg.lr_decay)->check(CLI::NonNegativeNumber);
    train->add_option("--adam-epsilon", tr.cfg.adam_epsilon)->check(CLI::PositiveNumber);
    train->add_option("--l1-lambda", tr.cfg.l1_lambda)->check(CLI::NonNegativeNumber);
    train->add_option("--clipnorm", tr.cfg.clipnorm)->check(CLI::PositiveNumber);
    train->add_option("--batch-size", tr.cfg.batch_size)->check(CLI::PositiveNumber);
    train->add_option("--content-weight", tr.cfg.content_weight)->check(CLI::NonNegativeNumber);
    train->add_option("--divergence-threshold", tr.cfg.divergence_threshold)->check(CLI::PositiveNumber);
    train->add_option("--relative-step-floor", tr.cfg.relative_step_floor, "0 disables relative generator steps")->check(CLI::NonNegativeNumber);

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score fusion methods against ground truth");
    eval->add_option("--data-dir", ev.data_dir, "Corpus directory")->required();
    eval->add_option("--report", ev.report, "Report file (timings go to <report>.timing)");
    eval->add_option("--weights", ev.weights, "MU-Net weights (default: Mertens init)");
    eval->add_option("--methods", ev.methods, "Methods to score")->delimiter(',');
    eval->add_option("--filter", ev.filter, "all | glare | clear | val");
    eval->add_option("--limit", ev.limit, "Maximum number of samples");
    eval->add_option("--beta", ev.beta)->check(CLI::NonNegativeNumber);
    eval->add_option("--sigma", ev.sigma)->check(CLI::PositiveNumber);
    eval->add_option("--levels", ev.levels)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == simulate) return run_simulate(sim);
        if (sub == registr) return run_register(reg);
        if (sub == fuse_cmd) return run_fuse(fu);
        if (sub == init) return run_init_weights(ini);
        if (sub == train) return run_train(tr);
        if (sub == eval) return run_eval(ev);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << sub->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
