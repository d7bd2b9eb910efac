/**
 * training.hpp - adversarial fine-tuning of the generator
 *
 * Discriminator: BCE on real tiles (label 1) vs generator outputs (label 0).
 * Generator: BCE(D(G(x)), 1) + content_weight * mean |G(x) - mertens(x)| + L1 kernel penalty.
 * Every update clips each gradient tensor to clipnorm, then takes an ADAM step.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdru/munet.hpp"
#include "hdru/nunet.hpp"
#include "hdru/synth.hpp"

namespace hdru {

struct TrainConfig {
    int epochs = 100;
    int pretrain_epochs = 10;
    double lr = 0.005;
    double lr_decay = 1e-6;
    double adam_epsilon = 1e-3;
    double l1_lambda = 1e-3;
    double clipnorm = 0.1;
    int batch_size = 8;
    std::optional<std::uint64_t> seed;
    double content_weight = 10.0;
    double divergence_threshold = 0.15;
    /// Generator steps scaled by each tensor's initial RMS (floored here); 0 = plain ADAM.
    double relative_step_floor = 1e-3;

    /// Throws std::invalid_argument on a missing seed or out-of-range field.
    void validate() const;
    /// key=value lines, one per field, round-trippable through parse.
    std::string to_text() const;
    static TrainConfig parse(const std::string& text);
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A registered 256x256 burst with its targets.
struct TrainSample {
    std::size_t index = 0;
    Burst tiles;
    GrayImage scene;    ///< ground truth, the "real" class
    GrayImage mertens;  ///< classical fusion, the content anchor
    bool glare = false;
};

struct TrainingSet {
    std::vector<TrainSample> train;
    std::vector<TrainSample> val;
};

TrainSample make_train_sample(const Burst& frames, const GrayImage& scene, bool glare, std::size_t index,
                              double beta = kDefaultKaiserBeta);

/// Registers and crops every sample of a corpus, split per the manifest.
TrainingSet load_training_set(const std::filesystem::path& corpus_dir, double beta = kDefaultKaiserBeta);

/// In-memory set from simulator samples (index % 10 == 9 goes to validation).
TrainingSet make_training_set(const SimParams& params, std::uint64_t seed, std::size_t n);

struct PretrainResult {
    /// Discriminator BCE on the evaluation split: [0] before training, [e] after epoch e.
    std::vector<double> losses;
};

/// Trains d to separate real tiles from the frozen generator's outputs.
PretrainResult pretrain_discriminator(NuNet& d, const MuNet& g, const TrainingSet& data, const TrainConfig& cfg);

struct EpochReport {
    int epoch = 0;
    double g_loss = 0.0;       ///< generator loss on the validation split
    double d_loss = 0.0;       ///< discriminator loss on the validation split
    double mertens_dev = 0.0;  ///< mean over validation of L-inf |G - mertens|
    double train_g_loss = 0.0;
    double train_d_loss = 0.0;
    std::string checkpoint;    ///< file name inside the checkpoint directory

    std::string to_line() const;
    static EpochReport parse_line(const std::string& line);
};

struct TrainResult {
    EpochReport baseline;  ///< epoch 0, before any generator update
    std::vector<EpochReport> epochs;
};

/// Runs cfg.epochs of alternating updates, writing gen_epoch_XXX.munw and
/// reports.txt into checkpoint_dir after every epoch.
TrainResult train_gan(MuNet& g, NuNet& d, const TrainingSet& data, const TrainConfig& cfg,
                      const std::filesystem::path& checkpoint_dir);

/// Validation losses of the current networks (the values reported per epoch).
EpochReport evaluate_epoch(const MuNet& g, const NuNet& d, const std::vector<TrainSample>& eval,
                           const TrainConfig& cfg);

enum class SelectionPolicy { min_generator_loss, max_epoch_before_divergence };

SelectionPolicy parse_policy(const std::string& name);

/// Checkpoint chosen from the reports. Throws TrainingError("degenerate run")
/// when no epoch stays under the divergence threshold.
std::string select_checkpoint(const std::vector<EpochReport>& reports, SelectionPolicy policy,
                              double threshold = 0.15);

std::vector<EpochReport> read_reports(const std::filesystem::path& path);

}  // namespace hdru
