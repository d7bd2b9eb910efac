/**
 * eval.hpp - scoring fusion methods against simulator ground truth
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdru/pipeline.hpp"

namespace hdru {

struct EvalRow {
    std::size_t index = 0;
    std::string dir;
    bool glare = false;
    std::string method;
    double psnr = 0.0;
    double ssim = 0.0;
    double millis = 0.0;  ///< wall time of the fuse call
};

struct MethodSummary {
    std::string method;
    std::size_t count = 0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_millis = 0.0;
    int rank = 0;  ///< 1 = highest mean PSNR
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<MethodSummary> summary;  ///< ordered by rank
};

enum class SampleFilter { all, glare, clear, val };

SampleFilter parse_filter(const std::string& name);

struct EvalOptions {
    std::vector<FusionMethod> methods{FusionMethod::mertens, FusionMethod::munet, FusionMethod::debevec,
                                      FusionMethod::single};
    FuseOptions fuse;
    double beta = kDefaultKaiserBeta;
    SampleFilter filter = SampleFilter::all;
    std::size_t limit = 0;  ///< 0 = every matching sample
};

/// Registers every selected sample, fuses with each method and scores the tile.
EvalReport evaluate_corpus(const std::filesystem::path& corpus_dir, const EvalOptions& options);

/// Summary statistics recomputed from rows; ranks by mean PSNR, ties by name.
std::vector<MethodSummary> summarize(const std::vector<EvalRow>& rows);

/// Line-delimited report without timings (deterministic for fixed inputs).
std::string format_report(const EvalReport& report);
/// Timing lines, kept apart so the main report stays reproducible.
std::string format_timings(const EvalReport& report);

}  // namespace hdru
