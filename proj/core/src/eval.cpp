#include "hdru/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hdru/metrics.hpp"
#include "hdru/parallel.hpp"
#include "hdru/synth.hpp"

namespace hdru {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool selected(const ManifestEntry& e, SampleFilter f) {
    switch (f) {
        case SampleFilter::all: return true;
        case SampleFilter::glare: return e.glare;
        case SampleFilter::clear: return !e.glare;
        case SampleFilter::val: return e.split == Split::val;
    }
    return true;
}

}  // namespace

SampleFilter parse_filter(const std::string& name) {
    if (name == "all") return SampleFilter::all;
    if (name == "glare") return SampleFilter::glare;
    if (name == "clear") return SampleFilter::clear;
    if (name == "val") return SampleFilter::val;
    throw std::invalid_argument("unknown sample filter '" + name + "'");
}

std::vector<MethodSummary> summarize(const std::vector<EvalRow>& rows) {
    std::map<std::string, MethodSummary> by;
    for (const auto& r : rows) {
        auto& s = by[r.method];
        s.method = r.method;
        ++s.count;
        s.mean_psnr += r.psnr;
        s.mean_ssim += r.ssim;
        s.mean_millis += r.millis;
    }
    std::vector<MethodSummary> out;
    for (auto& [name, s] : by) {
        s.mean_psnr /= static_cast<double>(s.count);
        s.mean_ssim /= static_cast<double>(s.count);
        s.mean_millis /= static_cast<double>(s.count);
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const MethodSummary& a, const MethodSummary& b) {
        return a.mean_psnr > b.mean_psnr;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
    return out;
}

EvalReport evaluate_corpus(const std::filesystem::path& corpus_dir, const EvalOptions& options) {
    if (options.methods.empty()) throw std::invalid_argument("evaluate_corpus: no methods requested");
    const Manifest manifest = read_manifest(corpus_dir);
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (!selected(manifest.entries[i], options.filter)) continue;
        picked.push_back(i);
        if (options.limit && picked.size() == options.limit) break;
    }
    const std::size_t nm = options.methods.size();
    std::vector<EvalRow> rows(picked.size() * nm);
    parallel_for(picked.size(), [&](std::size_t j) {
        const LoadedSample s = load_sample(corpus_dir, manifest, picked[j]);
        const RegisteredBurst reg = register_burst(s.frames, options.beta);
        FuseOptions fo = options.fuse;
        fo.exposures = s.exposures;
        for (std::size_t m = 0; m < nm; ++m) {
            const auto t0 = std::chrono::steady_clock::now();
            const GrayImage out = fuse(options.methods[m], reg.tiles, fo);
            const auto t1 = std::chrono::steady_clock::now();
            EvalRow& r = rows[j * nm + m];
            r.index = s.entry.index;
            r.dir = s.entry.dir;
            r.glare = s.entry.glare;
            r.method = method_name(options.methods[m]);
            r.psnr = psnr(out, s.scene);
            r.ssim = ssim(out, s.scene);
            r.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
    });
    EvalReport report;
    report.rows = std::move(rows);
    report.summary = summarize(report.rows);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& r : report.rows)
        out << "sample index=" << r.index << " dir=" << r.dir << " glare=" << (r.glare ? 1 : 0)
            << " method=" << r.method << " psnr=" << fixed(r.psnr, 4) << " ssim=" << fixed(r.ssim, 5) << "\n";
    for (const auto& s : report.summary)
        out << "summary rank=" << s.rank << " method=" << s.method << " count=" << s.count
            << " mean_psnr=" << fixed(s.mean_psnr, 4) << " mean_ssim=" << fixed(s.mean_ssim, 5) << "\n";
    return out.str();
}

std::string format_timings(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& r : report.rows)
        out << "timing index=" << r.index << " method=" << r.method << " ms=" << fixed(r.millis, 3) << "\n";
    for (const auto& s : report.summary)
        out << "timing_summary method=" << s.method << " mean_ms=" << fixed(s.mean_millis, 3) << "\n";
    return out.str();
}

}  // namespace hdru
