/**
 * synth.cpp - procedural scenes, optical forward model, corpus files
 */

#include "hdru/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hdru/image_io.hpp"
#include "hdru/munet.hpp"
#include "hdru/parallel.hpp"
#include "hdru/rng.hpp"

namespace hdru {

namespace {

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * r + 1);
    double total = 0.0;
    for (int i = -r; i <= r; ++i) total += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& v : k) v /= total;
    GrayImage tmp(img.width(), img.height()), out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * img.clamped(x + i, y);
            tmp.at(x, y) = static_cast<float>(acc);
        }
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.clamped(x, y + i);
            out.at(x, y) = static_cast<float>(acc);
        }
    return out;
}

int reflect(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
    return i;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_shift(const Shift& s) { return std::to_string(s.dx) + "," + std::to_string(s.dy); }

Shift parse_shift(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw IoError("malformed shift '" + s + "'");
    return Shift{std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1)), 0.0};
}

template <std::size_t N>
std::string fmt_list(const std::array<double, N>& v) {
    std::string out;
    for (std::size_t i = 0; i < N; ++i) out += (i ? "," : "") + fmt_double(v[i]);
    return out;
}

template <std::size_t N>
std::array<double, N> parse_list(const std::string& s) {
    std::array<double, N> v{};
    std::stringstream ss(s);
    std::string item;
    for (std::size_t i = 0; i < N; ++i) {
        if (!std::getline(ss, item, ',')) throw IoError("malformed list '" + s + "'");
        v[i] = std::stod(item);
    }
    return v;
}

std::map<std::string, std::string> parse_fields(const std::string& line) {
    std::map<std::string, std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return fields;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp);
        f << text;
        if (!f) throw IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// Additive glare in context coordinates: soft blobs and elongated streaks.
GrayImage render_glare(Rng& rng, const SimParams& p, int size) {
    GrayImage g(size, size, 0.0f);
    const int items = static_cast<int>(rng.uniform_int(1, 3));
    const double lo = (size - kTileSize) / 2.0 - 40.0, hi = (size + kTileSize) / 2.0 + 40.0;
    for (int i = 0; i < items; ++i) {
        const double cx = rng.uniform(lo, hi), cy = rng.uniform(lo, hi);
        const double amp = rng.uniform(p.glare_amplitude_min, p.glare_amplitude_max);
        const bool streak = rng.bernoulli(0.5);
        const double along = streak ? rng.uniform(60.0, 200.0) : rng.uniform(15.0, 60.0);
        const double across = streak ? rng.uniform(5.0, 15.0) : along;
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double u = (c * dx + s * dy) / along, v = (-s * dx + c * dy) / across;
                const double e = 0.5 * (u * u + v * v);
                if (e < 30.0) g.at(x, y) += static_cast<float>(amp * std::exp(-e));
            }
    }
    return g;
}

}  // namespace

GrayImage generate_scene(std::uint64_t seed) {
    Rng rng(seed);
    const int n = kTileSize;
    GrayImage s(n, n);
    const double gx = rng.uniform(), gy = rng.uniform();
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            s.at(x, y) = static_cast<float>(0.3 + 0.4 * (gx * x / n + gy * y / n) / 1.5);
    const int ellipses = static_cast<int>(rng.uniform_int(2, 5));
    for (int e = 0; e < ellipses; ++e) {
        const double cx = rng.uniform(0.2, 0.8), cy = rng.uniform(0.2, 0.8);
        const double a = rng.uniform(0.05, 0.3), b = rng.uniform(0.05, 0.3);
        const double delta = rng.uniform(-0.4, 0.4);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double u = (static_cast<double>(x) / n - cx) / a, v = (static_cast<double>(y) / n - cy) / b;
                if (u * u + v * v < 1.0) s.at(x, y) += static_cast<float>(delta);
            }
    }
    GrayImage noise(n, n);
    for (float& v : noise.pixels()) v = static_cast<float>(rng.normal());
    const GrayImage texture = gaussian_blur(noise, 1.5);
    for (std::size_t i = 0; i < s.size(); ++i) s.pixels()[i] += 0.24f * texture.pixels()[i];

    const auto [mn, mx] = std::minmax_element(s.pixels().begin(), s.pixels().end());
    const float lo = *mn, span = *mx - *mn;
    for (float& v : s.pixels()) v = 0.05f + 0.9f * (v - lo) / span;
    return s;
}

GrayImage embed_scene(const GrayImage& scene, int size) {
    if (size < scene.width() || size < scene.height()) throw std::invalid_argument("embed_scene: context too small");
    if (size - scene.width() > 2 * (scene.width() - 1) || size - scene.height() > 2 * (scene.height() - 1))
        throw std::invalid_argument("embed_scene: context too large to mirror-pad");
    const int ox = (size - scene.width()) / 2, oy = (size - scene.height()) / 2;
    GrayImage ctx(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            ctx.at(x, y) = scene.at(reflect(x - ox, scene.width()), reflect(y - oy, scene.height()));
    return ctx;
}

SynthSample render_burst(const GrayImage& scene, const SimParams& params, std::uint64_t seed) {
    for (double t : params.nd_transmittances)
        if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("render_burst: transmittances must lie in (0,1]");
    if (!(params.glare_probability >= 0.0 && params.glare_probability <= 1.0))
        throw std::invalid_argument("render_burst: glare probability must lie in [0,1]");
    if (params.noise_sigma < 0.0 || params.min_shift < 0 || params.max_shift < params.min_shift)
        throw std::invalid_argument("render_burst: invalid noise or shift range");

    Rng rng(seed);
    SynthSample s;
    s.seed = seed;
    s.scene = scene;
    s.exposures.t.assign(params.nd_transmittances.begin(), params.nd_transmittances.end());
    const GrayImage ctx = embed_scene(scene);
    GrayImage radiance = ctx;
    for (float& v : radiance.pixels())
        v = static_cast<float>(params.base_exposure * std::pow(static_cast<double>(v), params.gamma));

    s.glare = rng.bernoulli(params.glare_probability);
    s.glare_polarization = rng.uniform(0.0, 180.0);
    for (int k = 0; k < 3; ++k) {
        if (k == kReferenceCamera) continue;
        auto magnitude = [&] {
            const int m = static_cast<int>(rng.uniform_int(params.min_shift, params.max_shift));
            return rng.bernoulli(0.5) ? m : -m;
        };
        s.shifts[k].dx = magnitude();
        s.shifts[k].dy = magnitude();
    }
    for (int k = 0; k < 3; ++k) {
        Rng cam(mix_seed(seed, 100 + k));
        GrayImage glare(kContextSize, kContextSize, 0.0f);
        if (s.glare) {
            glare = render_glare(cam, params, kContextSize);
            const double d = (params.polarizer_angles[k] - s.glare_polarization) * std::numbers::pi / 180.0;
            const float att = static_cast<float>(std::cos(d) * std::cos(d));
            for (float& v : glare.pixels()) v *= att;
        }
        const float t = static_cast<float>(params.nd_transmittances[k]);
        GrayImage frame(kContextSize, kContextSize);
        for (std::size_t i = 0; i < frame.size(); ++i)
            frame.pixels()[i] = t * (radiance.pixels()[i] + glare.pixels()[i]);
        frame = apply_shift(frame, s.shifts[k]);
        if (params.noise_sigma > 0.0)
            for (float& v : frame.pixels()) v += static_cast<float>(cam.normal(0.0, params.noise_sigma));
        s.burst.push_back(clamp(std::move(frame)));
        s.glare_masks.push_back(apply_shift(glare, s.shifts[k]));
    }
    return s;
}

std::uint64_t sample_seed(std::uint64_t corpus_seed, std::size_t index) { return mix_seed(corpus_seed, index); }

SynthSample make_sample(const SimParams& params, std::uint64_t seed) {
    return render_burst(generate_scene(mix_seed(seed, 0)), params, mix_seed(seed, 1));
}

const char* split_name(Split s) { return s == Split::train ? "train" : "val"; }

Split split_for(std::size_t index) { return index % 10 == 9 ? Split::val : Split::train; }

Manifest generate_corpus(std::size_t n, const SimParams& params, std::uint64_t seed,
                         const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create corpus directory: " + out_dir.string());

    Manifest m;
    m.seed = seed;
    m.params = params;
    m.entries.resize(n);
    parallel_for(n, [&](std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu", i);
        ManifestEntry& e = m.entries[i];
        e.index = i;
        e.dir = name;
        e.seed = sample_seed(seed, i);
        e.split = split_for(i);
        const SynthSample s = make_sample(params, e.seed);
        e.glare = s.glare;
        e.shifts = s.shifts;

        const auto dir = out_dir / e.dir;
        std::filesystem::create_directories(dir);
        for (int k = 0; k < 3; ++k)
            save_image(s.burst[k], dir / ("cam" + std::to_string(k + 1) + ".pgm"), BitDepth::u16);
        save_image(s.scene, dir / "scene.pgm", BitDepth::u16);
        std::ostringstream meta;
        meta << "seed=" << e.seed << "\n"
             << "split=" << split_name(e.split) << "\n"
             << "glare=" << (s.glare ? 1 : 0) << "\n"
             << "glare_polarization=" << fmt_double(s.glare_polarization) << "\n";
        for (int k = 0; k < 3; ++k) meta << "shift" << k + 1 << "=" << fmt_shift(s.shifts[k]) << "\n";
        meta << "exposures=" << fmt_list(params.nd_transmittances) << "\n"
             << "polarizer_angles=" << fmt_list(params.polarizer_angles) << "\n";
        write_text(dir / "meta.txt", meta.str());
    });

    std::ostringstream man;
    man << "format=hdru-corpus\n"
        << "version=1\n"
        << "count=" << n << "\n"
        << "seed=" << seed << "\n"
        << "transmittances=" << fmt_list(params.nd_transmittances) << "\n"
        << "polarizer_angles=" << fmt_list(params.polarizer_angles) << "\n"
        << "glare_probability=" << fmt_double(params.glare_probability) << "\n"
        << "noise_sigma=" << fmt_double(params.noise_sigma) << "\n"
        << "base_exposure=" << fmt_double(params.base_exposure) << "\n"
        << "gamma=" << fmt_double(params.gamma) << "\n"
        << "min_shift=" << params.min_shift << "\n"
        << "max_shift=" << params.max_shift << "\n"
        << "glare_amplitude=" << fmt_double(params.glare_amplitude_min) << ","
        << fmt_double(params.glare_amplitude_max) << "\n";
    for (const auto& e : m.entries) {
        man << "sample index=" << e.index << " dir=" << e.dir << " seed=" << e.seed << " split=" << split_name(e.split)
            << " glare=" << (e.glare ? 1 : 0);
        for (int k = 0; k < 3; ++k) man << " shift" << k + 1 << "=" << fmt_shift(e.shifts[k]);
        man << "\n";
    }
    write_text(out_dir / "manifest.txt", man.str());
    return m;
}

Manifest read_manifest(const std::filesystem::path& corpus_dir) {
    const auto path = corpus_dir / "manifest.txt";
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path.string());
    Manifest m;
    std::string line;
    std::size_t expected = 0;
    bool has_count = false;
    try {
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            if (line.rfind("sample ", 0) == 0) {
                auto fields = parse_fields(line);
                ManifestEntry e;
                e.index = std::stoull(fields.at("index"));
                e.dir = fields.at("dir");
                e.seed = std::stoull(fields.at("seed"));
                e.split = fields.at("split") == "val" ? Split::val : Split::train;
                e.glare = fields.at("glare") == "1";
                for (int k = 0; k < 3; ++k) e.shifts[k] = parse_shift(fields.at("shift" + std::to_string(k + 1)));
                m.entries.push_back(e);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw IoError("malformed manifest line: " + line);
            const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
            if (key == "count") {
                expected = std::stoull(value);
                has_count = true;
            } else if (key == "seed") m.seed = std::stoull(value);
            else if (key == "transmittances") m.params.nd_transmittances = parse_list<3>(value);
            else if (key == "polarizer_angles") m.params.polarizer_angles = parse_list<3>(value);
            else if (key == "glare_probability") m.params.glare_probability = std::stod(value);
            else if (key == "noise_sigma") m.params.noise_sigma = std::stod(value);
            else if (key == "base_exposure") m.params.base_exposure = std::stod(value);
            else if (key == "gamma") m.params.gamma = std::stod(value);
            else if (key == "min_shift") m.params.min_shift = std::stoi(value);
            else if (key == "max_shift") m.params.max_shift = std::stoi(value);
            else if (key == "glare_amplitude") {
                const auto a = parse_list<2>(value);
                m.params.glare_amplitude_min = a[0];
                m.params.glare_amplitude_max = a[1];
            }
        }
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
    if (!has_count || expected != m.entries.size())
        throw IoError("manifest " + path.string() + " lists " + std::to_string(m.entries.size()) +
                      " samples but declares " + std::to_string(expected));
    m.params.seed = m.seed;
    return m;
}

LoadedSample load_sample(const std::filesystem::path& corpus_dir, const Manifest& manifest, std::size_t i) {
    LoadedSample s;
    s.entry = manifest.entries.at(i);
    const auto dir = corpus_dir / s.entry.dir;
    for (int k = 1; k <= 3; ++k) s.frames.push_back(load_image(dir / ("cam" + std::to_string(k) + ".pgm")));
    s.scene = load_image(dir / "scene.pgm");
    s.exposures.t.assign(manifest.params.nd_transmittances.begin(), manifest.params.nd_transmittances.end());
    return s;
}

}  // namespace hdru
