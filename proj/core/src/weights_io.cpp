/**
 * weights_io.cpp - MUNW container read/write
 */

#include "hdru/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hdru/image_io.hpp"

namespace hdru::nn {

namespace {

template <typename T>
void put(std::string& out, T value) {
    static_assert(std::endian::native == std::endian::little, "container writer assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        need(sizeof(T), what);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string take(std::size_t n, const char* what) {
        need(n, what);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n)
            throw WeightsFormatError(std::string("weights file truncated while reading ") + what);
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_weights(const ParamStore& store) {
    std::string out = "MUNW";
    put<std::uint32_t>(out, kWeightsVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(store.params().size()));
    for (const auto& p : store.params()) {
        if (p.name.size() > 0xFFFF) throw WeightsFormatError("parameter name too long: " + p.name);
        if (p.dims.size() > 0xFF) throw WeightsFormatError("parameter rank too large: " + p.name);
        put<std::uint16_t>(out, static_cast<std::uint16_t>(p.name.size()));
        out += p.name;
        put<std::uint8_t>(out, static_cast<std::uint8_t>(p.dims.size()));
        for (auto d : p.dims) put<std::uint32_t>(out, d);
        for (float v : p.values) put<float>(out, v);
    }
    return out;
}

ParamStore deserialize_weights(const std::string& bytes) {
    Reader r(bytes);
    if (r.take(4, "magic") != "MUNW") throw WeightsFormatError("not a weights file (bad magic)");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kWeightsVersion)
        throw WeightsFormatError("unsupported weights version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>("entry count");
    ParamStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = r.get<std::uint16_t>("name length");
        const std::string name = r.take(len, "name");
        const auto rank = r.get<std::uint8_t>("rank");
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) d = r.get<std::uint32_t>("dims");
        if (store.contains(name)) throw WeightsFormatError("duplicate parameter '" + name + "'");
        Param& p = store.add(name, dims);
        for (float& v : p.values) v = r.get<float>("payload");
    }
    if (!r.done()) throw WeightsFormatError("trailing bytes after the last weights entry");
    return store;
}

void save_weights(const ParamStore& store, const std::filesystem::path& path) {
    const std::string bytes = serialize_weights(store);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

ParamStore load_weights(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open weights: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return deserialize_weights(ss.str());
}

void load_weights_into(ParamStore& dst, const std::filesystem::path& path) {
    const ParamStore src = load_weights(path);
    assign_params(dst, src);
}

}  // namespace hdru::nn
