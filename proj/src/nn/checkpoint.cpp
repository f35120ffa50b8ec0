#include "cdbin/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace cdbin::nn {

namespace {

constexpr char kMagic[8] = {'C', 'D', 'B', 'N', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void putRaw(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T getRaw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error("checkpoint: truncated file");
    return v;
}

void putString(std::ostream& out, const std::string& s) {
    if (s.size() > 0xFFFF) throw Error("checkpoint: name too long");
    putRaw<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string getString(std::istream& in) {
    const auto len = getRaw<std::uint16_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw Error("checkpoint: truncated file");
    return s;
}

} // namespace

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("checkpoint: cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));

    putRaw<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, e] : tensors) {
        putString(out, name);
        putRaw<std::uint8_t>(out, e.dtype);
        putRaw<std::uint8_t>(out, static_cast<std::uint8_t>(e.shape.size()));
        for (int d : e.shape) putRaw<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        if (e.dtype == 0) {
            for (double v : e.data) putRaw<float>(out, static_cast<float>(v));
        } else {
            for (double v : e.data) putRaw<double>(out, v);
        }
    }

    putRaw<std::uint32_t>(out, static_cast<std::uint32_t>(counters.size()));
    for (const auto& [name, v] : counters) {
        putString(out, name);
        putRaw<std::uint64_t>(out, v);
    }

    putRaw<std::uint32_t>(out, static_cast<std::uint32_t>(notes.size()));
    for (const auto& [name, v] : notes) {
        putString(out, name);
        putRaw<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
        out.write(v.data(), static_cast<std::streamsize>(v.size()));
    }
    if (!out) throw Error("checkpoint: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error("checkpoint: bad magic or unsupported version in " + path.string());

    Checkpoint ckpt;
    const auto tensorCount = getRaw<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < tensorCount; ++i) {
        const std::string name = getString(in);
        Entry e;
        e.dtype = getRaw<std::uint8_t>(in);
        if (e.dtype > 1) throw Error("checkpoint: unknown dtype");
        const auto rank = getRaw<std::uint8_t>(in);
        if (rank < 1 || rank > 4) throw Error("checkpoint: bad tensor rank");
        std::size_t count = 1;
        for (int r = 0; r < rank; ++r) {
            const auto d = getRaw<std::uint32_t>(in);
            e.shape.push_back(static_cast<int>(d));
            count *= d;
        }
        e.data.resize(count);
        for (std::size_t j = 0; j < count; ++j)
            e.data[j] = e.dtype == 0 ? static_cast<double>(getRaw<float>(in)) : getRaw<double>(in);
        ckpt.tensors[name] = std::move(e);
    }
    const auto counterCount = getRaw<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < counterCount; ++i) {
        const std::string name = getString(in);
        ckpt.counters[name] = getRaw<std::uint64_t>(in);
    }
    const auto noteCount = getRaw<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < noteCount; ++i) {
        const std::string name = getString(in);
        const auto len = getRaw<std::uint32_t>(in);
        std::string value(len, '\0');
        in.read(value.data(), len);
        if (!in) throw Error("checkpoint: truncated file");
        ckpt.notes[name] = std::move(value);
    }
    return ckpt;
}

} // namespace cdbin::nn
