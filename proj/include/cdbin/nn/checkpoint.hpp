#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cdbin/nn/tensor.hpp"

namespace cdbin::nn {

/// Versioned binary container of named tensors plus named counters and notes.
///
/// Byte layout (all integers little-endian):
///   magic   8 bytes  "CDBNCKP1"
///   u32     tensor count
///   per tensor:
///     u16   name length, followed by the name bytes
///     u8    dtype: 0 = float32, 1 = float64
///     u8    rank (1..4)
///     u32   dims[rank]
///     raw   values, dtype-sized, little-endian, C row-major order
///   u32     counter count
///   per counter:
///     u16   name length, name bytes
///     u64   value
///   u32     note count
///   per note:
///     u16   name length, name bytes
///     u32   value length, value bytes (UTF-8)
struct Checkpoint {
    struct Entry {
        std::vector<int> shape;
        std::vector<double> data; // held widened; float32 round-trips exactly
        std::uint8_t dtype = 0;
    };

    std::map<std::string, Entry> tensors;
    std::map<std::string, std::uint64_t> counters;
    std::map<std::string, std::string> notes;

    template <typename Real>
    void putTensor(const std::string& name, const Tensor<Real>& t) {
        Entry e;
        e.shape = t.shape();
        e.dtype = sizeof(Real) == 8 ? 1 : 0;
        e.data.assign(t.data(), t.data() + t.size());
        tensors[name] = std::move(e);
    }

    template <typename Real>
    Tensor<Real> getTensor(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw Error("checkpoint: missing tensor '" + name + "'");
        std::vector<Real> d(it->second.data.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<Real>(it->second.data[i]);
        return Tensor<Real>::fromData(it->second.shape, std::move(d));
    }

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);
};

} // namespace cdbin::nn
