#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cdbin/nn/checkpoint.hpp"
#include "cdbin/nn/tape.hpp"

namespace cdbin::gan {

using Real = float;
using Tensorf = nn::Tensor<Real>;
using Paramf = nn::Param<Real>;
using Tapef = nn::Tape<Real>;
using Varf = Tapef::Var;

using NamedParams = std::vector<std::pair<std::string, Paramf*>>;

struct GeneratorConfig {
    int inChannels = 64;                     // one channel per zig-zag position
    std::vector<int> channels = {128, 256, 512}; // widths of the down levels
    int headChannels = 64;                   // coefficient-plane group before synthesis
    bool pixelInput = false;                 // true: 1-channel pixel map in, no synthesis stage

    bool operator==(const GeneratorConfig&) const = default;
};

struct GlobalDiscConfig {
    int inputSize = 256;
    std::vector<int> channels = {32, 64};    // 3x3 stride-2 convs with BN + leaky ReLU
    std::vector<int> dense = {256, 64};      // hidden widths; a final 1 is appended

    bool operator==(const GlobalDiscConfig&) const = default;
};

struct LocalDiscConfig {
    int inputSize = 32;
    std::vector<int> channels = {32, 64, 64, 128, 128}; // five 3x3 convs with BN + leaky ReLU
    std::vector<int> strides = {1, 2, 1, 2, 1};
    std::vector<int> dense = {512, 256, 64};

    bool operator==(const LocalDiscConfig&) const = default;
};

struct ModelConfig {
    GeneratorConfig generator;
    GlobalDiscConfig globalDisc;
    LocalDiscConfig localDisc;
    std::uint64_t initSeed = 0;

    bool operator==(const ModelConfig&) const = default;
};

namespace layers {

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in, int out, int kernel, int stride, int pad, std::mt19937_64& rng);
    Varf apply(Tapef& tape, Varf x);
    void collect(const std::string& prefix, NamedParams& out);

    Paramf kernel, bias;
    int stride = 1, pad = 0;
};

class TransposedConv2d {
public:
    TransposedConv2d() = default;
    TransposedConv2d(int in, int out, int kernel, int stride, std::mt19937_64& rng);
    Varf apply(Tapef& tape, Varf x);
    void collect(const std::string& prefix, NamedParams& out);

    Paramf kernel, bias;
    int stride = 2;
};

class BatchNorm {
public:
    BatchNorm() : running(1) {}
    explicit BatchNorm(int channels);
    Varf apply(Tapef& tape, Varf x, bool training);
    void collect(const std::string& prefix, NamedParams& out);

    Paramf gamma, beta;
    nn::BnStats<Real> running;
};

class Dense {
public:
    Dense() = default;
    Dense(int in, int out, std::mt19937_64& rng);
    Varf apply(Tapef& tape, Varf x);
    void collect(const std::string& prefix, NamedParams& out);

    Paramf weight, bias;
};

} // namespace layers

/// U-Net over the coefficient grid: down blocks with max pooling, mirrored up
/// path with skip concatenation, a head producing the coefficient-plane group,
/// the fixed block-synthesis stage, and a sigmoid. The synthesis weights are
/// the IDCT basis and are not parameters.
class GeneratorNet {
public:
    GeneratorNet() = default;
    GeneratorNet(const GeneratorConfig& cfg, std::mt19937_64& rng);

    Varf forward(Tapef& tape, Varf input);
    NamedParams namedParams();
    const GeneratorConfig& config() const { return cfg_; }

private:
    struct ConvBlock {
        layers::Conv2d c1, c2;
        Varf apply(Tapef& tape, Varf x);
        void collect(const std::string& prefix, NamedParams& out);
    };

    GeneratorConfig cfg_;
    std::vector<ConvBlock> down_;
    ConvBlock bottleneck_;
    std::vector<layers::TransposedConv2d> up_;
    std::vector<ConvBlock> upBlocks_;
    layers::Conv2d head_;
};

/// Two stride-2 convolutions with batch norm and leaky ReLU, one average
/// pooling layer, then the fully connected chain to a sigmoid probability.
class GlobalDiscriminator {
public:
    GlobalDiscriminator() = default;
    GlobalDiscriminator(const GlobalDiscConfig& cfg, std::mt19937_64& rng);

    Varf forward(Tapef& tape, Varf input, bool training);
    NamedParams namedParams();
    void forEachBn(const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn);
    const GlobalDiscConfig& config() const { return cfg_; }

private:
    GlobalDiscConfig cfg_;
    std::vector<layers::Conv2d> convs_;
    std::vector<layers::BatchNorm> norms_;
    std::vector<layers::Dense> dense_;
};

/// Five convolutions with batch norm and leaky ReLU and no pooling, then four
/// fully connected layers to a sigmoid probability over one 32x32 patch.
class LocalDiscriminator {
public:
    LocalDiscriminator() = default;
    LocalDiscriminator(const LocalDiscConfig& cfg, std::mt19937_64& rng);

    Varf forward(Tapef& tape, Varf input, bool training);
    NamedParams namedParams();
    void forEachBn(const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn);
    const LocalDiscConfig& config() const { return cfg_; }

private:
    LocalDiscConfig cfg_;
    std::vector<layers::Conv2d> convs_;
    std::vector<layers::BatchNorm> norms_;
    std::vector<layers::Dense> dense_;
};

/// Generator plus both discriminators, addressable as named parameters.
class DdganModel {
public:
    DdganModel() = default;
    explicit DdganModel(const ModelConfig& cfg);

    GeneratorNet generator;
    GlobalDiscriminator globalDisc;
    LocalDiscriminator localDisc;

    const ModelConfig& config() const { return cfg_; }

    NamedParams generatorParams() { return generator.namedParams(); }
    NamedParams discriminatorParams();
    NamedParams allParams();

    /// Writes parameters, batch-norm running statistics, and the architecture
    /// into a checkpoint container. Optimizer state may be merged in afterward.
    nn::Checkpoint toCheckpoint();
    void saveCheckpoint(const std::filesystem::path& path);
    static DdganModel fromCheckpoint(const nn::Checkpoint& ckpt);
    static DdganModel loadCheckpoint(const std::filesystem::path& path);

private:
    void forEachBn(const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn);
    void restoreStats(const nn::Checkpoint& ckpt);

    ModelConfig cfg_;
};

std::string modelConfigToJson(const ModelConfig& cfg);
ModelConfig modelConfigFromJson(const std::string& text);

} // namespace cdbin::gan
