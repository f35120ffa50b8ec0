#include "cdbin/gan/model.hpp"

#include <cmath>

#include <json.hpp>

#include "cdbin/jpeg/dct.hpp"

namespace cdbin::gan {

namespace {

Tensorf kaimingNormal(std::vector<int> shape, int fanIn, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fanIn));
    Tensorf t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(dist(rng));
    return t;
}

} // namespace

namespace layers {

Conv2d::Conv2d(int in, int out, int kernel, int strideArg, int padArg, std::mt19937_64& rng)
    : kernel(kaimingNormal({out, in, kernel, kernel}, in * kernel * kernel, rng),
             nn::ParamRole::Kernel),
      bias(Tensorf({out}, Real(0)), nn::ParamRole::Bias),
      stride(strideArg),
      pad(padArg) {}

Varf Conv2d::apply(Tapef& tape, Varf x) {
    return tape.conv2d(x, tape.param(kernel), tape.param(bias), stride, pad);
}

void Conv2d::collect(const std::string& prefix, NamedParams& out) {
    out.emplace_back(prefix + ".kernel", &kernel);
    out.emplace_back(prefix + ".bias", &bias);
}

TransposedConv2d::TransposedConv2d(int in, int out, int kernel, int strideArg,
                                   std::mt19937_64& rng)
    : kernel(kaimingNormal({in, out, kernel, kernel}, in * kernel * kernel, rng),
             nn::ParamRole::Kernel),
      bias(Tensorf({out}, Real(0)), nn::ParamRole::Bias),
      stride(strideArg) {}

Varf TransposedConv2d::apply(Tapef& tape, Varf x) {
    return tape.transposedConv2d(x, tape.param(kernel), tape.param(bias), stride);
}

void TransposedConv2d::collect(const std::string& prefix, NamedParams& out) {
    out.emplace_back(prefix + ".kernel", &kernel);
    out.emplace_back(prefix + ".bias", &bias);
}

BatchNorm::BatchNorm(int channels)
    : gamma(Tensorf({channels}, Real(1)), nn::ParamRole::BnGamma),
      beta(Tensorf({channels}, Real(0)), nn::ParamRole::BnBeta),
      running(channels) {}

Varf BatchNorm::apply(Tapef& tape, Varf x, bool training) {
    return tape.batchNorm2d(x, tape.param(gamma), tape.param(beta), &running, training);
}

void BatchNorm::collect(const std::string& prefix, NamedParams& out) {
    out.emplace_back(prefix + ".gamma", &gamma);
    out.emplace_back(prefix + ".beta", &beta);
}

Dense::Dense(int in, int out, std::mt19937_64& rng)
    : weight(kaimingNormal({in, out}, in, rng), nn::ParamRole::Kernel),
      bias(Tensorf({out}, Real(0)), nn::ParamRole::Bias) {}

Varf Dense::apply(Tapef& tape, Varf x) {
    return tape.dense(x, tape.param(weight), tape.param(bias));
}

void Dense::collect(const std::string& prefix, NamedParams& out) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
}

} // namespace layers

Varf GeneratorNet::ConvBlock::apply(Tapef& tape, Varf x) {
    return tape.leakyRelu(c2.apply(tape, tape.leakyRelu(c1.apply(tape, x))));
}

void GeneratorNet::ConvBlock::collect(const std::string& prefix, NamedParams& out) {
    c1.collect(prefix + ".conv1", out);
    c2.collect(prefix + ".conv2", out);
}

GeneratorNet::GeneratorNet(const GeneratorConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
    if (cfg.channels.empty()) throw Error("GeneratorNet: at least one level required");
    int prev = cfg.pixelInput ? 1 : cfg.inChannels;
    for (int c : cfg.channels) {
        down_.push_back({layers::Conv2d(prev, c, 3, 1, 1, rng), layers::Conv2d(c, c, 3, 1, 1, rng)});
        prev = c;
    }
    bottleneck_ = {layers::Conv2d(prev, prev, 3, 1, 1, rng), layers::Conv2d(prev, prev, 3, 1, 1, rng)};

    // Mirrored up path: up-convolution from the deeper level, skip concat, block.
    for (int i = static_cast<int>(cfg.channels.size()) - 1; i >= 0; --i) {
        const int c = cfg.channels[i];
        up_.push_back(layers::TransposedConv2d(prev, c, 2, 2, rng));
        upBlocks_.push_back(
            {layers::Conv2d(2 * c, c, 3, 1, 1, rng), layers::Conv2d(c, c, 3, 1, 1, rng)});
        prev = c;
    }
    head_ = layers::Conv2d(prev, cfg.pixelInput ? 1 : cfg.headChannels, 1, 1, 0, rng);
}

Varf GeneratorNet::forward(Tapef& tape, Varf input) {
    const auto& shape = tape.value(input).shape();
    if (shape.size() != 4) throw Error("generator: rank-4 input required");
    const int expectedCh = cfg_.pixelInput ? 1 : cfg_.inChannels;
    if (shape[1] != expectedCh)
        throw Error("generator: expected " + std::to_string(expectedCh) + " input channels, got " +
                    std::to_string(shape[1]));
    const int levels = static_cast<int>(cfg_.channels.size());
    if (shape[2] % (1 << levels) != 0 || shape[3] % (1 << levels) != 0)
        throw Error("generator: grid not divisible by the down-sampling factor");

    std::vector<Varf> skips;
    Varf h = input;
    for (auto& block : down_) {
        h = block.apply(tape, h);
        skips.push_back(h);
        h = tape.maxPool2(h);
    }
    h = bottleneck_.apply(tape, h);
    for (std::size_t i = 0; i < up_.size(); ++i) {
        h = up_[i].apply(tape, h);
        h = tape.concatChannels(h, skips[skips.size() - 1 - i]);
        h = upBlocks_[i].apply(tape, h);
    }
    h = head_.apply(tape, h);
    if (!cfg_.pixelInput) h = tape.blockSynthesis8x8(h, jpeg::idctBasisZigzag());
    return tape.sigmoid(h);
}

NamedParams GeneratorNet::namedParams() {
    NamedParams out;
    for (std::size_t i = 0; i < down_.size(); ++i)
        down_[i].collect("gen.down" + std::to_string(i), out);
    bottleneck_.collect("gen.bottleneck", out);
    for (std::size_t i = 0; i < up_.size(); ++i) {
        up_[i].collect("gen.up" + std::to_string(i), out);
        upBlocks_[i].collect("gen.upblock" + std::to_string(i), out);
    }
    head_.collect("gen.head", out);
    return out;
}

GlobalDiscriminator::GlobalDiscriminator(const GlobalDiscConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
    int prev = 1;
    int size = cfg.inputSize;
    for (int c : cfg.channels) {
        convs_.push_back(layers::Conv2d(prev, c, 3, 2, 1, rng));
        norms_.push_back(layers::BatchNorm(c));
        prev = c;
        size = (size + 2 - 3) / 2 + 1;
    }
    size /= 2; // average pooling
    int features = prev * size * size;
    for (int d : cfg.dense) {
        dense_.push_back(layers::Dense(features, d, rng));
        features = d;
    }
    dense_.push_back(layers::Dense(features, 1, rng));
}

Varf GlobalDiscriminator::forward(Tapef& tape, Varf input, bool training) {
    const auto& shape = tape.value(input).shape();
    if (shape.size() != 4 || shape[1] != 1 || shape[2] != cfg_.inputSize ||
        shape[3] != cfg_.inputSize)
        throw Error("global discriminator: expected (N,1," + std::to_string(cfg_.inputSize) + "," +
                    std::to_string(cfg_.inputSize) + ") input");

    Varf h = input;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        h = convs_[i].apply(tape, h);
        h = norms_[i].apply(tape, h, training);
        h = tape.leakyRelu(h);
    }
    h = tape.avgPool2(h);
    h = tape.flatten2(h);
    for (std::size_t i = 0; i + 1 < dense_.size(); ++i)
        h = tape.leakyRelu(dense_[i].apply(tape, h));
    return tape.sigmoid(dense_.back().apply(tape, h));
}

NamedParams GlobalDiscriminator::namedParams() {
    NamedParams out;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        convs_[i].collect("dglobal.conv" + std::to_string(i), out);
        norms_[i].collect("dglobal.bn" + std::to_string(i), out);
    }
    for (std::size_t i = 0; i < dense_.size(); ++i)
        dense_[i].collect("dglobal.fc" + std::to_string(i), out);
    return out;
}

void GlobalDiscriminator::forEachBn(
    const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn) {
    for (std::size_t i = 0; i < norms_.size(); ++i)
        fn("dglobal.bn" + std::to_string(i), norms_[i].running);
}

LocalDiscriminator::LocalDiscriminator(const LocalDiscConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
    if (cfg.channels.size() != cfg.strides.size())
        throw Error("local discriminator: channels/strides length mismatch");
    int prev = 1;
    int size = cfg.inputSize;
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        convs_.push_back(layers::Conv2d(prev, cfg.channels[i], 3, cfg.strides[i], 1, rng));
        norms_.push_back(layers::BatchNorm(cfg.channels[i]));
        prev = cfg.channels[i];
        size = (size + 2 - 3) / cfg.strides[i] + 1;
    }
    int features = prev * size * size; // no pooling layer
    for (int d : cfg.dense) {
        dense_.push_back(layers::Dense(features, d, rng));
        features = d;
    }
    dense_.push_back(layers::Dense(features, 1, rng));
}

Varf LocalDiscriminator::forward(Tapef& tape, Varf input, bool training) {
    const auto& shape = tape.value(input).shape();
    if (shape.size() != 4 || shape[1] != 1 || shape[2] != cfg_.inputSize ||
        shape[3] != cfg_.inputSize)
        throw Error("local discriminator: expected (N,1," + std::to_string(cfg_.inputSize) + "," +
                    std::to_string(cfg_.inputSize) + ") patches");

    Varf h = input;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        h = convs_[i].apply(tape, h);
        h = norms_[i].apply(tape, h, training);
        h = tape.leakyRelu(h);
    }
    h = tape.flatten2(h);
    for (std::size_t i = 0; i + 1 < dense_.size(); ++i)
        h = tape.leakyRelu(dense_[i].apply(tape, h));
    return tape.sigmoid(dense_.back().apply(tape, h));
}

NamedParams LocalDiscriminator::namedParams() {
    NamedParams out;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        convs_[i].collect("dlocal.conv" + std::to_string(i), out);
        norms_[i].collect("dlocal.bn" + std::to_string(i), out);
    }
    for (std::size_t i = 0; i < dense_.size(); ++i)
        dense_[i].collect("dlocal.fc" + std::to_string(i), out);
    return out;
}

void LocalDiscriminator::forEachBn(
    const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn) {
    for (std::size_t i = 0; i < norms_.size(); ++i)
        fn("dlocal.bn" + std::to_string(i), norms_[i].running);
}

DdganModel::DdganModel(const ModelConfig& cfg) : cfg_(cfg) {
    std::mt19937_64 rng(cfg.initSeed);
    generator = GeneratorNet(cfg.generator, rng);
    globalDisc = GlobalDiscriminator(cfg.globalDisc, rng);
    localDisc = LocalDiscriminator(cfg.localDisc, rng);
}

NamedParams DdganModel::discriminatorParams() {
    NamedParams out = globalDisc.namedParams();
    for (auto& p : localDisc.namedParams()) out.push_back(std::move(p));
    return out;
}

NamedParams DdganModel::allParams() {
    NamedParams out = generator.namedParams();
    for (auto& p : discriminatorParams()) out.push_back(std::move(p));
    return out;
}

void DdganModel::forEachBn(
    const std::function<void(const std::string&, nn::BnStats<Real>&)>& fn) {
    globalDisc.forEachBn(fn);
    localDisc.forEachBn(fn);
}

nn::Checkpoint DdganModel::toCheckpoint() {
    nn::Checkpoint ckpt;
    for (auto& [name, p] : allParams()) ckpt.putTensor(name, p->value);
    forEachBn([&](const std::string& name, nn::BnStats<Real>& stats) {
        ckpt.putTensor(name + ".running_mean", stats.mean);
        ckpt.putTensor(name + ".running_var", stats.var);
    });
    ckpt.notes["model_config"] = modelConfigToJson(cfg_);
    return ckpt;
}

void DdganModel::saveCheckpoint(const std::filesystem::path& path) { toCheckpoint().save(path); }

DdganModel DdganModel::fromCheckpoint(const nn::Checkpoint& ckpt) {
    auto it = ckpt.notes.find("model_config");
    if (it == ckpt.notes.end()) throw Error("checkpoint: missing model_config note");
    DdganModel model(modelConfigFromJson(it->second));
    for (auto& [name, p] : model.allParams()) {
        Tensorf loaded = ckpt.getTensor<Real>(name);
        if (!loaded.sameShape(p->value))
            throw Error("checkpoint: shape mismatch for " + name);
        p->value = std::move(loaded);
    }
    model.restoreStats(ckpt);
    return model;
}

DdganModel DdganModel::loadCheckpoint(const std::filesystem::path& path) {
    return fromCheckpoint(nn::Checkpoint::load(path));
}

void DdganModel::restoreStats(const nn::Checkpoint& ckpt) {
    forEachBn([&](const std::string& name, nn::BnStats<Real>& stats) {
        stats.mean = ckpt.getTensor<Real>(name + ".running_mean");
        stats.var = ckpt.getTensor<Real>(name + ".running_var");
    });
}

std::string modelConfigToJson(const ModelConfig& cfg) {
    nlohmann::json j;
    j["generator"] = {{"in_channels", cfg.generator.inChannels},
                      {"channels", cfg.generator.channels},
                      {"head_channels", cfg.generator.headChannels},
                      {"pixel_input", cfg.generator.pixelInput}};
    j["global_disc"] = {{"input_size", cfg.globalDisc.inputSize},
                        {"channels", cfg.globalDisc.channels},
                        {"dense", cfg.globalDisc.dense}};
    j["local_disc"] = {{"input_size", cfg.localDisc.inputSize},
                       {"channels", cfg.localDisc.channels},
                       {"strides", cfg.localDisc.strides},
                       {"dense", cfg.localDisc.dense}};
    j["init_seed"] = cfg.initSeed;
    return j.dump();
}

ModelConfig modelConfigFromJson(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelConfig cfg;
    cfg.generator.inChannels = j.at("generator").at("in_channels").get<int>();
    cfg.generator.channels = j.at("generator").at("channels").get<std::vector<int>>();
    cfg.generator.headChannels = j.at("generator").at("head_channels").get<int>();
    cfg.generator.pixelInput = j.at("generator").at("pixel_input").get<bool>();
    cfg.globalDisc.inputSize = j.at("global_disc").at("input_size").get<int>();
    cfg.globalDisc.channels = j.at("global_disc").at("channels").get<std::vector<int>>();
    cfg.globalDisc.dense = j.at("global_disc").at("dense").get<std::vector<int>>();
    cfg.localDisc.inputSize = j.at("local_disc").at("input_size").get<int>();
    cfg.localDisc.channels = j.at("local_disc").at("channels").get<std::vector<int>>();
    cfg.localDisc.strides = j.at("local_disc").at("strides").get<std::vector<int>>();
    cfg.localDisc.dense = j.at("local_disc").at("dense").get<std::vector<int>>();
    cfg.initSeed = j.at("init_seed").get<std::uint64_t>();
    return cfg;
}

} // namespace cdbin::gan
