#include "cdbin/gan/train.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

namespace cdbin::gan {

void TrainConfig::validate() const {
    if (epochs < 0) throw Error("train config: epochs must be >= 0");
    if (batchSize < 1) throw Error("train config: batch size must be >= 1");
    if (patchSize < 1 || tileSize % patchSize != 0)
        throw Error("train config: tile size must be divisible by patch size");
    if (tileSize % 8 != 0) throw Error("train config: tile size must be divisible by 8");
    if (quality < 1 || quality > 100) throw Error("train config: quality must be in [1,100]");
    if (discEvery < 1) throw Error("train config: discriminator cadence must be >= 1");
    if (!(discLrScale > 0.0)) throw Error("train config: discriminator lr scale must be positive");
    weights.validate();
}

std::string trainConfigToJson(const TrainConfig& cfg) {
    nlohmann::json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batchSize;
    j["seed"] = cfg.seed;
    j["loss_weights"] = {{"mu", cfg.weights.mu}, {"sigma", cfg.weights.sigma},
                         {"lambda", cfg.weights.lambda}};
    j["adam"] = {{"learning_rate", cfg.adam.learningRate},
                 {"beta1", cfg.adam.beta1},
                 {"beta2", cfg.adam.beta2},
                 {"epsilon", cfg.adam.epsilon}};
    j["focal"] = {{"alpha", cfg.focalAlpha}, {"gamma", cfg.focalGamma}};
    j["patch_size"] = cfg.patchSize;
    j["tile_size"] = cfg.tileSize;
    j["quality"] = cfg.quality;
    j["disc_every"] = cfg.discEvery;
    j["disc_lr_scale"] = cfg.discLrScale;
    j["model"] = nlohmann::json::parse(modelConfigToJson(cfg.model));
    return j.dump(2);
}

TrainConfig trainConfigFromJson(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batchSize = j.value("batch_size", cfg.batchSize);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("loss_weights")) {
        cfg.weights.mu = j["loss_weights"].value("mu", cfg.weights.mu);
        cfg.weights.sigma = j["loss_weights"].value("sigma", cfg.weights.sigma);
        cfg.weights.lambda = j["loss_weights"].value("lambda", cfg.weights.lambda);
    }
    if (j.contains("adam")) {
        cfg.adam.learningRate = j["adam"].value("learning_rate", cfg.adam.learningRate);
        cfg.adam.beta1 = j["adam"].value("beta1", cfg.adam.beta1);
        cfg.adam.beta2 = j["adam"].value("beta2", cfg.adam.beta2);
        cfg.adam.epsilon = j["adam"].value("epsilon", cfg.adam.epsilon);
    }
    if (j.contains("focal")) {
        cfg.focalAlpha = j["focal"].value("alpha", cfg.focalAlpha);
        cfg.focalGamma = j["focal"].value("gamma", cfg.focalGamma);
    }
    cfg.patchSize = j.value("patch_size", cfg.patchSize);
    cfg.tileSize = j.value("tile_size", cfg.tileSize);
    cfg.quality = j.value("quality", cfg.quality);
    cfg.discEvery = j.value("disc_every", cfg.discEvery);
    cfg.discLrScale = j.value("disc_lr_scale", cfg.discLrScale);
    if (j.contains("model")) cfg.model = modelConfigFromJson(j["model"].dump());
    return cfg;
}

Tensorf coefficientGrid(const jpeg::CoefficientTensor& t) {
    Tensorf grid({jpeg::kBlockSize, t.blocksHigh, t.blocksWide});
    const std::size_t cells = static_cast<std::size_t>(t.blocksHigh) * t.blocksWide;
    for (int br = 0; br < t.blocksHigh; ++br)
        for (int bc = 0; bc < t.blocksWide; ++bc) {
            const jpeg::CoeffBlock& b = t.block(br, bc);
            const std::size_t cell = static_cast<std::size_t>(br) * t.blocksWide + bc;
            for (int z = 0; z < jpeg::kBlockSize; ++z) {
                const int natural = jpeg::kZigzagToNatural[z];
                grid[static_cast<std::size_t>(z) * cells + cell] =
                    static_cast<Real>(b[natural] * t.table.natural(natural) / 1024.0);
            }
        }
    return grid;
}

Tensorf targetMap(const PixelImage& gt) {
    if (gt.components != 1) throw Error("targetMap: 1-component map required");
    Tensorf t({1, gt.height, gt.width});
    for (std::size_t i = 0; i < gt.samples.size(); ++i)
        t[i] = gt.samples[i] > 127 ? Real(1) : Real(0);
    return t;
}

Tensorf pixelInputMap(const PixelImage& tile) {
    if (tile.components != 1) throw Error("pixelInputMap: 1-component tile required");
    Tensorf t({1, tile.height, tile.width});
    for (std::size_t i = 0; i < tile.samples.size(); ++i)
        t[i] = static_cast<Real>(tile.samples[i] / 255.0);
    return t;
}

Sample makeSample(const data::TilePair& pair) {
    const jpeg::DecodedCoefficients coeffs = jpeg::partialDecode(pair.stream);
    if (coeffs.components.empty()) throw Error("makeSample: no components in tile stream");
    return {coefficientGrid(coeffs.components[0]), targetMap(pair.groundTruth)};
}

Sample makePixelSample(const data::TilePair& pair) {
    return {pixelInputMap(jpeg::decodeImage(pair.stream)), targetMap(pair.groundTruth)};
}

namespace {

nn::AdamConfig scaledLr(nn::AdamConfig cfg, double scale) {
    cfg.learningRate *= scale;
    return cfg;
}

} // namespace

GanOptimizers::GanOptimizers(DdganModel& model, const TrainConfig& cfg)
    : generator(
          [&] {
              std::vector<Paramf*> ps;
              for (auto& [name, p] : model.generatorParams()) ps.push_back(p);
              return ps;
          }(),
          cfg.adam),
      discriminators(
          [&] {
              std::vector<Paramf*> ps;
              for (auto& [name, p] : model.discriminatorParams()) ps.push_back(p);
              return ps;
          }(),
          scaledLr(cfg.adam, cfg.discLrScale)) {}

namespace {

// Stacks per-sample tensors along a new batch dimension.
Tensorf stack(const std::vector<const Sample*>& batch, bool inputs) {
    const Tensorf& first = inputs ? batch[0]->input : batch[0]->target;
    std::vector<int> shape = first.shape();
    shape.insert(shape.begin(), static_cast<int>(batch.size()));
    Tensorf out(shape);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const Tensorf& src = inputs ? batch[n]->input : batch[n]->target;
        if (!src.sameShape(first)) throw Error("trainStep: samples disagree in shape");
        std::copy_n(src.data(), src.size(), out.data() + n * src.size());
    }
    return out;
}

void zeroAll(DdganModel& model) {
    for (auto& [name, p] : model.allParams()) p->zeroGrad();
}

} // namespace

StepMetrics trainStep(DdganModel& model, GanOptimizers& opts,
                      const std::vector<const Sample*>& batch, const TrainConfig& cfg,
                      bool updateDisc) {
    if (batch.empty()) throw Error("trainStep: empty batch");
    const Tensorf inputs = stack(batch, true);
    const Tensorf targets = stack(batch, false);
    const int n = inputs.dim(0);

    StepMetrics m;

    // ---- discriminator update: real ground truth vs detached fakes ----
    if (updateDisc) {
        zeroAll(model);
        Tensorf fakeDetached;
        {
            Tapef tape;
            Varf fake = model.generator.forward(tape, tape.constant(inputs));
            fakeDetached = tape.value(fake);
        }
        {
            Tapef tape;
            Varf real = tape.constant(targets);
            Varf fake = tape.constant(fakeDetached);

            const Tensorf ones({n, 1}, Real(1));
            const Tensorf zeros({n, 1}, Real(0));
            Varf lossG = tape.scale(
                tape.add(tape.bceLoss(model.globalDisc.forward(tape, real, true), ones),
                         tape.bceLoss(model.globalDisc.forward(tape, fake, true), zeros)),
                Real(0.5));

            Varf realPatches = tape.extractPatches(real, cfg.patchSize);
            Varf fakePatches = tape.extractPatches(fake, cfg.patchSize);
            const int np = tape.value(realPatches).dim(0);
            const Tensorf onesP({np, 1}, Real(1));
            const Tensorf zerosP({np, 1}, Real(0));
            Varf lossL = tape.scale(
                tape.add(tape.bceLoss(model.localDisc.forward(tape, realPatches, true), onesP),
                         tape.bceLoss(model.localDisc.forward(tape, fakePatches, true), zerosP)),
                Real(0.5));

            m.lossDiscGlobal = tape.value(lossG)[0];
            m.lossDiscLocal = tape.value(lossL)[0];
            tape.backward(tape.add(lossG, lossL));
        }
        opts.discriminators.step();
    }

    // ---- generator update: focal reconstruction plus adversarial terms ----
    zeroAll(model);
    {
        Tapef tape;
        Varf fake = model.generator.forward(tape, tape.constant(inputs));

        Varf focal = tape.focalLoss(fake, targets, static_cast<Real>(cfg.focalAlpha),
                                    static_cast<Real>(cfg.focalGamma));

        const Tensorf ones({n, 1}, Real(1));
        Varf advGlobal = tape.bceLoss(model.globalDisc.forward(tape, fake, true), ones);

        Varf patches = tape.extractPatches(fake, cfg.patchSize);
        const Tensorf onesP({tape.value(patches).dim(0), 1}, Real(1));
        Varf advLocal = tape.bceLoss(model.localDisc.forward(tape, patches, true), onesP);

        Varf total = tape.add(
            tape.scale(tape.add(advGlobal, tape.scale(advLocal, static_cast<Real>(cfg.weights.sigma))),
                       static_cast<Real>(cfg.weights.mu)),
            tape.scale(focal, static_cast<Real>(cfg.weights.lambda)));

        m.lossGen = tape.value(focal)[0];
        m.lossAdvGlobal = tape.value(advGlobal)[0];
        m.lossAdvLocal = tape.value(advLocal)[0];
        m.lossTotal = tape.value(total)[0];
        tape.backward(total);
    }
    opts.generator.step();

    return m;
}

TrainResult trainLoop(DdganModel& model, GanOptimizers& opts, const std::vector<Sample>& samples,
                      const TrainConfig& cfg, long maxSteps, const MetricsSink& sink,
                      const StopPredicate& stop, long checkEvery) {
    if (samples.empty()) throw Error("trainLoop: no samples");
    cfg.validate();

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed);

    TrainResult result;
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t at = 0; at < order.size(); at += cfg.batchSize) {
            std::vector<const Sample*> batch;
            for (std::size_t i = at; i < std::min(order.size(), at + cfg.batchSize); ++i)
                batch.push_back(&samples[order[i]]);

            StepMetrics m = trainStep(model, opts, batch, cfg, step % cfg.discEvery == 0);
            m.step = ++step;
            if (sink) sink(m);
            result.metrics.push_back(m);

            if (maxSteps > 0 && step >= maxSteps) {
                result.steps = step;
                return result;
            }
            if (stop && step % checkEvery == 0 && stop(model, step)) {
                result.steps = step;
                return result;
            }
        }
    }
    result.steps = step;
    return result;
}

nn::Checkpoint trainingCheckpoint(DdganModel& model, GanOptimizers& opts) {
    nn::Checkpoint ckpt = model.toCheckpoint();

    auto putAdam = [&](const std::string& tag, nn::Adam<Real>& adam, NamedParams named) {
        auto& slots = adam.slots();
        if (slots.size() != named.size()) throw Error("optimizer/parameter count mismatch");
        for (std::size_t i = 0; i < named.size(); ++i) {
            ckpt.putTensor("adam." + named[i].first + ".m", slots[i].m);
            ckpt.putTensor("adam." + named[i].first + ".v", slots[i].v);
        }
        ckpt.counters["adam." + tag + ".step"] = adam.stepCount();
    };
    putAdam("gen", opts.generator, model.generatorParams());
    putAdam("disc", opts.discriminators, model.discriminatorParams());
    return ckpt;
}

void restoreOptimizers(const nn::Checkpoint& ckpt, DdganModel& model, GanOptimizers& opts) {
    auto getAdam = [&](const std::string& tag, nn::Adam<Real>& adam, NamedParams named) {
        auto& slots = adam.slots();
        for (std::size_t i = 0; i < named.size(); ++i) {
            slots[i].m = ckpt.getTensor<Real>("adam." + named[i].first + ".m");
            slots[i].v = ckpt.getTensor<Real>("adam." + named[i].first + ".v");
        }
        adam.setStepCount(ckpt.counters.at("adam." + tag + ".step"));
    };
    getAdam("gen", opts.generator, model.generatorParams());
    getAdam("disc", opts.discriminators, model.discriminatorParams());
}

} // namespace cdbin::gan
