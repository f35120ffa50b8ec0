#pragma once

#include <optional>

#include "cdbin/data/dataset.hpp"
#include "cdbin/gan/losses.hpp"
#include "cdbin/gan/model.hpp"
#include "cdbin/nn/optimizer.hpp"

namespace cdbin::gan {

struct TrainConfig {
    int epochs = 10;
    int batchSize = 4;
    std::uint64_t seed = 0;
    LossWeights weights;
    nn::AdamConfig adam;       // lr 2e-4, beta1 0.5, beta2 0.999
    double focalAlpha = 0.25;
    double focalGamma = 2.0;
    int patchSize = 32;
    int tileSize = 256;
    int quality = 50;
    // Discriminator schedule: update every k-th step at a scaled learning
    // rate. Keeps the critics from saturating before the generator moves.
    int discEvery = 1;
    double discLrScale = 1.0;
    ModelConfig model;

    void validate() const;
};

std::string trainConfigToJson(const TrainConfig& cfg);
TrainConfig trainConfigFromJson(const std::string& text);

/// One preprocessed training example: normalized coefficient grid (or pixel
/// map for the pixel-input baseline) and its {0,1} target map.
struct Sample {
    Tensorf input;  // (C,Hb,Wb) coefficient grid, or (1,H,W) pixels
    Tensorf target; // (1,H,W) in {0,1}
};

/// Dequantizes one component tensor into a (64,Hb,Wb) grid: channel z is zig-zag
/// position z, values scaled by 1/1024 so the DC range maps near [-1,1].
Tensorf coefficientGrid(const jpeg::CoefficientTensor& t);

/// Ground-truth byte map {0,255} -> float map {0,1}, shape (1,H,W).
Tensorf targetMap(const PixelImage& gt);

/// Pixel-domain input for the baseline variant: decoded gray tile scaled to [0,1].
Tensorf pixelInputMap(const PixelImage& tile);

Sample makeSample(const data::TilePair& pair);
Sample makePixelSample(const data::TilePair& pair);

struct StepMetrics {
    long step = 0;
    double lossGen = 0;        // focal reconstruction loss
    double lossAdvGlobal = 0;  // generator's adversarial BCE vs the global critic
    double lossAdvLocal = 0;   // mean over patches vs the local critic
    double lossTotal = 0;      // combined objective
    double lossDiscGlobal = 0; // global discriminator real+fake BCE
    double lossDiscLocal = 0;
};

/// Adam optimizers for the two adversarial sides; the discriminators run at
/// the configured learning-rate scale.
struct GanOptimizers {
    nn::Adam<Real> generator;
    nn::Adam<Real> discriminators;

    GanOptimizers(DdganModel& model, const TrainConfig& cfg);
};

/// One adversarial round: discriminator update on real/detached-fake batches
/// (skippable per the schedule), then a generator update through focal +
/// adversarial terms. Deterministic for fixed inputs and parameters.
StepMetrics trainStep(DdganModel& model, GanOptimizers& opts,
                      const std::vector<const Sample*>& batch, const TrainConfig& cfg,
                      bool updateDisc = true);

struct TrainResult {
    std::vector<StepMetrics> metrics;
    long steps = 0;
};

using MetricsSink = std::function<void(const StepMetrics&)>;
using StopPredicate = std::function<bool(DdganModel&, long step)>;

/// Epoch loop over preprocessed samples with seeded shuffling. The optional
/// predicate is polled every `checkEvery` steps to allow early stopping.
TrainResult trainLoop(DdganModel& model, GanOptimizers& opts, const std::vector<Sample>& samples,
                      const TrainConfig& cfg, long maxSteps = 0, const MetricsSink& sink = {},
                      const StopPredicate& stop = {}, long checkEvery = 25);

/// Serializes model parameters plus optimizer state for exact resumption.
nn::Checkpoint trainingCheckpoint(DdganModel& model, GanOptimizers& opts);
void restoreOptimizers(const nn::Checkpoint& ckpt, DdganModel& model, GanOptimizers& opts);

} // namespace cdbin::gan
