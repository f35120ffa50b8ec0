#pragma once

#include "cdbin/image.hpp"

namespace cdbin::gan {

/// Weights of the combined objective mu*(Lglobal + sigma*Llocal) + lambda*Lgen.
/// sigma > 1 keeps the local term dominant between the adversarial parts;
/// lambda is far larger than mu so reconstruction drives the generator.
struct LossWeights {
    double mu = 0.5;
    double sigma = 5.0;
    double lambda = 75.0;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

/// The combined objective; rejects non-finite inputs.
double totalLoss(double lGlobal, double lLocalMean, double lGen, const LossWeights& w);

} // namespace cdbin::gan
