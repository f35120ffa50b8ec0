#include "cdbin/gan/losses.hpp"

#include <cmath>

namespace cdbin::gan {

void LossWeights::validate() const {
    if (!(mu > 0.0) || !(sigma > 0.0) || !(lambda > 0.0))
        throw Error("loss weights must all be positive");
    if (!(sigma > 1.0)) throw Error("sigma must exceed 1 (local term dominates global)");
    if (!(lambda > mu)) throw Error("lambda must dominate mu (generator term leads)");
}

double totalLoss(double lGlobal, double lLocalMean, double lGen, const LossWeights& w) {
    if (!std::isfinite(lGlobal) || !std::isfinite(lLocalMean) || !std::isfinite(lGen))
        throw Error("totalLoss: non-finite loss component");
    return w.mu * (lGlobal + w.sigma * lLocalMean) + w.lambda * lGen;
}

} // namespace cdbin::gan
