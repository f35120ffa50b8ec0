#pragma once

#include <cmath>
#include <cstdint>

#include "cdbin/nn/tensor.hpp"

namespace cdbin::nn {

struct AdamConfig {
    double learningRate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. step() consumes and zeroes the gradients of
/// every registered parameter.
template <typename Real>
class Adam {
public:
    struct Slot {
        Tensor<Real> m;
        Tensor<Real> v;
    };

    Adam(std::vector<Param<Real>*> params, AdamConfig cfg = {})
        : params_(std::move(params)), cfg_(cfg) {
        slots_.reserve(params_.size());
        for (Param<Real>* p : params_) {
            if (!p || p->value.empty()) throw Error("Adam: null or empty parameter");
            slots_.push_back({Tensor<Real>(p->value.shape()), Tensor<Real>(p->value.shape())});
        }
    }

    void step() {
        ++t_;
        const double corr1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double corr2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param<Real>& p = *params_[i];
            if (!p.grad.sameShape(p.value)) throw Error("Adam: missing or mismatched gradient");
            Slot& s = slots_[i];
            for (std::size_t j = 0; j < p.value.size(); ++j) {
                const double g = p.grad[j];
                const double m = cfg_.beta1 * s.m[j] + (1.0 - cfg_.beta1) * g;
                const double v = cfg_.beta2 * s.v[j] + (1.0 - cfg_.beta2) * g * g;
                s.m[j] = static_cast<Real>(m);
                s.v[j] = static_cast<Real>(v);
                const double update =
                    cfg_.learningRate * (m / corr1) / (std::sqrt(v / corr2) + cfg_.epsilon);
                p.value[j] = static_cast<Real>(p.value[j] - update);
            }
            p.zeroGrad();
        }
    }

    std::uint64_t stepCount() const { return t_; }
    void setStepCount(std::uint64_t t) { t_ = t; }
    const AdamConfig& config() const { return cfg_; }
    std::vector<Slot>& slots() { return slots_; }
    const std::vector<Param<Real>*>& params() const { return params_; }

private:
    std::vector<Param<Real>*> params_;
    std::vector<Slot> slots_;
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
};

} // namespace cdbin::nn
