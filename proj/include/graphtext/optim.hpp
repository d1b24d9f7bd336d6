#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/tensor.hpp"

namespace graphtext {

// Global-norm gradient clipping over a parameter set. Returns the applied
// scale factor (1.0 when the norm is within bounds).
template <typename T>
double clip_gradients(const std::vector<Tensor<T>*>& params, double max_norm) {
    if (max_norm <= 0) throw std::invalid_argument("clip_gradients: max_norm must be > 0");
    double sq = 0.0;
    for (auto* p : params) {
        if (!p->grad_populated())
            throw std::runtime_error("clip_gradients: gradient missing for " + p->name);
        for (T g : p->grad) {
            const double gd = static_cast<double>(g);
            if (!std::isfinite(gd))
                throw std::runtime_error("clip_gradients: non-finite gradient in " + p->name);
            sq += gd * gd;
        }
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return 1.0;
    const double factor = max_norm / norm;
    for (auto* p : params)
        for (T& g : p->grad) g = static_cast<T>(static_cast<double>(g) * factor);
    return factor;
}

// Adaptive moment estimation with bias correction. Parameters keep their
// registration order; per-parameter learning rates express the two-group
// schedule. Moments are exposed for checkpointing.
template <typename T>
class Adam {
public:
    Adam(std::vector<Tensor<T>*> params, std::vector<double> lrs, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)),
          lrs_(std::move(lrs)),
          beta1_(beta1),
          beta2_(beta2),
          eps_(eps) {
        if (params_.size() != lrs_.size())
            throw std::invalid_argument("Adam: one learning rate per parameter required");
        for (double lr : lrs_)
            if (lr <= 0) throw std::invalid_argument("Adam: learning rates must be > 0");
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (auto* p : params_) {
            m_.emplace_back(p->values.size(), T(0));
            v_.emplace_back(p->values.size(), T(0));
        }
    }

    static Adam uniform(std::vector<Tensor<T>*> params, double lr) {
        std::vector<double> lrs(params.size(), lr);
        return Adam(std::move(params), std::move(lrs));
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            Tensor<T>* p = params_[pi];
            if (!p->grad_populated())
                throw std::runtime_error("Adam: gradient missing for " + p->name);
            const double lr = lrs_[pi];
            for (std::size_t i = 0; i < p->values.size(); ++i) {
                const double g = static_cast<double>(p->grad[i]);
                const double m = beta1_ * static_cast<double>(m_[pi][i]) + (1.0 - beta1_) * g;
                const double v =
                    beta2_ * static_cast<double>(v_[pi][i]) + (1.0 - beta2_) * g * g;
                m_[pi][i] = static_cast<T>(m);
                v_[pi][i] = static_cast<T>(v);
                const double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps_);
                p->values[i] = static_cast<T>(static_cast<double>(p->values[i]) - update);
            }
        }
    }

    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }

    const std::vector<Tensor<T>*>& params() const { return params_; }
    std::vector<std::vector<T>>& first_moments() { return m_; }
    std::vector<std::vector<T>>& second_moments() { return v_; }

private:
    std::vector<Tensor<T>*> params_;
    std::vector<double> lrs_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

}  // namespace graphtext
