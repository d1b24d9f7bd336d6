#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "graphtext/tensor.hpp"

namespace graphtext {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    double max_abs_analytic = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;

    bool pass(double tol) const { return worst < tol; }
};

// Central-difference check of a deterministic scalar computation against the
// tape's analytic gradients. `loss` evaluates the computation forward-only;
// `loss_with_grad` must additionally run backward so that param->grad is
// populated. Relative error uses |a - n| / max(|a| + |n|, floor) so that
// near-zero gradients are compared absolutely.
template <typename T>
GradCheckReport grad_check(const std::function<T()>& loss,
                           const std::function<T()>& loss_with_grad,
                           const std::vector<Tensor<T>*>& params, T step,
                           double denom_floor = 1e-3) {
    zero_grads(params);
    const T base = loss_with_grad();
    if (!std::isfinite(static_cast<double>(base)))
        throw std::runtime_error("grad_check: non-finite loss");

    std::vector<std::vector<T>> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) {
        if (!p->grad_populated())
            throw std::runtime_error("grad_check: gradient not populated for " + p->name);
        analytic.push_back(p->grad);
    }

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor<T>* p = params[pi];
        GradCheckEntry entry;
        entry.name = p->name;
        for (std::size_t i = 0; i < p->values.size(); ++i) {
            const T saved = p->values[i];
            p->values[i] = saved + step;
            const double up = static_cast<double>(loss());
            p->values[i] = saved - step;
            const double down = static_cast<double>(loss());
            p->values[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw std::runtime_error("grad_check: non-finite perturbed loss");
            const double numeric = (up - down) / (2.0 * static_cast<double>(step));
            const double a = static_cast<double>(analytic[pi][i]);
            const double rel =
                std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), denom_floor);
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
            entry.max_abs_analytic = std::max(entry.max_abs_analytic, std::abs(a));
        }
        report.worst = std::max(report.worst, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace graphtext
