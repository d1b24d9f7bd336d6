#include "graphtext/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace graphtext {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("auc: scores and labels must be nonempty and aligned");
    long positives = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw std::invalid_argument("auc: labels must be 0/1");
        positives += l;
    }
    const long negatives = static_cast<long>(labels.size()) - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc: both classes must be present");

    // Average ranks with ties shared, then the rank-sum statistic.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == 1) pos_rank_sum += rank[k];
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double mean_absolute_error(const std::vector<double>& predictions,
                           const std::vector<double>& targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw std::invalid_argument("mean_absolute_error: size mismatch or empty");
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        total += std::abs(predictions[i] - targets[i]);
    return total / static_cast<double>(predictions.size());
}

double normalized_mae(double mae, double mae_min, double mae_max) {
    if (!(mae_max > mae_min))
        throw std::invalid_argument("normalized_mae: degenerate range");
    if (mae < mae_min || mae > mae_max)
        throw std::invalid_argument("normalized_mae: value outside [mae_min, mae_max]");
    return 1.0 - (mae - mae_min) / (mae_max - mae_min);
}

MetricKind metric_for_family(TaskFamily family) {
    switch (family) {
        case TaskFamily::NodeCls:
            return MetricKind::Accuracy;
        case TaskFamily::Conn:
        case TaskFamily::LinkPred:
        case TaskFamily::GraphCls:
            return MetricKind::Auc;
        case TaskFamily::Spd:
        case TaskFamily::Cn:
        case TaskFamily::Cycle:
        case TaskFamily::GraphReg:
            return MetricKind::Mae;
    }
    throw std::logic_error("metric_for_family: unknown family");
}

const char* metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::Accuracy: return "accuracy";
        case MetricKind::Auc: return "auc";
        case MetricKind::Mae: return "mae";
    }
    throw std::logic_error("metric_name: unknown kind");
}

ParsedAnswer parse_answer(const std::vector<int>& tokens, TaskFamily family,
                          const Vocab& vocab, int class_count) {
    ParsedAnswer out;
    if (family_is_regression(family)) {
        std::string run;
        for (int t : tokens) {
            if (!vocab.is_numeric_piece(t)) break;
            run += vocab.token(t);
        }
        if (run.empty()) return out;
        const char* begin = run.c_str();
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end != begin + run.size() || !std::isfinite(value)) return out;
        out.kind = ParsedAnswer::Kind::Number;
        out.number = value;
        return out;
    }
    if (tokens.empty()) return out;
    std::vector<int> candidates;
    if (family == TaskFamily::NodeCls) {
        candidates = vocab.class_ids(class_count);
    } else {
        candidates = {vocab.yes, vocab.no};
    }
    for (int c : candidates) {
        if (tokens.front() == c) {
            out.kind = ParsedAnswer::Kind::Label;
            out.label_token = c;
            return out;
        }
    }
    return out;
}

double legality_rate(const std::vector<InstanceRecord>& records) {
    if (records.empty()) throw std::invalid_argument("legality_rate: no records");
    long legal = 0;
    for (const auto& r : records) legal += r.legal ? 1 : 0;
    return static_cast<double>(legal) / static_cast<double>(records.size());
}

}  // namespace graphtext
