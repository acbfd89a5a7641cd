#pragma once

// Brute-force reference implementations used only by tests. They stay
// deliberately independent of the library's code paths: different
// algorithms, different accumulation orders, no shared helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace test_oracles {

/// Average precision via the precision-recall step curve: recall moves by
/// exactly 1/n_pos at each positive, so the area is the mean of the
/// precisions there. The ranking is built by repeated stable argmax
/// selection and every prefix is recounted from scratch.
inline double average_precision(std::vector<double> scores, std::vector<std::uint8_t> labels) {
    const std::size_t n = scores.size();
    std::vector<bool> taken(n, false);
    std::vector<std::size_t> ranking;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (best == n || scores[i] > scores[best]) best = i; // stable: strict improvement only
        }
        taken[best] = true;
        ranking.push_back(best);
    }

    std::size_t total_pos = 0;
    for (auto y : labels) total_pos += y ? 1 : 0;

    double precision_sum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (!labels[ranking[k - 1]]) continue; // recall only steps at positives
        std::size_t tp = 0;
        for (std::size_t r = 0; r < k; ++r) tp += labels[ranking[r]] ? 1 : 0;
        precision_sum += static_cast<double>(tp) / static_cast<double>(k);
    }
    return precision_sum / static_cast<double>(total_pos);
}

/// Purity by scanning each cluster's members and tallying labels in a map.
inline double purity(const std::vector<std::size_t>& assignment,
                     const std::vector<std::string>& classes, std::size_t k) {
    std::size_t agree = 0;
    for (std::size_t cluster = 0; cluster < k; ++cluster) {
        std::map<std::string, std::size_t> tally;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == cluster) tally[classes[i]] += 1;
        }
        std::size_t best = 0;
        for (const auto& [label, count] : tally) best = std::max(best, count);
        agree += best;
    }
    return static_cast<double>(agree) / static_cast<double>(assignment.size());
}

/// NMI through the entropy identity I = H(pred) + H(truth) - H(joint),
/// a different algebraic route than the direct mutual-information sum.
inline double nmi(const std::vector<std::size_t>& assignment,
                  const std::vector<std::string>& classes) {
    const double n = static_cast<double>(assignment.size());
    std::map<std::size_t, double> pred_counts;
    std::map<std::string, double> truth_counts;
    std::map<std::pair<std::size_t, std::string>, double> joint_counts;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        pred_counts[assignment[i]] += 1.0;
        truth_counts[classes[i]] += 1.0;
        joint_counts[{assignment[i], classes[i]}] += 1.0;
    }
    const auto entropy = [n](const auto& counts) {
        double h = 0.0;
        for (const auto& [key, count] : counts) h -= (count / n) * std::log(count / n);
        return h;
    };
    const double h_pred = entropy(pred_counts);
    const double h_truth = entropy(truth_counts);
    const double h_joint = entropy(joint_counts);
    if (h_pred == 0.0 || h_truth == 0.0) return 0.0;
    return (h_pred + h_truth - h_joint) / std::sqrt(h_pred * h_truth);
}

} // namespace test_oracles
