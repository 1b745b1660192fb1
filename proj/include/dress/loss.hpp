#pragma once

#include <cmath>
#include <vector>

#include "dress/error.hpp"
#include "dress/tensor.hpp"

namespace dress {

/// Mean cross-entropy over the batch with the softmax gradient.
/// loss = mean_b −log softmax(logits_b)[label_b]; grad is dL/dlogits.
template <typename S>
std::pair<double, TensorT<S>> cross_entropy_loss(const TensorT<S>& logits,
                                                 const std::vector<int>& labels) {
    if (logits.shape.size() != 2) throw ShapeError("cross-entropy expects (batch, classes)");
    const std::size_t B = logits.extent(0), C = logits.extent(1);
    if (labels.size() != B) throw ShapeError("label count does not match batch");

    TensorT<S> grad(logits.shape);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const int y = labels[b];
        if (y < 0 || y >= static_cast<int>(C)) throw ShapeError("label out of range");
        const S* row = logits.data.data() + b * C;
        S mx = row[0];
        for (std::size_t c = 1; c < C; ++c) mx = row[c] > mx ? row[c] : mx;
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) denom += std::exp(static_cast<double>(row[c] - mx));
        const double log_denom = std::log(denom);
        loss += log_denom - static_cast<double>(row[static_cast<std::size_t>(y)] - mx);
        S* grow = grad.data.data() + b * C;
        for (std::size_t c = 0; c < C; ++c) {
            const double p = std::exp(static_cast<double>(row[c] - mx)) / denom;
            grow[c] = static_cast<S>(p / static_cast<double>(B));
        }
        grow[static_cast<std::size_t>(y)] -= static_cast<S>(1.0 / static_cast<double>(B));
    }
    return {loss / static_cast<double>(B), std::move(grad)};
}

}  // namespace dress
