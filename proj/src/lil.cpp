#include "roq/lil.hpp"

#include <algorithm>
#include <cmath>

#include "roq/envelope_math.hpp"

namespace roq::lil {

nlohmann::json BudgetSet::to_json() const {
    return {
        {"gamma", gamma},
        {"orientation", orientation == Orientation::Forward ? "forward" : "tail"},
        {"rate", rate},
        {"horizon_k", horizon_k},
        {"argmax_k", argmax_k},
        {"finite_horizon", true},
    };
}

BudgetSet certify_forward(std::span<const double> seq, double rate) {
    if (seq.empty()) {
        fail_precondition("EmptySequence", "cannot certify an empty sequence");
    }
    if (!(rate > 0.0)) {
        fail_precondition("InvalidRate", "rate must be positive");
    }
    const double mean = 1.0 / rate;
    BudgetSet out;
    out.orientation = Orientation::Forward;
    out.rate = rate;
    out.horizon_k = seq.size();

    KahanSum centered; // sum of (seq_i - mean)
    double best = 0.0;
    std::size_t best_k = 1;
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        centered.add(seq[k - 1] - mean);
        const double v = std::abs(centered.value()) / envmath::phi(static_cast<double>(k));
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    out.gamma = best;
    out.argmax_k = best_k;
    return out;
}

BudgetSet certify_tail(std::span<const double> seq, double rate, std::size_t n) {
    if (seq.size() != n) {
        fail_precondition("LengthMismatch", "sequence length must equal n");
    }
    std::vector<double> rev(seq.rbegin(), seq.rend());
    BudgetSet out = certify_forward(rev, rate);
    out.orientation = Orientation::Tail;
    return out;
}

double effective_gamma(const std::vector<BudgetSet>& budgets, double floor) {
    double g = floor;
    for (const auto& b : budgets) g = std::max(g, b.gamma);
    return g;
}

} // namespace roq::lil
