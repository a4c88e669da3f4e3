#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "roq/errors.hpp"

namespace roq::lil {

// Compensated accumulator; prefix sums over up to ~1e7 terms feed
// comparisons at 1e-9 tolerance.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

enum class Orientation { Forward, Tail };

/// Smallest budget gamma for which the centered partial sums of one
/// realized sequence stay inside +/- gamma*phi(count) at every checked
/// index. `rate` is the nominal rate used for centering (mean 1/rate).
struct BudgetSet {
    double gamma = 0.0;
    Orientation orientation = Orientation::Forward;
    double rate = 1.0;
    std::size_t horizon_k = 0; // largest index checked
    std::size_t argmax_k = 0;  // index attaining the sup

    nlohmann::json to_json() const;
};

/// gamma = max_{1<=k<=len} |sum_{i<=k} seq_i - k/rate| / phi(k).
BudgetSet certify_forward(std::span<const double> seq, double rate);

/// gamma = max_{0<=k<=n-1} |sum_{i=k+1..n} seq_i - (n-k)/rate| / phi(n-k).
/// Equals certify_forward on the reversed sequence.
BudgetSet certify_tail(std::span<const double> seq, double rate, std::size_t n);

/// Budget fed into the bound formulas: max of all certified gammas and
/// the floor that makes the budget condition hold by construction
/// (e^{2e}/lambda for the tandem model, e^{2e}/lambda_min multiclass).
double effective_gamma(const std::vector<BudgetSet>& budgets, double floor);

} // namespace roq::lil
