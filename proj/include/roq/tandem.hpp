#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "roq/errors.hpp"
#include "roq/report.hpp"

namespace roq::tandem {

/// Tandem of J single-server FIFO stations fed by one arrival stream.
/// n is the number of jobs pushed through; gamma_* are the budgets of
/// uncertainty attached to the arrival and per-server service sequences.
struct TscInstance {
    std::size_t servers = 1;     // J
    std::size_t jobs = 1;        // n
    double lambda = 1.0;         // arrival rate
    std::vector<double> mu;      // J service rates
    double gamma_a = 0.0;
    std::vector<double> gamma_s; // J service budgets

    double mu_min() const;
    double rho_star() const { return lambda / mu_min(); }
    double gamma() const;                       // max of all budgets
    bool gamma_large() const;                   // lambda * gamma >= e^{2e}
    void validate() const;

    static TscInstance from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// One realized path: n interarrival times and J x n service times.
struct TscPath {
    std::vector<double> u;                // u[i-1] = U_i
    std::vector<std::vector<double>> v;   // v[j-1][i-1] = V^j_i

    std::size_t jobs() const { return u.size(); }
    std::size_t servers() const { return v.size(); }
};

struct LindleyResult {
    std::vector<std::vector<double>> waits; // J x n, excluding service
    std::vector<double> sojourn;            // n totals
};

/// Exact FIFO tandem recursion:
///   W^j_i = max(W^j_{i-1} + V^j_{i-1} - U^j_i, 0), W^j_1 = 0,
/// with U^1_i the external interarrival times and
/// U^j_i = V^{j-1}_i + I^{j-1}_i for downstream servers.
LindleyResult lindley_sojourn(const TscInstance& inst, const TscPath& path);

/// Sojourn of the last job as a max over monotone index chains
///   n >= k_J >= ... >= k_1 >= 1
/// of the chained service tail sums minus the arrival tail sum,
/// evaluated by an O(n*J) dynamic program. Identical to the Lindley
/// value on every path.
double maxformula_sojourn(const TscInstance& inst, const TscPath& path);

/// Deterministic uncertainty set on tail sums: for k = 1..n the tables
/// bound sum_{i=k..n} of the corresponding sequence. Index n+1 denotes
/// the empty tail and evaluates to 0.
struct Envelope {
    std::vector<double> arrival_min, arrival_max;              // [k-1]
    std::vector<std::vector<double>> service_min, service_max; // [j-1][k-1]

    std::size_t jobs() const { return arrival_min.size(); }
    std::size_t servers() const { return service_min.size(); }

    double a_min(std::size_t k) const { return k == jobs() + 1 ? 0.0 : arrival_min[k - 1]; }
    double a_max(std::size_t k) const { return k == jobs() + 1 ? 0.0 : arrival_max[k - 1]; }
    double s_min(std::size_t j, std::size_t k) const {
        return k == jobs() + 1 ? 0.0 : service_min[j - 1][k - 1];
    }
    double s_max(std::size_t j, std::size_t k) const {
        return k == jobs() + 1 ? 0.0 : service_max[j - 1][k - 1];
    }

    void validate() const;
};

/// Degenerate envelope whose min and max tables both equal the tail
/// sums of a concrete path.
Envelope envelope_from_path(const TscPath& path);

struct ChainResult {
    double value = 0.0;
    std::vector<std::size_t> chain; // chain[j-1] = k_j, nondecreasing in j
};

/// Worst-case sojourn of job n over all paths inside the envelope:
///   max over n >= k_J >= ... >= k_1 >= 1 of
///   sum_{j<J} (s_max(j,k_j) - s_min(j,k_{j+1}+1)) + s_max(J,k_J) - a_min(k_1+1).
/// Ties resolved toward smaller indices.
ChainResult envelope_bound_chain(const TscInstance& inst, const Envelope& env);
double envelope_bound(const TscInstance& inst, const Envelope& env);

/// LIL-style envelope: centered tail lengths +/- budget * phi(tail length).
Envelope lil_envelope(const TscInstance& inst);

/// Closed-form worst-case sojourn bound
///   7 J^2 Gamma^2 lambda/(1-rho*) * lnln(J lambda Gamma/(1-rho*)) + J/lambda,
/// independent of n.
BoundReport sojourn_bound(const TscInstance& inst);
double sojourn_bound_value(const TscInstance& inst);

} // namespace roq::tandem
