#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lculab/numerics.hpp"
#include "lculab/suzuki.hpp"

namespace lculab {

/// Result of one weighted-pair combination step.
struct PairOutcome {
    bool success = false;
    double conditional_probability = 0.0;  // probability of the selected branch
    Vector post_state;
};

/// Non-deterministically applies an operator proportional to
/// kappa Ua + Ub (subtract by passing -Ub): outcome 0 yields
/// (kappa Ua + Ub)|psi> with probability ||(kappa Ua + Ub)psi||^2/(kappa+1)^2,
/// outcome 1 yields (Ub - Ua)|psi>.
PairOutcome apply_weighted_pair(const Matrix& Ua, const Matrix& Ub, double kappa,
                                const Vector& state, std::mt19937_64& rng);

/// One enumerated measurement path: `bits` holds the control-qubit outcomes in
/// step order; `vec` is the unnormalized branch K_path |psi> whose squared
/// norm is the path probability.
struct BranchOutcome {
    std::string bits;
    Vector vec;
};

/// All measurement paths of the left-fold circuit combining `unitaries` with
/// positive `weights` (step i uses kappa_i = (w_1+..+w_i)/w_{i+1}), with every
/// control-qubit measurement deferred to the end. Branch vectors act on the
/// given state; probabilities sum to 1.
std::vector<BranchOutcome> enumerate_fold(const std::vector<const Matrix*>& unitaries,
                                          const std::vector<double>& weights,
                                          const Vector& state);

struct FoldOutcome {
    bool success = false;
    int failed_step = -1;          // first failed addition, 0-based; -1 on success
    double probability = 0.0;      // probability of the drawn path
    Vector state;                  // renormalized post-state
    int pair_applications = 0;
};

/// Samples the fold circuit. On all-zero outcomes the post-state is
/// proportional to sum_q w_q U_q |psi>.
FoldOutcome apply_positive_combination(const std::vector<const Matrix*>& unitaries,
                                       const std::vector<double>& weights,
                                       const Vector& state, std::mt19937_64& rng);

/// Everything precomputed for repeated applications of one multi-product step
/// at a fixed duration: the integrator matrices at +lambda and -lambda, the
/// sign split, the subtraction kappa, and the correction weights (the actual
/// failed-branch weights C_q/Sigma+ resp. |C_q|/Sigma-).
struct PreparedMpfStep {
    MpfSpec spec;
    double lambda = 0.0;
    std::vector<Matrix> forward;
    std::vector<Matrix> backward;
    std::vector<double> weights;        // |C_q| as doubles
    std::vector<int> positive;          // indices into spec order, ascending
    std::vector<int> negative;
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
    double kappa_subtraction = 0.0;     // sigma_plus / sigma_minus
    std::vector<double> correction_weights;
    long long exponentials_per_attempt = 0;
    long dim = 0;

    bool has_subtraction() const { return !negative.empty() && !positive.empty(); }
    int pair_steps() const;
};

PreparedMpfStep prepare_mpf_step(const MpfSpec& spec, const TermList& terms, double lambda);

/// Full joint outcome distribution of one prepared step on `state`: the
/// positive-fold bits, then the negative-fold bits, then the subtraction bit.
std::vector<BranchOutcome> enumerate_mpf_step(const PreparedMpfStep& step, const Vector& state);

/// Same for the approximate inversion performed after a failed subtraction
/// (an all-positive combination of the backward integrators).
std::vector<BranchOutcome> enumerate_correction(const PreparedMpfStep& step, const Vector& state);

/// Draws one measurement path of the prepared step from its exact joint
/// distribution (the same draw run_mpf_step performs internally).
BranchOutcome sample_mpf_outcome(const PreparedMpfStep& step, const Vector& state,
                                 std::mt19937_64& rng);

/// Joint path distribution of the multi-product step circuit. Supported for
/// k <= 3 where the path count stays readable.
std::map<std::string, double> branch_distribution(const MpfSpec& spec, const TermList& terms,
                                                  double lambda, const Vector& state);

struct ProtocolConfig {
    MpfSpec spec;
    long long r = 1;
    long long budget = 0;  // 0 -> 5r
    bool abort_on_addition_failure = true;
};

struct TrialRecord {
    bool succeeded = false;
    long long subtraction_attempts = 0;
    long long corrections_applied = 0;
    long long addition_failures = 0;
    long long exponentials_consumed = 0;
    std::optional<Vector> final_state;
    std::uint64_t rng_seed = 0;
};

enum class StepResult { Success, AdditionAbort, BudgetExhausted };

/// Applies one multi-product step including the retry-with-correction loop.
/// Subtraction attempts and corrections are charged against `budget`.
StepResult run_mpf_step(const PreparedMpfStep& step, Vector& state, std::mt19937_64& rng,
                        long long budget, TrialRecord& record, bool abort_on_addition_failure);

/// r sequential multi-product steps at lambda = t/r with a shared budget
/// (default 5r) of subtraction attempts plus corrections.
TrialRecord simulate_evolution(const TermList& terms, double t, const ProtocolConfig& config,
                               std::uint64_t seed, const Vector* initial_state = nullptr);

/// Exact max pairwise spectral distance of the combined integrators.
double pairwise_delta(const PreparedMpfStep& step);

std::string trial_csv_header();
std::string trial_csv_row(const TrialRecord& rec, double fidelity_error);

}  // namespace lculab
