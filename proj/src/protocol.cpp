#include "lculab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lculab {

namespace {

void require_unitary(const Matrix& U) {
    Matrix dev = U.adjoint() * U - Matrix::Identity(U.rows(), U.cols());
    if (spectral_norm(dev) > 1e-8) throw std::invalid_argument("operator is not unitary");
}

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

const BranchOutcome& sample_outcome(const std::vector<BranchOutcome>& outcomes,
                                    std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& o : outcomes) total += o.vec.squaredNorm();
    double u = uniform01(rng) * total;
    for (const auto& o : outcomes) {
        u -= o.vec.squaredNorm();
        if (u <= 0.0) return o;
    }
    return outcomes.back();
}

bool all_zero_bits(const std::string& bits) {
    return bits.find('1') == std::string::npos;
}

}  // namespace

PairOutcome apply_weighted_pair(const Matrix& Ua, const Matrix& Ub, double kappa,
                                const Vector& state, std::mt19937_64& rng) {
    if (kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
    require_unitary(Ua);
    require_unitary(Ub);

    const double denom = kappa + 1.0;
    Vector success_vec = (kappa * (Ua * state) + Ub * state) / denom;
    double p_success = success_vec.squaredNorm();

    PairOutcome out;
    if (uniform01(rng) < p_success) {
        out.success = true;
        out.conditional_probability = p_success;
        out.post_state = success_vec.normalized();
    } else {
        out.success = false;
        out.conditional_probability = 1.0 - p_success;
        Vector fail_vec = Ub * state - Ua * state;
        out.post_state = fail_vec.normalized();
    }
    return out;
}

std::vector<BranchOutcome> enumerate_fold(const std::vector<const Matrix*>& unitaries,
                                          const std::vector<double>& weights,
                                          const Vector& state) {
    if (unitaries.empty()) throw std::invalid_argument("empty combination");
    if (unitaries.size() != weights.size())
        throw std::invalid_argument("weights/unitaries size mismatch");
    for (double w : weights)
        if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");

    // outcomes[0] stays the all-zero path throughout
    std::vector<BranchOutcome> outcomes;
    outcomes.push_back({"", (*unitaries[0]) * state});
    double cumulative = weights[0];

    for (std::size_t i = 1; i < unitaries.size(); ++i) {
        const double kap = cumulative / weights[i];
        const double denom = kap + 1.0;
        const double root = std::sqrt(kap);
        Vector leaf = (*unitaries[i]) * state;

        std::vector<BranchOutcome> next;
        next.reserve(outcomes.size() * 2);
        const std::string zeros = outcomes[0].bits;
        const Vector& acc = outcomes[0].vec;
        next.push_back({zeros + "0", (kap * acc + leaf) / denom});
        next.push_back({zeros + "1", (root / denom) * (leaf - acc)});
        for (std::size_t j = 1; j < outcomes.size(); ++j) {
            next.push_back({outcomes[j].bits + "0", (kap / denom) * outcomes[j].vec});
            next.push_back({outcomes[j].bits + "1", (-root / denom) * outcomes[j].vec});
        }
        outcomes = std::move(next);
        cumulative += weights[i];
    }
    return outcomes;
}

FoldOutcome apply_positive_combination(const std::vector<const Matrix*>& unitaries,
                                       const std::vector<double>& weights,
                                       const Vector& state, std::mt19937_64& rng) {
    auto outcomes = enumerate_fold(unitaries, weights, state);
    const BranchOutcome& drawn = sample_outcome(outcomes, rng);

    FoldOutcome out;
    out.probability = drawn.vec.squaredNorm();
    out.state = drawn.vec.normalized();
    auto first_fail = drawn.bits.find('1');
    if (first_fail == std::string::npos) {
        out.success = true;
        out.pair_applications = static_cast<int>(unitaries.size()) - 1;
    } else {
        out.success = false;
        out.failed_step = static_cast<int>(first_fail);
        out.pair_applications = static_cast<int>(first_fail) + 1;
    }
    return out;
}

int PreparedMpfStep::pair_steps() const {
    int pairs = 0;
    if (!positive.empty()) pairs += static_cast<int>(positive.size()) - 1;
    if (!negative.empty()) pairs += static_cast<int>(negative.size()) - 1;
    if (has_subtraction()) pairs += 1;
    return pairs;
}

PreparedMpfStep prepare_mpf_step(const MpfSpec& spec, const TermList& terms, double lambda) {
    PreparedMpfStep step;
    step.spec = spec;
    step.lambda = lambda;
    step.dim = terms.dim();

    const int n = spec.terms();
    long long exps_per_rep = 2LL * terms.m();
    for (int c = 1; c < spec.chi; ++c) exps_per_rep *= 5;

    for (int q = 0; q < n; ++q) {
        step.forward.push_back(integrator_matrix(spec, terms, lambda, q));
        step.backward.push_back(integrator_matrix(spec, terms, -lambda, q));
        double c = to_double(spec.coeffs[q]);
        step.weights.push_back(std::abs(c));
        if (c > 0) step.positive.push_back(q);
        if (c < 0) step.negative.push_back(q);
        step.sigma_plus += std::max(c, 0.0);
        step.sigma_minus += std::max(-c, 0.0);
        step.exponentials_per_attempt += spec.ells[q] * exps_per_rep;
    }
    if (step.positive.empty() && step.negative.empty())
        throw std::invalid_argument("all coefficients vanish");
    if (step.sigma_minus > 0.0 && step.sigma_plus > 0.0)
        step.kappa_subtraction = step.sigma_plus / step.sigma_minus;

    // The failed subtraction effects (A + B)/2 in averaged form, so the
    // inverse combination must carry the same relative weights.
    step.correction_weights.resize(n, 0.0);
    for (int q : step.positive)
        step.correction_weights[q] = step.weights[q] / std::max(step.sigma_plus, 1e-300);
    for (int q : step.negative)
        step.correction_weights[q] = step.weights[q] / std::max(step.sigma_minus, 1e-300);
    return step;
}

namespace {

std::vector<BranchOutcome> fold_group(const PreparedMpfStep& step, const std::vector<int>& group,
                                      const Vector& state) {
    std::vector<const Matrix*> us;
    std::vector<double> ws;
    for (int q : group) {
        us.push_back(&step.forward[q]);
        ws.push_back(step.weights[q]);
    }
    return enumerate_fold(us, ws, state);
}

}  // namespace

std::vector<BranchOutcome> enumerate_mpf_step(const PreparedMpfStep& step, const Vector& state) {
    if (!step.has_subtraction()) {
        const auto& group = step.positive.empty() ? step.negative : step.positive;
        return fold_group(step, group, state);
    }

    auto a = fold_group(step, step.positive, state);
    auto b = fold_group(step, step.negative, state);
    for (auto& o : b) o.vec = -o.vec;  // subtraction passes the negated circuit

    const double kap = step.kappa_subtraction;
    const double denom = kap + 1.0;
    const double root = std::sqrt(kap);
    const std::string zeros_a = a[0].bits;
    const std::string zeros_b = b[0].bits;

    std::vector<BranchOutcome> out;
    out.reserve(2 * (a.size() + b.size()));
    out.push_back({zeros_a + zeros_b + "0", (kap * a[0].vec + b[0].vec) / denom});
    out.push_back({zeros_a + zeros_b + "1", (root / denom) * (b[0].vec - a[0].vec)});
    for (std::size_t j = 1; j < a.size(); ++j) {
        out.push_back({a[j].bits + zeros_b + "0", (kap / denom) * a[j].vec});
        out.push_back({a[j].bits + zeros_b + "1", (-root / denom) * a[j].vec});
    }
    for (std::size_t j = 1; j < b.size(); ++j) {
        out.push_back({zeros_a + b[j].bits + "0", (1.0 / denom) * b[j].vec});
        out.push_back({zeros_a + b[j].bits + "1", (root / denom) * b[j].vec});
    }
    return out;
}

std::vector<BranchOutcome> enumerate_correction(const PreparedMpfStep& step, const Vector& state) {
    std::vector<const Matrix*> us;
    std::vector<double> ws;
    for (int q = 0; q < step.spec.terms(); ++q) {
        if (step.correction_weights[q] > 0.0) {
            us.push_back(&step.backward[q]);
            ws.push_back(step.correction_weights[q]);
        }
    }
    return enumerate_fold(us, ws, state);
}

BranchOutcome sample_mpf_outcome(const PreparedMpfStep& step, const Vector& state,
                                 std::mt19937_64& rng) {
    const auto outcomes = enumerate_mpf_step(step, state);
    return sample_outcome(outcomes, rng);
}

std::map<std::string, double> branch_distribution(const MpfSpec& spec, const TermList& terms,
                                                  double lambda, const Vector& state) {
    if (spec.k > 3) throw std::runtime_error("unsupported: branch enumeration limited to k <= 3");
    PreparedMpfStep step = prepare_mpf_step(spec, terms, lambda);
    std::map<std::string, double> dist;
    for (const auto& o : enumerate_mpf_step(step, state))
        dist[o.bits] += o.vec.squaredNorm();
    return dist;
}

StepResult run_mpf_step(const PreparedMpfStep& step, Vector& state, std::mt19937_64& rng,
                        long long budget, TrialRecord& record, bool abort_on_addition_failure) {
    for (;;) {
        if (!step.has_subtraction()) {
            record.exponentials_consumed += step.exponentials_per_attempt;
            const auto outcomes = enumerate_mpf_step(step, state);
            const BranchOutcome& drawn = sample_outcome(outcomes, rng);
            state = drawn.vec.normalized();
            if (all_zero_bits(drawn.bits)) return StepResult::Success;
            ++record.addition_failures;
            if (abort_on_addition_failure || record.addition_failures >= budget)
                return StepResult::AdditionAbort;
            continue;
        }

        if (record.subtraction_attempts + record.corrections_applied >= budget)
            return StepResult::BudgetExhausted;
        ++record.subtraction_attempts;
        record.exponentials_consumed += step.exponentials_per_attempt;

        const auto outcomes = enumerate_mpf_step(step, state);
        const BranchOutcome& drawn = sample_outcome(outcomes, rng);
        state = drawn.vec.normalized();

        const std::string addition_bits = drawn.bits.substr(0, drawn.bits.size() - 1);
        if (!all_zero_bits(addition_bits)) {
            ++record.addition_failures;
            if (abort_on_addition_failure) return StepResult::AdditionAbort;
            continue;
        }
        if (drawn.bits.back() == '0') return StepResult::Success;

        // failed subtraction: approximately invert, then retry the step
        if (record.subtraction_attempts + record.corrections_applied >= budget)
            return StepResult::BudgetExhausted;
        ++record.corrections_applied;
        record.exponentials_consumed += step.exponentials_per_attempt;

        const auto correction = enumerate_correction(step, state);
        const BranchOutcome& fixed = sample_outcome(correction, rng);
        state = fixed.vec.normalized();
        if (!all_zero_bits(fixed.bits)) {
            ++record.addition_failures;
            if (abort_on_addition_failure) return StepResult::AdditionAbort;
        }
    }
}

TrialRecord simulate_evolution(const TermList& terms, double t, const ProtocolConfig& config,
                               std::uint64_t seed, const Vector* initial_state) {
    if (config.r < 1) throw std::invalid_argument("r must be >= 1");
    long long budget = config.budget > 0 ? config.budget : 5 * config.r;
    if (budget < config.r) throw std::invalid_argument("budget must be >= r");

    TrialRecord rec;
    rec.rng_seed = seed;

    PreparedMpfStep step = prepare_mpf_step(config.spec, terms, t / static_cast<double>(config.r));
    Vector state;
    if (initial_state) {
        state = initial_state->normalized();
    } else {
        state = Vector::Zero(terms.dim());
        state(0) = 1.0;
    }

    std::mt19937_64 rng(seed);
    for (long long i = 0; i < config.r; ++i) {
        StepResult res =
            run_mpf_step(step, state, rng, budget, rec, config.abort_on_addition_failure);
        if (res != StepResult::Success) return rec;
    }
    rec.succeeded = true;
    rec.final_state = state;
    return rec;
}

double pairwise_delta(const PreparedMpfStep& step) {
    double worst = 0.0;
    for (std::size_t i = 0; i < step.forward.size(); ++i)
        for (std::size_t j = i + 1; j < step.forward.size(); ++j)
            worst = std::max(worst, spectral_norm(step.forward[i] - step.forward[j]));
    return worst;
}

std::string trial_csv_header() {
    return "seed,succeeded,subtraction_attempts,corrections,addition_failures,exponentials,"
           "fidelity_error";
}

std::string trial_csv_row(const TrialRecord& rec, double fidelity_error) {
    char buf[256];
    if (std::isnan(fidelity_error)) {
        std::snprintf(buf, sizeof(buf), "%llu,%d,%lld,%lld,%lld,%lld,",
                      static_cast<unsigned long long>(rec.rng_seed), rec.succeeded ? 1 : 0,
                      rec.subtraction_attempts, rec.corrections_applied, rec.addition_failures,
                      rec.exponentials_consumed);
    } else {
        std::snprintf(buf, sizeof(buf), "%llu,%d,%lld,%lld,%lld,%lld,%.17g",
                      static_cast<unsigned long long>(rec.rng_seed), rec.succeeded ? 1 : 0,
                      rec.subtraction_attempts, rec.corrections_applied, rec.addition_failures,
                      rec.exponentials_consumed, fidelity_error);
    }
    return std::string(buf);
}

}  // namespace lculab
