#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "lculab/optimality.hpp"
#include "lculab/protocol.hpp"

using namespace lculab;

namespace {

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

Matrix rot_z(double theta) {
    Matrix r = Matrix::Zero(2, 2);
    r(0, 0) = std::exp(Complex(0, -theta / 2));
    r(1, 1) = std::exp(Complex(0, theta / 2));
    return r;
}

Vector plus_state() {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return v;
}

double fidelity_error(const Vector& a, const Vector& b) {
    double overlap = std::abs(a.dot(b));
    return 1.0 - std::min(overlap, 1.0);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i)
        xs.push_back(lo * std::pow(hi / lo, i / static_cast<double>(n - 1)));
    return xs;
}

MpfSpec compact_spec(int k, int chi) {
    return build_mpf_spec(k, chi, std::log(2.0 * k) / (k + 1));
}

}  // namespace

TEST_CASE("weighted pair: identical and opposite unitaries") {
    std::mt19937_64 rng(1);
    Matrix id = Matrix::Identity(2, 2);
    Vector psi = plus_state();

    for (int i = 0; i < 20; ++i) {
        auto out = apply_weighted_pair(id, id, 0.7, psi, rng);
        CHECK(out.success);
        CHECK(out.conditional_probability == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fidelity_error(out.post_state, psi) < 1e-12);
    }
    for (int i = 0; i < 20; ++i) {
        auto out = apply_weighted_pair(id, -id, 1.0, psi, rng);
        CHECK_FALSE(out.success);
        CHECK(out.conditional_probability == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("weighted pair: identity vs Z on |+>") {
    std::mt19937_64 rng(7);
    Matrix id = Matrix::Identity(2, 2);
    Matrix z = pauli_z();
    Vector psi = plus_state();
    Vector zero(2);
    zero << 1, 0;
    Vector one(2);
    one << 0, 1;

    int successes = 0;
    for (int i = 0; i < 4000; ++i) {
        auto out = apply_weighted_pair(id, z, 1.0, psi, rng);
        CHECK(out.conditional_probability == doctest::Approx(0.5).epsilon(1e-12));
        if (out.success) {
            ++successes;
            CHECK(fidelity_error(out.post_state, zero) < 1e-12);
        } else {
            CHECK(fidelity_error(out.post_state, one) < 1e-12);
        }
    }
    CHECK(std::abs(successes / 4000.0 - 0.5) < 0.03);
}

TEST_CASE("weighted pair failure probability bound") {
    std::mt19937_64 rng(3);
    auto terms = random_term_list(1, 2, 1.0, 21);
    Vector psi = random_state(2, 5);
    for (double kap : {0.3, 1.0, 4.0}) {
        Matrix ua = herm_exp(terms.matrices[0], 0.3);
        Matrix ub = herm_exp(terms.matrices[1], 0.4);
        double delta = spectral_norm(ua - ub);
        Vector fail_vec = (ub * psi - ua * psi);
        double p_fail = kap * fail_vec.squaredNorm() / ((kap + 1.0) * (kap + 1.0));
        CHECK(p_fail <= delta * delta * kap / ((kap + 1.0) * (kap + 1.0)) + 1e-12);
        auto out = apply_weighted_pair(ua, ub, kap, psi, rng);  // exercises the sampler
        CHECK((out.success || out.conditional_probability == doctest::Approx(p_fail)));
    }
    Matrix bad(2, 2);
    bad << 1, 1, 0, 1;
    CHECK_THROWS_AS(apply_weighted_pair(bad, Matrix::Identity(2, 2), 1.0, psi, rng),
                    std::invalid_argument);
}

TEST_CASE("positive combination basics") {
    std::mt19937_64 rng(11);
    Matrix id = Matrix::Identity(2, 2);
    Vector psi = plus_state();

    auto single = apply_positive_combination({&id}, {1.0}, psi, rng);
    CHECK(single.success);
    CHECK(single.probability == doctest::Approx(1.0));
    CHECK(single.pair_applications == 0);

    Matrix u = rot_z(0.7);
    for (int i = 0; i < 10; ++i) {
        auto out = apply_positive_combination({&u, &u}, {0.3, 1.9}, psi, rng);
        CHECK(out.success);
        CHECK(out.probability == doctest::Approx(1.0).epsilon(1e-12));
    }

    Matrix r1 = rot_z(0.01), r2 = rot_z(0.02);
    Vector target = (id * psi + r1 * psi + r2 * psi) / 3.0;
    target.normalize();
    for (int i = 0; i < 40; ++i) {
        auto out = apply_positive_combination({&id, &r1, &r2}, {1.0, 1.0, 1.0}, psi, rng);
        REQUIRE(out.success);
        CHECK(out.pair_applications == 2);
        CHECK(fidelity_error(out.state, target) < 1e-12);
    }
}

TEST_CASE("fold failure rate stays below the pairwise bound") {
    std::mt19937_64 rng(17);
    Matrix id = Matrix::Identity(2, 2);
    Matrix r1 = rot_z(0.4), r2 = rot_z(0.8);
    Vector psi = plus_state();

    double delta = std::max({spectral_norm(id - r1), spectral_norm(id - r2),
                             spectral_norm(r1 - r2)});
    const int trials = 20000;
    int failures = 0;
    for (int i = 0; i < trials; ++i) {
        auto out = apply_positive_combination({&id, &r1, &r2}, {1.0, 1.0, 1.0}, psi, rng);
        if (!out.success) ++failures;
    }
    double bound = 2.0 * delta * delta / 4.0;  // two terms beyond the first
    double sigma = std::sqrt(bound * (1.0 - bound) / trials);
    CHECK(failures / static_cast<double>(trials) <= bound + 3.0 * sigma);
    CHECK(failures > 0);  // informative instance
}

TEST_CASE("fold enumeration matches the explicit-ancilla circuit") {
    Matrix id = Matrix::Identity(2, 2);
    Matrix r1 = rot_z(0.5), r2 = rot_z(1.1);
    Vector psi = random_state(2, 3);
    std::vector<const Matrix*> us{&id, &r1, &r2};
    std::vector<double> ws{0.8, 1.0, 0.6};

    auto outcomes = enumerate_fold(us, ws, psi);
    std::map<std::string, double> dist;
    double total = 0.0;
    for (const auto& o : outcomes) {
        dist[o.bits] += o.vec.squaredNorm();
        total += o.vec.squaredNorm();
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    std::vector<double> kappas{ws[0] / ws[1], (ws[0] + ws[1]) / ws[2]};
    auto reference = explicit_fold_reference(ws, us, kappas, psi);
    CHECK(total_variation(dist, reference) < 1e-10);
}

TEST_CASE("step success branch equals the assembled matrix") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 9);
    for (int k : {1, 2}) {
        auto spec = compact_spec(k, k);
        double lam = 0.05;
        auto step = prepare_mpf_step(spec, terms, lam);
        auto outcomes = enumerate_mpf_step(step, psi);

        Vector oracle = assemble_mpf_matrix(spec, terms, lam) * psi;
        oracle.normalize();
        CHECK(fidelity_error(outcomes[0].vec.normalized(), oracle) < 1e-10);

        double norm1 = std::abs(to_double(spec.coeffs[0]));
        for (int q = 1; q < spec.terms(); ++q) norm1 += std::abs(to_double(spec.coeffs[q]));
        Vector m_psi = assemble_mpf_matrix(spec, terms, lam) * psi;
        CHECK(outcomes[0].vec.squaredNorm()
              == doctest::Approx(m_psi.squaredNorm() / (norm1 * norm1)).epsilon(1e-10));
    }
}

TEST_CASE("branch distribution sums to one and honors the k cap") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 10);
    for (int k : {1, 2, 3}) {
        auto dist = branch_distribution(compact_spec(k, 1), terms, 0.15, psi);
        double total = 0.0;
        for (const auto& [bits, p] : dist) total += p;
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
    MpfSpec big;
    big.k = 4;
    CHECK_THROWS_AS(branch_distribution(big, terms, 0.1, psi), std::runtime_error);
}

TEST_CASE("single-term distribution is trivial") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 2);
    MpfSpec degenerate;
    degenerate.k = 1;  // shape only; one term below
    degenerate.chi = 1;
    degenerate.ells = {1};
    degenerate.coeffs = {BigRational(1)};
    auto dist = branch_distribution(degenerate, terms, 0.2, psi);
    REQUIRE(dist.size() == 1);
    CHECK(dist.count(""));
    CHECK(dist.at("") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step distribution matches the explicit-ancilla circuit") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 14);
    for (int k : {1, 2, 3}) {
        auto spec = compact_spec(k, 1);
        double lam = 0.2;
        auto dist = branch_distribution(spec, terms, lam, psi);

        auto step = prepare_mpf_step(spec, terms, lam);
        std::vector<double> signed_weights;
        std::vector<const Matrix*> us;
        for (int q = 0; q < spec.terms(); ++q) {
            signed_weights.push_back(to_double(spec.coeffs[q]));
            us.push_back(&step.forward[q]);
        }
        auto reference = explicit_circuit_reference(signed_weights, us, psi);
        INFO("k=", k, " tv=", total_variation(dist, reference));
        CHECK(total_variation(dist, reference) < 1e-10);
    }
}

TEST_CASE("sampled frequencies match the analytic distribution") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 6);
    auto spec = compact_spec(2, 1);
    double lam = 0.25;
    auto step = prepare_mpf_step(spec, terms, lam);
    auto analytic = branch_distribution(spec, terms, lam, psi);

    std::mt19937_64 rng(1234);
    const int trials = 100000;
    std::map<std::string, int> counts;
    for (int i = 0; i < trials; ++i) counts[sample_mpf_outcome(step, psi, rng).bits]++;

    for (const auto& [bits, count] : counts) CHECK(analytic.count(bits) == 1);
    for (const auto& [bits, p] : analytic) {
        double freq = counts.count(bits) ? counts.at(bits) / static_cast<double>(trials) : 0.0;
        double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / trials);
        INFO("path ", bits, " p=", p, " freq=", freq);
        CHECK(std::abs(freq - p) <= 4.0 * sigma);
    }
}

TEST_CASE("failed subtraction followed by the inverse restores the state") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 21);
    auto spec = build_mpf_spec(1, 1, std::log(2.0) / 2.0);

    std::vector<double> lambdas = log_grid(0.05, 0.8, 14), devs;
    for (double lam : lambdas) {
        auto step = prepare_mpf_step(spec, terms, lam);
        auto outcomes = enumerate_mpf_step(step, psi);
        const BranchOutcome* fail = nullptr;
        for (const auto& o : outcomes)
            if (o.bits == "1") fail = &o;
        REQUIRE(fail != nullptr);
        Vector collapsed = fail->vec.normalized();
        auto correction = enumerate_correction(step, collapsed);
        Vector fixed = correction[0].vec.normalized();
        // the failed branch carries a global phase; compare up to it
        Complex overlap = psi.dot(fixed);
        fixed *= std::polar(1.0, -std::arg(overlap));
        devs.push_back((fixed - psi).norm());
    }
    auto fit = fit_loglog(lambdas, devs, 1e-12, 1e-1);
    INFO("slope=", fit.slope, " pts=", fit.points_used);
    CHECK(fit.points_used >= 6);
    CHECK(std::abs(fit.slope - 6.0) < 0.3);
}

TEST_CASE("correction loop is exercised at small kappa") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    auto spec = build_mpf_spec(1, 1, std::log(2.0) / 2.0);  // kappa = 4
    ProtocolConfig config;
    config.spec = spec;
    config.r = 1;
    config.budget = 40;
    int corrected = 0, succeeded = 0;
    for (int i = 0; i < 200; ++i) {
        auto rec = simulate_evolution(terms, 0.02, config, 9000 + i);
        if (rec.succeeded) ++succeeded;
        if (rec.corrections_applied > 0) ++corrected;
        CHECK(rec.subtraction_attempts + rec.corrections_applied <= config.budget);
    }
    CHECK(corrected > 50);   // failure rate ~0.64 at kappa = 4
    CHECK(succeeded > 150);  // generous budget recovers nearly every trial
}

TEST_CASE("all-positive step always succeeds at tiny duration") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    MpfSpec degenerate;
    degenerate.k = 1;
    degenerate.chi = 1;
    degenerate.ells = {1};
    degenerate.coeffs = {BigRational(1)};
    ProtocolConfig config;
    config.spec = degenerate;
    config.r = 1;
    for (int i = 0; i < 25; ++i) {
        auto rec = simulate_evolution(terms, 1e-3, config, 100 + i);
        CHECK(rec.succeeded);
        CHECK(rec.exponentials_consumed == 4);  // one S_1 pass, 2m exponentials
    }
}

TEST_CASE("subtraction failure rate is bounded by 4/kappa") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    auto spec = build_mpf_spec(1, 1, choose_gamma(1, 0.5));
    double kap = to_double(*kappa(spec.coeffs));
    double lam = 0.05;
    auto step = prepare_mpf_step(spec, terms, lam);
    Vector psi = random_state(4, 31);

    std::mt19937_64 rng(555);
    const int trials = 10000;
    int failures = 0;
    for (int i = 0; i < trials; ++i)
        if (sample_mpf_outcome(step, psi, rng).bits == "1") ++failures;

    double bound = 4.0 / kap;
    double sigma = std::sqrt(bound * (1.0 - bound) / trials);
    INFO("kappa=", kap, " failures=", failures);
    CHECK(failures / static_cast<double>(trials) <= bound + 3.0 * sigma);
}

TEST_CASE("protocol run against the exact evolution") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    auto spec = build_mpf_spec(1, 1, choose_gamma(1, 0.5));
    ProtocolConfig config;
    config.spec = spec;
    config.r = 8;
    Vector psi0 = Vector::Zero(4);
    psi0(0) = 1.0;
    Vector oracle = exact_evolution(terms, 0.4) * psi0;

    int succeeded = 0;
    for (int i = 0; i < 30; ++i) {
        auto rec = simulate_evolution(terms, 0.4, config, 7000 + i);
        CHECK(rec.subtraction_attempts + rec.corrections_applied <= 5 * config.r);
        if (!rec.succeeded) continue;
        ++succeeded;
        REQUIRE(rec.final_state.has_value());
        double err = fidelity_error(*rec.final_state, oracle);
        double bound = 5.0 * config.r
                       * std::pow(2.0 * 2 * 1.0 * 0.4 / config.r, 4 * spec.k + 1);
        CHECK(err <= bound);
    }
    CHECK(succeeded >= 25);
}

TEST_CASE("budget exhaustion fails the trial cleanly") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    ProtocolConfig config;
    config.spec = build_mpf_spec(1, 1, std::log(2.0) / 2.0);  // 64% subtraction failures
    config.r = 1;
    config.budget = 1;  // no room for a correction
    int failed = 0;
    for (int i = 0; i < 100; ++i) {
        auto rec = simulate_evolution(terms, 0.05, config, 300 + i);
        CHECK(rec.subtraction_attempts + rec.corrections_applied <= 1);
        if (!rec.succeeded) {
            ++failed;
            CHECK_FALSE(rec.final_state.has_value());
        }
    }
    CHECK(failed > 30);
}

TEST_CASE("addition failures abort or retry per configuration") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    ProtocolConfig config;
    config.spec = build_mpf_spec(2, 1, std::log(4.0) / 3.0);
    config.r = 1;
    config.budget = 200;

    // far-apart integrators make the addition step fail visibly
    int aborts = 0;
    for (int i = 0; i < 400; ++i) {
        auto rec = simulate_evolution(terms, 2.2, config, 500 + i);
        if (!rec.succeeded && rec.addition_failures > 0) {
            ++aborts;
            CHECK(rec.addition_failures == 1);
        }
    }
    CHECK(aborts > 0);

    config.abort_on_addition_failure = false;
    for (int i = 0; i < 50; ++i) {
        auto rec = simulate_evolution(terms, 2.2, config, 800 + i);
        CHECK(rec.subtraction_attempts + rec.corrections_applied <= config.budget);
    }
}

TEST_CASE("pairwise delta and bookkeeping") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    auto spec = build_mpf_spec(1, 1, std::log(2.0) / 2.0);
    auto step = prepare_mpf_step(spec, terms, 0.3);
    CHECK(step.pair_steps() == 1);
    CHECK(pairwise_delta(step)
          == doctest::Approx(spectral_norm(step.forward[0] - step.forward[1])));
    // one S_1(lam) pass plus two S_1(lam/2) passes: (1 + 2) * 2m
    CHECK(step.exponentials_per_attempt == 12);
    CHECK(step.kappa_subtraction == doctest::Approx(4.0).epsilon(1e-12));

    TrialRecord rec;
    rec.rng_seed = 42;
    rec.succeeded = true;
    rec.subtraction_attempts = 3;
    rec.corrections_applied = 1;
    rec.exponentials_consumed = 48;
    CHECK(trial_csv_header()
          == "seed,succeeded,subtraction_attempts,corrections,addition_failures,exponentials,"
             "fidelity_error");
    CHECK(trial_csv_row(rec, 1e-9) == "42,1,3,1,0,48,1.0000000000000001e-09");
    CHECK(trial_csv_row(rec, std::nan("")) == "42,1,3,1,0,48,");
}
