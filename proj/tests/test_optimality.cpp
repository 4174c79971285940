#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lculab/optimality.hpp"
#include "lculab/protocol.hpp"

using namespace lculab;

namespace {

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

Vector plus_state() {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return v;
}

// Random prepare/measure pair still implementing the target combination:
// a_m b_m = K C_m with random magnitude splits and phases.
GeneralProtocol random_implementing_protocol(const std::vector<double>& coeffs,
                                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    GeneralProtocol p;
    p.prep = Vector(coeffs.size());
    p.measure = Vector(coeffs.size());
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        double mag = std::sqrt(std::abs(coeffs[m]));
        double t = scale(rng);
        double phi = phase(rng);
        double arg = coeffs[m] < 0 ? M_PI : 0.0;
        auto i = static_cast<Eigen::Index>(m);
        p.prep(i) = std::polar(mag * t, phi);
        p.measure(i) = std::polar(mag / t, arg - phi);
    }
    p.prep.normalize();
    p.measure.normalize();
    return p;
}

}  // namespace

TEST_CASE("optimal amplitudes") {
    auto trivial = optimal_amplitudes({1.0});
    CHECK(std::abs(trivial.prep(0) - Complex(1, 0)) < 1e-15);
    CHECK(protocol_constant(trivial, {1.0}) == doctest::Approx(1.0));

    std::vector<double> rich{-1.0 / 3.0, 4.0 / 3.0};
    auto p = optimal_amplitudes(rich);
    CHECK(std::norm(p.prep(0)) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::norm(p.prep(1)) == doctest::Approx(0.8).epsilon(1e-12));

    double K = protocol_constant(p, rich);
    CHECK(K == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    for (int m = 0; m < 2; ++m)
        CHECK(std::abs(p.measure(m) * p.prep(m) - K * rich[m]) < 1e-14);

    CHECK_THROWS_AS(optimal_amplitudes({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("success upper bound") {
    CHECK(success_upper_bound(std::vector<double>{1.0, -1.0}) == doctest::Approx(0.0));
    CHECK(success_upper_bound(std::vector<double>{-1.0 / 3.0, 4.0 / 3.0})
          == doctest::Approx(9.0 / 25.0).epsilon(1e-12));
    CHECK(success_upper_bound(std::vector<double>{0.5, 0.5}) == doctest::Approx(1.0));
    CHECK(success_upper_bound(std::vector<BigRational>{BigRational(-1, 3), BigRational(4, 3)})
          == doctest::Approx(9.0 / 25.0).epsilon(1e-12));
}

TEST_CASE("identical unitaries saturate the bound") {
    std::vector<double> rich{-1.0 / 3.0, 4.0 / 3.0};
    auto p = optimal_amplitudes(rich);
    Matrix id = Matrix::Identity(2, 2);
    Vector psi = plus_state();
    double success = general_circuit_success(p, {&id, &id}, psi);
    CHECK(success == doctest::Approx(0.36).epsilon(1e-12));

    auto terms = random_term_list(1, 1, 1.0, 77);
    Matrix u = herm_exp(terms.matrices[0], 1.3);
    for (int s = 0; s < 10; ++s) {
        Vector state = random_state(2, 500 + s);
        CHECK(general_circuit_success(p, {&u, &u}, state)
              == doctest::Approx(0.36).epsilon(1e-12));
    }

    std::vector<double> positive{0.25, 0.75};
    auto pp = optimal_amplitudes(positive);
    CHECK(general_circuit_success(pp, {&id, &id}, psi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no implementing protocol beats the bound") {
    std::vector<double> coeffs{-1.0 / 3.0, 4.0 / 3.0};
    double bound = success_upper_bound(coeffs);
    Matrix id = Matrix::Identity(2, 2);
    Vector psi = plus_state();
    std::mt19937_64 rng(2718);
    for (int i = 0; i < 100; ++i) {
        auto p = random_implementing_protocol(coeffs, rng);
        CHECK(general_circuit_success(p, {&id, &id}, psi) <= bound + 1e-12);
    }

    std::vector<double> three{-0.2, 0.5, 0.7};
    double bound3 = success_upper_bound(three);
    for (int i = 0; i < 100; ++i) {
        auto p = random_implementing_protocol(three, rng);
        CHECK(general_circuit_success(p, {&id, &id, &id}, psi) <= bound3 + 1e-12);
    }
}

TEST_CASE("explicit reference: single pair") {
    Matrix id = Matrix::Identity(2, 2);
    Matrix z = pauli_z();
    Vector psi = plus_state();

    auto same = explicit_fold_reference({1.0, 1.0}, {&id, &id}, {1.0}, psi);
    CHECK(same.at("0") == doctest::Approx(1.0).epsilon(1e-12));

    auto iz = explicit_fold_reference({1.0, 1.0}, {&id, &z}, {1.0}, psi);
    CHECK(iz.at("0") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(iz.at("1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("explicit reference distributions are normalized") {
    auto terms = random_term_list(2, 2, 1.0, 19);
    Vector psi = random_state(4, 4);
    Matrix u0 = herm_exp(terms.matrices[0], 0.2);
    Matrix u1 = herm_exp(terms.matrices[1], 0.3);
    Matrix u2 = herm_exp(terms.matrices[0], -0.4);

    auto dist = explicit_circuit_reference({0.6, -0.3, 0.9}, {&u0, &u1, &u2}, psi);
    double total = 0.0;
    for (const auto& [bits, p] : dist) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);

    Matrix u3 = herm_exp(terms.matrices[1], -0.1);
    CHECK_THROWS_AS(
        explicit_circuit_reference({0.6, -0.3, 0.9, -0.2, 0.4},
                                   {&u0, &u1, &u2, &u3, &u0}, psi),
        std::runtime_error);
}

TEST_CASE("fold protocol stays below the theoretical success bound") {
    auto terms = random_term_list(2, 2, 1.0, 11);
    Vector psi = random_state(4, 8);
    for (int k : {1, 2}) {
        auto spec = build_mpf_spec(k, 1, std::log(2.0 * k) / (k + 1));
        double bound = success_upper_bound(spec.coeffs);
        double lam = 0.002;  // similar unitaries
        auto dist = branch_distribution(spec, terms, lam, psi);
        std::string success_bits;
        auto step = prepare_mpf_step(spec, terms, lam);
        success_bits.assign(step.pair_steps(), '0');
        CHECK(dist.at(success_bits) <= bound + 1e-12);
    }
}
