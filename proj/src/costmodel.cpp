#include "lculab/costmodel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lculab {

namespace {

double five_thirds_pow(int k) { return std::pow(5.0 / 3.0, k - 1); }

double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace

double taylor_remainder_bound(double abs_coeff_sum, int order) {
    if (abs_coeff_sum < 0.0) throw std::invalid_argument("argument must be >= 0");
    if (order < 0) throw std::invalid_argument("order must be >= 0");
    if (abs_coeff_sum == 0.0) return 0.0;
    double log_val = (order + 1) * std::log(abs_coeff_sum) - log_factorial(order + 1)
                     + abs_coeff_sum;
    return std::exp(log_val);
}

double mpf_error_bound(int k, int m, double h, double lambda) {
    if (k < 1 || m < 1 || h <= 0.0 || lambda < 0.0)
        throw std::invalid_argument("invalid bound arguments");
    if (h * lambda > 3.0 * std::log(2.0) / (4.0 * m * k * five_thirds_pow(k)))
        throw std::domain_error("h*lambda outside the bound's validity range");
    return std::pow(2.0 * m * five_thirds_pow(k) * h * lambda, 4 * k + 1);
}

double inversion_error_bound(int k, int m, double h, double lambda) {
    if (k < 1 || m < 1 || h <= 0.0 || lambda < 0.0)
        throw std::invalid_argument("invalid bound arguments");
    double x = 2.0 * m * k * five_thirds_pow(k) * h * lambda;
    if (x > 0.5) throw std::domain_error("2mk(5/3)^{k-1} h lambda must be <= 1/2");
    return std::pow(x, 4 * k + 2);
}

double delta_taylor_bound(int k, int m, double h, double t, long long r) {
    if (r < 1) throw std::invalid_argument("r must be >= 1");
    double x = (4.0 / 3.0) * m * k * five_thirds_pow(k) * h * t / static_cast<double>(r);
    if (x > std::log(2.0)) throw std::domain_error("step duration too large for the bound");
    return 4.0 * std::exp((2 * k + 1) * std::log(x) - log_factorial(2 * k + 1));
}

double choose_r_first_branch(int k, int m, double h, double t, double eps_tilde) {
    double base = 4.0 * m * five_thirds_pow(k) * h * t;
    double exponent = 1.0 + 1.0 / (4.0 * k);
    return std::pow(base, exponent) / std::pow(eps_tilde / 5.0, 1.0 / (4.0 * k));
}

long long choose_r(int k, int m, double h, double t, double eps_tilde, double beta) {
    if (k < 1 || m < 1 || h <= 0.0 || t <= 0.0)
        throw std::invalid_argument("invalid plan arguments");
    if (!(eps_tilde > 0.0)) throw std::invalid_argument("eps_tilde must be positive");
    if (!(beta > 0.0) || beta > 2.0) throw std::invalid_argument("beta must lie in (0,2]");
    if (eps_tilde > m * h * t * std::pow(static_cast<double>(k), -4.0 * k))
        throw std::domain_error("requires eps_tilde <= m h t k^{-4k}");
    double first = choose_r_first_branch(k, m, h, t, eps_tilde);
    double second = 13.0 * std::log(2.0 / beta);
    return static_cast<long long>(std::ceil(std::max(first, second)));
}

int choose_k_opt_from_log(double log_mht_over_eps) {
    if (!(log_mht_over_eps > 0.0)) return 1;
    double c = gamma_critical() + std::log(25.0 / 3.0);
    double k = 0.5 * std::sqrt(log_mht_over_eps / c);
    return std::max(1, static_cast<int>(std::ceil(k)));
}

int choose_k_opt(int m, double h, double t, double eps_tilde) {
    double ratio = m * h * t / eps_tilde;
    if (!(ratio > 1.0)) return 1;
    return choose_k_opt_from_log(std::log(ratio));
}

long long nexp_bound(int k, int m, long long r) {
    if (k < 1 || m < 1 || r < 1) throw std::invalid_argument("invalid arguments");
    double v = 1000.0 * m * std::pow(5.0, k - 1) * std::pow(static_cast<double>(k), 2.25)
               * std::exp(gamma_critical() * k) * static_cast<double>(r);
    return static_cast<long long>(std::ceil(v));
}

double dominant_factor(int k, double log_mht_over_eps) {
    double c = gamma_critical() + std::log(25.0 / 3.0);
    return std::exp(c * k + log_mht_over_eps / (4.0 * k));
}

CostPlan build_plan(int m, double h, double t, double eps, double beta) {
    if (m < 1 || h <= 0.0 || t <= 0.0) throw std::invalid_argument("invalid plan arguments");
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("eps must lie in (0,1]");
    if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("beta must lie in (0,1]");

    const double mht = m * h * t;
    // eps_tilde depends on k through m h t k^{-4k}; a provisional k from the
    // k-free part settles it in one extra pass at these scales.
    double eps_tilde = std::min({1.0, eps, beta});
    int k = choose_k_opt(m, h, t, eps_tilde);
    for (int pass = 0; pass < 2; ++pass) {
        double capped = std::min(eps_tilde, mht * std::pow(static_cast<double>(k), -4.0 * k));
        int next_k = choose_k_opt(m, h, t, capped);
        if (next_k == k) {
            eps_tilde = capped;
            break;
        }
        k = next_k;
        eps_tilde = capped;
    }

    CostPlan plan;
    plan.m = m;
    plan.h = h;
    plan.t = t;
    plan.eps = eps;
    plan.beta = beta;
    plan.k = k;
    plan.eps_tilde = eps_tilde;
    plan.spec = build_mpf_spec(k, k, choose_gamma(k, 0.5));
    plan.gamma = plan.spec.gamma;
    plan.r = choose_r(k, m, h, t, eps_tilde, beta);
    plan.nexp = nexp_bound(k, m, plan.r);

    BigRational tail(0);
    for (int q = 0; q < plan.spec.terms(); ++q) {
        BigRational a = abs(plan.spec.coeffs[q]);
        if (a > 2) throw std::domain_error("coefficient magnitude exceeds 2");
        if (q < k) tail += a;
    }
    if (tail > 1) throw std::domain_error("low-order coefficient mass exceeds 1");
    return plan;
}

std::string cost_plan_to_json(const CostPlan& plan) {
    nlohmann::json j;
    j["m"] = plan.m;
    j["h"] = plan.h;
    j["t"] = plan.t;
    j["eps"] = plan.eps;
    j["beta"] = plan.beta;
    j["eps_tilde"] = plan.eps_tilde;
    j["k"] = plan.k;
    j["chi"] = plan.spec.chi;
    j["gamma"] = plan.gamma;
    j["ells"] = plan.spec.ells;
    auto coeffs = nlohmann::json::array();
    auto decimals = nlohmann::json::array();
    for (const auto& c : plan.spec.coeffs) {
        coeffs.push_back(to_fraction_string(c));
        decimals.push_back(to_double(c));
    }
    j["coeffs"] = std::move(coeffs);
    j["coeffs_decimal"] = std::move(decimals);
    j["kappa"] = kappa_as_double(kappa(plan.spec.coeffs));
    j["r"] = plan.r;
    j["budget"] = 5 * plan.r;
    j["nexp_bound"] = plan.nexp;
    return j.dump(2);
}

}  // namespace lculab
