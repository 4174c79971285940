#include "lculab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lculab {

namespace {

void check_ladder(const std::vector<long long>& ells) {
    if (ells.empty()) throw std::invalid_argument("empty repetition ladder");
    std::set<long long> seen;
    for (long long l : ells) {
        if (l < 1) throw std::invalid_argument("repetition numbers must be >= 1");
        if (!seen.insert(l).second)
            throw std::invalid_argument("repetition numbers must be distinct");
    }
}

// ceil with a relative snap so that near-integer targets coming from decimal
// gamma inputs land on the intended integer.
long long snapped_ceil(double x) {
    double n = std::round(x);
    if (std::abs(x - n) <= 1e-4 * std::max(1.0, std::abs(x))) return static_cast<long long>(n);
    return static_cast<long long>(std::ceil(x));
}

}  // namespace

std::vector<BigRational> coefficients_general(const std::vector<long long>& ells) {
    check_ladder(ells);
    std::vector<BigRational> out;
    out.reserve(ells.size());
    for (long long q : ells) {
        BigRational c(1);
        BigInt q2 = BigInt(q) * q;
        for (long long j : ells) {
            if (j == q) continue;
            BigInt j2 = BigInt(j) * j;
            c *= BigRational(q2) / BigRational(q2 - j2);
        }
        out.push_back(c);
    }
    return out;
}

std::vector<BigRational> solve_order_conditions(const std::vector<long long>& ells, int chi) {
    check_ladder(ells);
    if (chi < 1) throw std::invalid_argument("chi must be >= 1");
    const int n = static_cast<int>(ells.size());
    const int k = n - 1;

    // Row 0 is all ones; row i >= 1 has entries ell_q^{-2(chi+i-1)}.
    std::vector<std::vector<BigRational>> a(n, std::vector<BigRational>(n + 1, BigRational(0)));
    for (int q = 0; q < n; ++q) a[0][q] = 1;
    a[0][n] = 1;
    for (int i = 1; i <= k; ++i) {
        unsigned exp = 2u * static_cast<unsigned>(chi + i - 1);
        for (int q = 0; q < n; ++q)
            a[i][q] = rational_pow(BigRational(1, ells[q]), exp);
    }

    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (a[r][col] != 0) { pivot = r; break; }
        if (pivot < 0) throw std::domain_error("singular order-condition system");
        std::swap(a[col], a[pivot]);
        BigRational pv = a[col][col];
        for (int c = col; c <= n; ++c) a[col][c] /= pv;
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            BigRational f = a[r][col];
            for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }

    std::vector<BigRational> out(n);
    for (int q = 0; q < n; ++q) out[q] = a[q][n];
    return out;
}

MpfSpec build_mpf_spec(int k, int chi, double gamma_target) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (chi < 1) throw std::invalid_argument("chi must be >= 1");
    if (!(gamma_target > 0)) throw std::invalid_argument("gamma must be positive");

    long long top = snapped_ceil(std::exp(gamma_target * (k + 1)));
    if (top <= k)
        throw std::domain_error("degenerate formula: ceil(e^{gamma (k+1)}) <= k");

    MpfSpec spec;
    spec.k = k;
    spec.chi = chi;
    spec.gamma = std::log(static_cast<double>(top)) / (k + 1);
    spec.ells.reserve(k + 1);
    for (int q = 1; q <= k; ++q) spec.ells.push_back(q);
    spec.ells.push_back(top);
    spec.coeffs = (chi == 1) ? coefficients_general(spec.ells)
                             : solve_order_conditions(spec.ells, chi);
    return spec;
}

bool verify_order_conditions(const MpfSpec& spec) {
    const int n = spec.terms();
    BigRational sum(0);
    for (const auto& c : spec.coeffs) sum += c;
    if (sum != 1) return false;
    for (int i = 1; i < n; ++i) {
        unsigned exp = 2u * static_cast<unsigned>(spec.chi + i - 1);
        BigRational row(0);
        for (int q = 0; q < n; ++q)
            row += spec.coeffs[q] * rational_pow(BigRational(1, spec.ells[q]), exp);
        if (row != 0) return false;
    }
    return true;
}

std::optional<BigRational> kappa(const std::vector<BigRational>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty coefficient vector");
    BigRational plus(0), minus(0);
    bool any_nonzero = false;
    for (const auto& c : coeffs) {
        if (c > 0) plus += c;
        if (c < 0) minus -= c;
        if (c != 0) any_nonzero = true;
    }
    if (!any_nonzero) throw std::invalid_argument("all-zero coefficient vector");
    if (minus == 0) return std::nullopt;
    return plus / minus;
}

double kappa_as_double(const std::optional<BigRational>& k) {
    return k ? to_double(*k) : std::numeric_limits<double>::infinity();
}

namespace {

double eta_integrand(double lam) {
    if (lam <= 0.0) return 0.0;
    double log_val = 2.0 * std::log(lam) - (1.0 + lam) * std::log1p(lam)
                     - (1.0 - lam) * std::log1p(-lam);
    return std::exp(log_val);
}

double compute_eta() {
    // golden-section maximization on [0, 1)
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0 - 1e-13;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    while (b - a > 1e-12) {
        if (eta_integrand(c) > eta_integrand(d)) b = d; else a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return eta_integrand(0.5 * (a + b));
}

}  // namespace

double eta_constant() {
    static const double eta = compute_eta();
    return eta;
}

double gamma_critical() { return 1.0 + 0.5 * std::log(eta_constant()); }

double choose_gamma(int k, double delta) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("delta must lie in (0,1]");
    double gamma = gamma_critical()
                   + std::log(std::pow(2.0 * k, 2.5) / delta) / (2.0 * k);
    return gamma;
}

double cq_upper_bound(int k, double gamma) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (std::exp(2.0 * gamma * (k + 1)) < 2.0 * k * k)
        throw std::domain_error("requires e^{2 gamma (k+1)} >= 2 k^2");
    return std::sqrt(2.0) * std::pow(k, 1.5) * std::exp(2.0 * k * (gamma_critical() - gamma));
}

double kappa_lower_bound(int k, double gamma) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (2.0 * k * k > std::exp(2.0 * gamma * (k + 1)))
        throw std::domain_error("requires 2 k^2 <= e^{2 gamma (k+1)}");
    return std::exp(-2.0 * k * (gamma_critical() - gamma)) / (std::sqrt(2.0) * std::pow(k, 2.5));
}

}  // namespace lculab
