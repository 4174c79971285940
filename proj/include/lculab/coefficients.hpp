#pragma once

#include <optional>
#include <vector>

#include "lculab/rational.hpp"

namespace lculab {

/// A multi-product formula: the weighted sum sum_q C_q S_chi(t/ell_q)^{ell_q}
/// of repeated base integrators of order 2*chi. The repetition numbers are
/// ell_q = q for q <= k and ell_{k+1} = ceil(e^{gamma (k+1)}); gamma is stored
/// realized, i.e. gamma = log(ell_{k+1}) / (k+1) exactly.
struct MpfSpec {
    int k = 0;
    int chi = 1;
    double gamma = 0.0;  // realized value
    std::vector<long long> ells;
    std::vector<BigRational> coeffs;

    int terms() const { return static_cast<int>(ells.size()); }
};

/// Closed-form extrapolation coefficients C_q = prod_{j != q} ell_q^2 / (ell_q^2 - ell_j^2)
/// for a first-order-family ladder. Entries must be distinct positive integers.
std::vector<BigRational> coefficients_general(const std::vector<long long>& ells);

/// Exact solution of the order-condition system for a base integrator of
/// order 2*chi: sum_q C_q = 1 and sum_q C_q ell_q^{-2(chi+i-1)} = 0 for
/// i = 1..k. Solved by rational Gaussian elimination; for chi = 1 this
/// reproduces coefficients_general.
std::vector<BigRational> solve_order_conditions(const std::vector<long long>& ells, int chi);

/// Builds the ladder and coefficients for given k >= 1, chi >= 1 and target
/// growth parameter. Throws std::domain_error when the rounded top repetition
/// number collides with the ladder (ceil(e^{gamma (k+1)}) <= k).
MpfSpec build_mpf_spec(int k, int chi, double gamma_target);

/// Substitutes the coefficients back into the order-condition system and
/// checks every row with exact arithmetic.
bool verify_order_conditions(const MpfSpec& spec);

/// kappa = (sum of positive C_q) / (sum of |negative C_q|), exact.
/// Returns std::nullopt when there is no negative mass (kappa = +infinity).
std::optional<BigRational> kappa(const std::vector<BigRational>& coeffs);

double kappa_as_double(const std::optional<BigRational>& k);

/// max over [0,1) of lambda^2 / ((1+lambda)^{1+lambda} (1-lambda)^{1-lambda}),
/// located by golden-section search to 1e-12 and cached.
double eta_constant();

/// gamma_c = 1 + log(eta)/2, the growth threshold for kappa.
double gamma_critical();

/// Sufficient gamma so that the subtraction-failure probability stays below
/// delta: gamma_c + log((2k)^{5/2}/delta) / (2k).  delta must lie in (0,1].
double choose_gamma(int k, double delta);

/// Upper bound sqrt(2) k^{3/2} e^{2k(gamma_c - gamma)} on |C_q| for q <= k.
/// Requires e^{2 gamma (k+1)} >= 2 k^2.
double cq_upper_bound(int k, double gamma);

/// Lower bound 2^{-1/2} k^{-5/2} e^{-2k(gamma_c - gamma)} on kappa.
/// Requires 2 k^2 <= e^{2 gamma (k+1)}.
double kappa_lower_bound(int k, double gamma);

}  // namespace lculab
