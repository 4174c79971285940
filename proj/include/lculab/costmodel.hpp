#pragma once

#include <string>

#include "lculab/coefficients.hpp"

namespace lculab {

/// (s^{order+1} / (order+1)!) e^s, bounding the tail of the exponential
/// series with argument s = sum_j |a_j| h t.
double taylor_remainder_bound(double abs_coeff_sum, int order);

/// (2 m (5/3)^{k-1} h lambda)^{4k+1}, valid for
/// h lambda <= 3 log 2 / (4 m k (5/3)^{k-1}) and |C_q| <= 2.
double mpf_error_bound(int k, int m, double h, double lambda);

/// (2 m k (5/3)^{k-1} h lambda)^{4k+2}, valid for 2 m k (5/3)^{k-1} h lambda <= 1/2.
double inversion_error_bound(int k, int m, double h, double lambda);

/// Remainder-based bound 4 ((4/3) m k (5/3)^{k-1} h t / r)^{2k+1} / (2k+1)! on
/// the max distance between any two combined integrators of one step.
double delta_taylor_bound(int k, int m, double h, double t, long long r);

/// ceil(max{ (4 m (5/3)^{k-1} h t)^{1+1/4k} / (eps_tilde/5)^{1/4k},
///           13 log(2/beta) }).  Requires eps_tilde <= m h t k^{-4k}.
long long choose_r(int k, int m, double h, double t, double eps_tilde, double beta);

/// The un-rounded first branch of choose_r, for scaling checks.
double choose_r_first_branch(int k, int m, double h, double t, double eps_tilde);

/// ceil( sqrt(L / (1 + log(eta)/2 + log(25/3))) / 2 ) with L = log(m h t / eps_tilde),
/// floored at 1.
int choose_k_opt_from_log(double log_mht_over_eps);
int choose_k_opt(int m, double h, double t, double eps_tilde);

/// ceil(1000 m 5^{k-1} k^{9/4} e^{(1+log(eta)/2) k} r).
long long nexp_bound(int k, int m, long long r);

/// e^{c k + L/(4k)} with c = 1 + log(eta)/2 + log(25/3): the dominant factor
/// of the exponential count as a function of k.
double dominant_factor(int k, double log_mht_over_eps);

struct CostPlan {
    int k = 1;
    double gamma = 0.0;
    MpfSpec spec;
    long long r = 1;
    double eps_tilde = 0.0;
    long long nexp = 0;
    double beta = 0.0;
    double eps = 0.0;
    int m = 1;
    double h = 1.0;
    double t = 1.0;
};

/// Selects eps_tilde, k, gamma (delta = 1/2), the ladder, r and the
/// exponential budget for simulating sum_j H_j for time t to error eps with
/// failure probability at most beta. Exact-rational checks |C_q| <= 2 and
/// sum_{q<=k} |C_q| <= 1 are enforced on the resulting ladder.
CostPlan build_plan(int m, double h, double t, double eps, double beta);

std::string cost_plan_to_json(const CostPlan& plan);

}  // namespace lculab
