#pragma once

#include <string>
#include <vector>

#include "lculab/numerics.hpp"

namespace lculab {

/// One factor e^{-i H_{term_index} duration}. term_index is 1-based.
struct ExpStep {
    int term_index = 1;
    double duration = 0.0;
};

/// An ordered exponential schedule realizing the symmetric integrator
/// S_chi(base_time). Always 2m 5^{chi-1} steps and palindromic.
struct ProductFormula {
    std::vector<ExpStep> steps;
    int chi = 1;
    double base_time = 0.0;
};

/// s_p = (4 - 4^{1/(2p+1)})^{-1}.
double suzuki_fraction(int p);

/// S_1(t): forward sweep at t/2 followed by the reverse sweep.
ProductFormula build_s1(int m, double t);

/// S_chi(t) by the five-fold recursion
/// S_chi = S_{chi-1}(s t)^2 S_{chi-1}((1-4s) t) S_{chi-1}(s t)^2.
ProductFormula build_schi(int m, int chi, double t);

/// max over steps of |duration| / (base_time / subdivisions).
double max_rescale_ratio(const ProductFormula& formula, int subdivisions);

/// Collapses adjacent steps on the same term. Not applied by default so step
/// counts match the 2m 5^{chi-1} bookkeeping.
ProductFormula merge_adjacent(const ProductFormula& formula);

/// Ordered product of the exponentials; steps[0] is the leftmost factor.
Matrix evaluate_schedule(const ProductFormula& formula, const TermList& terms);

std::string schedule_to_json(const ProductFormula& formula);
ProductFormula schedule_from_json(const std::string& text);

}  // namespace lculab
