#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lculab/numerics.hpp"

namespace lculab {

/// Ancilla prepare/measure data of the general combination circuit: only the
/// prepared column of A and the measured row of B are materialized (their
/// unitary completions never enter the designated-outcome probability).
struct GeneralProtocol {
    Vector prep;     // A_{m,0}, 2-normalized
    Vector measure;  // B_{0,m}, 2-normalized
};

/// a_m = b_m = sqrt(C_m) (principal root), normalized; saturates the
/// Cauchy-Schwarz bound so that B_{0,m} A_{m,0} = K C_m with one real K > 0.
GeneralProtocol optimal_amplitudes(const std::vector<double>& coeffs);

/// The real constant K of a protocol relative to a coefficient vector.
double protocol_constant(const GeneralProtocol& protocol, const std::vector<double>& coeffs);

/// || sum_m B_{0,m} A_{m,0} U_m |psi> ||^2, the designated-outcome probability.
double general_circuit_success(const GeneralProtocol& protocol,
                               const std::vector<const Matrix*>& unitaries,
                               const Vector& state);

/// ((kappa-1)/(kappa+1))^2; 1 when all coefficients share one sign.
double success_upper_bound(const std::vector<BigRational>& coeffs);
double success_upper_bound(const std::vector<double>& coeffs);

/// Joint ancilla-outcome distribution of the combination circuit computed by
/// building the full (ancilla x system) statevector: explicit V_kappa layers,
/// the block-controlled unitaries, the adjoint layers, then analytic
/// measurement of every ancilla. Signed weights split into the
/// positive/negative folds with a final subtraction exactly as the sampler
/// does. At most 3 combination steps.
std::map<std::string, double> explicit_circuit_reference(const std::vector<double>& signed_weights,
                                                         const std::vector<const Matrix*>& unitaries,
                                                         const Vector& state);

/// Pure-fold variant with caller-supplied per-step kappas.
std::map<std::string, double> explicit_fold_reference(const std::vector<double>& weights,
                                                      const std::vector<const Matrix*>& unitaries,
                                                      const std::vector<double>& kappas,
                                                      const Vector& state);

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b);

}  // namespace lculab
