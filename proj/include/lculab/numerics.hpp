#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "lculab/coefficients.hpp"

namespace lculab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// H = sum_j H_j as dense Hermitian matrices on n_qubits qubits, each with
/// spectral norm bounded by (and, for generated instances, equal to) h.
struct TermList {
    std::vector<Matrix> matrices;
    double h = 1.0;
    int n_qubits = 1;

    int m() const { return static_cast<int>(matrices.size()); }
    long dim() const { return 1L << n_qubits; }
};

/// e^{-i H t} for Hermitian H via eigendecomposition.
Matrix herm_exp(const Matrix& H, double t);

/// Largest singular value.
double spectral_norm(const Matrix& M);

/// Seeded Gaussian Hermitian terms, each rescaled to spectral norm h.
TermList random_term_list(int n_qubits, int m, double h, std::uint64_t seed);

Matrix total_hamiltonian(const TermList& terms);

/// Ground-truth evolution e^{-i (sum_j H_j) t}.
Matrix exact_evolution(const TermList& terms, double t);

/// S_chi(t/ell_q)^{ell_q} as an explicit matrix.
Matrix integrator_matrix(const MpfSpec& spec, const TermList& terms, double t, int q);

/// The multi-product matrix sum_q C_q S_chi(t/ell_q)^{ell_q}.
Matrix assemble_mpf_matrix(const MpfSpec& spec, const TermList& terms, double t);

/// sum_q |C_q| S_chi(t/ell_q)^{ell_q} (not normalized); the operation effected
/// by a failed subtraction, used for inversion-error measurements.
Matrix mpf_abs_matrix(const MpfSpec& spec, const TermList& terms, double t);

/// Measured max over probe states of || psi - G F psi / ||G F psi|| || with
/// F, G the failed-subtraction maps at +lambda and -lambda. Probes random
/// states plus the singular directions of G F - I.
double inversion_deviation(const MpfSpec& spec, const TermList& terms, double lambda,
                           int n_random_states, std::uint64_t seed);

Vector random_state(long dim, std::uint64_t seed);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points_used = 0;
};

/// Least-squares fit of log(y) against log(x) restricted to points with
/// y in [y_min, y_max]; keeps the fit inside the window between the
/// double-precision floor and the breakdown of the asymptotic regime.
SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys,
                    double y_min = 1e-10, double y_max = 1e-3);

/// Plain least-squares slope of y against x.
SlopeFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

std::string term_list_to_json(const TermList& terms);
TermList term_list_from_json(const std::string& text);

}  // namespace lculab
