#include "lculab/numerics.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <stdexcept>

#include "lculab/suzuki.hpp"

namespace lculab {

namespace {

void require_hermitian(const Matrix& H, double tol) {
    double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
        throw std::invalid_argument("matrix is not Hermitian");
}

}  // namespace

Matrix herm_exp(const Matrix& H, double t) {
    if (H.rows() != H.cols()) throw std::invalid_argument("square matrix required");
    require_hermitian(H, 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es((H + H.adjoint()) / 2.0);
    const auto& vals = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    Vector phases(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -vals(i) * t));
    return vecs * phases.asDiagonal() * vecs.adjoint();
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

TermList random_term_list(int n_qubits, int m, double h, std::uint64_t seed) {
    if (n_qubits < 1 || n_qubits > 5) throw std::invalid_argument("n_qubits must lie in [1,5]");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!(h > 0)) throw std::invalid_argument("h must be positive");

    TermList terms;
    terms.n_qubits = n_qubits;
    terms.h = h;
    const long dim = 1L << n_qubits;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < m; ++j) {
        Matrix x(dim, dim);
        for (long r = 0; r < dim; ++r)
            for (long c = 0; c < dim; ++c) x(r, c) = Complex(gauss(rng), gauss(rng));
        Matrix herm = (x + x.adjoint()) / 2.0;
        herm *= h / spectral_norm(herm);
        terms.matrices.push_back(std::move(herm));
    }
    return terms;
}

Matrix total_hamiltonian(const TermList& terms) {
    if (terms.matrices.empty()) throw std::invalid_argument("empty term list");
    Matrix H = terms.matrices[0];
    for (std::size_t j = 1; j < terms.matrices.size(); ++j) H += terms.matrices[j];
    return H;
}

Matrix exact_evolution(const TermList& terms, double t) {
    return herm_exp(total_hamiltonian(terms), t);
}

namespace {

Matrix matrix_power(const Matrix& base, long long exp) {
    Matrix result = Matrix::Identity(base.rows(), base.cols());
    Matrix b = base;
    long long e = exp;
    while (e > 0) {
        if (e & 1) result = result * b;
        b = b * b;
        e >>= 1;
    }
    return result;
}

}  // namespace

Matrix integrator_matrix(const MpfSpec& spec, const TermList& terms, double t, int q) {
    if (q < 0 || q >= spec.terms()) throw std::out_of_range("integrator index");
    long long ell = spec.ells[q];
    ProductFormula schedule = build_schi(terms.m(), spec.chi, t / static_cast<double>(ell));
    return matrix_power(evaluate_schedule(schedule, terms), ell);
}

Matrix assemble_mpf_matrix(const MpfSpec& spec, const TermList& terms, double t) {
    Matrix acc = Matrix::Zero(terms.dim(), terms.dim());
    for (int q = 0; q < spec.terms(); ++q)
        acc += to_double(spec.coeffs[q]) * integrator_matrix(spec, terms, t, q);
    return acc;
}

Matrix mpf_abs_matrix(const MpfSpec& spec, const TermList& terms, double t) {
    Matrix acc = Matrix::Zero(terms.dim(), terms.dim());
    for (int q = 0; q < spec.terms(); ++q)
        acc += std::abs(to_double(spec.coeffs[q])) * integrator_matrix(spec, terms, t, q);
    return acc;
}

Vector random_state(long dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(dim);
    for (long i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    v.normalize();
    return v;
}

double inversion_deviation(const MpfSpec& spec, const TermList& terms, double lambda,
                           int n_random_states, std::uint64_t seed) {
    Matrix F = mpf_abs_matrix(spec, terms, lambda);
    Matrix G = mpf_abs_matrix(spec, terms, -lambda);
    Matrix T = G * F;

    auto deviation = [&](const Vector& psi) {
        Vector mapped = T * psi;
        double n = mapped.norm();
        if (n == 0.0) return 2.0;
        return (psi - mapped / n).norm();
    };

    double worst = 0.0;
    for (int i = 0; i < n_random_states; ++i)
        worst = std::max(worst, deviation(random_state(terms.dim(), seed + i)));
    // singular directions of T - I catch the extremal states
    Eigen::JacobiSVD<Matrix> svd(T - Matrix::Identity(T.rows(), T.cols()), Eigen::ComputeFullV);
    for (Eigen::Index c = 0; c < svd.matrixV().cols(); ++c)
        worst = std::max(worst, deviation(svd.matrixV().col(c)));
    return worst;
}

SlopeFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("mismatched fit data");
    SlopeFit fit;
    fit.points_used = static_cast<int>(xs.size());
    if (xs.size() < 2) return fit;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys,
                    double y_min, double y_max) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] >= y_min && ys[i] <= y_max && xs[i] > 0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    return fit_linear(lx, ly);
}

std::string term_list_to_json(const TermList& terms) {
    nlohmann::json j;
    j["n_qubits"] = terms.n_qubits;
    j["h"] = terms.h;
    auto mats = nlohmann::json::array();
    for (const auto& mat : terms.matrices) {
        auto rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < mat.cols(); ++c)
                row.push_back({mat(r, c).real(), mat(r, c).imag()});
            rows.push_back(std::move(row));
        }
        mats.push_back(std::move(rows));
    }
    j["matrices"] = std::move(mats);
    return j.dump();
}

TermList term_list_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    TermList terms;
    terms.n_qubits = j.at("n_qubits").get<int>();
    terms.h = j.at("h").get<double>();
    const long dim = 1L << terms.n_qubits;
    for (const auto& rows : j.at("matrices")) {
        Matrix mat(dim, dim);
        if (static_cast<long>(rows.size()) != dim)
            throw std::invalid_argument("matrix dimension mismatch in term list");
        for (long r = 0; r < dim; ++r)
            for (long c = 0; c < dim; ++c)
                mat(r, c) = Complex(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
        terms.matrices.push_back(std::move(mat));
    }
    if (terms.matrices.empty()) throw std::invalid_argument("term list without matrices");
    return terms;
}

}  // namespace lculab
