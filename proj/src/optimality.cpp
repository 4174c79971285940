#include "lculab/optimality.hpp"

#include <cmath>
#include <complex>
#include <set>
#include <stdexcept>

namespace lculab {

namespace {

constexpr int kMaxAncillae = 3;

struct LeafRef {
    const Matrix* u = nullptr;
    double sign = 1.0;
};

// One pair step per ancilla; a basis pattern selects the leaf whose gate
// fires (the highest set bit inside a fold wins, all-zero keeps the first
// leaf; the subtraction bit switches between the two folds).
struct ReferenceLayout {
    std::vector<double> kappas;        // per ancilla, in measurement order
    int pos_bits = 0;
    int neg_bits = 0;
    bool subtraction = false;
    std::vector<LeafRef> pos_leaves;
    std::vector<LeafRef> neg_leaves;

    int ancillae() const { return pos_bits + neg_bits + (subtraction ? 1 : 0); }

    LeafRef leaf_for(unsigned pattern) const {
        auto pick = [](unsigned bits, int width, const std::vector<LeafRef>& leaves) {
            int chosen = 0;
            for (int b = 0; b < width; ++b)
                if (bits & (1u << b)) chosen = b + 1;
            return leaves[chosen];
        };
        if (!subtraction) {
            const auto& leaves = pos_leaves.empty() ? neg_leaves : pos_leaves;
            int width = pos_leaves.empty() ? neg_bits : pos_bits;
            return pick(pattern, width, leaves);
        }
        bool sub_bit = (pattern >> (pos_bits + neg_bits)) & 1u;
        if (!sub_bit) return pick(pattern & ((1u << pos_bits) - 1u), pos_bits, pos_leaves);
        LeafRef leaf = pick((pattern >> pos_bits) & ((1u << neg_bits) - 1u), neg_bits, neg_leaves);
        leaf.sign = -leaf.sign;  // the subtracted circuit enters negated
        return leaf;
    }
};

std::vector<double> fold_kappas(const std::vector<double>& weights) {
    std::vector<double> out;
    double cumulative = weights.empty() ? 0.0 : weights[0];
    for (std::size_t i = 1; i < weights.size(); ++i) {
        out.push_back(cumulative / weights[i]);
        cumulative += weights[i];
    }
    return out;
}

std::map<std::string, double> run_reference(const ReferenceLayout& layout, const Vector& state) {
    const int n_anc = layout.ancillae();
    if (n_anc > kMaxAncillae)
        throw std::runtime_error("unsupported: more than 3 combination steps");
    const unsigned n_patterns = 1u << n_anc;
    const long dim = state.size();

    // prepared ancilla amplitudes and the controlled layer
    std::vector<Vector> blocks(n_patterns, Vector::Zero(dim));
    for (unsigned x = 0; x < n_patterns; ++x) {
        double amp = 1.0;
        for (int j = 0; j < n_anc; ++j) {
            double kap = layout.kappas[j];
            amp *= (x & (1u << j)) ? std::sqrt(1.0 / (kap + 1.0))
                                   : std::sqrt(kap / (kap + 1.0));
        }
        LeafRef leaf = layout.leaf_for(x);
        blocks[x] = amp * leaf.sign * ((*leaf.u) * state);
    }

    // adjoint rotation on every ancilla
    for (int j = 0; j < n_anc; ++j) {
        double kap = layout.kappas[j];
        double c = std::sqrt(kap / (kap + 1.0));
        double s = std::sqrt(1.0 / (kap + 1.0));
        for (unsigned x = 0; x < n_patterns; ++x) {
            if (x & (1u << j)) continue;
            unsigned y = x | (1u << j);
            Vector lo = blocks[x], hi = blocks[y];
            blocks[x] = c * lo + s * hi;
            blocks[y] = -s * lo + c * hi;
        }
    }

    std::map<std::string, double> dist;
    for (unsigned x = 0; x < n_patterns; ++x) {
        std::string bits(n_anc, '0');
        for (int j = 0; j < n_anc; ++j)
            if (x & (1u << j)) bits[j] = '1';
        dist[bits] = blocks[x].squaredNorm();
    }
    return dist;
}

}  // namespace

GeneralProtocol optimal_amplitudes(const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty coefficient vector");
    double abs_sum = 0.0;
    for (double c : coeffs) abs_sum += std::abs(c);
    if (abs_sum == 0.0) throw std::invalid_argument("all-zero coefficient vector");

    GeneralProtocol p;
    p.prep = Vector(coeffs.size());
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        Complex root = std::sqrt(Complex(coeffs[m], 0.0));  // principal branch
        p.prep(static_cast<Eigen::Index>(m)) = root / std::sqrt(abs_sum);
    }
    p.measure = p.prep;
    return p;
}

double protocol_constant(const GeneralProtocol& protocol, const std::vector<double>& coeffs) {
    double best = 0.0;
    double best_abs = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        if (coeffs[m] == 0.0) continue;
        Complex prod = protocol.measure(static_cast<Eigen::Index>(m)) *
                       protocol.prep(static_cast<Eigen::Index>(m));
        if (std::abs(coeffs[m]) > best_abs) {
            best_abs = std::abs(coeffs[m]);
            best = (prod / coeffs[m]).real();
        }
    }
    return best;
}

double general_circuit_success(const GeneralProtocol& protocol,
                               const std::vector<const Matrix*>& unitaries,
                               const Vector& state) {
    if (static_cast<std::size_t>(protocol.prep.size()) != unitaries.size())
        throw std::invalid_argument("protocol size does not match unitary count");
    Vector acc = Vector::Zero(state.size());
    for (std::size_t m = 0; m < unitaries.size(); ++m) {
        Complex w = protocol.measure(static_cast<Eigen::Index>(m)) *
                    protocol.prep(static_cast<Eigen::Index>(m));
        acc += w * ((*unitaries[m]) * state);
    }
    return acc.squaredNorm();
}

double success_upper_bound(const std::vector<BigRational>& coeffs) {
    auto kap = kappa(coeffs);
    if (!kap) return 1.0;
    double k = to_double(*kap);
    return ((k - 1.0) / (k + 1.0)) * ((k - 1.0) / (k + 1.0));
}

double success_upper_bound(const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty coefficient vector");
    double plus = 0.0, minus = 0.0;
    for (double c : coeffs) {
        if (c > 0) plus += c;
        if (c < 0) minus -= c;
    }
    if (plus == 0.0 && minus == 0.0)
        throw std::invalid_argument("all-zero coefficient vector");
    if (minus == 0.0) return 1.0;
    double k = plus / minus;
    return ((k - 1.0) / (k + 1.0)) * ((k - 1.0) / (k + 1.0));
}

std::map<std::string, double> explicit_circuit_reference(const std::vector<double>& signed_weights,
                                                         const std::vector<const Matrix*>& unitaries,
                                                         const Vector& state) {
    if (signed_weights.size() != unitaries.size())
        throw std::invalid_argument("weights/unitaries size mismatch");
    if (signed_weights.empty()) throw std::invalid_argument("empty combination");

    ReferenceLayout layout;
    std::vector<double> pos_w, neg_w;
    for (std::size_t i = 0; i < signed_weights.size(); ++i) {
        if (signed_weights[i] > 0.0) {
            layout.pos_leaves.push_back({unitaries[i], 1.0});
            pos_w.push_back(signed_weights[i]);
        } else if (signed_weights[i] < 0.0) {
            layout.neg_leaves.push_back({unitaries[i], 1.0});
            neg_w.push_back(-signed_weights[i]);
        }
    }
    if (layout.pos_leaves.empty() && layout.neg_leaves.empty())
        throw std::invalid_argument("all-zero combination");

    layout.pos_bits = layout.pos_leaves.empty() ? 0 : static_cast<int>(layout.pos_leaves.size()) - 1;
    layout.neg_bits = layout.neg_leaves.empty() ? 0 : static_cast<int>(layout.neg_leaves.size()) - 1;
    layout.subtraction = !layout.pos_leaves.empty() && !layout.neg_leaves.empty();

    for (double k : fold_kappas(pos_w)) layout.kappas.push_back(k);
    for (double k : fold_kappas(neg_w)) layout.kappas.push_back(k);
    if (layout.subtraction) {
        double sp = 0.0, sm = 0.0;
        for (double w : pos_w) sp += w;
        for (double w : neg_w) sm += w;
        layout.kappas.push_back(sp / sm);
    }
    return run_reference(layout, state);
}

std::map<std::string, double> explicit_fold_reference(const std::vector<double>& weights,
                                                      const std::vector<const Matrix*>& unitaries,
                                                      const std::vector<double>& kappas,
                                                      const Vector& state) {
    if (weights.size() != unitaries.size())
        throw std::invalid_argument("weights/unitaries size mismatch");
    if (kappas.size() + 1 != unitaries.size())
        throw std::invalid_argument("need one kappa per fold step");
    ReferenceLayout layout;
    for (const Matrix* u : unitaries) layout.pos_leaves.push_back({u, 1.0});
    layout.pos_bits = static_cast<int>(unitaries.size()) - 1;
    layout.kappas = kappas;
    return run_reference(layout, state);
}

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    double tv = 0.0;
    for (const auto& k : keys) {
        double pa = a.count(k) ? a.at(k) : 0.0;
        double pb = b.count(k) ? b.at(k) : 0.0;
        tv += std::abs(pa - pb);
    }
    return tv / 2.0;
}

}  // namespace lculab
