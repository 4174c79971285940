#include "lculab/suzuki.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <stdexcept>

namespace lculab {

double suzuki_fraction(int p) {
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    return 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * p + 1.0)));
}

ProductFormula build_s1(int m, double t) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    ProductFormula f;
    f.chi = 1;
    f.base_time = t;
    f.steps.reserve(2 * m);
    for (int j = 1; j <= m; ++j) f.steps.push_back({j, t / 2.0});
    for (int j = m; j >= 1; --j) f.steps.push_back({j, t / 2.0});
    return f;
}

ProductFormula build_schi(int m, int chi, double t) {
    if (chi < 1) throw std::invalid_argument("chi must be >= 1");
    if (chi == 1) return build_s1(m, t);
    double s = suzuki_fraction(chi - 1);
    ProductFormula outer = build_schi(m, chi - 1, s * t);
    ProductFormula middle = build_schi(m, chi - 1, (1.0 - 4.0 * s) * t);

    ProductFormula f;
    f.chi = chi;
    f.base_time = t;
    f.steps.reserve(2 * outer.steps.size() * 2 + middle.steps.size());
    for (int rep = 0; rep < 2; ++rep)
        f.steps.insert(f.steps.end(), outer.steps.begin(), outer.steps.end());
    f.steps.insert(f.steps.end(), middle.steps.begin(), middle.steps.end());
    for (int rep = 0; rep < 2; ++rep)
        f.steps.insert(f.steps.end(), outer.steps.begin(), outer.steps.end());
    return f;
}

double max_rescale_ratio(const ProductFormula& formula, int subdivisions) {
    if (subdivisions < 1) throw std::invalid_argument("subdivisions must be >= 1");
    if (formula.base_time == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& step : formula.steps)
        worst = std::max(worst, std::abs(step.duration));
    return worst / (std::abs(formula.base_time) / subdivisions);
}

ProductFormula merge_adjacent(const ProductFormula& formula) {
    ProductFormula out;
    out.chi = formula.chi;
    out.base_time = formula.base_time;
    for (const auto& step : formula.steps) {
        if (!out.steps.empty() && out.steps.back().term_index == step.term_index)
            out.steps.back().duration += step.duration;
        else
            out.steps.push_back(step);
    }
    return out;
}

Matrix evaluate_schedule(const ProductFormula& formula, const TermList& terms) {
    const long dim = terms.dim();
    Matrix result = Matrix::Identity(dim, dim);
    // schedules repeat a handful of distinct durations per term
    std::map<std::pair<int, double>, Matrix> cache;
    for (const auto& step : formula.steps) {
        if (step.term_index < 1 || step.term_index > terms.m())
            throw std::invalid_argument("term index out of range");
        auto key = std::make_pair(step.term_index, step.duration);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, herm_exp(terms.matrices[step.term_index - 1], step.duration))
                     .first;
        }
        result = result * it->second;
    }
    return result;
}

std::string schedule_to_json(const ProductFormula& formula) {
    nlohmann::json j;
    j["chi"] = formula.chi;
    j["base_time"] = formula.base_time;
    auto steps = nlohmann::json::array();
    for (const auto& s : formula.steps)
        steps.push_back({{"term_index", s.term_index}, {"duration", s.duration}});
    j["steps"] = std::move(steps);
    return j.dump();
}

ProductFormula schedule_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ProductFormula f;
    f.chi = j.at("chi").get<int>();
    f.base_time = j.at("base_time").get<double>();
    for (const auto& s : j.at("steps"))
        f.steps.push_back({s.at("term_index").get<int>(), s.at("duration").get<double>()});
    return f;
}

}  // namespace lculab
