#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "lculab/costmodel.hpp"
#include "lculab/optimality.hpp"
#include "lculab/protocol.hpp"

namespace py = pybind11;
using namespace lculab;

namespace {

py::object to_fraction(const BigRational& r) {
    static py::object fraction = py::module_::import("fractions").attr("Fraction");
    return fraction(to_fraction_string(r));
}

py::list to_fractions(const std::vector<BigRational>& rs) {
    py::list out;
    for (const auto& r : rs) out.append(to_fraction(r));
    return out;
}

std::vector<BigRational> rationals_from_objects(const py::sequence& seq) {
    std::vector<BigRational> out;
    for (auto item : seq) out.push_back(rational_from_string(py::str(item).cast<std::string>()));
    return out;
}

std::vector<const Matrix*> matrix_ptrs(const std::vector<Matrix>& ms) {
    std::vector<const Matrix*> ptrs;
    ptrs.reserve(ms.size());
    for (const auto& m : ms) ptrs.push_back(&m);
    return ptrs;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "multi-product formula laboratory: exact coefficients, integrator schedules, "
                "non-deterministic combination protocols and their cost model";

    py::class_<MpfSpec>(mod, "MpfSpec")
        .def_readonly("k", &MpfSpec::k)
        .def_readonly("chi", &MpfSpec::chi)
        .def_readonly("gamma", &MpfSpec::gamma)
        .def_readonly("ells", &MpfSpec::ells)
        .def_property_readonly("coeffs",
                               [](const MpfSpec& s) { return to_fractions(s.coeffs); })
        .def("__repr__", [](const MpfSpec& s) {
            return "MpfSpec(k=" + std::to_string(s.k) + ", chi=" + std::to_string(s.chi)
                   + ", top=" + std::to_string(s.ells.back()) + ")";
        });

    mod.def("coefficients_general", [](const std::vector<long long>& ells) {
        return to_fractions(coefficients_general(ells));
    });
    mod.def("solve_order_conditions", [](const std::vector<long long>& ells, int chi) {
        return to_fractions(solve_order_conditions(ells, chi));
    });
    mod.def("build_mpf_spec", &build_mpf_spec, py::arg("k"), py::arg("chi"),
            py::arg("gamma_target"));
    mod.def("verify_order_conditions", &verify_order_conditions);
    mod.def("kappa", [](const py::sequence& coeffs) -> py::object {
        auto k = kappa(rationals_from_objects(coeffs));
        if (!k) return py::float_(std::numeric_limits<double>::infinity());
        return to_fraction(*k);
    });
    mod.def("eta_constant", &eta_constant);
    mod.def("gamma_critical", &gamma_critical);
    mod.def("choose_gamma", &choose_gamma, py::arg("k"), py::arg("delta"));
    mod.def("cq_upper_bound", &cq_upper_bound);
    mod.def("kappa_lower_bound", &kappa_lower_bound);

    py::class_<ExpStep>(mod, "ExpStep")
        .def_readonly("term_index", &ExpStep::term_index)
        .def_readonly("duration", &ExpStep::duration);
    py::class_<ProductFormula>(mod, "ProductFormula")
        .def_readonly("steps", &ProductFormula::steps)
        .def_readonly("chi", &ProductFormula::chi)
        .def_readonly("base_time", &ProductFormula::base_time)
        .def("__len__", [](const ProductFormula& f) { return f.steps.size(); });
    mod.def("suzuki_fraction", &suzuki_fraction);
    mod.def("build_s1", &build_s1, py::arg("m"), py::arg("t"));
    mod.def("build_schi", &build_schi, py::arg("m"), py::arg("chi"), py::arg("t"));
    mod.def("max_rescale_ratio", &max_rescale_ratio, py::arg("formula"),
            py::arg("subdivisions") = 1);
    mod.def("schedule_to_json", &schedule_to_json);
    mod.def("schedule_from_json", &schedule_from_json);

    py::class_<TermList>(mod, "TermList")
        .def_readonly("matrices", &TermList::matrices)
        .def_readonly("h", &TermList::h)
        .def_readonly("n_qubits", &TermList::n_qubits)
        .def_property_readonly("m", &TermList::m);
    mod.def("random_term_list", &random_term_list, py::arg("n_qubits"), py::arg("m"),
            py::arg("h"), py::arg("seed"));
    mod.def("term_list_to_json", &term_list_to_json);
    mod.def("term_list_from_json", &term_list_from_json);
    mod.def("herm_exp", &herm_exp, py::arg("hamiltonian"), py::arg("t"));
    mod.def("spectral_norm", &spectral_norm);
    mod.def("exact_evolution", &exact_evolution, py::arg("terms"), py::arg("t"));
    mod.def("evaluate_schedule", &evaluate_schedule, py::arg("formula"), py::arg("terms"));
    mod.def("assemble_mpf_matrix", &assemble_mpf_matrix, py::arg("spec"), py::arg("terms"),
            py::arg("t"));
    mod.def("random_state", &random_state, py::arg("dim"), py::arg("seed"));

    py::class_<TrialRecord>(mod, "TrialRecord")
        .def_readonly("succeeded", &TrialRecord::succeeded)
        .def_readonly("subtraction_attempts", &TrialRecord::subtraction_attempts)
        .def_readonly("corrections_applied", &TrialRecord::corrections_applied)
        .def_readonly("addition_failures", &TrialRecord::addition_failures)
        .def_readonly("exponentials_consumed", &TrialRecord::exponentials_consumed)
        .def_readonly("rng_seed", &TrialRecord::rng_seed)
        .def_property_readonly("final_state", [](const TrialRecord& r) -> py::object {
            if (!r.final_state) return py::none();
            return py::cast(*r.final_state);
        });
    mod.def(
        "simulate_evolution",
        [](const TermList& terms, double t, const MpfSpec& spec, long long r, long long budget,
           bool abort_on_addition_failure, std::uint64_t seed) {
            ProtocolConfig config{spec, r, budget, abort_on_addition_failure};
            return simulate_evolution(terms, t, config, seed);
        },
        py::arg("terms"), py::arg("t"), py::arg("spec"), py::arg("r"), py::arg("budget") = 0,
        py::arg("abort_on_addition_failure") = true, py::arg("seed") = 7);
    mod.def("branch_distribution", &branch_distribution, py::arg("spec"), py::arg("terms"),
            py::arg("lambda_"), py::arg("state"));
    mod.def(
        "explicit_circuit_reference",
        [](const std::vector<double>& weights, const std::vector<Matrix>& unitaries,
           const Vector& state) {
            return explicit_circuit_reference(weights, matrix_ptrs(unitaries), state);
        },
        py::arg("signed_weights"), py::arg("unitaries"), py::arg("state"));

    mod.def("taylor_remainder_bound", &taylor_remainder_bound);
    mod.def("mpf_error_bound", &mpf_error_bound);
    mod.def("inversion_error_bound", &inversion_error_bound);
    mod.def("choose_r", &choose_r, py::arg("k"), py::arg("m"), py::arg("h"), py::arg("t"),
            py::arg("eps_tilde"), py::arg("beta"));
    mod.def("choose_k_opt", &choose_k_opt);
    mod.def("choose_k_opt_from_log", &choose_k_opt_from_log);
    mod.def("nexp_bound", &nexp_bound);

    py::class_<CostPlan>(mod, "CostPlan")
        .def_readonly("k", &CostPlan::k)
        .def_readonly("gamma", &CostPlan::gamma)
        .def_readonly("spec", &CostPlan::spec)
        .def_readonly("r", &CostPlan::r)
        .def_readonly("eps_tilde", &CostPlan::eps_tilde)
        .def_readonly("nexp", &CostPlan::nexp)
        .def_readonly("beta", &CostPlan::beta)
        .def("to_json", &cost_plan_to_json);
    mod.def("build_plan", &build_plan, py::arg("m"), py::arg("h"), py::arg("t"), py::arg("eps"),
            py::arg("beta"));

    py::class_<GeneralProtocol>(mod, "GeneralProtocol")
        .def_readonly("prep", &GeneralProtocol::prep)
        .def_readonly("measure", &GeneralProtocol::measure);
    mod.def("optimal_amplitudes", &optimal_amplitudes);
    mod.def("protocol_constant", &protocol_constant);
    mod.def(
        "general_circuit_success",
        [](const GeneralProtocol& protocol, const std::vector<Matrix>& unitaries,
           const Vector& state) {
            return general_circuit_success(protocol, matrix_ptrs(unitaries), state);
        },
        py::arg("protocol"), py::arg("unitaries"), py::arg("state"));
    mod.def("success_upper_bound",
            [](const std::vector<double>& coeffs) { return success_upper_bound(coeffs); });
}
