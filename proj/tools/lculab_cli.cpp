#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "lculab/costmodel.hpp"
#include "lculab/optimality.hpp"
#include "lculab/protocol.hpp"

using namespace lculab;

namespace {

int g_failed_assertions = 0;

void check(bool ok, const std::string& what, double measured, double bound) {
    if (ok) {
        std::printf("  [ok]   %s: measured %.6g, bound %.6g\n", what.c_str(), measured, bound);
    } else {
        std::printf("  [FAIL] %s: measured %.6g violates bound %.6g\n", what.c_str(), measured,
                    bound);
        ++g_failed_assertions;
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvSink {
    std::ostringstream body;
    std::string path;  // empty -> stdout
    bool reproducible = false;

    void header_comment() {
        if (reproducible) return;
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%FT%TZ", std::gmtime(&now));
        body << "# generated " << stamp << "\n";
    }

    void flush() {
        if (path.empty()) {
            std::cout << body.str();
        } else {
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot open output file: " + path);
            out << body.str();
        }
    }
};

int campaign_threads(long long trials) {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LCULAB_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    }
    return static_cast<int>(std::min<long long>(threads, std::max<long long>(1, trials)));
}

double resolve_gamma(int k, std::optional<double> gamma, std::optional<double> delta) {
    if (gamma && delta) throw CLI::ValidationError("--gamma and --delta are exclusive");
    if (delta) return choose_gamma(k, *delta);
    if (gamma) return *gamma;
    throw CLI::ValidationError("one of --gamma or --delta is required");
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i)
        xs.push_back(lo * std::pow(hi / lo, i / static_cast<double>(std::max(1, n - 1))));
    return xs;
}

// ---------------------------------------------------------------- coeffs ---

int cmd_coeffs(int k, int chi, std::optional<double> gamma, std::optional<double> delta) {
    double gamma_target = resolve_gamma(k, gamma, delta);
    MpfSpec spec = build_mpf_spec(k, chi, gamma_target);

    std::printf("k = %d  chi = %d\n", k, chi);
    std::printf("gamma target = %s  realized = %s\n", fmt(gamma_target).c_str(),
                fmt(spec.gamma).c_str());
    std::printf("%3s %10s %24s %26s\n", "q", "ell", "C_q", "C_q (decimal)");
    for (int q = 0; q < spec.terms(); ++q)
        std::printf("%3d %10lld %24s %26s\n", q + 1, spec.ells[q],
                    to_fraction_string(spec.coeffs[q]).c_str(),
                    fmt(to_double(spec.coeffs[q])).c_str());

    auto kap = kappa(spec.coeffs);
    if (kap)
        std::printf("kappa = %s = %s\n", to_fraction_string(*kap).c_str(),
                    fmt(to_double(*kap)).c_str());
    else
        std::printf("kappa = +inf (no negative coefficients)\n");

    bool verified = verify_order_conditions(spec);
    std::printf("order conditions: %s\n", verified ? "satisfied" : "violated");
    if (!verified) ++g_failed_assertions;

    if (delta) {
        double lb = kappa_lower_bound(k, spec.gamma);
        check(kap && to_double(*kap) >= lb, "kappa >= lower bound", kappa_as_double(kap), lb);
        double ub = cq_upper_bound(k, spec.gamma);
        double max_cq = 0.0;
        for (int q = 0; q < k; ++q)
            max_cq = std::max(max_cq, std::abs(to_double(spec.coeffs[q])));
        check(max_cq <= ub, "max |C_q| (q <= k) <= upper bound", max_cq, ub);
    }
    return g_failed_assertions == 0 ? 0 : 1;
}

// ------------------------------------------------------------ kappa-scan ---

int cmd_kappa_scan(int k_min, int k_max, const std::vector<double>& offsets, CsvSink& sink) {
    sink.header_comment();
    sink.body << "k,gamma_offset,gamma_realized,ell_top,kappa,kappa_rational\n";
    double gc = gamma_critical();
    for (double off : offsets) {
        for (int k = k_min; k <= k_max; ++k) {
            MpfSpec spec = build_mpf_spec(k, 1, gc + off);
            auto kap = kappa(spec.coeffs);
            sink.body << k << ',' << fmt(off) << ',' << fmt(spec.gamma) << ','
                      << spec.ells.back() << ',' << fmt(kappa_as_double(kap)) << ','
                      << (kap ? to_fraction_string(*kap) : "inf") << "\n";
        }
    }
    sink.flush();
    std::printf("kappa scan: k in [%d,%d], %zu offsets around gamma_c = %s\n", k_min, k_max,
                offsets.size(), fmt(gc).c_str());
    return 0;
}

// ------------------------------------------------------------ order-scan ---

int cmd_order_scan(int k, int chi, std::uint64_t seed, int n_qubits, int m, double h,
                   std::optional<double> gamma, double lam_min, double lam_max, int points,
                   CsvSink& sink) {
    double gamma_target = gamma ? *gamma : std::log(2.0 * k) / (k + 1);
    MpfSpec spec = build_mpf_spec(k, chi, gamma_target);
    TermList terms = random_term_list(n_qubits, m, h, seed);

    sink.header_comment();
    sink.body << "lambda,formula_error,unitarity_deviation,error_bound\n";

    std::vector<double> lambdas = log_grid(lam_min, lam_max, points);
    std::vector<double> errs, devs;
    bool bound_ok = true;
    for (double lam : lambdas) {
        Matrix mpf = assemble_mpf_matrix(spec, terms, lam);
        double err = spectral_norm(mpf - exact_evolution(terms, lam));
        double dev = spectral_norm(mpf.adjoint() * mpf
                                   - Matrix::Identity(terms.dim(), terms.dim()));
        errs.push_back(err);
        devs.push_back(dev);
        std::string bound_field;
        if (chi == k
            && h * lam <= 3.0 * std::log(2.0) / (4.0 * m * k * std::pow(5.0 / 3.0, k - 1))) {
            double bound = mpf_error_bound(k, m, h, lam);
            bound_field = fmt(bound);
            if (err > bound) bound_ok = false;
        }
        sink.body << fmt(lam) << ',' << fmt(err) << ',' << fmt(dev) << ',' << bound_field
                  << "\n";
    }
    sink.flush();

    auto err_fit = fit_loglog(lambdas, errs);
    auto dev_fit = fit_loglog(lambdas, devs);
    std::printf("formula error slope      = %.4f (%d points)\n", err_fit.slope,
                err_fit.points_used);
    std::printf("unitarity deviation slope = %.4f (%d points)\n", dev_fit.slope,
                dev_fit.points_used);

    double expected = 2.0 * (k + chi) + 1.0;
    check(err_fit.points_used >= 6 && std::abs(err_fit.slope - expected) <= 0.3,
          "error slope within 0.3 of " + std::to_string(expected), err_fit.slope, expected);
    if (chi == k)
        check(bound_ok, "formula error dominated by the closed-form bound", bound_ok ? 0 : 1, 0);
    return g_failed_assertions == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- trials ---

struct TrialsConfig {
    int n_qubits = 2;
    int m = 2;
    double h = 1.0;
    std::uint64_t instance_seed = 7;
    int k = 1;
    int chi = 1;
    std::optional<double> gamma;
    std::optional<double> delta;
    double t = 0.05;
    long long r = 1;
    long long budget = 0;
    bool abort_on_addition_failure = true;
};

TrialsConfig parse_trials_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    TrialsConfig c;
    c.n_qubits = j.value("n_qubits", c.n_qubits);
    c.m = j.value("m", c.m);
    c.h = j.value("h", c.h);
    c.instance_seed = j.value("instance_seed", c.instance_seed);
    c.k = j.value("k", c.k);
    c.chi = j.value("chi", c.chi);
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    c.t = j.value("t", c.t);
    c.r = j.value("r", c.r);
    c.budget = j.value("budget", c.budget);
    c.abort_on_addition_failure = j.value("abort_on_addition_failure", true);
    if (!c.gamma && !c.delta) c.delta = 0.5;
    return c;
}

int cmd_trials(const std::string& config_path, long long trials, std::uint64_t seed,
               CsvSink& sink) {
    TrialsConfig cfg = parse_trials_config(config_path);
    double gamma_target = cfg.gamma ? *cfg.gamma : choose_gamma(cfg.k, *cfg.delta);

    ProtocolConfig protocol;
    protocol.spec = build_mpf_spec(cfg.k, cfg.chi, gamma_target);
    protocol.r = cfg.r;
    protocol.budget = cfg.budget;
    protocol.abort_on_addition_failure = cfg.abort_on_addition_failure;
    long long budget = protocol.budget > 0 ? protocol.budget : 5 * protocol.r;

    TermList terms = random_term_list(cfg.n_qubits, cfg.m, cfg.h, cfg.instance_seed);
    Matrix oracle = exact_evolution(terms, cfg.t);
    Vector psi0 = Vector::Zero(terms.dim());
    psi0(0) = 1.0;
    Vector target = oracle * psi0;

    // resolved configuration, for provenance
    nlohmann::json resolved{{"n_qubits", cfg.n_qubits},
                            {"m", cfg.m},
                            {"h", cfg.h},
                            {"instance_seed", cfg.instance_seed},
                            {"k", cfg.k},
                            {"chi", cfg.chi},
                            {"gamma_target", gamma_target},
                            {"gamma_realized", protocol.spec.gamma},
                            {"t", cfg.t},
                            {"r", cfg.r},
                            {"budget", budget},
                            {"abort_on_addition_failure", cfg.abort_on_addition_failure},
                            {"trials", trials},
                            {"base_seed", seed}};
    std::printf("config: %s\n", resolved.dump().c_str());

    std::vector<TrialRecord> records(trials);
    std::vector<double> fidelity(trials, std::nan(""));
    int n_threads = campaign_threads(trials);
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            long long i = next.fetch_add(1);
            if (i >= trials) return;
            TrialRecord rec = simulate_evolution(terms, cfg.t, protocol, seed + i);
            if (rec.succeeded) {
                double overlap = std::abs(target.dot(*rec.final_state));
                fidelity[i] = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
            }
            records[i] = std::move(rec);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    sink.header_comment();
    sink.body << trial_csv_header() << "\n";
    for (long long i = 0; i < trials; ++i)
        sink.body << trial_csv_row(records[i], fidelity[i]) << "\n";
    sink.flush();

    long long succeeded = 0, sub_attempts = 0, corrections = 0, add_failures = 0;
    long long exhausted = 0, max_exp = 0;
    for (const auto& rec : records) {
        succeeded += rec.succeeded ? 1 : 0;
        sub_attempts += rec.subtraction_attempts;
        corrections += rec.corrections_applied;
        add_failures += rec.addition_failures;
        max_exp = std::max(max_exp, rec.exponentials_consumed);
        if (!rec.succeeded && rec.subtraction_attempts + rec.corrections_applied >= budget)
            ++exhausted;
    }
    double success_rate = succeeded / static_cast<double>(trials);
    std::printf("success rate  = %.6f (%lld/%lld)\n", success_rate, succeeded, trials);
    std::printf("mean attempts = %.4f  mean corrections = %.4f  max exponentials = %lld\n",
                sub_attempts / static_cast<double>(trials),
                corrections / static_cast<double>(trials), max_exp);

    PreparedMpfStep step = prepare_mpf_step(protocol.spec, terms, cfg.t / protocol.r);
    if (step.has_subtraction() && sub_attempts > 0) {
        double kap = step.kappa_subtraction;
        double p = 4.0 / kap;
        double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-18) / sub_attempts);
        check(corrections / static_cast<double>(sub_attempts) <= p + 3.0 * sigma,
              "subtraction failure rate <= 4/kappa + 3 sigma",
              corrections / static_cast<double>(sub_attempts), p + 3.0 * sigma);
    }
    {
        long long attempts = step.has_subtraction() ? sub_attempts + corrections
                                                    : trials * protocol.r;
        double delta = pairwise_delta(step);
        double p = std::min(1.0, protocol.spec.k * delta * delta / 4.0);
        double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-18) / std::max<long long>(1, attempts));
        check(add_failures / static_cast<double>(std::max<long long>(1, attempts))
                  <= p + 3.0 * sigma,
              "addition failure rate <= k Delta^2/4 + 3 sigma",
              add_failures / static_cast<double>(std::max<long long>(1, attempts)),
              p + 3.0 * sigma);
    }
    {
        double p = std::exp(-protocol.r / 13.0);
        double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-18) / trials);
        check(exhausted / static_cast<double>(trials) <= p + 3.0 * sigma,
              "budget exhaustion rate <= e^{-r/13} + 3 sigma",
              exhausted / static_cast<double>(trials), p + 3.0 * sigma);
    }
    double worst_fid = 0.0;
    for (long long i = 0; i < trials; ++i)
        if (records[i].succeeded) worst_fid = std::max(worst_fid, fidelity[i]);
    double err_bound = 5.0 * protocol.r
                       * std::pow(2.0 * cfg.m * std::pow(5.0 / 3.0, cfg.k - 1) * cfg.h * cfg.t
                                      / protocol.r,
                                  4 * cfg.k + 1);
    check(worst_fid <= err_bound, "success-conditioned fidelity error <= step-error budget",
          worst_fid, err_bound);
    return g_failed_assertions == 0 ? 0 : 1;
}

// ------------------------------------------------------------------ cost ---

int cmd_cost(int m, double h, double t, double eps, double beta, CsvSink& sink) {
    CostPlan plan = build_plan(m, h, t, eps, beta);
    std::string plan_json = cost_plan_to_json(plan);
    if (!sink.path.empty()) {
        std::ofstream out(sink.path);
        if (!out) throw std::runtime_error("cannot open output file: " + sink.path);
        out << plan_json << "\n";
    }
    std::printf("%s\n", plan_json.c_str());

    double c_ours = gamma_critical() + std::log(25.0 / 3.0);
    double L = std::log(m * h * t / plan.eps_tilde);
    std::printf("k_opt coefficient = %.6f (k_opt = %d at log(mht/eps~) = %.4f)\n",
                0.5 / std::sqrt(c_ours), plan.k, L);
    std::printf("per-k exponential constants: this work %.4f | 3.22 | 2.13\n", c_ours);
    std::printf("%3s %16s %16s %16s\n", "k", "this work", "e^{3.22k} ref", "e^{2.13k} ref");
    int k_hi = std::max(8, 2 * plan.k);
    for (int k = 1; k <= k_hi; ++k) {
        double ours = std::pow(k, 9.0 / 4.0) * std::exp(c_ours * k)
                      * std::pow(m * h * t / plan.eps_tilde, 1.0 / (4.0 * k));
        double ref_a = std::exp(3.22 * k) * std::pow(m * h * t / eps, 1.0 / (2.0 * k));
        double ref_b = k * std::exp(2.13 * k) * std::pow(m * h * t / eps, 1.0 / (2.0 * k));
        std::printf("%3d %16.6g %16.6g %16.6g\n", k, ours, ref_a, ref_b);
    }
    check(c_ours < 3.22, "per-k exponential constant below 3.22", c_ours, 3.22);
    return g_failed_assertions == 0 ? 0 : 1;
}

// --------------------------------------------------------------- optimal ---

int cmd_optimal(const std::string& coeffs_text, std::optional<int> k, int chi,
                std::optional<double> gamma, std::optional<double> delta, int trials,
                std::uint64_t seed) {
    std::vector<double> coeffs;
    if (!coeffs_text.empty()) {
        for (const auto& r : rationals_from_csv(coeffs_text)) coeffs.push_back(to_double(r));
    } else if (k) {
        MpfSpec spec = build_mpf_spec(*k, chi, resolve_gamma(*k, gamma, delta));
        for (const auto& c : spec.coeffs) coeffs.push_back(to_double(c));
    } else {
        throw CLI::ValidationError("provide --coeffs or --k with --gamma/--delta");
    }

    double bound = success_upper_bound(coeffs);
    std::printf("coefficients:");
    for (double c : coeffs) std::printf(" %s", fmt(c).c_str());
    std::printf("\nsuccess upper bound = %.6g\n", bound);

    auto protocol = optimal_amplitudes(coeffs);
    double K = protocol_constant(protocol, coeffs);
    std::printf("optimal amplitude constant K = %.6g\n", K);

    Matrix id = Matrix::Identity(2, 2);
    std::vector<const Matrix*> identities(coeffs.size(), &id);
    double worst = 0.0;
    for (int i = 0; i < trials; ++i) {
        Vector psi = random_state(2, seed + i);
        worst = std::max(worst, general_circuit_success(protocol, identities, psi));
    }
    std::printf("max simulated success over %d random states = %.6g (gap %.3g)\n", trials,
                worst, bound - worst);
    check(worst <= bound + 1e-12, "simulated success <= theoretical bound", worst, bound);
    return g_failed_assertions == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-product formula laboratory for linear-combination simulation"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // keep --h free for the norm bound

    // shared option storage
    int k = 1, chi = 1, m = 1, scan_m = 2, n_qubits = 2, points = 24, trials = 100;
    int k_min = 2, k_max = 16;
    double h = 1.0, t = 1.0, eps = 1e-3, beta = 0.1;
    double lam_min = 0.02, lam_max = 1.2;
    std::uint64_t seed = 7;
    std::optional<double> gamma, delta;
    std::string out_path, config_path, coeffs_text, offsets_text = "-0.05,0,0.05";
    bool reproducible = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write CSV/JSON to this file");
        cmd->add_flag("--reproducible", reproducible, "suppress the timestamp header");
        cmd->add_option("--seed", seed, "base random seed");
    };
    auto subcommand = [&](const std::string& name, const std::string& desc) {
        auto* cmd = app.add_subcommand(name, desc);
        cmd->set_help_flag("--help", "print help");
        return cmd;
    };

    auto* coeffs_cmd = subcommand("coeffs", "exact formula coefficients and kappa");
    coeffs_cmd->add_option("--k", k)->required()->check(CLI::PositiveNumber);
    coeffs_cmd->add_option("--chi", chi)->check(CLI::PositiveNumber);
    coeffs_cmd->add_option("--gamma", gamma, "growth parameter target");
    coeffs_cmd->add_option("--delta", delta, "subtraction failure budget (picks gamma)");

    auto* scan_cmd = subcommand("kappa-scan", "exact kappa around gamma_c");
    scan_cmd->add_option("--k-min", k_min)->check(CLI::PositiveNumber);
    scan_cmd->add_option("--k-max", k_max)->check(CLI::PositiveNumber);
    scan_cmd->add_option("--offsets", offsets_text, "comma list of gamma offsets");
    add_common(scan_cmd);

    auto* order_cmd = subcommand("order-scan", "error and unitarity scaling in lambda");
    order_cmd->add_option("--k", k)->required()->check(CLI::PositiveNumber);
    order_cmd->add_option("--chi", chi)->check(CLI::PositiveNumber);
    order_cmd->add_option("--gamma", gamma, "growth parameter (default: top repetition 2k)");
    order_cmd->add_option("--m", scan_m)->check(CLI::PositiveNumber);
    order_cmd->add_option("--h", h)->check(CLI::PositiveNumber);
    order_cmd->add_option("--n-qubits", n_qubits);
    order_cmd->add_option("--lambda-min", lam_min);
    order_cmd->add_option("--lambda-max", lam_max);
    order_cmd->add_option("--points", points);
    add_common(order_cmd);

    auto* trials_cmd = subcommand("trials", "seeded protocol campaigns");
    trials_cmd->add_option("--config", config_path, "protocol config JSON")->required();
    trials_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
    add_common(trials_cmd);

    auto* cost_cmd = subcommand("cost", "parameter plan and cost comparison");
    cost_cmd->add_option("--m", m)->required()->check(CLI::PositiveNumber);
    cost_cmd->add_option("--h", h)->required()->check(CLI::PositiveNumber);
    cost_cmd->add_option("--t", t)->required()->check(CLI::PositiveNumber);
    cost_cmd->add_option("--eps", eps)->required();
    cost_cmd->add_option("--beta", beta)->required();
    add_common(cost_cmd);

    auto* optimal_cmd = subcommand("optimal", "general-circuit success bounds");
    optimal_cmd->add_option("--coeffs", coeffs_text, "comma list of rational coefficients");
    optimal_cmd->add_option("--k", k);
    optimal_cmd->add_option("--chi", chi);
    optimal_cmd->add_option("--gamma", gamma);
    optimal_cmd->add_option("--delta", delta);
    optimal_cmd->add_option("--trials", trials);
    optimal_cmd->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        CsvSink sink;
        sink.path = out_path;
        sink.reproducible = reproducible;

        if (coeffs_cmd->parsed()) return cmd_coeffs(k, chi, gamma, delta);
        if (scan_cmd->parsed()) {
            std::vector<double> offsets;
            std::stringstream ss(offsets_text);
            std::string item;
            while (std::getline(ss, item, ',')) offsets.push_back(std::stod(item));
            return cmd_kappa_scan(k_min, k_max, offsets, sink);
        }
        if (order_cmd->parsed())
            return cmd_order_scan(k, chi, seed, n_qubits, scan_m, h, gamma, lam_min, lam_max,
                                  points, sink);
        if (trials_cmd->parsed()) return cmd_trials(config_path, trials, seed, sink);
        if (cost_cmd->parsed()) return cmd_cost(m, h, t, eps, beta, sink);
        if (optimal_cmd->parsed())
            return cmd_optimal(coeffs_text,
                               optimal_cmd->count("--k") ? std::optional<int>(k) : std::nullopt,
                               chi, gamma, delta, trials, seed);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
