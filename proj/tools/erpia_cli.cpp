// Command-line front end: price, table1, lambda-rate, pia-rate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "erpia/config.hpp"
#include "erpia/exec.hpp"
#include "erpia/experiments.hpp"
#include "erpia/lattice.hpp"
#include "erpia/paths.hpp"
#include "erpia/pia.hpp"
#include "erpia/report.hpp"

namespace fs = std::filesystem;
using namespace erpia;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool reduced = false;
};

void add_common(CLI::App* cmd, Common& opt, bool config_required) {
    auto* c = cmd->add_option("--config", opt.config, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--seed", opt.seed, "override the RNG seed");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = auto)");
    cmd->add_flag("--reduced", opt.reduced, "CI-scale sizes");
}

void apply_threads(const Common& opt) {
    if (opt.threads) {
        set_threads(*opt.threads);
    } else if (const char* env = std::getenv("ERPIA_THREADS")) {
        set_threads(std::atoi(env));
    }
}

std::ofstream open_out(const Common& opt, const std::string& name) {
    if (opt.out.empty()) return {};
    fs::create_directories(opt.out);
    std::ofstream f(fs::path(opt.out) / name);
    if (!f) throw ConfigError("cannot write to output directory '" + opt.out + "'");
    return f;
}

void shrink(RunConfig& c) {
    c.paths = std::min<std::size_t>(c.paths, 20000);
    std::vector<ScheduleStage> stages = c.schedule.stages();
    for (auto& s : stages) s.iters = std::min<std::size_t>(s.iters, 300);
    if (!stages.empty()) c.schedule = LambdaSchedule(std::move(stages));
}

int cmd_price(const Common& opt) {
    auto config = load_run_config(opt.config);
    if (opt.seed) config.seed = *opt.seed;
    if (opt.reduced) shrink(config);

    PriceReport report;
    std::optional<PiaResult> pia;
    switch (config.method) {
    case Method::PIA:
        pia = run_pia(config);
        report = pia->report;
        break;
    case Method::ClassicalPenalization:
        report = run_classical_penalization(config, config.penalty);
        break;
    case Method::Lattice: {
        const std::size_t steps = config.lattice_steps ? config.lattice_steps : config.grid.steps();
        const LatticeModel lat(config.model, config.grid.horizon(), steps);
        report.method = to_string(Method::Lattice);
        report.price = american_value(lat, config.payoff).root();
        report.lower = report.price;
        report.iterations = steps;
        break;
    }
    case Method::European: {
        const auto est = european_price(config.model, config.payoff, config.grid, config.paths, config.seed);
        report.method = to_string(Method::European);
        report.price = est.value;
        report.stderr_ = est.stderr_;
        report.lower = est.value;
        report.lower_stderr = est.stderr_;
        break;
    }
    }
    write_report(report, std::cout);
    if (auto f = open_out(opt, "price_report.txt"); f.is_open()) write_report(report, f);
    if (pia) {
        if (auto f = open_out(opt, "trace.csv"); f.is_open()) write_trace_csv(pia->trace, f);
    }
    return 0;
}

int cmd_table1(const Common& opt) {
    auto spec = Table1Spec::defaults(opt.reduced);
    if (!opt.config.empty()) {
        const auto doc = ConfigDocument::load(opt.config);
        spec.base = run_config_from(doc);
        if (opt.reduced) shrink(spec.base);
        spec.s0_values = doc.get_doubles("experiment.s0_list", spec.s0_values);
        spec.lambdas = doc.get_doubles("experiment.lambdas", spec.lambdas);
        spec.iters_per_stage = doc.get_size("experiment.iters_per_stage", spec.iters_per_stage);
        spec.lattice_steps = spec.base.lattice_steps ? spec.base.lattice_steps : spec.lattice_steps;
    }
    if (opt.seed) spec.base.seed = *opt.seed;
    const auto rows = run_table1(spec, [](const std::string& m) { std::cerr << m << '\n'; });
    write_table1_csv(rows, std::cout);
    if (auto f = open_out(opt, "table1.csv"); f.is_open()) write_table1_csv(rows, f);
    return 0;
}

int cmd_lambda_rate(const Common& opt, bool upper) {
    auto spec = LambdaRateSpec::defaults();
    if (!opt.config.empty()) {
        const auto doc = ConfigDocument::load(opt.config);
        spec.base = run_config_from(doc);
        spec.lambdas = doc.get_doubles("experiment.lambdas", spec.lambdas);
    }
    if (opt.seed) spec.base.seed = *opt.seed;
    if (opt.reduced) shrink(spec.base);
    spec.with_upper = upper;
    const auto rows = run_lambda_rate(spec, [](const std::string& m) { std::cerr << m << '\n'; });
    write_lambda_rate_csv(rows, std::cout);
    if (auto f = open_out(opt, "lambda_rate.csv"); f.is_open()) write_lambda_rate_csv(rows, f);
    return 0;
}

int cmd_pia_rate(const Common& opt, double lambda, std::size_t iterations, const std::string& init,
                 const std::string& rule) {
    auto spec = PiaRateSpec::defaults();
    if (!opt.config.empty()) spec.base = load_run_config(opt.config);
    spec.lambda = lambda;
    spec.iterations = iterations;
    if (init == "european") spec.init = LatticeInit::European;
    else if (init == "never_stop") spec.init = LatticeInit::NeverStop;
    else throw ConfigError("unknown init '" + init + "'");
    if (rule == "backward_euler") spec.rule = StepRule::BackwardEuler;
    else if (rule == "exponential") spec.rule = StepRule::Exponential;
    else throw ConfigError("unknown step rule '" + rule + "'");
    const auto rows = run_pia_rate(spec);
    write_pia_rate_csv(rows, std::cout);
    if (auto f = open_out(opt, "pia_rate.csv"); f.is_open()) write_pia_rate_csv(rows, f);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-regularized policy improvement for American options"};
    app.require_subcommand(1);

    Common price_opt, table_opt, rate_opt, pia_opt;
    auto* price = app.add_subcommand("price", "price one configuration");
    add_common(price, price_opt, true);
    auto* table = app.add_subcommand("table1", "max-call comparison grid");
    add_common(table, table_opt, false);
    auto* rate = app.add_subcommand("lambda-rate", "temperature study on a one-asset lattice");
    add_common(rate, rate_opt, false);
    bool upper = false;
    rate->add_flag("--upper", upper, "add a Monte Carlo dual-bound column");
    auto* pia = app.add_subcommand("pia-rate", "policy-improvement convergence on a lattice");
    add_common(pia, pia_opt, false);
    double lambda = 0.1;
    std::size_t iterations = 40;
    std::string init = "european";
    std::string rule = "backward_euler";
    pia->add_option("--lambda", lambda, "temperature");
    pia->add_option("--iterations", iterations, "number of sweeps");
    pia->add_option("--init", init, "european | never_stop");
    pia->add_option("--rule", rule, "backward_euler | exponential");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*price) { apply_threads(price_opt); return cmd_price(price_opt); }
        if (*table) { apply_threads(table_opt); return cmd_table1(table_opt); }
        if (*rate) { apply_threads(rate_opt); return cmd_lambda_rate(rate_opt, upper); }
        if (*pia) { apply_threads(pia_opt); return cmd_pia_rate(pia_opt, lambda, iterations, init, rule); }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
