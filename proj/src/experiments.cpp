#include "erpia/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "erpia/basis.hpp"
#include "erpia/lattice.hpp"
#include "erpia/pia.hpp"
#include "erpia/report.hpp"

namespace erpia {
namespace {

void note(const Progress& progress, const std::string& msg) {
    if (progress) progress(msg);
}

RunConfig put_lattice_config() {
    RunConfig c;
    c.model = MarketModel({100.0}, 0.05, 0.0, 0.2);
    c.payoff = Payoff::put(100.0);
    c.grid = TimeGrid(1.0, 200);
    c.method = Method::Lattice;
    return c;
}

} // namespace

Table1Spec Table1Spec::defaults(bool reduced) {
    Table1Spec spec;
    auto& c = spec.base;
    c.model = MarketModel({100.0, 100.0}, 0.05, 0.1, 0.2);
    c.payoff = Payoff::max_call(100.0);
    c.grid = TimeGrid(3.0, 100);
    c.paths = reduced ? 20000 : 100000;
    c.seed = 20260101;
    c.basis.kind = BasisKind::AndersenBroadie13;
    c.method = Method::PIA;
    spec.iters_per_stage = reduced ? 300 : 500;
    return spec;
}

LambdaSchedule Table1Spec::schedule() const {
    if (lambdas.empty()) throw ConfigError("table1: empty lambda list");
    std::vector<double> all(lambdas.begin(), lambdas.end());
    const double smallest = *std::min_element(all.begin(), all.end());
    for (double l : kDefaultLadder)
        if (l >= smallest) all.push_back(l);
    std::sort(all.begin(), all.end(), std::greater<>());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<ScheduleStage> stages;
    for (double l : all) stages.push_back({l, iters_per_stage});
    return LambdaSchedule(std::move(stages));
}

std::vector<Table1Row> run_table1(const Table1Spec& spec, const Progress& progress) {
    if (spec.s0_values.empty()) throw ConfigError("table1: empty s0 list");
    if (spec.base.model.dim() != 2) throw ConfigError("table1: requires a two-asset model");
    std::vector<Table1Row> rows;
    for (double s0 : spec.s0_values) {
        RunConfig config = spec.base;
        config.model.s0.assign(config.model.dim(), s0);
        config.schedule = spec.schedule();
        config.validate();

        const auto batch = simulate(config.model, config.payoff, config.grid, config.paths,
                                    config.seed, {config.antithetic});
        const auto basis = Basis::from_spec(config.basis, config.model.dim(),
                                            basis_scale(config.model, config.payoff));
        const auto plan = build_plan(batch, basis);
        note(progress, fmt::format("s0={}: running {} sweeps", s0, config.schedule.total_iters()));
        const auto pia = run_pia(batch, plan, config);

        const LatticeModel lat(config.model, config.grid.horizon(), spec.lattice_steps);
        const double lattice = american_value(lat, config.payoff).root();

        for (double lambda : spec.lambdas) {
            const auto stage = std::find_if(pia.stages.begin(), pia.stages.end(),
                                            [&](const StageResult& s) { return s.lambda == lambda; });
            const auto classical =
                run_classical_penalization(batch, plan, config.model.r, 1.0 / lambda);
            rows.push_back({s0, lambda, stage->price, stage->stderr_, classical.price,
                            classical.stderr_, lattice});
            note(progress, fmt::format("s0={} lambda={}: pia={:.4f} classical={:.4f} lattice={:.4f}",
                                       s0, lambda, stage->price, classical.price, lattice));
        }
    }
    return rows;
}

void write_table1_csv(const std::vector<Table1Row>& rows, std::ostream& out) {
    out << "s0,lambda,pia,pia_se,classical,classical_se,lattice,lattice_se\n";
    for (const auto& r : rows)
        out << format_number(r.s0) << ',' << format_number(r.lambda) << ',' << format_number(r.pia)
            << ',' << format_number(r.pia_se) << ',' << format_number(r.classical) << ','
            << format_number(r.classical_se) << ',' << format_number(r.lattice) << ",0\n";
}

LambdaRateSpec LambdaRateSpec::defaults() {
    LambdaRateSpec spec;
    spec.base = put_lattice_config();
    return spec;
}

std::vector<LambdaRateRow> run_lambda_rate(const LambdaRateSpec& spec, const Progress& progress) {
    const auto& c = spec.base;
    if (c.model.dim() != 1) throw ConfigError("lambda-rate: requires a one-asset model");
    if (spec.lambdas.empty()) throw ConfigError("lambda-rate: empty lambda list");
    const LatticeModel lat(c.model, c.grid.horizon(), c.grid.steps());
    const double american = american_value(lat, c.payoff).root();
    std::vector<LambdaRateRow> rows;
    for (double lambda : spec.lambdas) {
        const double v = entropy_value_exact(lat, c.payoff, lambda).root();
        LambdaRateRow row{lambda, v, american, std::abs(american - v), 0.0};
        row.rate_ratio = row.gap / (lambda - lambda * std::log(lambda));
        if (spec.with_upper) {
            RunConfig mc = c;
            mc.schedule = LambdaSchedule::ladder(kDefaultLadder, lambda, 100);
            mc.dual_bound = true;
            const auto res = run_pia(mc);
            row.has_upper = true;
            row.upper_gap = res.report.upper - american;
        }
        note(progress, fmt::format("lambda={}: gap={:.6g} ratio={:.4f}", lambda, row.gap, row.rate_ratio));
        rows.push_back(row);
    }
    return rows;
}

void write_lambda_rate_csv(const std::vector<LambdaRateRow>& rows, std::ostream& out) {
    const bool upper = !rows.empty() && rows.front().has_upper;
    out << "lambda,v_lambda_root,V_root,gap,rate_ratio" << (upper ? ",upper_gap" : "") << '\n';
    for (const auto& r : rows) {
        out << format_number(r.lambda) << ',' << format_number(r.v_root) << ','
            << format_number(r.american_root) << ',' << format_number(r.gap) << ','
            << format_number(r.rate_ratio);
        if (upper) out << ',' << format_number(r.upper_gap);
        out << '\n';
    }
}

PiaRateSpec PiaRateSpec::defaults() {
    PiaRateSpec spec;
    spec.base = put_lattice_config();
    return spec;
}

std::vector<PiaRateRow> run_pia_rate(const PiaRateSpec& spec) {
    const auto& c = spec.base;
    const LatticeModel lat(c.model, c.grid.horizon(), c.grid.steps());
    const double exact = entropy_value_exact(lat, c.payoff, spec.lambda, spec.rule).root();
    auto v = lattice_pia_init(lat, c.payoff, spec.lambda, spec.init, spec.rule);
    std::vector<PiaRateRow> rows;
    rows.push_back({0, v.root(), exact, std::abs(v.root() - exact), 0.0});
    for (std::size_t m = 1; m <= spec.iterations; ++m) {
        const auto prev = v;
        lattice_pia_sweep(v, lat, c.payoff, spec.lambda, spec.rule);
        double min_inc = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= lat.steps(); ++k) {
            const auto a = v.at(k);
            const auto b = prev.at(k);
            for (std::size_t j = 0; j < a.size(); ++j) min_inc = std::min(min_inc, a[j] - b[j]);
        }
        rows.push_back({m, v.root(), exact, std::abs(v.root() - exact), min_inc});
    }
    return rows;
}

void write_pia_rate_csv(const std::vector<PiaRateRow>& rows, std::ostream& out) {
    out << "iteration,v_m_root,v_lambda_root,error,min_increment\n";
    for (const auto& r : rows)
        out << r.iteration << ',' << format_number(r.value_root) << ',' << format_number(r.exact_root)
            << ',' << format_number(r.error) << ',' << format_number(r.min_increment) << '\n';
}

} // namespace erpia
