#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "erpia/lattice_pia.hpp"
#include "erpia/model.hpp"

namespace erpia {

using Progress = std::function<void(const std::string&)>;

/// Max-call comparison grid: PIA, classical penalization and the lattice
/// across initial prices and temperatures.
struct Table1Spec {
    RunConfig base;
    std::vector<double> s0_values{90.0, 100.0, 110.0};
    std::vector<double> lambdas{0.1, 0.01, 0.001};
    std::size_t iters_per_stage = 500;
    std::size_t lattice_steps = 300;

    /// d = 2, K = 100, r = 0.05, sigma = 0.2, delta = 0.1, T = 3, N = 100.
    /// Full size: 100000 paths, 500 sweeps per stage; reduced: 20000 and 300.
    static Table1Spec defaults(bool reduced);
    /// Stages run for every initial price: the warm-start ladder down to the
    /// smallest requested temperature, merged with the requested temperatures.
    [[nodiscard]] LambdaSchedule schedule() const;
};

struct Table1Row {
    double s0;
    double lambda;
    double pia;
    double pia_se;
    double classical;
    double classical_se;
    double lattice;
};

[[nodiscard]] std::vector<Table1Row> run_table1(const Table1Spec& spec, const Progress& progress = {});
void write_table1_csv(const std::vector<Table1Row>& rows, std::ostream& out);

/// Temperature study on a one-asset lattice.
struct LambdaRateSpec {
    RunConfig base;  // model, payoff and grid define the lattice
    std::vector<double> lambdas{1.0, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001};
    /// Adds a Monte Carlo dual-bound column (PIA at each temperature).
    bool with_upper = false;

    /// Put K = 100, s0 = 100, r = 0.05, sigma = 0.2, delta = 0, T = 1, N = 200.
    static LambdaRateSpec defaults();
};

struct LambdaRateRow {
    double lambda;
    double v_root;
    double american_root;
    double gap;
    double rate_ratio;  // gap / (lambda - lambda ln lambda)
    bool has_upper = false;
    double upper_gap = 0.0;
};

[[nodiscard]] std::vector<LambdaRateRow> run_lambda_rate(const LambdaRateSpec& spec,
                                                         const Progress& progress = {});
void write_lambda_rate_csv(const std::vector<LambdaRateRow>& rows, std::ostream& out);

/// Policy-improvement convergence on a lattice with exact expectations.
struct PiaRateSpec {
    RunConfig base;
    double lambda = 0.1;
    std::size_t iterations = 40;
    LatticeInit init = LatticeInit::European;
    StepRule rule = StepRule::BackwardEuler;

    static PiaRateSpec defaults();
};

struct PiaRateRow {
    std::size_t iteration;
    double value_root;
    double exact_root;
    double error;
    /// min over nodes of v^{m} - v^{m-1} (0 for m = 0).
    double min_increment;
};

[[nodiscard]] std::vector<PiaRateRow> run_pia_rate(const PiaRateSpec& spec);
void write_pia_rate_csv(const std::vector<PiaRateRow>& rows, std::ostream& out);

} // namespace erpia
