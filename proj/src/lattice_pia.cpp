#include "erpia/lattice_pia.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "erpia/driver.hpp"

namespace erpia {

NodeValues lattice_pia_init(const LatticeModel& lat, const Payoff& payoff, double lambda,
                            LatticeInit init, StepRule rule) {
    if (init == LatticeInit::European) return european_value(lat, payoff);
    const std::size_t n = lat.steps();
    NodeValues v(n, lat.dim());
    const auto terminal = lat.payoffs(n, payoff);
    std::copy(terminal.begin(), terminal.end(), v.at(n).begin());
    std::vector<double> cont;
    for (std::size_t k = n; k-- > 0;) {
        cont.resize(lat.nodes(k));
        lat.expectation(k, v.at(k + 1), cont);
        auto out = v.at(k);
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = linear_step(rule, cont[j], 0.0, 0.0, lambda, lat.rate(), lat.dt());
    }
    return v;
}

void lattice_pia_sweep(NodeValues& v, const LatticeModel& lat, const Payoff& payoff, double lambda,
                       StepRule rule, Exec exec) {
    if (!(lambda > 0.0)) throw ConfigError("lattice sweep: lambda must be > 0");
    if (v.steps() != lat.steps()) throw ConfigError("lattice sweep: surface shape mismatch");
    std::vector<double> cont;
    for (std::size_t k = lat.steps(); k-- > 0;) {
        const auto pay = lat.payoffs(k, payoff);
        cont.resize(lat.nodes(k));
        lat.expectation(k, v.at(k + 1), cont, exec);
        auto row = v.at(k);
        parallel_for(row.size(), exec, [&](std::size_t j) {
            const double next = policy_step(rule, cont[j], pay[j], row[j], lambda, lat.rate(), lat.dt());
            if (!std::isfinite(next))
                throw NumericalError("lattice sweep: non-finite value at date " + std::to_string(k));
            row[j] = next;
        });
    }
}

} // namespace erpia
