#include "biflp/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace biflp::oracle {

namespace {

std::uint64_t mix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double unit_real(std::uint64_t& state) {
    return static_cast<double>(mix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

double cvar_enumerate(const std::vector<double>& values, int k, const OracleBudget& budget) {
    const int n = static_cast<int>(values.size());
    if (n == 0 || k < 1 || k > n) throw std::invalid_argument("cvar_enumerate: k out of range");
    if (n > budget.max_scenarios)
        throw OracleRefusal("cvar_enumerate: N exceeds the oracle budget");

    std::vector<int> comb(k);
    for (int i = 0; i < k; ++i) comb[i] = i;
    double best = -1e300;
    while (true) {
        double sum = 0.0;
        for (int i : comb) sum += values[i];
        best = std::max(best, sum);
        int pos = k - 1;
        while (pos >= 0 && comb[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++comb[pos];
        for (int i = pos + 1; i < k; ++i) comb[i] = comb[i - 1] + 1;
    }
    return best / static_cast<double>(k);
}

long long second_stage_enumerate(const Instance& inst, const ScenarioSet& scen,
                                 const std::vector<int>& open, std::size_t scenario,
                                 const OracleBudget& budget) {
    const std::size_t ni = inst.n_demand_nodes();
    const std::size_t nj = inst.n_sites();
    if (static_cast<int>(ni) > budget.max_demand_nodes)
        throw OracleRefusal("second_stage_enumerate: too many demand nodes");
    if (static_cast<int>(nj) > budget.max_sites)
        throw OracleRefusal("second_stage_enumerate: too many sites");
    if (open.size() != nj) throw std::invalid_argument("second_stage_enumerate: bad open vector");

    // Open covering sites per demand node; nodes with none contribute nothing.
    std::vector<std::vector<int>> choices;
    std::vector<long long> node_demand;
    double combinations = 1.0;
    for (std::size_t i = 0; i < ni; ++i) {
        std::vector<int> c;
        for (std::size_t j = 0; j < nj; ++j)
            if (open[j] == 1 && inst.covers(i, j)) c.push_back(static_cast<int>(j));
        if (c.empty() || scen.demand(i, scenario) == 0) continue;
        combinations *= static_cast<double>(c.size() + 1);
        choices.push_back(std::move(c));
        node_demand.push_back(scen.demand(i, scenario));
    }
    if (combinations > static_cast<double>(budget.max_enumeration_steps))
        throw OracleRefusal("second_stage_enumerate: assignment space exceeds the budget");

    std::vector<long long> assigned(nj, 0);
    long long best = 0;
    const std::size_t depth = choices.size();
    auto rec = [&](auto&& self, std::size_t level) -> void {
        if (level == depth) {
            long long delivered = 0;
            for (std::size_t j = 0; j < nj; ++j)
                if (open[j] == 1) delivered += std::min(inst.capacity(j), assigned[j]);
            best = std::max(best, delivered);
            return;
        }
        self(self, level + 1);  // node left unassigned
        for (int j : choices[level]) {
            assigned[j] += node_demand[level];
            self(self, level + 1);
            assigned[j] -= node_demand[level];
        }
    };
    rec(rec, 0);
    return scen.total_demand(scenario) - best;
}

Frontier exact_frontier(const Instance& inst, const ScenarioSet& scen, const RiskSpec& risk,
                        const OracleBudget& budget) {
    const std::size_t nj = inst.n_sites();
    if (static_cast<int>(nj) > budget.max_sites)
        throw OracleRefusal("exact_frontier: too many sites");
    if (static_cast<int>(scen.n_scenarios()) > budget.max_scenarios)
        throw OracleRefusal("exact_frontier: too many scenarios");
    if (static_cast<int>(inst.n_demand_nodes()) > budget.max_demand_nodes)
        throw OracleRefusal("exact_frontier: too many demand nodes");

    struct Candidate {
        long long cost;
        double risk;
        std::vector<int> open;
    };
    std::vector<Candidate> cands;
    for (std::uint64_t mask = 0; mask < (1ULL << nj); ++mask) {
        std::vector<int> open(nj, 0);
        long long cost = 0;
        for (std::size_t j = 0; j < nj; ++j)
            if (mask & (1ULL << j)) {
                open[j] = 1;
                cost += inst.opening_cost(j);
            }
        std::vector<double> uncovered(scen.n_scenarios());
        for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
            uncovered[s] =
                static_cast<double>(second_stage_enumerate(inst, scen, open, s, budget));
        cands.push_back({cost, cvar_enumerate(uncovered, risk.k, budget), std::move(open)});
    }

    std::vector<FrontierPoint> kept;
    for (const Candidate& c : cands) {
        bool dominated = false;
        for (const Candidate& d : cands) {
            if (d.cost <= c.cost && d.risk <= c.risk && (d.cost < c.cost || d.risk < c.risk)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) kept.push_back(FrontierPoint{c.cost, c.risk, c.open, Provenance::Exact});
    }
    return Frontier::from_points(std::move(kept));
}

std::pair<double, double> hypervolume_monte_carlo(const Frontier& frontier,
                                                  std::pair<double, double> reference,
                                                  long long samples, std::uint64_t seed) {
    if (frontier.empty()) return {0.0, 0.0};
    double cmin = 1e300, rmin = 1e300;
    for (const FrontierPoint& p : frontier.points()) {
        cmin = std::min(cmin, static_cast<double>(p.cost));
        rmin = std::min(rmin, p.risk);
    }
    const double width = reference.first - cmin;
    const double height = reference.second - rmin;
    const double box = width * height;
    std::uint64_t state = seed * 0x2545F4914F6CDD1DULL + 0x9E3779B97F4A7C15ULL;
    long long hits = 0;
    for (long long t = 0; t < samples; ++t) {
        const double sx = cmin + width * unit_real(state);
        const double sy = rmin + height * unit_real(state);
        for (const FrontierPoint& p : frontier.points()) {
            if (static_cast<double>(p.cost) <= sx && p.risk <= sy) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    const double stderr_est = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
    return {box * frac, stderr_est};
}

}  // namespace biflp::oracle
