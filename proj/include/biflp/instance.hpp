#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace biflp {

using NodeId = int;

/// Raised by parse_instance with a message naming the offending field.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// The covering network: demand nodes I, candidate sites J subset of I,
/// opening costs, capacities and the coverage radius d_max.
class Instance {
public:
    struct Node {
        NodeId id = 0;
        double x = 0.0;
        double y = 0.0;
        bool is_site = false;
        long long opening_cost = 0;  // gamma_j, only meaningful when is_site
        long long capacity = 0;      // c_j, only meaningful when is_site
    };

    Instance() = default;
    /// n_demand: |I|, the first n_demand nodes of `nodes` form the demand set.
    Instance(std::vector<Node> nodes, std::size_t n_demand, double d_max);

    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_demand_nodes() const { return n_demand_; }
    std::size_t n_sites() const { return site_positions_.size(); }
    double d_max() const { return d_max_; }

    const Node& node(std::size_t pos) const { return nodes_.at(pos); }
    const std::vector<Node>& nodes() const { return nodes_; }

    /// Positions (into nodes()) of the candidate sites, in file order.
    const std::vector<std::size_t>& site_positions() const { return site_positions_; }
    const Node& site(std::size_t j) const { return nodes_[site_positions_.at(j)]; }
    long long opening_cost(std::size_t j) const { return site(j).opening_cost; }
    long long capacity(std::size_t j) const { return site(j).capacity; }
    long long total_opening_cost() const;

    /// Position of a node id, or throws std::invalid_argument.
    std::size_t position_of(NodeId id) const;
    bool has_node(NodeId id) const;

    /// Euclidean distance between node positions (km). An explicit matrix,
    /// when set, overrides the coordinate-derived values.
    double distance_by_pos(std::size_t a, std::size_t b) const;

    /// psi(d_ij) for demand position i and site index j (boundary inclusive).
    bool covers(std::size_t demand_pos, std::size_t site_j) const;

    /// Overrides coordinate distances (used by hand-built test fixtures;
    /// not part of the file format). Must be symmetric with zero diagonal.
    void set_explicit_distances(std::vector<std::vector<double>> d);

    bool operator==(const Instance& other) const;

private:
    void validate() const;

    std::vector<Node> nodes_;
    std::size_t n_demand_ = 0;
    double d_max_ = 0.0;
    std::vector<std::size_t> site_positions_;
    std::vector<std::vector<double>> explicit_distance_;  // empty unless set
};

/// Equal-probability demand scenarios: q[s][i] for i in I, s in S.
class ScenarioSet {
public:
    ScenarioSet() = default;
    explicit ScenarioSet(std::vector<std::vector<long long>> demand);

    std::size_t n_scenarios() const { return demand_.size(); }
    std::size_t n_demand_nodes() const { return demand_.empty() ? 0 : demand_[0].size(); }
    double probability() const { return 1.0 / static_cast<double>(n_scenarios()); }

    long long demand(std::size_t i, std::size_t s) const { return demand_.at(s).at(i); }
    const std::vector<long long>& scenario(std::size_t s) const { return demand_.at(s); }
    long long total_demand(std::size_t s) const;
    std::vector<long long> total_demands() const;

    bool operator==(const ScenarioSet& other) const { return demand_ == other.demand_; }

private:
    std::vector<std::vector<long long>> demand_;  // [scenario][demand node]
};

/// Confidence level alpha and subset cardinality k with alpha = 1 - k/N.
struct RiskSpec {
    int k = 1;
    double alpha = 0.0;

    static RiskSpec from_k(int k, std::size_t n_scenarios);
    static RiskSpec from_alpha(double alpha, std::size_t n_scenarios);
};

struct GeneratorParams {
    double site_fraction = 1.0;    // fraction of nodes marked as candidate sites
    long long opening_cost = 5000;
    double d_max = 6.0;
    double capacity_rho = 1.5;     // c_j = round(rho * expected total demand / |J|)
    long long demand_lo = 20;
    long long demand_hi = 200;
    double factor_lo = 0.5;
    double factor_hi = 1.5;
    double cluster_radius = 1.5;   // km
    double area_span = 30.0;       // km, side of the square region
    int nodes_per_cluster = 7;
};

/// psi(d_ij) on node ids; 1 iff distance(i,j) <= d_max.
int coverage(const Instance& inst, NodeId i, NodeId j);

std::pair<Instance, ScenarioSet> parse_instance(const std::string& bytes);
std::string serialize_instance(const Instance& inst, const ScenarioSet& scen);

/// Deterministic in (seed, n_nodes, params); the instance part does not
/// depend on n_scenarios, so regenerating with a larger N extends the
/// scenario sample of the same network (prefix property).
std::pair<Instance, ScenarioSet> generate_instance(std::uint64_t seed, std::size_t n_nodes,
                                                   std::size_t n_scenarios,
                                                   const GeneratorParams& params = {});

/// Resamples m scenarios i.i.d. (with replacement) from scen. seed == 0 with
/// m == N returns scen unchanged (identity mode).
ScenarioSet subsample_scenarios(const ScenarioSet& scen, std::size_t m, std::uint64_t seed);

}  // namespace biflp
