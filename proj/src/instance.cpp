#include "biflp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

namespace biflp {

namespace {

// Deterministic draws independent of libstdc++'s distribution internals,
// so generated instances are byte-identical across platforms.
std::uint64_t next_u64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

long long uniform_int(std::uint64_t& state, long long lo, long long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(next_u64(state) % span);
}

double uniform_real(std::uint64_t& state, double lo, double hi) {
    const double u = static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

double quantize3(double v) { return std::llround(v * 1000.0) / 1000.0; }

}  // namespace

Instance::Instance(std::vector<Node> nodes, std::size_t n_demand, double d_max)
    : nodes_(std::move(nodes)), n_demand_(n_demand), d_max_(d_max) {
    for (std::size_t p = 0; p < nodes_.size(); ++p)
        if (nodes_[p].is_site) site_positions_.push_back(p);
    validate();
}

void Instance::validate() const {
    if (n_demand_ > nodes_.size())
        throw std::invalid_argument("Instance: demand set larger than node set");
    if (d_max_ <= 0.0) throw std::invalid_argument("Instance: d_max must be positive");
    std::unordered_map<NodeId, int> seen;
    for (const auto& n : nodes_) {
        if (++seen[n.id] > 1)
            throw std::invalid_argument("Instance: duplicate node id " + std::to_string(n.id));
        if (n.is_site && (n.opening_cost < 0 || n.capacity < 0))
            throw std::invalid_argument("Instance: node " + std::to_string(n.id) +
                                        " has negative opening_cost or capacity");
    }
    for (std::size_t p : site_positions_)
        if (p >= n_demand_) throw std::invalid_argument("J must be a subset of I");
}

long long Instance::total_opening_cost() const {
    long long total = 0;
    for (std::size_t p : site_positions_) total += nodes_[p].opening_cost;
    return total;
}

std::size_t Instance::position_of(NodeId id) const {
    for (std::size_t p = 0; p < nodes_.size(); ++p)
        if (nodes_[p].id == id) return p;
    throw std::invalid_argument("unknown node id " + std::to_string(id));
}

bool Instance::has_node(NodeId id) const {
    return std::any_of(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.id == id; });
}

double Instance::distance_by_pos(std::size_t a, std::size_t b) const {
    if (!explicit_distance_.empty()) return explicit_distance_.at(a).at(b);
    const Node& na = nodes_.at(a);
    const Node& nb = nodes_.at(b);
    return std::hypot(na.x - nb.x, na.y - nb.y);
}

bool Instance::covers(std::size_t demand_pos, std::size_t site_j) const {
    return distance_by_pos(demand_pos, site_positions_.at(site_j)) <= d_max_;
}

void Instance::set_explicit_distances(std::vector<std::vector<double>> d) {
    if (d.size() != nodes_.size())
        throw std::invalid_argument("explicit distance matrix has wrong dimension");
    for (std::size_t a = 0; a < d.size(); ++a) {
        if (d[a].size() != nodes_.size())
            throw std::invalid_argument("explicit distance matrix has wrong dimension");
        if (d[a][a] != 0.0)
            throw std::invalid_argument("explicit distance matrix has nonzero diagonal");
        for (std::size_t b = 0; b < d.size(); ++b)
            if (d[a][b] != d[b][a] || d[a][b] < 0.0)
                throw std::invalid_argument("explicit distance matrix must be symmetric nonnegative");
    }
    explicit_distance_ = std::move(d);
}

bool Instance::operator==(const Instance& other) const {
    if (n_demand_ != other.n_demand_ || d_max_ != other.d_max_ ||
        nodes_.size() != other.nodes_.size())
        return false;
    for (std::size_t p = 0; p < nodes_.size(); ++p) {
        const Node& a = nodes_[p];
        const Node& b = other.nodes_[p];
        if (a.id != b.id || a.x != b.x || a.y != b.y || a.is_site != b.is_site) return false;
        if (a.is_site && (a.opening_cost != b.opening_cost || a.capacity != b.capacity))
            return false;
    }
    return explicit_distance_ == other.explicit_distance_;
}

ScenarioSet::ScenarioSet(std::vector<std::vector<long long>> demand) : demand_(std::move(demand)) {
    if (demand_.empty()) throw std::invalid_argument("ScenarioSet: need at least one scenario");
    const std::size_t width = demand_[0].size();
    for (std::size_t s = 0; s < demand_.size(); ++s) {
        if (demand_[s].size() != width)
            throw std::invalid_argument("ScenarioSet: ragged demand matrix");
        for (long long q : demand_[s])
            if (q < 0)
                throw std::invalid_argument("ScenarioSet: negative demand in scenario " +
                                            std::to_string(s));
    }
}

long long ScenarioSet::total_demand(std::size_t s) const {
    long long total = 0;
    for (long long q : demand_.at(s)) total += q;
    return total;
}

std::vector<long long> ScenarioSet::total_demands() const {
    std::vector<long long> out(n_scenarios());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = total_demand(s);
    return out;
}

RiskSpec RiskSpec::from_k(int k, std::size_t n_scenarios) {
    const auto n = static_cast<int>(n_scenarios);
    if (k < 1 || k > n) throw std::invalid_argument("RiskSpec: k must be in [1, N]");
    return RiskSpec{k, 1.0 - static_cast<double>(k) / static_cast<double>(n)};
}

RiskSpec RiskSpec::from_alpha(double alpha, std::size_t n_scenarios) {
    if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("RiskSpec: alpha must be in [0, 1)");
    const auto n = static_cast<double>(n_scenarios);
    const int k = static_cast<int>(std::llround(n * (1.0 - alpha)));
    return from_k(std::max(1, k), n_scenarios);
}

int coverage(const Instance& inst, NodeId i, NodeId j) {
    const std::size_t pi = inst.position_of(i);
    const std::size_t pj = inst.position_of(j);
    if (pi >= inst.n_demand_nodes())
        throw std::invalid_argument("coverage: node " + std::to_string(i) + " is not a demand node");
    if (!inst.node(pj).is_site)
        throw std::invalid_argument("coverage: node " + std::to_string(j) + " is not a candidate site");
    return inst.distance_by_pos(pi, pj) <= inst.d_max() ? 1 : 0;
}

std::pair<Instance, ScenarioSet> parse_instance(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top-level value must be an object");
    for (const char* key : {"nodes", "d_max", "scenarios"})
        if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    if (!doc["d_max"].is_number()) throw ParseError("field 'd_max' must be a number");
    if (!doc["nodes"].is_array() || doc["nodes"].empty())
        throw ParseError("field 'nodes' must be a non-empty array");
    if (!doc["scenarios"].is_array() || doc["scenarios"].empty())
        throw ParseError("field 'scenarios' must be a non-empty array");

    std::vector<Instance::Node> nodes;
    for (std::size_t p = 0; p < doc["nodes"].size(); ++p) {
        const auto& jn = doc["nodes"][p];
        const std::string where = "nodes[" + std::to_string(p) + "]";
        for (const char* key : {"id", "x", "y", "is_site"})
            if (!jn.contains(key))
                throw ParseError(where + ": missing field '" + key + "'");
        Instance::Node n;
        if (!jn["id"].is_number_integer()) throw ParseError(where + ": field 'id' must be an integer");
        n.id = jn["id"].get<NodeId>();
        n.x = jn["x"].get<double>();
        n.y = jn["y"].get<double>();
        n.is_site = jn["is_site"].get<bool>();
        if (n.is_site) {
            for (const char* key : {"opening_cost", "capacity"})
                if (!jn.contains(key))
                    throw ParseError(where + ": missing field '" + key + "' (required when is_site)");
            n.opening_cost = jn["opening_cost"].get<long long>();
            n.capacity = jn["capacity"].get<long long>();
            if (n.opening_cost < 0) throw ParseError(where + ": negative opening_cost");
            if (n.capacity < 0) throw ParseError(where + ": negative capacity");
        }
        nodes.push_back(n);
    }

    std::vector<std::vector<long long>> demand;
    std::size_t width = 0;
    for (std::size_t s = 0; s < doc["scenarios"].size(); ++s) {
        const auto& js = doc["scenarios"][s];
        const std::string where = "scenarios[" + std::to_string(s) + "]";
        if (!js.is_array()) throw ParseError(where + ": must be an array of demands");
        if (s == 0) {
            width = js.size();
            if (width == 0 || width > nodes.size())
                throw ParseError(where + ": demand row length must be in [1, number of nodes]");
        } else if (js.size() != width) {
            throw ParseError(where + ": demand row length differs from scenarios[0]");
        }
        std::vector<long long> row;
        for (std::size_t i = 0; i < js.size(); ++i) {
            if (!js[i].is_number_integer())
                throw ParseError(where + "[" + std::to_string(i) + "]: demand must be an integer");
            const long long q = js[i].get<long long>();
            if (q < 0) throw ParseError(where + "[" + std::to_string(i) + "]: negative demand");
            row.push_back(q);
        }
        demand.push_back(std::move(row));
    }

    try {
        Instance inst(std::move(nodes), width, doc["d_max"].get<double>());
        return {std::move(inst), ScenarioSet(std::move(demand))};
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_instance(const Instance& inst, const ScenarioSet& scen) {
    nlohmann::json doc;
    doc["d_max"] = inst.d_max();
    doc["nodes"] = nlohmann::json::array();
    for (const auto& n : inst.nodes()) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["x"] = n.x;
        jn["y"] = n.y;
        jn["is_site"] = n.is_site;
        if (n.is_site) {
            jn["opening_cost"] = n.opening_cost;
            jn["capacity"] = n.capacity;
        }
        doc["nodes"].push_back(jn);
    }
    doc["scenarios"] = nlohmann::json::array();
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s) doc["scenarios"].push_back(scen.scenario(s));
    return doc.dump(2) + "\n";
}

std::pair<Instance, ScenarioSet> generate_instance(std::uint64_t seed, std::size_t n_nodes,
                                                   std::size_t n_scenarios,
                                                   const GeneratorParams& params) {
    if (n_nodes < 1) throw std::invalid_argument("generate_instance: need at least one node");
    if (n_scenarios < 1) throw std::invalid_argument("generate_instance: need at least one scenario");

    // Two independent streams: network structure must not depend on how many
    // scenarios are sampled.
    std::uint64_t structure_state = seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL;
    std::uint64_t scenario_state = seed * 0xBF58476D1CE4E5B9ULL + 0x2545F4914F6CDD1DULL;

    const std::size_t n_clusters =
        std::max<std::size_t>(1, (n_nodes + params.nodes_per_cluster / 2) /
                                     static_cast<std::size_t>(params.nodes_per_cluster));
    std::vector<std::pair<double, double>> centers(n_clusters);
    for (auto& c : centers) {
        c.first = uniform_real(structure_state, 0.0, params.area_span);
        c.second = uniform_real(structure_state, 0.0, params.area_span);
    }

    const std::size_t n_sites =
        std::min(n_nodes, std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       std::llround(params.site_fraction *
                                                                    static_cast<double>(n_nodes)))));
    std::vector<Instance::Node> nodes(n_nodes);
    std::vector<long long> base(n_nodes);
    long long base_total = 0;
    for (std::size_t p = 0; p < n_nodes; ++p) {
        const auto& c = centers[p % n_clusters];
        Instance::Node& n = nodes[p];
        n.id = static_cast<NodeId>(p + 1);
        n.x = quantize3(c.first + uniform_real(structure_state, -params.cluster_radius,
                                               params.cluster_radius));
        n.y = quantize3(c.second + uniform_real(structure_state, -params.cluster_radius,
                                                params.cluster_radius));
        n.is_site = p < n_sites;
        base[p] = uniform_int(structure_state, params.demand_lo, params.demand_hi);
        base_total += base[p];
    }

    // Capacity from the distribution mean (not the sampled scenarios), keeping
    // the network identical across scenario sample sizes.
    const double mean_factor = 0.5 * (params.factor_lo + params.factor_hi);
    const long long cap = std::max<long long>(
        1, std::llround(params.capacity_rho * mean_factor * static_cast<double>(base_total) /
                        static_cast<double>(n_sites)));
    for (std::size_t p = 0; p < n_sites; ++p) {
        nodes[p].opening_cost = params.opening_cost;
        nodes[p].capacity = cap;
    }

    std::vector<std::vector<long long>> demand(n_scenarios, std::vector<long long>(n_nodes));
    for (std::size_t s = 0; s < n_scenarios; ++s)
        for (std::size_t p = 0; p < n_nodes; ++p) {
            const double f = uniform_real(scenario_state, params.factor_lo, params.factor_hi);
            demand[s][p] = std::llround(static_cast<double>(base[p]) * f);
        }

    return {Instance(std::move(nodes), n_nodes, params.d_max), ScenarioSet(std::move(demand))};
}

ScenarioSet subsample_scenarios(const ScenarioSet& scen, std::size_t m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("subsample_scenarios: m must be at least 1");
    if (seed == 0 && m == scen.n_scenarios()) return scen;
    std::uint64_t state = seed * 0x94D049BB133111EBULL + 0x632BE59BD9B4E019ULL;
    std::vector<std::vector<long long>> demand;
    demand.reserve(m);
    for (std::size_t t = 0; t < m; ++t) {
        const auto s = static_cast<std::size_t>(
            uniform_int(state, 0, static_cast<long long>(scen.n_scenarios()) - 1));
        demand.push_back(scen.scenario(s));
    }
    return ScenarioSet(std::move(demand));
}

}  // namespace biflp
