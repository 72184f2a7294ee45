#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biflp/indicators.hpp"
#include "biflp/methods.hpp"

namespace fs = std::filesystem;
using namespace biflp;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << bytes;
}

struct GenArgs {
    std::size_t nodes = 21;
    std::size_t scenarios = 10;
    std::uint64_t seed = 1;
    double site_fraction = 1.0;
    double d_max = 6.0;
    long long opening_cost = 5000;
    double capacity_rho = 1.5;
};

std::pair<Instance, ScenarioSet> generate_from(const GenArgs& g) {
    GeneratorParams params;
    params.site_fraction = g.site_fraction;
    params.d_max = g.d_max;
    params.opening_cost = g.opening_cost;
    params.capacity_rho = g.capacity_rho;
    return generate_instance(g.seed, g.nodes, g.scenarios, params);
}

void add_gen_options(CLI::App* cmd, GenArgs& g) {
    cmd->add_option("--nodes", g.nodes, "number of network nodes");
    cmd->add_option("--scenarios", g.scenarios, "number of demand scenarios");
    cmd->add_option("--seed", g.seed, "generator seed");
    cmd->add_option("--site-fraction", g.site_fraction, "fraction of nodes that are sites");
    cmd->add_option("--d-max", g.d_max, "coverage radius in km");
    cmd->add_option("--opening-cost", g.opening_cost, "opening cost per site");
    cmd->add_option("--rho", g.capacity_rho, "capacity factor over expected demand");
}

int resolve_k(const std::optional<double>& alpha, const std::optional<int>& k, std::size_t n) {
    if (alpha.has_value() == k.has_value())
        throw CLI::ValidationError("exactly one of --alpha or --k is required");
    if (k) return RiskSpec::from_k(*k, n).k;
    return RiskSpec::from_alpha(*alpha, n).k;
}

std::string status_of(const DriverStats& stats) {
    if (stats.hit_time_limit) return "time-limit";
    for (const PointLog& p : stats.point_log)
        if (!p.exact) return "partial";
    return "optimal";
}

int cmd_generate(const GenArgs& g, const std::string& out) {
    auto [inst, scen] = generate_from(g);
    const std::string text = serialize_instance(inst, scen);
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file(out, text);
    return 0;
}

struct RunArgs {
    std::string instance_path;
    GenArgs gen;
    bool use_generator = false;
    std::string method = "e";
    std::string model = "ma";
    std::optional<double> alpha;
    std::optional<int> k;
    double tl = 7200.0;
    double tl_point = 0.0;  // 0 = unlimited
    double budget_point = 10.0;
    int kappa = 2;
    std::string out_dir = "run-out";
};

int cmd_run(const RunArgs& a) {
    Instance inst;
    ScenarioSet scen;
    std::string instance_label;
    if (!a.instance_path.empty()) {
        std::tie(inst, scen) = parse_instance(read_file(a.instance_path));
        instance_label = a.instance_path;
    } else if (a.use_generator) {
        std::tie(inst, scen) = generate_from(a.gen);
        instance_label = "gen(seed=" + std::to_string(a.gen.seed) +
                         ",n=" + std::to_string(a.gen.nodes) +
                         ",N=" + std::to_string(a.gen.scenarios) + ")";
    } else {
        throw CLI::ValidationError("one of --instance or the generator options is required");
    }

    const RiskSpec risk = RiskSpec::from_k(resolve_k(a.alpha, a.k, scen.n_scenarios()),
                                           scen.n_scenarios());
    ModelFamily family;
    if (a.model == "ma")
        family = ModelFamily::Classical;
    else if (a.model == "mb")
        family = ModelFamily::SubsetExact;
    else if (a.model == "mb-bar")
        family = ModelFamily::SubsetFrozen;
    else
        throw CLI::ValidationError("unknown model '" + a.model + "'");

    if (a.method == "bb" && family == ModelFamily::SubsetFrozen)
        throw CLI::ValidationError("the balanced-box method requires an exact model (ma or mb)");

    FrontierRun run;
    if (a.method == "e") {
        DriverOptions opts;
        opts.time_limit_total = a.tl;
        opts.time_limit_per_point = a.tl_point > 0.0 ? a.tl_point : kInfinity;
        run = epsilon_constraint(family, inst, scen, risk, opts);
    } else if (a.method == "bb") {
        DriverOptions opts;
        opts.time_limit_total = a.tl;
        opts.time_limit_per_point = a.tl_point > 0.0 ? a.tl_point : kInfinity;
        run = balanced_box(family, inst, scen, risk, opts);
    } else if (a.method == "mat") {
        MatheuristicOptions opts;
        opts.time_limit_total = a.tl;
        opts.per_point_budget = a.budget_point;
        opts.kappa = a.kappa;
        run = matheuristic(family, inst, scen, risk, opts);
    } else {
        throw CLI::ValidationError("unknown method '" + a.method + "'");
    }

    fs::create_directories(a.out_dir);
    write_file((fs::path(a.out_dir) / "frontier.json").string(), run.frontier.to_json());

    std::ostringstream csv;
    csv << "instance,method,model,alpha,k,runtime_s,n_ndp,status\n";
    csv << instance_label << "," << a.method << "," << a.model << "," << risk.alpha << ","
        << risk.k << "," << run.stats.seconds << "," << run.frontier.size() << ","
        << status_of(run.stats) << "\n";
    write_file((fs::path(a.out_dir) / "record.csv").string(), csv.str());

    std::ostringstream log;
    log << "point,cost,risk,cuts_added,separator_calls,seconds,exact\n";
    for (std::size_t i = 0; i < run.stats.point_log.size(); ++i) {
        const PointLog& p = run.stats.point_log[i];
        log << i << "," << p.cost << "," << p.risk << "," << p.cuts_added << ","
            << p.separator_calls << "," << p.seconds << "," << (p.exact ? 1 : 0) << "\n";
    }
    log << "pool_size," << run.stats.pool_size << ",cuts_total," << run.stats.cuts_total
        << ",separator_calls_total," << run.stats.separator_calls_total
        << ",separator_calls_after_first_point," << run.stats.separator_calls_after_first_point
        << "\n";
    write_file((fs::path(a.out_dir) / "cuts.log").string(), log.str());

    std::cout << "wrote " << a.out_dir << " (" << run.frontier.size() << " points, "
              << status_of(run.stats) << ")\n";
    return 0;
}

int cmd_reevaluate(const std::string& frontier_path, const std::string& instance_path,
                   const std::optional<double>& alpha, const std::optional<int>& k,
                   const std::string& out) {
    auto [inst, scen] = parse_instance(read_file(instance_path));
    const Frontier in = Frontier::from_json(read_file(frontier_path));
    const RiskSpec risk =
        RiskSpec::from_k(resolve_k(alpha, k, scen.n_scenarios()), scen.n_scenarios());
    const Frontier re = reevaluate_frontier(in, inst, scen, risk);
    if (out.empty() || out == "-")
        std::cout << re.to_json();
    else
        write_file(out, re.to_json());
    return 0;
}

int cmd_compare(const std::string& reference, const std::vector<std::string>& inputs,
                const std::string& out) {
    std::vector<std::pair<std::string, Frontier>> sets;
    for (const std::string& path : inputs)
        sets.push_back({path, Frontier::from_json(read_file(path))});

    Frontier ref;
    if (reference == "union") {
        std::vector<FrontierPoint> all;
        for (const auto& [name, f] : sets)
            for (const FrontierPoint& p : f.points()) all.push_back(p);
        ref = Frontier::from_points(std::move(all));
    } else {
        ref = Frontier::from_json(read_file(reference));
    }
    if (ref.empty()) throw UndefinedIndicatorError("reference set is empty after filtering");

    std::ostringstream csv;
    csv << "set,gH_percent,I_eps,hypervolume_A,hypervolume_R,ref_cost,ref_risk\n";
    for (const auto& [name, f] : sets) {
        const IndicatorReport rep = compute_report(f, ref);
        csv << name << "," << rep.gH_percent << "," << rep.I_eps << "," << rep.hypervolume_A
            << "," << rep.hypervolume_R << "," << rep.reference_point.first << ","
            << rep.reference_point.second << "\n";
    }
    if (out.empty() || out == "-")
        std::cout << csv.str();
    else
        write_file(out, csv.str());
    return 0;
}

int cmd_plot_data(const std::vector<std::string>& inputs, const std::string& out) {
    std::ostringstream csv;
    csv << "cost,risk,series\n";
    for (const std::string& path : inputs) {
        const Frontier f = Frontier::from_json(read_file(path));
        if (f.empty()) std::cerr << "warning: '" << path << "' holds an empty frontier\n";
        const std::string series = fs::path(path).stem().string();
        for (const FrontierPoint& p : f.points())
            csv << p.cost << "," << p.risk << "," << series << "\n";
    }
    if (out.empty() || out == "-")
        std::cout << csv.str();
    else
        write_file(out, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bi-objective risk-averse facility location toolkit"};
    app.require_subcommand(1);

    GenArgs gen_args;
    std::string gen_out;
    CLI::App* gen = app.add_subcommand("generate", "generate a synthetic instance");
    add_gen_options(gen, gen_args);
    gen->add_option("--out", gen_out, "output file ('-' for stdout)");

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run one frontier experiment");
    run->add_option("--instance", run_args.instance_path, "instance JSON file");
    add_gen_options(run, run_args.gen);
    run->callback([&] {
        run_args.use_generator = run_args.instance_path.empty();
    });
    run->add_option("--method", run_args.method, "e, bb or mat")->required();
    run->add_option("--model", run_args.model, "ma, mb or mb-bar")->required();
    run->add_option("--alpha", run_args.alpha, "confidence level in [0,1)");
    run->add_option("--k", run_args.k, "subset cardinality in [1,N]");
    run->add_option("--tl", run_args.tl, "total time limit in seconds");
    run->add_option("--tl-point", run_args.tl_point, "per-point time limit in seconds");
    run->add_option("--budget-point", run_args.budget_point, "matheuristic per-point budget");
    run->add_option("--kappa", run_args.kappa, "local branching radius");
    run->add_option("--out", run_args.out_dir, "output directory");

    std::string re_frontier, re_instance, re_out;
    std::optional<double> re_alpha;
    std::optional<int> re_k;
    CLI::App* reev = app.add_subcommand("reevaluate", "re-evaluate a frontier exactly");
    reev->add_option("--frontier", re_frontier, "frontier JSON file")->required();
    reev->add_option("--instance", re_instance, "instance JSON file")->required();
    reev->add_option("--alpha", re_alpha, "confidence level in [0,1)");
    reev->add_option("--k", re_k, "subset cardinality in [1,N]");
    reev->add_option("--out", re_out, "output file ('-' for stdout)");

    std::string cmp_ref = "union", cmp_out;
    std::vector<std::string> cmp_inputs;
    CLI::App* cmp = app.add_subcommand("compare", "quality indicators against a reference set");
    cmp->add_option("--ref", cmp_ref, "'union' or a frontier JSON file");
    cmp->add_option("--inputs", cmp_inputs, "frontier JSON files")->required();
    cmp->add_option("--out", cmp_out, "output CSV ('-' for stdout)");

    std::string plot_out;
    std::vector<std::string> plot_inputs;
    CLI::App* plot = app.add_subcommand("plot-data", "plot-ready CSV of frontiers");
    plot->add_option("--inputs", plot_inputs, "frontier JSON files")->required();
    plot->add_option("--out", plot_out, "output CSV ('-' for stdout)");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_generate(gen_args, gen_out);
        if (run->parsed()) return cmd_run(run_args);
        if (reev->parsed()) return cmd_reevaluate(re_frontier, re_instance, re_alpha, re_k, re_out);
        if (cmp->parsed()) return cmd_compare(cmp_ref, cmp_inputs, cmp_out);
        if (plot->parsed()) return cmd_plot_data(plot_inputs, plot_out);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
