// ccd-bench: run CCD methods over labeled query sets, or generate such sets.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccd/bench.hpp"
#include "ccd/dataset.hpp"
#include "ccd/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFalseNegative = 2;

struct RunArgs {
    std::string dataset;
    std::string methods = "ours,irf,univariate";
    std::string kind;
    std::string out;
    std::string format = "json";
    bool no_verdicts = false;
    ccd::bench::BenchConfig cfg;
};

struct GenArgs {
    std::string profile = "handcrafted";
    std::string random_profile = "simulation-like";
    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    bool gzip = false;
};

std::optional<ccd::QueryKind> parse_kind(const std::string& s)
{
    if (s.empty()) {
        return std::nullopt;
    }
    if (s == "vf" || s == "vertex-face") {
        return ccd::QueryKind::VertexFace;
    }
    if (s == "ee" || s == "edge-edge") {
        return ccd::QueryKind::EdgeEdge;
    }
    throw ccd::UsageError("unknown kind '" + s + "' (expected vf or ee)");
}

void print_summary(const ccd::bench::BenchReport& report)
{
    std::cout << "queries: " << report.dataset_size << '\n';
    for (const auto& m : report.methods) {
        std::cout << "  " << ccd::bench::to_string(m.method) << ": avg " << m.avg_time_us << " us, fp "
                  << m.false_positives << ", fn " << m.false_negatives << ", undecided " << m.undecided
                  << ", early-terminated " << m.early_terminated << '\n';
    }
}

int run(const RunArgs& a)
{
    const auto queries = ccd::dataset::load_dataset(a.dataset, parse_kind(a.kind));
    const auto methods = ccd::bench::parse_methods(a.methods);
    const auto format = ccd::bench::parse_format(a.format);
    const auto report = ccd::bench::run_benchmark(queries, methods, a.cfg);
    print_summary(report);
    if (!a.out.empty()) {
        ccd::bench::emit_report(report, format, a.out, !a.no_verdicts);
    }
    if (report.conservative_false_negative()) {
        std::cerr << "false negative from a conservative method\n";
        return kExitFalseNegative;
    }
    return kExitOk;
}

int gen(const GenArgs& a)
{
    std::vector<ccd::dataset::LabeledQuery> queries;
    if (a.profile == "handcrafted") {
        queries = ccd::dataset::gen_handcrafted();
    } else if (a.profile == "random") {
        auto set = ccd::dataset::gen_random(a.n, a.seed, ccd::dataset::parse_profile(a.random_profile));
        if (set.undecided > 0) {
            std::cerr << "discarded " << set.undecided << " candidates the oracle could not decide\n";
        }
        queries = std::move(set.queries);
    } else {
        throw ccd::UsageError("unknown profile '" + a.profile + "' (expected handcrafted or random)");
    }
    const auto files = ccd::dataset::save_dataset(a.out, queries, a.gzip);
    for (const auto& f : files) {
        std::cout << f.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Continuous collision detection benchmark harness"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run methods over a labeled dataset");
    run_cmd->add_option("--dataset", run_args.dataset, "CSV file or directory of CSV files")->required();
    run_cmd->add_option("--methods", run_args.methods, "Comma-separated subset of ours,irf,univariate")
        ->capture_default_str();
    run_cmd->add_option("--kind", run_args.kind, "Primitive kind (vf or ee) when not inferable from the path");
    run_cmd->add_option("--delta", run_args.cfg.delta, "Solver tolerance")->capture_default_str();
    run_cmd->add_option("--max-checks", run_args.cfg.max_checks, "Box-check budget")->capture_default_str();
    run_cmd->add_option("--separation", run_args.cfg.separation, "Minimum separation for ours")
        ->capture_default_str();
    run_cmd->add_option("--tmax", run_args.cfg.t_max, "End of the time interval for ours")->capture_default_str();
    run_cmd->add_option("--seed", run_args.cfg.seed, "Seed for the query timing order")->capture_default_str();
    run_cmd->add_option("--threads", run_args.cfg.threads, "Worker threads")->capture_default_str();
    run_cmd->add_option("--warmup", run_args.cfg.warmup, "Untimed warm-up queries per method")
        ->capture_default_str();
    run_cmd->add_flag("--degenerate-as-collision", run_args.cfg.degenerate_as_collision,
                      "Count degenerate univariate verdicts as collisions");
    run_cmd->add_option("--univariate-tolerance", run_args.cfg.univariate_tolerance,
                        "Inside-test tolerance for the univariate method")
        ->capture_default_str();
    run_cmd->add_option("--out", run_args.out, "Report path");
    run_cmd->add_option("--format", run_args.format, "json or csv")->capture_default_str();
    run_cmd->add_flag("--no-verdicts", run_args.no_verdicts, "Omit per-query verdicts from JSON reports");

    GenArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a labeled dataset");
    gen_cmd->add_option("--profile", gen_args.profile, "handcrafted or random")->capture_default_str();
    gen_cmd->add_option("--random-profile", gen_args.random_profile, "simulation-like or adversarial")
        ->capture_default_str();
    gen_cmd->add_option("--n", gen_args.n, "Number of random queries")->capture_default_str();
    gen_cmd->add_option("--seed", gen_args.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_args.out, "Output directory")->required();
    gen_cmd->add_flag("--gzip", gen_args.gzip, "Write .csv.gz files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return run(run_args);
        }
        return gen(gen_args);
    } catch (const ccd::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitError;
}
