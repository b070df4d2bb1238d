#include "ccd/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "ccd/baselines.hpp"
#include "ccd/errors.hpp"
#include "ccd/solver.hpp"

namespace ccd::bench {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Ours:
        return "ours";
    case Method::IRF:
        return "irf";
    case Method::Univariate:
        return "univariate";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    const std::string s = lower(trim(name));
    for (Method m : {Method::Ours, Method::IRF, Method::Univariate}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw UsageError("unknown method '" + std::string(name) + "' (expected ours, irf or univariate)");
}

std::vector<Method> parse_methods(std::string_view list)
{
    std::vector<Method> out;
    std::size_t begin = 0;
    while (begin <= list.size()) {
        const std::size_t comma = std::min(list.find(',', begin), list.size());
        const Method m = parse_method(list.substr(begin, comma - begin));
        if (std::find(out.begin(), out.end(), m) == out.end()) {
            out.push_back(m);
        }
        begin = comma + 1;
    }
    return out;
}

std::string_view to_string(Outcome o)
{
    switch (o) {
    case Outcome::Correct:
        return "correct";
    case Outcome::FalsePositive:
        return "fp";
    case Outcome::FalseNegative:
        return "fn";
    case Outcome::Undecided:
        return "undecided";
    }
    return "unknown";
}

Outcome classify(bool collision, std::optional<bool> truth)
{
    if (!truth) {
        return Outcome::Undecided;
    }
    if (collision == *truth) {
        return Outcome::Correct;
    }
    return collision ? Outcome::FalsePositive : Outcome::FalseNegative;
}

Histogram Histogram::log_spaced(double lo_us, double hi_us, int bins_per_decade)
{
    if (!(lo_us > 0 && hi_us > lo_us && bins_per_decade > 0)) {
        throw UsageError("histogram: need 0 < lo < hi and a positive bin count");
    }
    Histogram h;
    const int bins = static_cast<int>(std::ceil(std::log10(hi_us / lo_us) * bins_per_decade));
    for (int i = 0; i <= bins; ++i) {
        h.edges.push_back(lo_us * std::pow(10.0, static_cast<double>(i) / bins_per_decade));
    }
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    return h;
}

void Histogram::add(double time_us)
{
    auto it = std::upper_bound(edges.begin(), edges.end(), time_us);
    const auto bin = std::clamp<std::ptrdiff_t>(it - edges.begin() - 1, 0,
                                                static_cast<std::ptrdiff_t>(counts.size()) - 1);
    ++counts[static_cast<std::size_t>(bin)];
}

std::int64_t Histogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

bool BenchReport::conservative_false_negative() const
{
    return std::any_of(methods.begin(), methods.end(),
                       [](const MethodReport& m) { return is_conservative(m.method) && m.false_negatives > 0; });
}

namespace {

struct Runner {
    Method method;
    const BenchConfig& cfg;
    SolverConfig solver_cfg;

    Runner(Method m, const BenchConfig& c) : method(m), cfg(c)
    {
        solver_cfg.delta = c.delta;
        solver_cfg.max_checks = c.max_checks;
        solver_cfg.separation = c.separation;
        solver_cfg.t_max = c.t_max;
    }

    QueryVerdict run(const Query& q) const
    {
        QueryVerdict v;
        switch (method) {
        case Method::Ours: {
            const CCDResult r = solve(q, solver_cfg);
            v.collision = r.collides();
            v.checks = r.checks;
            v.early_terminated = r.early_terminated;
            break;
        }
        case Method::IRF: {
            const CCDResult r = irf_solve(q, cfg.delta, cfg.max_checks);
            v.collision = r.collides();
            v.checks = r.checks;
            v.early_terminated = r.early_terminated;
            break;
        }
        case Method::Univariate: {
            const UnivariateResult r = univariate_solve(q, cfg.univariate_tolerance);
            v.collision = r.verdict == UnivariateVerdict::Collision ||
                          (cfg.degenerate_as_collision && r.verdict == UnivariateVerdict::Degenerate);
            break;
        }
        }
        return v;
    }
};

// Volatile sink so warm-up calls are not optimised away.
volatile bool g_sink = false;

}  // namespace

BenchReport run_benchmark(std::span<const dataset::LabeledQuery> queries, std::span<const Method> methods,
                          const BenchConfig& cfg)
{
    SolverConfig probe;
    probe.delta = cfg.delta;
    probe.max_checks = cfg.max_checks;
    probe.separation = cfg.separation;
    probe.t_max = cfg.t_max;
    probe.validate();
    if (cfg.threads < 1) {
        throw UsageError("threads must be at least 1");
    }
    if (cfg.warmup < 0) {
        throw UsageError("warmup must be non-negative");
    }

    BenchReport report;
    report.config = cfg;
    report.dataset_size = static_cast<std::int64_t>(queries.size());

    std::vector<std::size_t> order(queries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), std::mt19937_64(cfg.seed));

    for (Method method : methods) {
        const Runner runner(method, cfg);
        const std::size_t warm = std::min(queries.size(), static_cast<std::size_t>(cfg.warmup));
        for (std::size_t i = 0; i < warm; ++i) {
            g_sink = runner.run(queries[i].query).collision;
        }

        MethodReport mr;
        mr.method = method;
        mr.verdicts.resize(queries.size());
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = order[k];
                const auto t0 = std::chrono::steady_clock::now();
                QueryVerdict v = runner.run(queries[i].query);
                const auto t1 = std::chrono::steady_clock::now();
                v.time_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
                v.outcome = classify(v.collision, queries[i].truth);
                mr.verdicts[i] = v;
            }
        };
        const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), std::max<std::size_t>(queries.size(), 1));
        if (n_threads <= 1) {
            work(0, queries.size());
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (queries.size() + n_threads - 1) / n_threads;
            for (std::size_t b = 0; b < queries.size(); b += chunk) {
                pool.emplace_back(work, b, std::min(b + chunk, queries.size()));
            }
        }

        mr.histogram = Histogram::log_spaced();
        for (const QueryVerdict& v : mr.verdicts) {
            switch (v.outcome) {
            case Outcome::Correct:
                ++mr.correct;
                break;
            case Outcome::FalsePositive:
                ++mr.false_positives;
                break;
            case Outcome::FalseNegative:
                ++mr.false_negatives;
                break;
            case Outcome::Undecided:
                ++mr.undecided;
                break;
            }
            mr.early_terminated += v.early_terminated ? 1 : 0;
            mr.total_time_us += v.time_us;
            mr.histogram.add(v.time_us);
        }
        mr.avg_time_us = queries.empty() ? 0.0 : mr.total_time_us / static_cast<double>(queries.size());
        report.methods.push_back(std::move(mr));
    }
    return report;
}

Format parse_format(std::string_view name)
{
    const std::string s = lower(trim(name));
    if (s == "json") {
        return Format::Json;
    }
    if (s == "csv") {
        return Format::Csv;
    }
    throw UsageError("unknown format '" + std::string(name) + "' (expected json or csv)");
}

nlohmann::ordered_json to_json(const BenchReport& report, bool with_verdicts)
{
    using nlohmann::ordered_json;
    const BenchConfig& c = report.config;
    ordered_json j;
    j["config"] = {{"delta", c.delta},
                   {"max_checks", c.max_checks},
                   {"separation", c.separation},
                   {"t_max", c.t_max},
                   {"seed", c.seed},
                   {"degenerate_as_collision", c.degenerate_as_collision},
                   {"univariate_tolerance", c.univariate_tolerance},
                   {"warmup", c.warmup},
                   {"threads", c.threads}};
    j["dataset_size"] = report.dataset_size;
    j["methods"] = ordered_json::array();
    for (const MethodReport& m : report.methods) {
        ordered_json mj;
        mj["method"] = to_string(m.method);
        mj["avg_time_us"] = m.avg_time_us;
        mj["total_time_us"] = m.total_time_us;
        mj["correct"] = m.correct;
        mj["fp"] = m.false_positives;
        mj["fn"] = m.false_negatives;
        mj["undecided"] = m.undecided;
        mj["early_terminated"] = m.early_terminated;
        mj["histogram"] = {{"edges_us", m.histogram.edges}, {"counts", m.histogram.counts}};
        if (with_verdicts) {
            ordered_json vs = ordered_json::array();
            for (const QueryVerdict& v : m.verdicts) {
                vs.push_back({{"collision", v.collision},
                              {"outcome", to_string(v.outcome)},
                              {"time_us", v.time_us},
                              {"checks", v.checks},
                              {"early_terminated", v.early_terminated}});
            }
            mj["verdicts"] = std::move(vs);
        }
        j["methods"].push_back(std::move(mj));
    }
    return j;
}

namespace {

Outcome parse_outcome(const std::string& s)
{
    for (Outcome o : {Outcome::Correct, Outcome::FalsePositive, Outcome::FalseNegative, Outcome::Undecided}) {
        if (s == to_string(o)) {
            return o;
        }
    }
    throw UsageError("unknown outcome '" + s + "'");
}

}  // namespace

BenchReport report_from_json(const nlohmann::json& j)
{
    try {
        BenchReport r;
        const auto& c = j.at("config");
        r.config.delta = c.at("delta").get<double>();
        r.config.max_checks = c.at("max_checks").get<std::int64_t>();
        r.config.separation = c.at("separation").get<double>();
        r.config.t_max = c.at("t_max").get<double>();
        r.config.seed = c.at("seed").get<std::uint64_t>();
        r.config.degenerate_as_collision = c.at("degenerate_as_collision").get<bool>();
        r.config.univariate_tolerance = c.at("univariate_tolerance").get<double>();
        r.config.warmup = c.at("warmup").get<std::int64_t>();
        r.config.threads = c.at("threads").get<int>();
        r.dataset_size = j.at("dataset_size").get<std::int64_t>();
        for (const auto& mj : j.at("methods")) {
            MethodReport m;
            m.method = parse_method(mj.at("method").get<std::string>());
            m.avg_time_us = mj.at("avg_time_us").get<double>();
            m.total_time_us = mj.at("total_time_us").get<double>();
            m.correct = mj.at("correct").get<std::int64_t>();
            m.false_positives = mj.at("fp").get<std::int64_t>();
            m.false_negatives = mj.at("fn").get<std::int64_t>();
            m.undecided = mj.at("undecided").get<std::int64_t>();
            m.early_terminated = mj.at("early_terminated").get<std::int64_t>();
            m.histogram.edges = mj.at("histogram").at("edges_us").get<std::vector<double>>();
            m.histogram.counts = mj.at("histogram").at("counts").get<std::vector<std::int64_t>>();
            if (mj.contains("verdicts")) {
                for (const auto& vj : mj.at("verdicts")) {
                    QueryVerdict v;
                    v.collision = vj.at("collision").get<bool>();
                    v.outcome = parse_outcome(vj.at("outcome").get<std::string>());
                    v.time_us = vj.at("time_us").get<double>();
                    v.checks = vj.at("checks").get<std::int64_t>();
                    v.early_terminated = vj.at("early_terminated").get<bool>();
                    m.verdicts.push_back(v);
                }
            }
            r.methods.push_back(std::move(m));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed report: ") + e.what());
    }
}

void write_csv(const BenchReport& report, std::ostream& out)
{
    const BenchConfig& c = report.config;
    out << "method,dataset_size,avg_time_us,total_time_us,correct,fp,fn,undecided,early_terminated,"
           "delta,max_checks,separation,t_max,seed\n";
    out.precision(17);
    for (const MethodReport& m : report.methods) {
        out << to_string(m.method) << ',' << report.dataset_size << ',' << m.avg_time_us << ',' << m.total_time_us
            << ',' << m.correct << ',' << m.false_positives << ',' << m.false_negatives << ',' << m.undecided << ','
            << m.early_terminated << ',' << c.delta << ',' << c.max_checks << ',' << c.separation << ',' << c.t_max
            << ',' << c.seed << '\n';
    }
}

void emit_report(const BenchReport& report, Format format, const std::filesystem::path& path, bool with_verdicts)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot create " + path.string());
    }
    if (format == Format::Json) {
        out << to_json(report, with_verdicts).dump(2) << '\n';
    } else {
        write_csv(report, out);
    }
    out.close();
    if (!out) {
        throw IoError("write failure in " + path.string());
    }
}

}  // namespace ccd::bench
