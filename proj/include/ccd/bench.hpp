#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccd/dataset.hpp"

namespace ccd::bench {

enum class Method { Ours, IRF, Univariate };

std::string_view to_string(Method m);

/// Accepts "ours", "irf", "univariate" in any case. Throws UsageError otherwise.
Method parse_method(std::string_view name);

/// Comma-separated list, duplicates removed, order kept.
std::vector<Method> parse_methods(std::string_view list);

/// Both conservative methods; a false negative from either is a bug.
constexpr bool is_conservative(Method m) { return m != Method::Univariate; }

struct BenchConfig {
    double delta = 1e-6;
    std::int64_t max_checks = 1'000'000;
    /// Minimum separation for Ours. The baselines always test plain contact.
    double separation = 0.0;
    /// Time-interval end for Ours; the baselines always cover [0, 1].
    double t_max = 1.0;
    /// Shuffles the order in which queries are timed.
    std::uint64_t seed = 0;
    /// Counts a Degenerate univariate verdict as a collision.
    bool degenerate_as_collision = false;
    double univariate_tolerance = 0.0;
    /// Number of leading queries run once per method before timing starts.
    std::int64_t warmup = 256;
    /// Worker threads; each query is still timed on a single thread.
    int threads = 1;
};

enum class Outcome { Correct, FalsePositive, FalseNegative, Undecided };

std::string_view to_string(Outcome o);

struct QueryVerdict {
    bool collision = false;
    Outcome outcome = Outcome::Undecided;
    double time_us = 0.0;
    std::int64_t checks = 0;
    bool early_terminated = false;
};

/// Runtime histogram over log-spaced bins. Bin i covers
/// [edges[i], edges[i+1]); values outside the range land in the end bins.
struct Histogram {
    std::vector<double> edges;
    std::vector<std::int64_t> counts;

    static Histogram log_spaced(double lo_us = 1e-2, double hi_us = 1e7, int bins_per_decade = 4);
    void add(double time_us);
    std::int64_t total() const;
};

struct MethodReport {
    Method method = Method::Ours;
    std::int64_t correct = 0;
    std::int64_t false_positives = 0;
    std::int64_t false_negatives = 0;
    std::int64_t undecided = 0;
    std::int64_t early_terminated = 0;
    double avg_time_us = 0.0;
    double total_time_us = 0.0;
    Histogram histogram;
    /// One entry per dataset query, in dataset order.
    std::vector<QueryVerdict> verdicts;
};

struct BenchReport {
    BenchConfig config;
    std::int64_t dataset_size = 0;
    std::vector<MethodReport> methods;

    /// True when Ours or IRF missed a labeled collision.
    bool conservative_false_negative() const;
};

/// Compares a verdict to the label. Unlabeled queries are Undecided.
Outcome classify(bool collision, std::optional<bool> truth);

BenchReport run_benchmark(std::span<const dataset::LabeledQuery> queries, std::span<const Method> methods,
                          const BenchConfig& cfg = {});

enum class Format { Json, Csv };

Format parse_format(std::string_view name);

/// Field order is fixed. Per-query verdicts are included when `with_verdicts`.
nlohmann::ordered_json to_json(const BenchReport& report, bool with_verdicts = true);
BenchReport report_from_json(const nlohmann::json& j);

/// Header plus one row per method.
void write_csv(const BenchReport& report, std::ostream& out);

/// Throws IoError when the file cannot be written.
void emit_report(const BenchReport& report, Format format, const std::filesystem::path& path,
                 bool with_verdicts = true);

}  // namespace ccd::bench
