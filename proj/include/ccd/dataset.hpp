#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccd/core.hpp"
#include "ccd/oracle.hpp"

namespace ccd::dataset {

enum class Provenance { File, Constructed, OracleCertified };

std::string_view to_string(Provenance p);

/// A query with exact rational coordinates, its binary64 rounding and a
/// ground-truth label.
struct LabeledQuery {
    oracle::RatQuery exact;
    /// Round-to-nearest image of `exact`.
    Query query;
    /// Empty when no label could be established.
    std::optional<bool> truth;
    Provenance provenance = Provenance::File;
    /// Exact contact (t, u, v) for constructed collisions.
    std::optional<oracle::RootWitness> witness;
    /// Short tag for generated cases, e.g. "hourglass" or "near-miss". Not stored in files.
    std::string label;

    static LabeledQuery make(const oracle::RatQuery& exact, std::optional<bool> truth, Provenance provenance);
};

/// Reads records of eight rows, seven comma-separated columns each:
/// x numerator, x denominator, y numerator, y denominator, z numerator,
/// z denominator, truth. Rows hold the four points at t=0 followed by the
/// four points at t=1. No header; blank lines are ignored. The file does not
/// record the primitive kind, so the caller supplies it.
///
/// Throws ParseError carrying the zero-based data row index.
std::vector<LabeledQuery> parse_queries(std::istream& in, QueryKind kind);

/// Writes reduced fractions with the sign on the numerator and the truth as 0/1.
/// Throws UsageError on an unlabeled query and IoError when the stream fails.
void write_queries(std::span<const LabeledQuery> queries, std::ostream& out);

/// Guesses the primitive kind from path components: "vertex-face", "vf",
/// "edge-edge" or "ee" (case-insensitive, also as "_vf"-style fragments).
std::optional<QueryKind> kind_from_path(const std::filesystem::path& path);

/// Reads one CSV file; names ending in ".gz" are decompressed. When `kind` is
/// empty it is inferred from the path and UsageError is thrown if that fails.
std::vector<LabeledQuery> load_file(const std::filesystem::path& path, std::optional<QueryKind> kind = {});

/// Writes one CSV file, gzip-compressed when the name ends in ".gz".
void save_file(const std::filesystem::path& path, std::span<const LabeledQuery> queries);

/// Loads a single file, or every *.csv / *.csv.gz below a directory in
/// sorted path order.
std::vector<LabeledQuery> load_dataset(const std::filesystem::path& path, std::optional<QueryKind> kind = {});

/// Writes `dir`/vertex-face.csv and `dir`/edge-edge.csv (a kind with no
/// queries produces no file). Returns the files written.
std::vector<std::filesystem::path> save_dataset(const std::filesystem::path& dir,
                                                std::span<const LabeledQuery> queries, bool gzip = false);

/// Curated degenerate and near-degenerate queries with established truth.
std::vector<LabeledQuery> gen_handcrafted();

enum class Profile { SimulationLike, Adversarial };

std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

struct RandomSet {
    std::vector<LabeledQuery> queries;
    /// Candidates discarded because the oracle could not certify them.
    std::int64_t undecided = 0;
};

/// Deterministic labeled random queries, alternating vertex-face and edge-edge.
/// Even positions carry a constructed exact contact, odd positions a no-root
/// certificate with margin at least `kCertifiedMargin`.
RandomSet gen_random(std::int64_t n, std::uint64_t seed, Profile profile);

/// Minimum L-infinity clearance certified for non-colliding random queries.
inline constexpr double kCertifiedMargin = 1e-9;

}  // namespace ccd::dataset
