#include "ccd/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <zlib.h>

#include "ccd/errors.hpp"

namespace ccd::dataset {

using oracle::Rat;
using oracle::RatQuery;
using oracle::RatVec3;
using oracle::RootWitness;

std::string_view to_string(Provenance p)
{
    switch (p) {
    case Provenance::File:
        return "file";
    case Provenance::Constructed:
        return "constructed";
    case Provenance::OracleCertified:
        return "oracle-certified";
    }
    return "unknown";
}

std::string_view to_string(Profile p)
{
    return p == Profile::SimulationLike ? "simulation-like" : "adversarial";
}

Profile parse_profile(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "simulation-like" || lower == "simulationlike" || lower == "simulation") {
        return Profile::SimulationLike;
    }
    if (lower == "adversarial") {
        return Profile::Adversarial;
    }
    throw UsageError("unknown profile '" + std::string(name) + "'");
}

LabeledQuery LabeledQuery::make(const RatQuery& exact, std::optional<bool> truth, Provenance provenance)
{
    return {exact, exact.to_query(), truth, provenance, std::nullopt, {}};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr int kColumns = 7;
constexpr int kRowsPerRecord = 8;

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

mpz_class parse_integer(std::string_view field, std::size_t row)
{
    std::string_view digits = field;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
        digits.remove_prefix(1);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw ParseError(row, "malformed integer '" + std::string(field) + "'");
    }
    std::string text(field.front() == '+' ? field.substr(1) : field);
    return mpz_class(text, 10);
}

bool parse_truth(std::string_view field, std::size_t row)
{
    std::string lower(field);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "1" || lower == "true") {
        return true;
    }
    if (lower == "0" || lower == "false") {
        return false;
    }
    throw ParseError(row, "malformed truth value '" + std::string(field) + "'");
}

}  // namespace

std::vector<LabeledQuery> parse_queries(std::istream& in, QueryKind kind)
{
    std::vector<LabeledQuery> out;
    std::array<RatVec3, kRowsPerRecord> points;
    bool truth = false;
    std::size_t row = 0;
    std::string line;
    std::vector<std::string_view> fields;

    while (std::getline(in, line)) {
        const std::string_view text = trim(line);
        if (text.empty()) {
            continue;
        }
        fields.clear();
        std::size_t begin = 0;
        while (true) {
            const std::size_t comma = text.find(',', begin);
            fields.push_back(trim(text.substr(begin, comma == std::string_view::npos ? text.npos : comma - begin)));
            if (comma == std::string_view::npos) {
                break;
            }
            begin = comma + 1;
        }
        if (fields.size() != kColumns) {
            throw ParseError(row, "expected " + std::to_string(kColumns) + " columns, found " +
                                      std::to_string(fields.size()));
        }
        RatVec3& p = points[row % kRowsPerRecord];
        for (int k = 0; k < 3; ++k) {
            mpz_class num = parse_integer(fields[2 * k], row);
            mpz_class den = parse_integer(fields[2 * k + 1], row);
            if (sgn(den) == 0) {
                throw ParseError(row, "zero denominator");
            }
            Rat& x = p[k];
            x = Rat(num, den);
            x.canonicalize();
        }
        const bool t = parse_truth(fields[6], row);
        if (row % kRowsPerRecord == 0) {
            truth = t;
        } else if (t != truth) {
            throw ParseError(row, "truth differs within a record");
        }
        if (row % kRowsPerRecord == kRowsPerRecord - 1) {
            RatQuery q;
            q.kind = kind;
            for (int i = 0; i < 4; ++i) {
                q.start[i] = points[i];
                q.end[i] = points[4 + i];
            }
            out.push_back(LabeledQuery::make(q, truth, Provenance::File));
        }
        ++row;
    }
    if (in.bad()) {
        throw IoError("read failure");
    }
    if (row % kRowsPerRecord != 0) {
        throw ParseError(row, "row count is not a multiple of 8");
    }
    return out;
}

void write_queries(std::span<const LabeledQuery> queries, std::ostream& out)
{
    std::string buf;
    for (const LabeledQuery& lq : queries) {
        if (!lq.truth) {
            throw UsageError("write_queries: query without a truth label");
        }
        const char t = *lq.truth ? '1' : '0';
        for (int r = 0; r < kRowsPerRecord; ++r) {
            const RatVec3& p = r < 4 ? lq.exact.start[r] : lq.exact.end[r - 4];
            buf.clear();
            for (int k = 0; k < 3; ++k) {
                Rat x = p[k];
                x.canonicalize();
                buf += x.get_num().get_str();
                buf += ',';
                buf += x.get_den().get_str();
                buf += ',';
            }
            buf += t;
            buf += '\n';
            out << buf;
        }
    }
    out.flush();
    if (!out) {
        throw IoError("write failure");
    }
}

// ---------------------------------------------------------------------------
// Files

namespace {

bool is_gzip(const std::filesystem::path& path)
{
    return path.extension() == ".gz";
}

std::string read_all(const std::filesystem::path& path)
{
    if (is_gzip(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (f == nullptr) {
            throw IoError("cannot open " + path.string());
        }
        std::string data;
        std::array<char, 1 << 16> chunk{};
        int n = 0;
        while ((n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()))) > 0) {
            data.append(chunk.data(), static_cast<std::size_t>(n));
        }
        int err = Z_OK;
        const char* msg = gzerror(f, &err);
        gzclose(f);
        if (n < 0 || (err != Z_OK && err != Z_STREAM_END)) {
            throw IoError("gzip read failure in " + path.string() + ": " + msg);
        }
        return data;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(const std::filesystem::path& path, const std::string& data)
{
    if (is_gzip(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (f == nullptr) {
            throw IoError("cannot create " + path.string());
        }
        const bool ok = data.empty() || gzwrite(f, data.data(), static_cast<unsigned>(data.size())) > 0;
        if (gzclose(f) != Z_OK || !ok) {
            throw IoError("gzip write failure in " + path.string());
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << data;
    out.close();
    if (!out) {
        throw IoError("write failure in " + path.string());
    }
}

bool has_csv_name(const std::filesystem::path& p)
{
    const std::string name = p.filename().string();
    auto ends_with = [&](std::string_view suffix) {
        return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with(".csv") || ends_with(".csv.gz");
}

}  // namespace

std::optional<QueryKind> kind_from_path(const std::filesystem::path& path)
{
    std::optional<QueryKind> found;
    for (const auto& part : path) {
        std::string s = part.string();
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        // Split on separators so "run_vf.csv" and "edge-edge" both match.
        std::vector<std::string> tokens;
        std::string cur;
        for (char c : s) {
            if (c == '_' || c == '.' || c == ' ') {
                tokens.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        tokens.push_back(cur);
        for (const std::string& tok : tokens) {
            if (tok == "vf" || tok == "vertex-face" || tok == "vertexface") {
                found = QueryKind::VertexFace;
            } else if (tok == "ee" || tok == "edge-edge" || tok == "edgeedge") {
                found = QueryKind::EdgeEdge;
            }
        }
    }
    return found;
}

std::vector<LabeledQuery> load_file(const std::filesystem::path& path, std::optional<QueryKind> kind)
{
    if (!kind) {
        kind = kind_from_path(path);
        if (!kind) {
            throw UsageError("cannot infer query kind from '" + path.string() +
                             "'; name it vertex-face/edge-edge or pass the kind explicitly");
        }
    }
    std::istringstream in(read_all(path));
    return parse_queries(in, *kind);
}

void save_file(const std::filesystem::path& path, std::span<const LabeledQuery> queries)
{
    std::ostringstream out;
    write_queries(queries, out);
    write_all(path, out.str());
}

std::vector<LabeledQuery> load_dataset(const std::filesystem::path& path, std::optional<QueryKind> kind)
{
    if (!std::filesystem::is_directory(path)) {
        return load_file(path, kind);
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
        if (entry.is_regular_file() && has_csv_name(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<LabeledQuery> out;
    for (const auto& f : files) {
        auto part = load_file(f, kind ? kind : kind_from_path(std::filesystem::relative(f, path)));
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

std::vector<std::filesystem::path> save_dataset(const std::filesystem::path& dir,
                                                std::span<const LabeledQuery> queries, bool gzip)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (QueryKind kind : {QueryKind::VertexFace, QueryKind::EdgeEdge}) {
        std::vector<LabeledQuery> subset;
        for (const auto& q : queries) {
            if (q.exact.kind == kind) {
                subset.push_back(q);
            }
        }
        if (subset.empty()) {
            continue;
        }
        auto path = dir / (std::string(to_string(kind)) + (gzip ? ".csv.gz" : ".csv"));
        save_file(path, subset);
        written.push_back(path);
    }
    return written;
}

}  // namespace ccd::dataset
