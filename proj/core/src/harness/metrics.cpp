#include "vdpo/harness/metrics.hpp"

#include <array>
#include <cmath>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"

namespace vdpo::harness {

namespace {

constexpr std::array<const char*, 6> kDiagnostics = {"critic_loss", "actor_loss", "alpha_loss",
                                                     "alpha",       "belief_loss", "kl_loss"};

std::string header() {
    std::string h = "schema_version,seed,step,series,return_mean,return_std";
    for (const char* d : kDiagnostics) h += std::string(",") + d;
    return h;
}

}  // namespace

double ret_nor(double ret_alg, double ret_rand, double ret_df) {
    const double denom = ret_df - ret_rand;
    if (!std::isfinite(denom) || std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(ret_df))) {
        throw NumericError("ret_nor: reference and random returns coincide");
    }
    return (ret_alg - ret_rand) / denom;
}

std::optional<std::uint64_t> steps_to_threshold(std::span<const EvalRecord> records, double threshold) {
    for (const auto& r : records) {
        if (r.return_mean >= threshold) return r.step;
    }
    return std::nullopt;
}

std::vector<EvalRecord> select_series(std::span<const EvalRecord> records, const std::string& series) {
    std::vector<EvalRecord> out;
    for (const auto& r : records) {
        if (r.series == series) out.push_back(r);
    }
    return out;
}

std::string metrics_csv(std::uint64_t seed, std::span<const EvalRecord> records) {
    std::string out = header() + "\n";
    for (const auto& r : records) {
        out += std::to_string(kMetricsSchemaVersion) + "," + std::to_string(seed) + "," + std::to_string(r.step) + "," +
               r.series + "," + format_double(r.return_mean) + "," + format_double(r.return_std);
        for (const char* d : kDiagnostics) {
            out += ",";
            if (const auto it = r.diagnostics.find(d); it != r.diagnostics.end()) out += format_double(it->second);
        }
        out += "\n";
    }
    return out;
}

std::vector<EvalRecord> parse_metrics_csv(const std::string& text, std::uint64_t* seed) {
    const auto lines = split(text, '\n');
    if (lines.empty() || trim(lines.front()) != header()) throw ConfigError("metrics CSV: unexpected header");
    std::vector<EvalRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 6 + kDiagnostics.size()) throw ConfigError("metrics CSV: wrong field count on line " + std::to_string(i + 1));
        if (parse_int(f[0]) != kMetricsSchemaVersion) throw ConfigError("metrics CSV: unsupported schema version");
        if (seed) *seed = static_cast<std::uint64_t>(parse_int(f[1]));
        EvalRecord r;
        r.step = static_cast<std::uint64_t>(parse_int(f[2]));
        r.series = f[3];
        r.return_mean = parse_double(f[4]);
        r.return_std = parse_double(f[5]);
        for (std::size_t d = 0; d < kDiagnostics.size(); ++d) {
            if (!f[6 + d].empty()) r.diagnostics[kDiagnostics[d]] = parse_double(f[6 + d]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace vdpo::harness
