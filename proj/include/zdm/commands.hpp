#pragma once

// Command bodies behind the zdm executable. Each body records inputs,
// certificates and checks in the Report and returns the artifact written to
// --out. `execute` maps failures onto exit codes.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zdm/report.hpp"

namespace zdm {

enum ExitCode : int { kExitOk = 0, kExitCertificateFailure = 1, kExitConfigError = 2 };

struct RunConfig {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 1;
    std::string out;        // artifact path; empty prints nothing
    std::string report;     // full report path; optional
    std::string plot_dir;   // CSV series directory; optional
    int verbosity = 0;
};

struct MarkerOptions {
    std::string system;
    std::size_t n = 2;
    std::size_t max_word_len = 16;
    std::optional<std::size_t> cover_cap;
};

struct EmbedOptions {
    std::string host;
    std::string target;
    double eps = 0.25;
    std::string shapes = "1x1,1x2";
    std::size_t window = 4096;
    std::size_t samples = 5;
    std::size_t max_word_len = 256;
    bool strict = false;
    std::string freq_csv;
};

struct EncodeOptions {
    std::string system;
    std::size_t levels = 3;
    std::int64_t window = 64;
    double t = 0.2013;
    double x = 0.0;             // circle point
    std::size_t position = 0;   // symbolic point: offset into the fixed-point prefix
    double slack = 0.2;
    double d = 0.01;
    std::size_t samples = 20000;
};

struct SelectorOptions {
    std::string measures;
    std::size_t stages = 6;
    std::size_t extra_depth = 8;
};

struct RetractOptions {
    std::string simplex;
    std::string face;
    double eps = 0.1;
    std::size_t probes = 100;
};

struct GlueOptions {
    std::string simplex;
    std::string groups;
    std::string schedule = "geometric:0.5";
    std::size_t stages = 5;
    bool subdivide = true;
};

struct VerifyOptions {
    std::string suite = "desk";
};

nlohmann::json run_marker(const MarkerOptions& o, Report& report);
nlohmann::json run_embed_dense(const EmbedOptions& o, Report& report);
nlohmann::json run_encode(const EncodeOptions& o, Report& report);
nlohmann::json run_selector(const SelectorOptions& o, Report& report);
nlohmann::json run_simplex_retract(const RetractOptions& o, Report& report);
nlohmann::json run_glue(const GlueOptions& o, Report& report);
nlohmann::json run_verify_all(const VerifyOptions& o, Report& report, std::ostream& lines);

/// Runs `body`, writes the artifact (with the report embedded under
/// "report") and the optional report / plot files, and returns the exit code:
/// 0 when every check passed, 1 on a failed check or certificate error,
/// 2 on configuration errors.
int execute(const RunConfig& config, const std::function<nlohmann::json(Report&)>& body,
            std::ostream& out, std::ostream& err);

}  // namespace zdm
