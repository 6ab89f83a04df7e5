#pragma once

// Run reports: command echo, input digests, certificates, checks with
// witnesses and plottable series. Files are written via temp file + rename.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace zdm {

inline constexpr const char* kToolName = "zdm";
inline constexpr const char* kToolVersion = ZDM_VERSION;

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Writes `content` to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// ZDM_SEED, when set, replaces the configured seed. A malformed value is an
/// InvalidArgument error.
std::uint64_t resolve_seed(std::uint64_t configured);

struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
};

class Report {
public:
    Report(std::string command, std::vector<std::string> argv, std::uint64_t seed);

    /// Records the path and digest of an input file (ParseError if unreadable).
    void add_input(const std::string& role, const std::filesystem::path& path);
    void add_certificate(const std::string& name, nlohmann::json certificate);
    void add_check(const std::string& name, bool passed, nlohmann::json witness = nullptr);
    void add_series(const std::string& name, Series series);
    void set_error(const std::string& kind, const std::string& message);

    bool passed() const;
    const std::string& command() const noexcept { return command_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// The wall-time field is the only one that varies between identical runs.
    nlohmann::json to_json(double wall_time_s) const;

private:
    std::string command_;
    std::vector<std::string> argv_;
    std::uint64_t seed_;
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json certificates_ = nlohmann::json::object();
    nlohmann::json checks_ = nlohmann::json::array();
    nlohmann::json series_ = nlohmann::json::object();
    nlohmann::json error_;
};

/// One CSV per series in report["series"]; returns the files written.
std::vector<std::filesystem::path> emit_plotdata(const nlohmann::json& report,
                                                 const std::filesystem::path& dir);

std::string series_csv(const nlohmann::json& series);

}  // namespace zdm
