#include "zdm/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

#include "zdm/error.hpp"

namespace zdm {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::InvalidArgument, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorKind::InvalidArgument, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::uint64_t resolve_seed(std::uint64_t configured) {
    const char* env = std::getenv("ZDM_SEED");
    if (!env || !*env) return configured;
    const std::string text(env);
    if (text.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, "ZDM_SEED='" + text + "' is not a nonnegative integer");
    }
    try {
        return std::stoull(text);
    } catch (const std::out_of_range&) {
        throw Error(ErrorKind::InvalidArgument, "ZDM_SEED='" + text + "' is out of range");
    }
}

Report::Report(std::string command, std::vector<std::string> argv, std::uint64_t seed)
    : command_(std::move(command)), argv_(std::move(argv)), seed_(seed) {}

void Report::add_input(const std::string& role, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    inputs_.push_back({{"role", role}, {"path", path.string()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
}

void Report::add_certificate(const std::string& name, nlohmann::json certificate) {
    certificates_[name] = std::move(certificate);
}

void Report::add_check(const std::string& name, bool passed, nlohmann::json witness) {
    nlohmann::json c{{"name", name}, {"passed", passed}};
    if (!witness.is_null()) c["witness"] = std::move(witness);
    checks_.push_back(std::move(c));
}

void Report::add_series(const std::string& name, Series series) {
    nlohmann::json rows = nlohmann::json::array();
    for (auto& r : series.rows) rows.push_back(std::move(r));
    series_[name] = {{"columns", series.columns}, {"rows", rows}};
}

void Report::set_error(const std::string& kind, const std::string& message) {
    error_ = {{"kind", kind}, {"message", message}};
}

bool Report::passed() const {
    if (!error_.is_null()) return false;
    for (const auto& c : checks_)
        if (!c["passed"].get<bool>()) return false;
    return true;
}

nlohmann::json Report::to_json(double wall_time_s) const {
    nlohmann::json j{{"tool", kToolName},
                     {"version", kToolVersion},
                     {"command", command_},
                     {"argv", argv_},
                     {"seed", seed_},
                     {"inputs", inputs_},
                     {"certificates", certificates_},
                     {"checks", checks_},
                     {"passed", passed()},
                     {"wall_time_s", wall_time_s}};
    if (!series_.empty()) j["series"] = series_;
    if (!error_.is_null()) j["error"] = error_;
    return j;
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return quoted + "\"";
    }
    if (v.is_number_float()) {
        std::ostringstream out;
        out.precision(17);
        out << v.get<double>();
        return out.str();
    }
    return v.dump();
}

}  // namespace

std::string series_csv(const nlohmann::json& series) {
    std::string out;
    const auto& cols = series.at("columns");
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_cell(cols[i]);
    out += '\n';
    for (const auto& row : series.at("rows")) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> emit_plotdata(const nlohmann::json& report,
                                                 const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    if (!report.contains("series") || report["series"].empty()) return written;
    std::filesystem::create_directories(dir);
    for (const auto& [name, series] : report["series"].items()) {
        const auto path = dir / (name + ".csv");
        atomic_write(path, series_csv(series));
        written.push_back(path);
    }
    return written;
}

}  // namespace zdm
