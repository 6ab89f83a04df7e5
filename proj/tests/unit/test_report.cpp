#include "doctest_main.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "zdm/commands.hpp"
#include "zdm/error.hpp"
#include "zdm/report.hpp"

using namespace zdm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("zdm_report_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("atomic_write replaces the file and leaves no temp file") {
    const auto p = scratch("out.json");
    atomic_write(p, "first");
    atomic_write(p, "second");
    CHECK(slurp(p) == "second");
    for (const auto& e : fs::directory_iterator(p.parent_path())) {
        CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    }
    CHECK_THROWS_AS(atomic_write(scratch("missing_dir") / "x" / "y.json", "z"), Error);
}

TEST_CASE("ZDM_SEED overrides the configured seed") {
    ::unsetenv("ZDM_SEED");
    CHECK(resolve_seed(7) == 7);
    ::setenv("ZDM_SEED", "12345", 1);
    CHECK(resolve_seed(7) == 12345);
    ::setenv("ZDM_SEED", "12x", 1);
    CHECK_THROWS_AS(resolve_seed(7), Error);
    ::unsetenv("ZDM_SEED");
}

TEST_CASE("report fields and verdict") {
    const auto input = scratch("input.txt");
    atomic_write(input, "a");
    Report r("marker", {"zdm", "marker"}, 3);
    r.add_input("system", input);
    r.add_check("ok", true);
    CHECK(r.passed());
    auto j = r.to_json(0.5);
    CHECK(j["tool"] == "zdm");
    CHECK(j["seed"] == 3);
    CHECK(j["inputs"][0]["fnv1a64"] == "af63dc4c8601ec8c");
    CHECK_FALSE(j.contains("series"));
    r.add_check("bad", false, {{"at", 4}});
    CHECK_FALSE(r.passed());
    CHECK(r.to_json(0)["checks"][1]["witness"]["at"] == 4);
    CHECK_THROWS_AS(r.add_input("x", scratch("does_not_exist")), Error);

    Report e("glue", {}, 1);
    e.set_error("NotDense", "gap");
    CHECK_FALSE(e.passed());
    CHECK(e.to_json(0)["error"]["kind"] == "NotDense");
}

TEST_CASE("plot data: one csv per series, none for an empty report") {
    const auto dir = scratch("plots_empty");
    Report empty("marker", {}, 1);
    CHECK(emit_plotdata(empty.to_json(0), dir).empty());
    CHECK_FALSE(fs::exists(dir));

    Report r("encode", {}, 1);
    r.add_series("psi_vs_t", Series{{"t", "psi"}, {{0.0, 0.5}, {0.25, 0.125}}});
    r.add_series("labels", Series{{"name"}, {{"a,b"}}});
    const auto written = emit_plotdata(r.to_json(0), scratch("plots"));
    REQUIRE(written.size() == 2);
    CHECK(slurp(scratch("plots") / "psi_vs_t.csv") == "t,psi\n0,0.5\n0.25,0.125\n");
    CHECK(slurp(scratch("plots") / "labels.csv") == "name\n\"a,b\"\n");
}

TEST_CASE("execute maps outcomes to exit codes") {
    ::unsetenv("ZDM_SEED");
    std::ostringstream out, err;
    RunConfig cfg;
    cfg.command = "test";
    cfg.out = scratch("artifact.json").string();

    CHECK(execute(cfg, [](Report& r) { r.add_check("fine", true); return nlohmann::json{{"value", 1}}; }, out, err) ==
          kExitOk);
    auto doc = nlohmann::json::parse(slurp(cfg.out));
    CHECK(doc["value"] == 1);
    CHECK(doc["report"]["passed"] == true);

    CHECK(execute(cfg, [](Report& r) { r.add_check("broken", false); return nlohmann::json::object(); }, out, err) ==
          kExitCertificateFailure);
    CHECK(execute(cfg, [](Report&) -> nlohmann::json { throw Error(ErrorKind::NotDense, "gap"); }, out, err) ==
          kExitCertificateFailure);
    doc = nlohmann::json::parse(slurp(cfg.out));
    CHECK(doc["report"]["error"]["kind"] == "NotDense");
    CHECK(execute(cfg, [](Report&) -> nlohmann::json { throw Error(ErrorKind::InvalidArgument, "x"); }, out, err) ==
          kExitConfigError);

    ::setenv("ZDM_SEED", "99", 1);
    std::uint64_t seen = 0;
    execute(cfg, [&](Report& r) { seen = r.seed(); return nlohmann::json::object(); }, out, err);
    CHECK(seen == 99);
    ::setenv("ZDM_SEED", "nope", 1);
    CHECK(execute(cfg, [](Report&) { return nlohmann::json::object(); }, out, err) == kExitConfigError);
    ::unsetenv("ZDM_SEED");
}
