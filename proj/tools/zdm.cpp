#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zdm/acceptance.hpp"
#include "zdm/commands.hpp"

namespace {

constexpr const char* kDescription =
    "zdm: certified constructions for zero-dimensional dynamics.\n"
    "Every command writes a JSON artifact (--out) that embeds a run report with\n"
    "input digests, certificates and named checks. ZDM_SEED overrides --seed.\n"
    "Exit codes: 0 all checks passed, 1 certificate failure, 2 configuration error.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{kDescription, "zdm"};
    app.set_version_flag("--version", std::string(zdm::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    zdm::RunConfig config;
    app.add_option("--seed", config.seed, "RNG seed for sampled checks (ZDM_SEED wins)")
        ->capture_default_str();
    app.add_option("--out", config.out, "write the command artifact (with embedded report) here");
    app.add_option("--report", config.report, "write the run report alone here");
    app.add_option("--plot-dir", config.plot_dir, "write one CSV per plottable series here");
    app.add_flag("-v,--verbose", config.verbosity, "print artifacts and written files");

    zdm::MarkerOptions marker;
    auto* marker_cmd = app.add_subcommand(
        "marker",
        "Marker lemma: search the shortest L and a word set W in the language of\n"
        "length-L words whose occurrences are n-separated and which cover every\n"
        "window of length N. Fails with NotFound when the system has periodic points.");
    marker_cmd->add_option("--system", marker.system, "subshift JSON (sft or substitution)")->required();
    marker_cmd->add_option("--n", marker.n, "separation n")->capture_default_str();
    marker_cmd->add_option("--max-word-len", marker.max_word_len, "largest L tried")->capture_default_str();
    marker_cmd->add_option("--cover-cap", marker.cover_cap, "largest covering bound N accepted");

    zdm::EmbedOptions embed;
    auto* embed_cmd = app.add_subcommand(
        "embed-dense",
        "Dense embedding: build the marker-driven injective factor map from the host\n"
        "subshift into an array system whose rectangle frequencies are within eps of\n"
        "the target's, then measure the frequencies on sampled output windows.");
    embed_cmd->add_option("--host", embed.host, "aperiodic host subshift JSON")->required();
    embed_cmd->add_option("--target", embed.target, "target subshift JSON")->required();
    embed_cmd->add_option("--eps", embed.eps, "density tolerance in (0, 1]")->capture_default_str();
    embed_cmd->add_option("--shapes", embed.shapes, "rectangle shapes, e.g. 1x1,1x2,2x2")->capture_default_str();
    embed_cmd->add_option("--window", embed.window, "columns per sampled host window")->capture_default_str();
    embed_cmd->add_option("--samples", embed.samples, "number of sampled windows")->capture_default_str();
    embed_cmd->add_option("--max-word-len", embed.max_word_len, "marker search bound")->capture_default_str();
    embed_cmd->add_flag("--strict", embed.strict, "count only fully filled rectangles");
    embed_cmd->add_option("--freq-csv", embed.freq_csv, "export the target frequency table as CSV");

    zdm::EncodeOptions encode;
    auto* encode_cmd = app.add_subcommand(
        "encode",
        "Metric encoder: build the cover schedule and the array name of a point at\n"
        "parameter t, check shift equivariance, and for circle rotations tabulate the\n"
        "boundary mass psi(t) at smoothing width d.");
    encode_cmd->add_option("--system", encode.system, "circle rotation or subshift JSON")->required();
    encode_cmd->add_option("--levels", encode.levels, "schedule levels")->capture_default_str();
    encode_cmd->add_option("--window", encode.window, "columns -window..window")->capture_default_str();
    encode_cmd->add_option("--t", encode.t, "encoder parameter in [0, 1]")->capture_default_str();
    encode_cmd->add_option("--x", encode.x, "circle point in [0, 1)")->capture_default_str();
    encode_cmd->add_option("--position", encode.position, "symbolic point: offset into the fixed-point prefix")
        ->capture_default_str();
    encode_cmd->add_option("--slack", encode.slack, "radius slack for the cover families")->capture_default_str();
    encode_cmd->add_option("--d", encode.d, "psi smoothing width")->capture_default_str();
    encode_cmd->add_option("--samples", encode.samples, "quadrature samples")->capture_default_str();

    zdm::SelectorOptions selector;
    auto* selector_cmd = app.add_subcommand(
        "selector",
        "Parameter selector: for a list of measures, choose nested dyadic parameter\n"
        "intervals on which every measure has small psi, and check that the limits\n"
        "avoid each measure's bad parameter set.");
    selector_cmd->add_option("--measures", selector.measures, "measure list JSON")->required();
    selector_cmd->add_option("--stages", selector.stages, "selector stages")->capture_default_str();
    selector_cmd->add_option("--extra-depth", selector.extra_depth, "extra dyadic refinement per stage")
        ->capture_default_str();

    zdm::RetractOptions retract;
    auto* retract_cmd = app.add_subcommand(
        "simplex-retract",
        "eps-dense face retraction: the affine retraction of a finite simplex onto a\n"
        "face that fixes the face and moves no vertex more than eps; fails with\n"
        "NotDense when the face is not eps-dense.");
    retract_cmd->add_option("--simplex", retract.simplex, "simplex JSON {vertices, labels}")->required();
    retract_cmd->add_option("--face", retract.face, "face vertex indices, e.g. 0,2")->required();
    retract_cmd->add_option("--eps", retract.eps, "density tolerance")->capture_default_str();
    retract_cmd->add_option("--probes", retract.probes, "random probe pairs")->capture_default_str();

    zdm::GlueOptions glue;
    auto* glue_cmd = app.add_subcommand(
        "glue",
        "Inductive gluing: grow a face group by group, blending each stage's affine\n"
        "map with the previous one, and certify stage displacements below 4 eps_k,\n"
        "exact agreement on earlier faces, injectivity and label preservation.");
    glue_cmd->add_option("--simplex", glue.simplex, "simplex JSON")->required();
    glue_cmd->add_option("--groups", glue.groups, "vertex groups JSON")->required();
    glue_cmd->add_option("--eps-schedule,--schedule", glue.schedule, "geometric:r or list:e1,e2,...")->capture_default_str();
    glue_cmd->add_option("--stages", glue.stages, "stages to run")->capture_default_str();
    glue_cmd->add_flag("!--no-subdivide", glue.subdivide, "fail with GroupTooCoarse instead of subdividing");

    zdm::VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand(
        "verify-all",
        "Acceptance matrix: runs criteria 1-7 in process and prints one pass/fail\n"
        "line per criterion with its time against the pinned limit. Without\n"
        "--seed the desk seed 20240611 is used.");
    verify_cmd->add_option("--suite", verify.suite, "suite name")
        ->check(CLI::IsMember({"desk"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? zdm::kExitOk : zdm::kExitConfigError;
    }

    config.argv.assign(argv, argv + argc);
    std::function<nlohmann::json(zdm::Report&)> body;
    if (*marker_cmd) {
        config.command = "marker";
        body = [&](zdm::Report& r) { return zdm::run_marker(marker, r); };
    } else if (*embed_cmd) {
        config.command = "embed-dense";
        body = [&](zdm::Report& r) { return zdm::run_embed_dense(embed, r); };
    } else if (*encode_cmd) {
        config.command = "encode";
        body = [&](zdm::Report& r) { return zdm::run_encode(encode, r); };
    } else if (*selector_cmd) {
        config.command = "selector";
        body = [&](zdm::Report& r) { return zdm::run_selector(selector, r); };
    } else if (*retract_cmd) {
        config.command = "simplex-retract";
        body = [&](zdm::Report& r) { return zdm::run_simplex_retract(retract, r); };
    } else if (*glue_cmd) {
        config.command = "glue";
        body = [&](zdm::Report& r) { return zdm::run_glue(glue, r); };
    } else {
        config.command = "verify-all";
        if (app.get_option("--seed")->count() == 0) config.seed = zdm::kDeskSeed;
        body = [&](zdm::Report& r) { return zdm::run_verify_all(verify, r, std::cout); };
    }
    return zdm::execute(config, body, std::cout, std::cerr);
}
