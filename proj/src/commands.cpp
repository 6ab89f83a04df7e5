#include "zdm/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "zdm/acceptance.hpp"
#include "zdm/dense_embedding.hpp"
#include "zdm/error.hpp"
#include "zdm/markers.hpp"
#include "zdm/metric_encoder.hpp"
#include "zdm/simplex_geometry.hpp"

namespace zdm {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

void require_file(const std::string& path, const std::string& flag) {
    require(!path.empty(), flag + " is required");
    if (!std::filesystem::is_regular_file(path)) {
        throw Error(ErrorKind::ParseError, flag + ": no such file " + path);
    }
}

bool is_config_error(ErrorKind kind) {
    return kind == ErrorKind::InvalidArgument || kind == ErrorKind::ParseError;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, "bad vertex index '" + item + "' in '" + text + "'");
        }
        out.push_back(std::stoull(item));
    }
    require(!out.empty(), "empty vertex list");
    return out;
}

std::string pretty(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

nlohmann::json run_marker(const MarkerOptions& o, Report& report) {
    require_file(o.system, "--system");
    require(o.n >= 1, "--n must be positive");
    require(o.max_word_len >= 1, "--max-word-len must be positive");
    report.add_input("system", o.system);
    const auto s = Subshift::load(o.system);
    const auto m = find_marker(s, o.n, o.max_word_len, o.cover_cap);
    const auto again = verify_marker(s, m.W, o.n, o.cover_cap);
    report.add_certificate("marker", m.to_json());
    nlohmann::json witness = nullptr;
    if (again.witness) witness = s.alphabet().render(*again.witness);
    report.add_check("separation over language(L+n-1)", again.valid, witness);
    report.add_check("covering bound N over language(L+N-1)", again.N == std::optional<std::size_t>(m.N), witness);
    return m.to_json();
}

nlohmann::json run_embed_dense(const EmbedOptions& o, Report& report) {
    require_file(o.host, "--host");
    require_file(o.target, "--target");
    require(o.eps > 0.0 && o.eps <= 1.0, "--eps must lie in (0, 1]");
    require(o.window >= 2, "--window must be at least 2");
    require(o.samples >= 1, "--samples must be positive");
    report.add_input("host", o.host);
    report.add_input("target", o.target);
    const auto host = Subshift::load(o.host);
    const auto target = Subshift::load(o.target);
    const auto shapes = parse_shapes(o.shapes);

    PlanOptions options;
    options.max_word_len = o.max_word_len;
    const auto plan = plan_embedding(host, target, shapes, o.eps, options);
    report.add_certificate("marker", plan.marker.to_json());
    if (!o.freq_csv.empty()) atomic_write(o.freq_csv, plan.spec.target.to_csv());

    const Word text = host.iterate(0, std::max<std::size_t>(4 * o.window, std::size_t{1} << 16));
    std::mt19937_64 rng(report.seed());
    std::vector<ArrayWindow> outputs;
    nlohmann::json unmarked = nlohmann::json::array();
    for (std::size_t i = 0; i < o.samples; ++i) {
        const std::size_t start = rng() % (text.size() - o.window);
        Word row(text.begin() + static_cast<long>(start), text.begin() + static_cast<long>(start + o.window));
        const auto window = ArrayWindow::single_row(host.alphabet(), row, 0);
        const auto hits = marker_hits(plan, window);
        if (hits.size() < 2) {
            unmarked.push_back({{"sample", i}, {"start", start}, {"hits", hits.size()}});
            continue;
        }
        outputs.push_back(build_phi(plan, window));
    }
    report.add_check("every sampled window holds two marker hits", unmarked.empty(),
                     unmarked.empty() ? nlohmann::json(nullptr) : unmarked);
    DensityVerdict verdict;
    if (!outputs.empty()) verdict = verify_density(plan, outputs, o.strict);

    nlohmann::json rectangles = nlohmann::json::array();
    Series series{{"shape", "pattern", "target", "measured", "deviation"}, {}};
    const RectangleDeviation* worst = nullptr;
    for (const auto& r : verdict.rectangles) {
        const auto& shape = plan.spec.target.shapes().at(r.shape_index);
        const auto pattern = render_pattern(plan.spec.target.schema(), RectanglePattern{shape, r.cells});
        rectangles.push_back({{"shape", shape.to_string()},
                              {"pattern", pattern},
                              {"target", r.target},
                              {"measured", r.measured},
                              {"deviation", r.deviation}});
        series.rows.push_back({shape.to_string(), pattern, r.target, r.measured, r.deviation});
        if (!worst || r.deviation > worst->deviation) worst = &r;
    }
    nlohmann::json density{{"inside", verdict.inside},
                           {"worst_deviation", verdict.worst_deviation},
                           {"strict", o.strict},
                           {"windows", o.samples},
                           {"window", o.window},
                           {"rectangles", rectangles}};
    report.add_certificate("density", density);
    report.add_check("sample certified error <= eps/2", plan.sample.certified_error <= o.eps / 2,
                     plan.sample.certified_error);
    nlohmann::json witness = nullptr;
    if (worst) witness = rectangles.at(static_cast<std::size_t>(worst - verdict.rectangles.data()));
    report.add_check("inside the eps-neighborhood", verdict.inside && verdict.worst_deviation < o.eps,
                     {{"worst_deviation", outputs.empty() ? nlohmann::json(nullptr) : nlohmann::json(verdict.worst_deviation)},
                      {"measured_windows", outputs.size()},
                      {"rectangle", witness}});
    report.add_series("density_deviation", std::move(series));

    auto artifact = plan.to_json();
    artifact["inside"] = verdict.inside;
    artifact["worst_deviation"] = outputs.empty() ? nlohmann::json(nullptr) : nlohmann::json(verdict.worst_deviation);
    artifact["measured_windows"] = outputs.size();
    artifact["rectangles"] = rectangles;
    artifact["window"] = o.window;
    return artifact;
}

nlohmann::json run_encode(const EncodeOptions& o, Report& report) {
    require_file(o.system, "--system");
    require(o.levels >= 1 && o.levels <= 12, "--levels must lie in [1, 12]");
    require(o.window >= 0, "--window must be nonnegative");
    require(o.t >= 0.0 && o.t <= 1.0, "--t must lie in [0, 1]");
    require(o.d > 0.0, "--d must be positive");
    report.add_input("system", o.system);
    const auto sys = MetricSystem::load(o.system);
    const auto schedule = build_schedule(sys, o.levels, o.slack);

    Point x;
    nlohmann::json where;
    if (sys.kind() == MetricSystem::Kind::CircleRotation) {
        x = circle_point(o.x);
        where = o.x;
    } else {
        const auto margin = static_cast<std::size_t>(o.window) + sys.resolution() + 1;
        const Word word = sys.subshift().iterate(0, o.position + 2 * margin + 1);
        x = sys.symbolic_point(word, static_cast<std::int64_t>(margin + o.position));
        where = o.position;
    }
    const auto names = array_name(sys, schedule, o.t, x, o.levels, o.window);
    const auto shifted = array_name(sys, schedule, o.t, sys.apply(x), o.levels, o.window);
    bool equivariant = true;
    nlohmann::json witness = nullptr;
    for (std::size_t k = 0; k < o.levels && equivariant; ++k) {
        for (std::int64_t j = -o.window; j < o.window; ++j) {
            if (shifted.at(k, j) != names.at(k, j + 1)) {
                equivariant = false;
                witness = {{"level", k + 1}, {"column", j}};
                break;
            }
        }
    }
    report.add_check("array name of Tx is the shifted array name of x", equivariant, witness);

    nlohmann::json families = nlohmann::json::array();
    for (const auto& fam : schedule) {
        families.push_back({{"level", fam.level},
                            {"size", fam.size()},
                            {"covering_radius", fam.covering_radius},
                            {"r0", fam.r0},
                            {"r1", fam.r1}});
    }
    report.add_certificate("schedule", families);

    if (sys.kind() == MetricSystem::Kind::CircleRotation) {
        QuadratureConfig cfg;
        cfg.d = o.d;
        cfg.samples = o.samples;
        cfg.seed = report.seed();
        Series psi{{"level", "t", "d", "psi", "tolerance"}, {}};
        const auto haar = haar_measure();
        for (const auto& fam : schedule) {
            for (int i = 0; i <= 20; ++i) {
                const double t = i / 20.0;
                const auto est = psi_estimate(sys, fam, haar, t, cfg);
                psi.rows.push_back({fam.level, t, o.d, est.value, est.tolerance});
            }
        }
        report.add_series("psi_vs_t", std::move(psi));
    }

    auto artifact = names.to_json();
    artifact["system"] = sys.to_json();
    artifact["t"] = o.t;
    artifact["point"] = where;
    artifact["schedule"] = families;
    return artifact;
}

nlohmann::json run_selector(const SelectorOptions& o, Report& report) {
    require_file(o.measures, "--measures");
    require(o.stages >= 1 && o.stages <= 20, "--stages must lie in [1, 20]");
    report.add_input("measures", o.measures);
    const auto cfg_json = read_json_file(o.measures);
    MetricSystem sys = MetricSystem::circle_rotation(*named_rotation("sqrt2-1"), "sqrt2-1");
    QuadratureConfig cfg;
    std::size_t levels = 3;
    double slack = 0.2;
    std::vector<Measure> measures;
    std::vector<CoverFamily> schedule;
    try {
        if (cfg_json.contains("system")) sys = MetricSystem::from_json(cfg_json.at("system"));
        levels = cfg_json.value("levels", levels);
        slack = cfg_json.value("slack", slack);
        if (cfg_json.contains("quadrature")) {
            const auto& q = cfg_json.at("quadrature");
            cfg.d = q.value("d", cfg.d);
            cfg.samples = q.value("samples", cfg.samples);
            cfg.budget = q.value("budget", cfg.budget);
            const std::string scheme = q.value("scheme", std::string("orbit"));
            require(scheme == "orbit" || scheme == "grid", "quadrature scheme must be orbit or grid");
            cfg.scheme = scheme == "grid" ? QuadratureConfig::Scheme::Grid : QuadratureConfig::Scheme::Orbit;
        }
        require(levels >= 1, "levels must be positive");
        schedule = build_schedule(sys, levels, slack);
        measures = measures_from_json(cfg_json.at("measures"), sys, schedule);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, o.measures + ": " + e.what());
    }
    require(!measures.empty(), "no measures listed");
    cfg.seed = report.seed();

    const auto table = selector_build(sys, schedule, measures, o.stages, cfg, o.extra_depth);
    const auto check = check_selector(table, sys, schedule, measures, cfg);
    nlohmann::json witness = check.witness.empty() ? nlohmann::json(nullptr) : nlohmann::json(check.witness);
    report.add_check("base", check.base, witness);
    report.add_check("nesting", check.nesting, witness);
    report.add_check("diameters 2^(1-n)", check.diameters, witness);
    report.add_check("psi smallness", check.smallness, witness);

    Series limits{{"measure", "address", "t"}, {}};
    bool avoids = true;
    nlohmann::json bad_witness = nullptr;
    for (std::size_t i = 0; i < measures.size(); ++i) {
        limits.rows.push_back({measures[i].name, table.limit[i].bits, table.limit_value[i]});
        for (const auto& fam : schedule) {
            for (double b : bad_parameters(sys, fam, measures[i])) {
                if (std::abs(b - table.limit_value[i]) <= 1e-9) {
                    avoids = false;
                    bad_witness = {{"measure", measures[i].name}, {"level", fam.level}, {"t", b}};
                }
            }
        }
    }
    report.add_check("limits avoid the bad parameters", avoids, bad_witness);
    report.add_series("selector_limits", std::move(limits));
    auto artifact = table.to_json(measures);
    report.add_certificate("selector", artifact);
    return artifact;
}

nlohmann::json run_simplex_retract(const RetractOptions& o, Report& report) {
    require_file(o.simplex, "--simplex");
    require(o.eps > 0.0, "--eps must be positive");
    report.add_input("simplex", o.simplex);
    const auto K = FiniteSimplex::load(o.simplex);
    const auto F = Face::of(K, parse_index_list(o.face));
    const auto theta = retract(K, F, o.eps);

    std::mt19937_64 rng(report.seed());
    std::exponential_distribution<double> expo;
    std::uniform_real_distribution<double> unit;
    auto point = [&] {
        Vector w(static_cast<Eigen::Index>(K.size()));
        for (auto& c : w) c = expo(rng);
        w /= w.sum();
        Vector p = Vector::Zero(static_cast<Eigen::Index>(K.dimension()));
        for (std::size_t i = 0; i < K.size(); ++i) p += w[static_cast<Eigen::Index>(i)] * K.vertex(i);
        return p;
    };
    double affine = 0.0, idem = 0.0, moved = 0.0;
    for (std::size_t i = 0; i < o.probes; ++i) {
        Vector x = point(), y = point();
        const double t = unit(rng);
        affine = std::max(affine, (theta.apply(t * x + (1 - t) * y) - (t * theta.apply(x) + (1 - t) * theta.apply(y))).norm());
        Vector tx = theta.apply(x);
        idem = std::max(idem, (theta.apply(tx) - tx).norm());
        moved = std::max(moved, (tx - x).norm());
    }
    nlohmann::json per_vertex = nlohmann::json::array();
    for (std::size_t v = 0; v < K.size(); ++v) per_vertex.push_back((theta.image(v) - K.vertex(v)).norm());
    report.add_check("affine at probe pairs", affine <= kAffineTolerance, affine);
    report.add_check("idempotent on the face", idem <= kAffineTolerance, idem);
    report.add_check("displacement <= eps", theta.sup_displacement() <= o.eps && moved <= o.eps + kStrictGuard,
                     {{"vertex", theta.sup_displacement()}, {"probes", moved}});

    auto artifact = theta.to_json();
    artifact["face"] = F.indices;
    artifact["eps"] = o.eps;
    artifact["vertex_displacement"] = per_vertex;
    artifact["sup_displacement"] = theta.sup_displacement();
    report.add_certificate("retraction", {{"sup_displacement", theta.sup_displacement()}, {"eps", o.eps}});
    return artifact;
}

nlohmann::json run_glue(const GlueOptions& o, Report& report) {
    require_file(o.simplex, "--simplex");
    require_file(o.groups, "--groups");
    report.add_input("simplex", o.simplex);
    report.add_input("groups", o.groups);
    const auto K = FiniteSimplex::load(o.simplex);
    // Overlapping groups are made disjoint first, keeping each difference whole.
    const auto groups = decompose<std::size_t>(load_groups(o.groups), whole_splitter<std::size_t>());
    auto state = GlueState::initial(K, groups, EpsSchedule::parse(o.schedule));
    state.subdivide = o.subdivide;
    const auto run = glue_run(std::move(state), o.stages);

    const auto& cert = run.certificate;
    report.add_check("stage displacements < 4 eps_k", cert.displacement_ok);
    report.add_check("exact agreement on earlier faces", cert.agreement_ok);
    report.add_check("injective on processed vertices", cert.injective);
    report.add_check("labels preserved", cert.labels_ok);

    Series series{{"stage", "eps", "alpha", "displacement", "bound"}, {}};
    for (const auto& s : cert.stages) series.rows.push_back({s.stage, s.eps, s.alpha, s.displacement, 4.0 * s.eps});
    report.add_series("glue_displacement", std::move(series));

    auto artifact = cert.to_json();
    artifact["schedule"] = run.state.schedule.to_string();
    artifact["groups"] = groups;
    artifact["face"] = run.state.face;
    artifact["map"] = run.state.map.to_json();
    artifact["image_labels"] = run.state.image_labels;
    report.add_certificate("glue", cert.to_json());
    return artifact;
}

nlohmann::json run_verify_all(const VerifyOptions& o, Report& report, std::ostream& lines) {
    require(o.suite == "desk", "unknown suite '" + o.suite + "' (only 'desk')");
    nlohmann::json criteria = nlohmann::json::array();
    run_desk_suite(report.seed(), [&](const CriterionResult& r) {
        lines << r.line() << std::endl;
        report.add_check("criterion " + std::to_string(r.id) + " " + r.title, r.passed(), r.to_json());
        criteria.push_back(r.to_json());
    });
    return {{"suite", o.suite}, {"criteria", criteria}};
}

int execute(const RunConfig& config, const std::function<nlohmann::json(Report&)>& body,
            std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t seed = 0;
    try {
        seed = resolve_seed(config.seed);
    } catch (const Error& e) {
        err << "ConfigError: " << e.what() << "\n";
        return kExitConfigError;
    }
    Report report(config.command, config.argv, seed);
    nlohmann::json artifact;
    try {
        artifact = body(report);
    } catch (const Error& e) {
        if (is_config_error(e.kind())) {
            err << "ConfigError: " << e.what() << "\n";
            return kExitConfigError;
        }
        report.set_error(std::string(to_string(e.kind())), e.what());
        err << "CertificateFailure: " << e.what() << "\n";
    } catch (const std::exception& e) {
        report.set_error("Internal", e.what());
        err << "CertificateFailure: " << e.what() << "\n";
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto report_json = report.to_json(wall);
    try {
        if (!config.out.empty()) {
            nlohmann::json doc = artifact.is_object() ? artifact : nlohmann::json::object();
            doc["report"] = report_json;
            atomic_write(config.out, pretty(doc));
        }
        if (!config.report.empty()) atomic_write(config.report, pretty(report_json));
        if (!config.plot_dir.empty()) {
            for (const auto& p : emit_plotdata(report_json, config.plot_dir)) {
                if (config.verbosity > 0) err << "wrote " << p.string() << "\n";
            }
        }
    } catch (const Error& e) {
        err << "ConfigError: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (config.out.empty() && config.verbosity > 0) out << pretty(artifact);
    for (const auto& c : report_json["checks"]) {
        if (!c["passed"].get<bool>() && config.verbosity >= 0) {
            err << "check failed: " << c["name"].get<std::string>();
            if (c.contains("witness")) err << " witness " << c["witness"].dump();
            err << "\n";
        }
    }
    out << config.command << ": " << (report.passed() ? "passed" : "FAILED") << "\n";
    return report.passed() ? kExitOk : kExitCertificateFailure;
}

}  // namespace zdm
