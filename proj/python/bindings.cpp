// Python module _zdm. Structured results cross the boundary as JSON text; the
// zdm package decodes them. Geometry takes and returns numpy arrays.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zdm/commands.hpp"
#include "zdm/error.hpp"
#include "zdm/markers.hpp"
#include "zdm/metric_encoder.hpp"
#include "zdm/shift_spaces.hpp"
#include "zdm/simplex_geometry.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw zdm::Error(zdm::ErrorKind::ParseError, e.what());
    }
}

zdm::FiniteSimplex simplex_of(const std::vector<zdm::Vector>& vertices) { return zdm::FiniteSimplex(vertices); }

template <class Options>
Options options_of(const json& j);

template <>
zdm::MarkerOptions options_of(const json& j) {
    zdm::MarkerOptions o;
    o.system = j.at("system").get<std::string>();
    o.n = j.value("n", o.n);
    o.max_word_len = j.value("max_word_len", o.max_word_len);
    if (j.contains("cover_cap") && !j["cover_cap"].is_null()) o.cover_cap = j["cover_cap"].get<std::size_t>();
    return o;
}

template <>
zdm::EmbedOptions options_of(const json& j) {
    zdm::EmbedOptions o;
    o.host = j.at("host").get<std::string>();
    o.target = j.at("target").get<std::string>();
    o.eps = j.value("eps", o.eps);
    o.shapes = j.value("shapes", o.shapes);
    o.window = j.value("window", o.window);
    o.samples = j.value("samples", o.samples);
    o.max_word_len = j.value("max_word_len", o.max_word_len);
    o.strict = j.value("strict", o.strict);
    o.freq_csv = j.value("freq_csv", o.freq_csv);
    return o;
}

template <>
zdm::EncodeOptions options_of(const json& j) {
    zdm::EncodeOptions o;
    o.system = j.at("system").get<std::string>();
    o.levels = j.value("levels", o.levels);
    o.window = j.value("window", o.window);
    o.t = j.value("t", o.t);
    o.x = j.value("x", o.x);
    o.position = j.value("position", o.position);
    o.slack = j.value("slack", o.slack);
    o.d = j.value("d", o.d);
    o.samples = j.value("samples", o.samples);
    return o;
}

template <>
zdm::SelectorOptions options_of(const json& j) {
    zdm::SelectorOptions o;
    o.measures = j.at("measures").get<std::string>();
    o.stages = j.value("stages", o.stages);
    o.extra_depth = j.value("extra_depth", o.extra_depth);
    return o;
}

template <>
zdm::RetractOptions options_of(const json& j) {
    zdm::RetractOptions o;
    o.simplex = j.at("simplex").get<std::string>();
    o.face = j.at("face").get<std::string>();
    o.eps = j.value("eps", o.eps);
    o.probes = j.value("probes", o.probes);
    return o;
}

template <>
zdm::GlueOptions options_of(const json& j) {
    zdm::GlueOptions o;
    o.simplex = j.at("simplex").get<std::string>();
    o.groups = j.at("groups").get<std::string>();
    o.schedule = j.value("schedule", o.schedule);
    o.stages = j.value("stages", o.stages);
    o.subdivide = j.value("subdivide", o.subdivide);
    return o;
}

// Runs a command body and returns the artifact with the report under "report".
std::string run_command(const std::string& command, const std::string& options, std::uint64_t seed) {
    const json j = parse(options);
    zdm::Report report(command, {"python", command}, zdm::resolve_seed(seed));
    json artifact;
    try {
        if (command == "marker") {
            artifact = zdm::run_marker(options_of<zdm::MarkerOptions>(j), report);
        } else if (command == "embed-dense") {
            artifact = zdm::run_embed_dense(options_of<zdm::EmbedOptions>(j), report);
        } else if (command == "encode") {
            artifact = zdm::run_encode(options_of<zdm::EncodeOptions>(j), report);
        } else if (command == "selector") {
            artifact = zdm::run_selector(options_of<zdm::SelectorOptions>(j), report);
        } else if (command == "simplex-retract") {
            artifact = zdm::run_simplex_retract(options_of<zdm::RetractOptions>(j), report);
        } else if (command == "glue") {
            artifact = zdm::run_glue(options_of<zdm::GlueOptions>(j), report);
        } else {
            throw zdm::Error(zdm::ErrorKind::InvalidArgument, "unknown command '" + command + "'");
        }
    } catch (const json::exception& e) {
        throw zdm::Error(zdm::ErrorKind::ParseError, e.what());
    }
    artifact["report"] = report.to_json(0.0);
    return artifact.dump();
}

}  // namespace

PYBIND11_MODULE(_zdm, m) {
    m.doc() = "zdm core: subshifts, markers, dense embeddings, metric encoders and simplex geometry";
    m.attr("__version__") = zdm::kToolVersion;

    static py::exception<zdm::Error> zdm_error(m, "ZdmError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const zdm::Error& e) {
            py::object err = zdm_error;
            py::object instance = err(e.what());
            instance.attr("kind") = std::string(zdm::to_string(e.kind()));
            PyErr_SetObject(err.ptr(), instance.ptr());
        }
    });

    m.def("run_command", &run_command, py::arg("command"), py::arg("options"), py::arg("seed") = 1,
          "Run a CLI command body in process; returns artifact JSON with the report under 'report'.");

    m.def(
        "language",
        [](const std::string& system, std::size_t length) {
            const auto s = zdm::Subshift::from_json(parse(system));
            std::vector<std::string> words;
            for (const auto& w : s.language(length)) words.push_back(s.alphabet().render(w));
            return words;
        },
        py::arg("system"), py::arg("length"), "Sorted admissible words of the given length.");

    m.def(
        "find_marker",
        [](const std::string& system, std::size_t n, std::size_t max_word_len, std::optional<std::size_t> cover_cap) {
            const auto s = zdm::Subshift::from_json(parse(system));
            return zdm::find_marker(s, n, max_word_len, cover_cap).to_json().dump();
        },
        py::arg("system"), py::arg("n"), py::arg("max_word_len") = 16, py::arg("cover_cap") = py::none());

    m.def(
        "array_name",
        [](const std::string& system, double t, double x, std::size_t levels, std::int64_t window, double slack) {
            const auto sys = zdm::MetricSystem::from_json(parse(system));
            if (sys.kind() != zdm::MetricSystem::Kind::CircleRotation) {
                throw zdm::Error(zdm::ErrorKind::InvalidArgument, "array_name takes a circle rotation");
            }
            const auto schedule = zdm::build_schedule(sys, levels, slack);
            return zdm::array_name(sys, schedule, t, zdm::circle_point(x), levels, window).to_json().dump();
        },
        py::arg("system"), py::arg("t"), py::arg("x"), py::arg("levels") = 3, py::arg("window") = 8,
        py::arg("slack") = 0.2);

    m.def(
        "barycentric",
        [](const std::vector<zdm::Vector>& vertices, const zdm::Vector& point) {
            return zdm::barycentric(simplex_of(vertices), point);
        },
        py::arg("vertices"), py::arg("point"));

    m.def(
        "nearest_point",
        [](const std::vector<zdm::Vector>& points, const zdm::Vector& p) {
            const auto proj = zdm::nearest_point(points, p);
            return py::make_tuple(proj.point, proj.weights, proj.distance);
        },
        py::arg("points"), py::arg("p"), "Closest point of the convex hull: (point, weights, distance).");

    m.def(
        "retract",
        [](const std::vector<zdm::Vector>& vertices, const std::vector<std::size_t>& face, double eps) {
            const auto K = simplex_of(vertices);
            const auto theta = zdm::retract(K, zdm::Face::of(K, face), eps);
            std::vector<zdm::Vector> images;
            for (std::size_t v = 0; v < K.size(); ++v) images.push_back(theta.image(v));
            return images;
        },
        py::arg("vertices"), py::arg("face"), py::arg("eps"), "Vertex images of the eps-dense face retraction.");
}
