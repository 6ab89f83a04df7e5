#include "zdm/simplex_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace zdm {

namespace {

Vector padded(const Vector& v, std::size_t ambient) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(ambient));
    out.head(v.size()) = v;
    return out;
}

bool identical(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

nlohmann::json vector_json(const Vector& v) {
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

// Weights summing to one minimising |sum w_i y_i| over the affine hull.
Vector affine_minimizer(const std::vector<Vector>& y, const std::vector<std::size_t>& active) {
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = y[active[a]].dot(y[active[b]]);
        kkt(a, m) = 1.0;
        kkt(m, a) = 1.0;
    }
    Vector rhs = Vector::Zero(m + 1);
    rhs[m] = 1.0;
    Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    return sol.head(m);
}

}  // namespace

bool affinely_independent(const std::vector<Vector>& points, double tol) {
    if (points.size() <= 1) return true;
    const auto dim = points.front().size();
    if (static_cast<Eigen::Index>(points.size()) - 1 > dim) return false;
    Eigen::MatrixXd diffs(dim, static_cast<Eigen::Index>(points.size()) - 1);
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].size() != dim) return false;
        diffs.col(static_cast<Eigen::Index>(i) - 1) = points[i] - points.front();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs);
    return svd.singularValues().minCoeff() > tol;
}

FiniteSimplex::FiniteSimplex(std::vector<Vector> vertices, std::vector<std::string> labels)
    : vertices_(std::move(vertices)), labels_(std::move(labels)) {
    if (vertices_.empty()) throw Error(ErrorKind::InvalidArgument, "simplex needs a vertex");
    dim_ = static_cast<std::size_t>(vertices_.front().size());
    for (const auto& v : vertices_) {
        if (static_cast<std::size_t>(v.size()) != dim_) {
            throw Error(ErrorKind::InvalidArgument, "vertices of different dimensions");
        }
    }
    if (labels_.empty()) {
        for (std::size_t i = 0; i < vertices_.size(); ++i) labels_.push_back("e" + std::to_string(i));
    }
    if (labels_.size() != vertices_.size()) {
        throw Error(ErrorKind::InvalidArgument, "one label per vertex expected");
    }
    if (!affinely_independent(vertices_)) {
        throw Error(ErrorKind::InvalidArgument, "vertices are affinely dependent");
    }
}

FiniteSimplex FiniteSimplex::from_json(const nlohmann::json& j) {
    try {
        std::vector<Vector> vertices;
        for (const auto& row : j.at("vertices")) {
            auto coords = row.get<std::vector<double>>();
            vertices.push_back(Eigen::Map<Vector>(coords.data(), static_cast<Eigen::Index>(coords.size())));
        }
        std::vector<std::string> labels;
        if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
        return FiniteSimplex(std::move(vertices), std::move(labels));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

FiniteSimplex FiniteSimplex::load(const std::string& path) { return from_json(read_json(path)); }

nlohmann::json FiniteSimplex::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& v : vertices_) rows.push_back(vector_json(v));
    return {{"vertices", rows}, {"labels", labels_}};
}

double FiniteSimplex::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        for (std::size_t j = i + 1; j < vertices_.size(); ++j)
            d = std::max(d, (vertices_[i] - vertices_[j]).norm());
    return d;
}

Face Face::of(const FiniteSimplex& parent, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    if (indices.empty()) throw Error(ErrorKind::InvalidArgument, "face needs a vertex");
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
        throw Error(ErrorKind::InvalidArgument, "repeated face vertex");
    }
    if (indices.back() >= parent.size()) {
        throw Error(ErrorKind::InvalidArgument, "face vertex " + std::to_string(indices.back()) +
                                                    " out of range");
    }
    return Face{parent, std::move(indices)};
}

Face Face::whole(const FiniteSimplex& parent) {
    std::vector<std::size_t> all(parent.size());
    std::iota(all.begin(), all.end(), 0);
    return Face{parent, std::move(all)};
}

Face Face::sub(const std::vector<std::size_t>& local) const {
    std::vector<std::size_t> mapped;
    for (auto i : local) {
        if (i >= indices.size()) throw Error(ErrorKind::InvalidArgument, "sub-face index out of range");
        mapped.push_back(indices[i]);
    }
    return of(parent, std::move(mapped));
}

bool Face::contains(std::size_t vertex) const {
    return std::binary_search(indices.begin(), indices.end(), vertex);
}

std::vector<Vector> Face::points() const {
    std::vector<Vector> out;
    for (auto i : indices) out.push_back(parent.vertex(i));
    return out;
}

FiniteSimplex Face::as_simplex() const {
    std::vector<std::string> labels;
    for (auto i : indices) labels.push_back(parent.label(i));
    return FiniteSimplex(points(), std::move(labels));
}

bool hulls_disjoint(const Face& a, const Face& b) {
    std::vector<Vector> both;
    for (auto i : a.indices) {
        if (b.contains(i)) return false;
        both.push_back(a.parent.vertex(i));
    }
    for (const auto& p : b.points()) both.push_back(p);
    return affinely_independent(both);
}

Vector barycentric(const FiniteSimplex& K, const Vector& p) {
    const auto D = static_cast<Eigen::Index>(K.dimension());
    const auto n = static_cast<Eigen::Index>(K.size());
    if (p.size() != D) throw Error(ErrorKind::ShapeMismatch, "point dimension differs from simplex");
    Eigen::MatrixXd A(D + 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        A.col(j).head(D) = K.vertex(static_cast<std::size_t>(j));
        A(D, j) = 1.0;
    }
    Vector b(D + 1);
    b.head(D) = p;
    b[D] = 1.0;
    Vector lambda = A.colPivHouseholderQr().solve(b);
    const double residual = (A * lambda - b).norm();
    if (residual > kAffineTolerance) {
        std::ostringstream msg;
        msg << "point off the affine hull (residual " << residual << ")";
        throw Error(ErrorKind::OutsideSimplex, msg.str());
    }
    Eigen::Index worst = 0;
    if (lambda.minCoeff(&worst) < -kAffineTolerance) {
        std::ostringstream msg;
        msg << "coordinate " << worst << " = " << lambda[worst];
        throw Error(ErrorKind::OutsideSimplex, msg.str());
    }
    lambda = lambda.cwiseMax(0.0);
    return lambda / lambda.sum();
}

Projection nearest_point(const std::vector<Vector>& points, const Vector& p) {
    if (points.empty()) throw Error(ErrorKind::InvalidArgument, "projection onto an empty hull");
    std::vector<Vector> y;
    double scale = 1.0;
    for (const auto& q : points) {
        if (q.size() != p.size()) throw Error(ErrorKind::ShapeMismatch, "point dimensions differ");
        y.push_back(q - p);
        scale = std::max(scale, y.back().squaredNorm());
    }
    const double tol = 1e-13 * scale;

    std::size_t start = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i].squaredNorm() < y[start].squaredNorm()) start = i;
    std::vector<std::size_t> active{start};
    std::vector<double> weight{1.0};
    Vector x = y[start];

    for (int major = 0; major < 1000; ++major) {
        std::size_t j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double v = x.dot(y[i]);
            if (v < best) best = v, j = i;
        }
        if (x.squaredNorm() - best <= tol) break;
        if (std::find(active.begin(), active.end(), j) != active.end()) break;
        active.push_back(j);
        weight.push_back(0.0);

        for (int minor = 0; minor < 1000; ++minor) {
            Vector mu = affine_minimizer(y, active);
            if ((mu.array() > 1e-15).all()) {
                weight.assign(mu.data(), mu.data() + mu.size());
                break;
            }
            double theta = 1.0;
            std::size_t leaving = 0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (mu[static_cast<Eigen::Index>(a)] <= 1e-15) {
                    const double ratio = weight[a] / (weight[a] - mu[static_cast<Eigen::Index>(a)]);
                    if (ratio < theta) theta = ratio, leaving = a;
                }
            }
            for (std::size_t a = 0; a < active.size(); ++a) {
                weight[a] = (1.0 - theta) * weight[a] + theta * mu[static_cast<Eigen::Index>(a)];
            }
            weight[leaving] = 0.0;
            std::vector<std::size_t> kept;
            std::vector<double> kept_weight;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (weight[a] > 1e-15) kept.push_back(active[a]), kept_weight.push_back(weight[a]);
            }
            active = std::move(kept);
            weight = std::move(kept_weight);
        }
        x = Vector::Zero(p.size());
        for (std::size_t a = 0; a < active.size(); ++a) x += weight[a] * y[active[a]];
    }

    Projection out;
    out.weights = Vector::Zero(static_cast<Eigen::Index>(points.size()));
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    out.point = Vector::Zero(p.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
        out.weights[static_cast<Eigen::Index>(active[a])] = weight[a] / total;
        out.point += (weight[a] / total) * points[active[a]];
    }
    out.distance = (out.point - p).norm();
    return out;
}

AffineMapOnSimplex::AffineMapOnSimplex(FiniteSimplex domain, std::vector<Vector> images)
    : domain_(std::move(domain)), images_(std::move(images)) {
    if (images_.size() != domain_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "one image per vertex expected");
    }
    for (const auto& v : images_) {
        if (v.size() != images_.front().size()) {
            throw Error(ErrorKind::ShapeMismatch, "images of different dimensions");
        }
    }
}

AffineMapOnSimplex AffineMapOnSimplex::identity(const FiniteSimplex& domain, std::size_t ambient) {
    ambient = std::max(ambient, domain.dimension());
    std::vector<Vector> images;
    for (const auto& v : domain.vertices()) images.push_back(padded(v, ambient));
    return AffineMapOnSimplex(domain, std::move(images));
}

std::size_t AffineMapOnSimplex::ambient() const {
    return images_.empty() ? 0 : static_cast<std::size_t>(images_.front().size());
}

Vector AffineMapOnSimplex::apply_weights(const Vector& weights) const {
    if (static_cast<std::size_t>(weights.size()) != images_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "weight count differs from vertex count");
    }
    Vector out = Vector::Zero(static_cast<Eigen::Index>(ambient()));
    for (std::size_t i = 0; i < images_.size(); ++i) out += weights[static_cast<Eigen::Index>(i)] * images_[i];
    return out;
}

Vector AffineMapOnSimplex::apply(const Vector& p) const { return apply_weights(barycentric(domain_, p)); }

bool AffineMapOnSimplex::injective() const { return affinely_independent(images_); }

bool AffineMapOnSimplex::injective_on(const std::vector<std::size_t>& vertices) const {
    std::vector<Vector> pts;
    for (auto v : vertices) pts.push_back(images_.at(v));
    return affinely_independent(pts);
}

double AffineMapOnSimplex::sup_displacement() const {
    if (ambient() < domain_.dimension()) {
        throw Error(ErrorKind::ShapeMismatch, "images live in fewer dimensions than the domain");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
        d = std::max(d, (images_[i] - padded(domain_.vertex(i), ambient())).norm());
    }
    return d;
}

double AffineMapOnSimplex::sup_distance(const AffineMapOnSimplex& other) const {
    if (other.images_.size() != images_.size() || other.ambient() != ambient()) {
        throw Error(ErrorKind::ShapeMismatch, "maps on different simplices");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < images_.size(); ++i) d = std::max(d, (images_[i] - other.images_[i]).norm());
    return d;
}

nlohmann::json AffineMapOnSimplex::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& v : images_) rows.push_back(vector_json(v));
    return {{"domain", domain_.to_json()}, {"images", rows}};
}

AffineMapOnSimplex retract(const FiniteSimplex& K, const Face& F, double eps) {
    if (F.parent.size() != K.size() || F.parent.dimension() != K.dimension()) {
        throw Error(ErrorKind::ShapeMismatch, "face of a different simplex");
    }
    for (std::size_t i = 0; i < K.size(); ++i) {
        if (!identical(F.parent.vertex(i), K.vertex(i))) {
            throw Error(ErrorKind::ShapeMismatch, "face of a different simplex");
        }
    }
    const auto face_points = F.points();
    std::vector<Vector> images;
    for (std::size_t v = 0; v < K.size(); ++v) {
        if (F.contains(v)) {
            images.push_back(K.vertex(v));
            continue;
        }
        auto proj = nearest_point(face_points, K.vertex(v));
        if (proj.distance > eps) {
            std::ostringstream msg;
            msg << "vertex " << v << " gap " << proj.distance << " > " << eps;
            throw Error(ErrorKind::NotDense, msg.str());
        }
        images.push_back(proj.point);
    }
    return AffineMapOnSimplex(K, std::move(images));
}

EpsSchedule EpsSchedule::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, "schedule '" + text + "' is not kind:values");
    }
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    EpsSchedule s;
    try {
        if (kind == "geometric") {
            std::size_t used = 0;
            s.kind = Kind::Geometric;
            s.ratio = std::stod(rest, &used);
            if (used != rest.size() || !(s.ratio > 0.0 && s.ratio < 1.0)) {
                throw Error(ErrorKind::InvalidArgument, "geometric ratio must lie in (0, 1)");
            }
            return s;
        }
        if (kind == "list") {
            s.kind = Kind::Explicit;
            std::stringstream in(rest);
            std::string item;
            while (std::getline(in, item, ',')) {
                const double v = std::stod(item);
                if (!(v > 0.0) || !std::isfinite(v)) {
                    throw Error(ErrorKind::InvalidArgument, "schedule values must be positive");
                }
                s.values.push_back(v);
            }
            if (s.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty schedule");
            return s;
        }
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::InvalidArgument, "bad number in schedule '" + text + "'");
    }
    throw Error(ErrorKind::InvalidArgument, "unknown schedule kind '" + kind + "'");
}

double EpsSchedule::eps(std::size_t k) const {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "schedule starts at stage 1");
    if (kind == Kind::Geometric) return std::pow(ratio, static_cast<double>(k));
    if (k > values.size()) {
        throw Error(ErrorKind::InvalidArgument, "stage " + std::to_string(k) + " beyond the schedule");
    }
    return values[k - 1];
}

double EpsSchedule::tail_after(std::size_t k) const {
    if (kind == Kind::Geometric) return eps(k + 1) / (1.0 - ratio);
    double sum = 0.0;
    for (std::size_t j = k; j < values.size(); ++j) sum += values[j];
    return sum;
}

std::size_t EpsSchedule::horizon() const {
    return kind == Kind::Geometric ? std::numeric_limits<std::size_t>::max() : values.size();
}

std::string EpsSchedule::to_string() const {
    std::ostringstream out;
    out.precision(17);
    if (kind == Kind::Geometric) {
        out << "geometric:" << ratio;
    } else {
        out << "list:";
        for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
    }
    return out.str();
}

GlueState GlueState::initial(FiniteSimplex K, std::vector<std::vector<std::size_t>> groups,
                             EpsSchedule schedule) {
    std::vector<int> owner(K.size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw Error(ErrorKind::InvalidArgument, "empty vertex group");
        for (auto v : groups[g]) {
            if (v >= K.size()) throw Error(ErrorKind::InvalidArgument, "group vertex out of range");
            if (owner[v] != -1) {
                throw Error(ErrorKind::InvalidArgument,
                            "vertex " + std::to_string(v) + " lies in two groups");
            }
            owner[v] = static_cast<int>(g);
        }
    }
    for (std::size_t v = 0; v < K.size(); ++v) {
        if (owner[v] == -1) throw Error(ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " in no group");
    }
    GlueState s;
    for (const auto& g : groups) {
        double d = 0.0;
        for (auto a : g)
            for (auto b : g) d = std::max(d, (K.vertex(a) - K.vertex(b)).norm());
        s.group_diameters.push_back(d);
    }
    s.map = AffineMapOnSimplex::identity(K, K.dimension() + K.size());
    s.image_labels.assign(K.size(), "");
    s.K = std::move(K);
    s.groups = std::move(groups);
    s.schedule = std::move(schedule);
    return s;
}

GlueState glue_step(const GlueState& state) {
    GlueState next = state;
    next.stage = state.stage + 1;
    StageRecord rec;
    rec.stage = next.stage;
    rec.eps = state.schedule.eps(next.stage);
    const double eps = rec.eps;
    const std::size_t V = state.K.size();
    const std::size_t D = state.K.dimension();
    const std::size_t ambient = state.map.ambient();
    const auto& phi = state.map.images();

    if (state.complete()) {
        rec.groups_used = state.groups_used;
        next.history.push_back(rec);
        return next;
    }

    std::vector<Vector> embedded;
    for (const auto& v : state.K.vertices()) embedded.push_back(padded(v, ambient));
    double diam = 0.0;
    std::vector<const Vector*> all;
    for (std::size_t v = 0; v < V; ++v) all.push_back(&embedded[v]), all.push_back(&phi[v]);
    for (std::size_t a = 0; a < all.size(); ++a)
        for (std::size_t b = a + 1; b < all.size(); ++b) diam = std::max(diam, (*all[a] - *all[b]).norm());
    rec.alpha = eps / (diam + 1.0);

    std::vector<Vector> blended(V);
    for (std::size_t v = 0; v < V; ++v) {
        blended[v] = identical(phi[v], embedded[v]) ? phi[v]
                                                    : Vector((1.0 - rec.alpha) * phi[v] + rec.alpha * embedded[v]);
        rec.blend_shift = std::max(rec.blend_shift, (blended[v] - phi[v]).norm());
    }

    // Grow the face group by group until its blended image is eps-dense.
    std::vector<char> in_face(V, 0);
    for (auto u : state.face) in_face[u] = 1;
    std::vector<std::size_t> face = state.face;
    std::size_t used = state.groups_used;
    std::vector<Projection> projections(V);
    for (;;) {
        for (auto v : state.groups[used]) face.push_back(v), in_face[v] = 1;
        ++used;
        std::vector<Vector> face_points;
        for (auto u : face) face_points.push_back(blended[u]);
        bool dense = true;
        for (std::size_t v = 0; v < V; ++v) {
            if (in_face[v]) continue;
            projections[v] = nearest_point(face_points, blended[v]);
            if (!(projections[v].distance < eps)) dense = false;
        }
        if (dense || used == state.groups.size()) break;
    }

    for (std::size_t g = state.groups_used; g < used; ++g) {
        const auto& group = state.groups[g];
        double d = 0.0;
        for (auto a : group)
            for (auto b : group) d = std::max(d, (blended[a] - blended[b]).norm());
        if (d < eps) {
            rec.pieces.push_back(group);
            continue;
        }
        if (!state.subdivide) {
            std::ostringstream msg;
            msg << "group " << g << " image diameter " << d << " >= " << eps;
            throw Error(ErrorKind::GroupTooCoarse, msg.str());
        }
        std::vector<std::vector<std::size_t>> pieces;
        for (auto v : group) {
            bool placed = false;
            for (auto& piece : pieces) {
                bool fits = true;
                for (auto u : piece) fits = fits && (blended[u] - blended[v]).norm() < eps;
                if (fits) {
                    piece.push_back(v);
                    placed = true;
                    break;
                }
            }
            if (!placed) pieces.push_back({v});
        }
        for (auto& piece : pieces) rec.pieces.push_back(std::move(piece));
    }

    // Placement: each new vertex gets its own slab coordinate D + v.
    std::vector<Vector> placed(V);
    for (auto u : state.face) placed[u] = phi[u];
    for (std::size_t i = state.face.size(); i < face.size(); ++i) {
        const std::size_t v = face[i];
        const auto slab = static_cast<Eigen::Index>(D + v);
        if (slab >= static_cast<Eigen::Index>(ambient)) {
            throw Error(ErrorKind::PlacementConflict, "no slab coordinate left for vertex " + std::to_string(v));
        }
        for (std::size_t u = 0; u < V; ++u) {
            if (phi[u][slab] != 0.0) {
                throw Error(ErrorKind::PlacementConflict,
                            "slab coordinate of vertex " + std::to_string(v) + " already occupied");
            }
        }
        placed[v] = blended[v];
        placed[v][slab] += eps / 2.0;
        rec.placement_shift = std::max(rec.placement_shift, (placed[v] - blended[v]).norm());
        next.image_labels[v] = state.K.label(v);
    }

    std::vector<Vector> images(V);
    for (std::size_t v = 0; v < V; ++v) {
        if (in_face[v]) {
            images[v] = placed[v];
            continue;
        }
        const auto& proj = projections[v];
        if (proj.distance > eps) {
            std::ostringstream msg;
            msg << "vertex " << v << " gap " << proj.distance << " > " << eps;
            throw Error(ErrorKind::NotDense, msg.str());
        }
        rec.retract_shift = std::max(rec.retract_shift, proj.distance);
        images[v] = Vector::Zero(static_cast<Eigen::Index>(ambient));
        for (std::size_t a = 0; a < face.size(); ++a) {
            images[v] += proj.weights[static_cast<Eigen::Index>(a)] * placed[face[a]];
        }
    }

    for (std::size_t v = 0; v < V; ++v) rec.displacement = std::max(rec.displacement, (images[v] - phi[v]).norm());
    for (auto u : state.face) rec.agrees_on_previous_face = rec.agrees_on_previous_face && identical(images[u], phi[u]);

    next.map = AffineMapOnSimplex(state.K, std::move(images));
    next.face = std::move(face);
    next.groups_used = used;
    rec.groups_used = used;
    next.history.push_back(std::move(rec));
    return next;
}

nlohmann::json GlueCertificate::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& r : stages) {
        rows.push_back({{"stage", r.stage},
                        {"eps", r.eps},
                        {"alpha", r.alpha},
                        {"groups_used", r.groups_used},
                        {"pieces", r.pieces},
                        {"blend_shift", r.blend_shift},
                        {"retract_shift", r.retract_shift},
                        {"placement_shift", r.placement_shift},
                        {"displacement", r.displacement},
                        {"bound", 4.0 * r.eps},
                        {"agrees_on_previous_face", r.agrees_on_previous_face}});
    }
    return {{"stages", rows},
            {"tail_bound", tail_bound},
            {"checks",
             {{"displacement", displacement_ok},
              {"agreement", agreement_ok},
              {"injective", injective},
              {"labels", labels_ok}}},
            {"passed", passed()}};
}

GlueRun glue_run(GlueState state, std::size_t stages) {
    if (state.stage + stages > state.schedule.horizon()) {
        throw Error(ErrorKind::InvalidArgument, "more stages than the schedule provides");
    }
    const std::size_t first = state.history.size();
    for (std::size_t s = 0; s < stages; ++s) state = glue_step(state);

    GlueCertificate cert;
    cert.stages.assign(state.history.begin() + static_cast<long>(first), state.history.end());
    for (const auto& r : cert.stages) {
        cert.displacement_ok = cert.displacement_ok && r.displacement + kStrictGuard < 4.0 * r.eps;
        cert.agreement_ok = cert.agreement_ok && r.agrees_on_previous_face;
    }
    cert.injective = state.map.injective_on(state.face);
    for (auto u : state.face) cert.labels_ok = cert.labels_ok && state.image_labels[u] == state.K.label(u);
    cert.tail_bound = 4.0 * state.schedule.tail_after(state.stage);
    return GlueRun{std::move(state), std::move(cert)};
}

std::vector<std::vector<std::size_t>> load_groups(const std::string& path) {
    const auto j = read_json(path);
    try {
        const auto& list = j.is_object() ? j.at("groups") : j;
        return list.get<std::vector<std::vector<std::size_t>>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

}  // namespace zdm
