#include "angio/cases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "angio/errors.hpp"
#include "angio/model.hpp"

namespace angio {

namespace {

SmallVec box_center(const RunConfig& cfg) {
    SmallVec c(cfg.dim);
    if (cfg.center.empty())
        c.setConstant(0.5 * cfg.box);
    else
        for (int d = 0; d < cfg.dim; ++d) c[d] = cfg.center[d];
    return c;
}

// C1 shoulder of the resection indicator: 0 inside the ball, 1 beyond the
// shoulder width.
double irc_at(double dist, double radius, double width) {
    const double u = std::clamp((dist - radius) / width, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

Vector sigma_init(const Vector& phi_T, const ModelParams& p) {
    Vector s(phi_T.size());
    for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = p.Pi * psi_prime(phi_T[j], p.phi_bar);
    return s;
}

}  // namespace

SimplicialMesh build_box_mesh(const RunConfig& cfg, bool resection_irc) {
    const int dim = cfg.dim;
    const int m = static_cast<int>(std::lround(cfg.box / cfg.h));
    if (m < 2) throw ConfigError("box mesh: fewer than 2 cells per direction");
    const double h = cfg.box / m;

    const int nn_line = m + 1;
    const Eigen::Index nn = dim == 2 ? Eigen::Index(nn_line) * nn_line
                                     : Eigen::Index(nn_line) * nn_line * nn_line;
    Matrix nodes(nn, dim);
    if (dim == 2) {
        for (int j = 0; j < nn_line; ++j)
            for (int i = 0; i < nn_line; ++i) {
                const Eigen::Index id = Eigen::Index(j) * nn_line + i;
                nodes(id, 0) = i * h;
                nodes(id, 1) = j * h;
            }
    } else {
        for (int k = 0; k < nn_line; ++k)
            for (int j = 0; j < nn_line; ++j)
                for (int i = 0; i < nn_line; ++i) {
                    const Eigen::Index id = (Eigen::Index(k) * nn_line + j) * nn_line + i;
                    nodes(id, 0) = i * h;
                    nodes(id, 1) = j * h;
                    nodes(id, 2) = k * h;
                }
    }

    std::vector<int> cell_nodes;
    if (dim == 2) {
        cell_nodes.reserve(static_cast<size_t>(m) * m * 2 * 3);
        auto id = [&](int i, int j) { return j * nn_line + i; };
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
                cell_nodes.insert(cell_nodes.end(), {a, b, c});
                cell_nodes.insert(cell_nodes.end(), {a, c, d});
            }
    } else {
        cell_nodes.reserve(static_cast<size_t>(m) * m * m * 6 * 4);
        auto id = [&](int i, int j, int k) { return (k * nn_line + j) * nn_line + i; };
        // Kuhn subdivision: six tetrahedra per cube, one per monotone vertex
        // path, consistent across neighboring cubes.
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    for (const auto& perm : perms) {
                        int v[3] = {0, 0, 0};
                        int tet[4];
                        tet[0] = id(i, j, k);
                        for (int s = 0; s < 3; ++s) {
                            v[perm[s]] = 1;
                            tet[s + 1] = id(i + v[0], j + v[1], k + v[2]);
                        }
                        cell_nodes.insert(cell_nodes.end(), {tet[0], tet[1], tet[2], tet[3]});
                    }
    }
    const Eigen::Index nc = static_cast<Eigen::Index>(cell_nodes.size()) / (dim + 1);
    IntMatrix cells(nc, dim + 1);
    for (Eigen::Index k = 0; k < nc; ++k)
        for (int v = 0; v <= dim; ++v) cells(k, v) = cell_nodes[k * (dim + 1) + v];

    const SmallMat eye = SmallMat::Identity(dim, dim);
    std::vector<SmallMat> D(nc, eye), T(nc, eye);
    std::vector<int> tissue(nc, kGM);
    Vector irc = Vector::Ones(nc);
    const SmallVec center = box_center(cfg);
    SmallVec centroid(dim);
    for (Eigen::Index k = 0; k < nc; ++k) {
        centroid.setZero();
        for (int v = 0; v <= dim; ++v) centroid += nodes.row(cells(k, v)).transpose();
        centroid /= dim + 1;
        if (cfg.wm_x0 < cfg.wm_x1 && centroid[0] >= cfg.wm_x0 && centroid[0] < cfg.wm_x1)
            tissue[k] = kWM;
        if (resection_irc)
            irc[k] = irc_at((centroid - center).norm(), cfg.radius, cfg.irc_width);
    }
    return SimplicialMesh(dim, std::move(nodes), std::move(cells), std::move(D), std::move(T),
                          std::move(tissue), std::move(irc));
}

namespace {

void check_sphere(const RunConfig& cfg) {
    const SmallVec center = box_center(cfg);
    for (int d = 0; d < cfg.dim; ++d)
        if (center[d] - cfg.radius < 0.0 || center[d] + cfg.radius > cfg.box)
            throw ConfigError("case: the sphere does not fit inside the box");
    if (cfg.h > 0.5 * cfg.radius)
        throw ConfigError("case: need at least 2 cells across the sphere radius (reduce h)");
}

}  // namespace

CaseSetup generate_sphere_case(const RunConfig& cfg) {
    check_sphere(cfg);
    SimplicialMesh mesh = build_box_mesh(cfg, false);
    SimulationState s = healthy_state(mesh.n_nodes());
    const SmallVec center = box_center(cfg);
    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j) {
        const double dist = (mesh.nodes().row(j).transpose() - center).norm();
        if (dist <= cfg.radius) s.phi_v[j] = cfg.phi_v0;
    }
    s.sigma_v = sigma_init(s.phi_v + s.phi_d, cfg.params);
    s.sigma_d = s.sigma_v;
    return {std::move(mesh), std::move(s)};
}

CaseSetup generate_resection_case(const RunConfig& cfg) {
    check_sphere(cfg);
    SimplicialMesh mesh = build_box_mesh(cfg, true);
    SimulationState s = healthy_state(mesh.n_nodes());
    const SmallVec center = box_center(cfg);

    // Nodal distances; the shell is every node of a cell cut by the resection
    // boundary.
    Vector dist(mesh.n_nodes());
    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j)
        dist[j] = (mesh.nodes().row(j).transpose() - center).norm();
    std::vector<std::uint8_t> in_shell(mesh.n_nodes(), 0);
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        bool any_in = false, any_out = false;
        for (int v = 0; v <= mesh.dim(); ++v)
            (dist[mesh.cells()(k, v)] < cfg.radius ? any_in : any_out) = true;
        if (any_in && any_out)
            for (int v = 0; v <= mesh.dim(); ++v) in_shell[mesh.cells()(k, v)] = 1;
    }
    std::vector<int> shell;
    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j)
        if (in_shell[j]) shell.push_back(static_cast<int>(j));
    if (shell.empty()) throw ConfigError("case: resection boundary cuts no cells");

    std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.seed));
    for (size_t i = shell.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<size_t> pick(0, i);
        std::swap(shell[i], shell[pick(rng)]);
    }
    const size_t n_seed = static_cast<size_t>(cfg.shell_fraction * shell.size());
    for (size_t i = 0; i < n_seed; ++i) s.phi_v[shell[i]] = cfg.params.phi_bar;

    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j)
        s.n[j] = irc_at(dist[j], cfg.radius, cfg.irc_width);
    s.sigma_v = sigma_init(s.phi_v + s.phi_d, cfg.params);
    s.sigma_d = s.sigma_v;
    return {std::move(mesh), std::move(s)};
}

CaseSetup load_custom_case(const RunConfig& cfg) {
    SimplicialMesh mesh = load_mesh(cfg.mesh_path);
    if (mesh.dim() != cfg.dim)
        throw ConfigError("case: mesh dimension does not match the configured dim");
    SimulationState s = healthy_state(mesh.n_nodes());
    return {std::move(mesh), std::move(s)};
}

CaseSetup generate_case(const RunConfig& cfg) {
    switch (cfg.kind) {
        case CaseKind::Sphere: return generate_sphere_case(cfg);
        case CaseKind::Resection: return generate_resection_case(cfg);
        case CaseKind::Custom: return load_custom_case(cfg);
    }
    throw ConfigError("case: unknown case kind");
}

}  // namespace angio
