#include "angio/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "angio/errors.hpp"

namespace angio {

namespace {

double factorial(int k) { return k == 3 ? 6.0 : k == 2 ? 2.0 : 1.0; }

void check_tensor(const SmallMat& M, Eigen::Index cell, const char* name) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ConfigError("mesh: tensor " + std::string(name) + " of cell " +
                          std::to_string(cell) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
        throw ConfigError("mesh: tensor " + std::string(name) + " of cell " +
                          std::to_string(cell) + " is indefinite");
}

// Whitespace token stream with '#'-to-end-of-line comments.
struct TokenStream {
    explicit TokenStream(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) tokens.push_back(tok);
        }
    }

    const std::string& next(const char* what) {
        if (pos >= tokens.size())
            throw ConfigError(std::string("mesh: unexpected end of file, expected ") + what);
        return tokens[pos++];
    }

    long integer(const char* what) {
        const std::string& t = next(what);
        size_t used = 0;
        long v = 0;
        try {
            v = std::stol(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size())
            throw ConfigError(std::string("mesh: expected integer for ") + what + ", got '" + t + "'");
        return v;
    }

    double real(const char* what) {
        const std::string& t = next(what);
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size())
            throw ConfigError(std::string("mesh: expected number for ") + what + ", got '" + t + "'");
        return v;
    }

    bool done() const { return pos >= tokens.size(); }

    std::vector<std::string> tokens;
    size_t pos = 0;
};

}  // namespace

SimplicialMesh::SimplicialMesh(int dim, Matrix nodes, IntMatrix cells,
                               std::vector<SmallMat> tensor_D, std::vector<SmallMat> tensor_T,
                               std::vector<int> tissue, Vector irc)
    : dim_(dim),
      nodes_(std::move(nodes)),
      cells_(std::move(cells)),
      D_(std::move(tensor_D)),
      T_(std::move(tensor_T)),
      tissue_(std::move(tissue)),
      irc_(std::move(irc)) {
    if (dim_ != 2 && dim_ != 3) throw ConfigError("mesh: dim must be 2 or 3");
    if (nodes_.cols() != dim_) throw ConfigError("mesh: node table width does not match dim");
    if (cells_.cols() != dim_ + 1) throw ConfigError("mesh: cell table width does not match dim");
    const Eigen::Index nn = n_nodes(), nc = n_cells();
    if (nn == 0 || nc == 0) throw ConfigError("mesh: empty mesh");
    if (static_cast<Eigen::Index>(D_.size()) != nc || static_cast<Eigen::Index>(T_.size()) != nc ||
        static_cast<Eigen::Index>(tissue_.size()) != nc || irc_.size() != nc)
        throw ConfigError("mesh: per-cell data size mismatch");

    geometry_.resize(nc);
    node_cells_.assign(nn, {});
    h_min_ = std::numeric_limits<double>::infinity();

    SmallMat edge(dim_, dim_);
    for (Eigen::Index k = 0; k < nc; ++k) {
        for (int v = 0; v <= dim_; ++v) {
            const int j = cells_(k, v);
            if (j < 0 || j >= nn)
                throw ConfigError("mesh: cell " + std::to_string(k) + " references node " +
                                  std::to_string(j));
        }
        double h_cell = 0.0;
        for (int a = 0; a <= dim_; ++a)
            for (int b = a + 1; b <= dim_; ++b) {
                const double e = (nodes_.row(cells_(k, a)) - nodes_.row(cells_(k, b))).norm();
                h_cell = std::max(h_cell, e);
                h_min_ = std::min(h_min_, e);
            }
        for (int v = 1; v <= dim_; ++v)
            edge.col(v - 1) = (nodes_.row(cells_(k, v)) - nodes_.row(cells_(k, 0))).transpose();
        const double det = dim_ == 2 ? edge(0, 0) * edge(1, 1) - edge(0, 1) * edge(1, 0)
                                     : edge.determinant();
        const double measure = std::abs(det) / factorial(dim_);
        if (measure <= 1e-14 * std::pow(h_cell, dim_))
            throw ConfigError("mesh: cell " + std::to_string(k) + " is degenerate");

        CellGeometry& g = geometry_[k];
        g.measure = measure;
        g.grads.resize(dim_, dim_ + 1);
        const SmallMat inv_t = edge.inverse().transpose();
        for (int v = 1; v <= dim_; ++v) g.grads.col(v) = inv_t.col(v - 1);
        g.grads.col(0) = -g.grads.rightCols(dim_).rowwise().sum();

        check_tensor(D_[k], k, "D");
        check_tensor(T_[k], k, "T");
        if (tissue_[k] < kCSF || tissue_[k] > kWM)
            throw ConfigError("mesh: cell " + std::to_string(k) + " has unknown tissue label " +
                              std::to_string(tissue_[k]));
        if (irc_[k] < -1e-12 || irc_[k] > 1.0 + 1e-12)
            throw ConfigError("mesh: cell " + std::to_string(k) + " has irc outside [0,1]");
        irc_[k] = std::clamp(irc_[k], 0.0, 1.0);

        for (int v = 0; v <= dim_; ++v) node_cells_[cells_(k, v)].push_back(static_cast<int>(k));
    }

    node_neighbors_.assign(nn, {});
    for (Eigen::Index j = 0; j < nn; ++j) {
        auto& nb = node_neighbors_[j];
        for (int k : node_cells_[j])
            for (int v = 0; v <= dim_; ++v)
                if (cells_(k, v) != j) nb.push_back(cells_(k, v));
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        if (node_cells_[j].empty())
            throw ConfigError("mesh: node " + std::to_string(j) + " belongs to no cell");
    }
}

Vector SimplicialMesh::nodal_average(const Vector& cell_values) const {
    Vector num = Vector::Zero(n_nodes()), den = Vector::Zero(n_nodes());
    for (Eigen::Index k = 0; k < n_cells(); ++k) {
        const double m = geometry_[k].measure;
        for (int v = 0; v <= dim_; ++v) {
            num[cells_(k, v)] += m * cell_values[k];
            den[cells_(k, v)] += m;
        }
    }
    return num.cwiseQuotient(den);
}

SimplicialMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file: " + path);
    TokenStream ts(in);

    const long dim = ts.integer("dim");
    const long nn = ts.integer("node count");
    const long nc = ts.integer("cell count");
    if (dim != 2 && dim != 3) throw ConfigError("mesh: dim must be 2 or 3");
    if (nn <= 0 || nc <= 0 || nn > 100000000 || nc > 100000000)
        throw ConfigError("mesh: implausible node/cell counts");

    Matrix nodes(nn, dim);
    for (long j = 0; j < nn; ++j)
        for (long d = 0; d < dim; ++d) nodes(j, d) = ts.real("node coordinate");

    const int n_comp = dim == 2 ? 3 : 6;
    IntMatrix cells(nc, dim + 1);
    std::vector<SmallMat> D(nc), T(nc);
    std::vector<int> tissue(nc);
    Vector irc(nc);
    auto read_tensor = [&](long cell) {
        SmallMat M(dim, dim);
        double comp[6];
        for (int i = 0; i < n_comp; ++i) comp[i] = ts.real("tensor component");
        M(0, 0) = comp[0];
        M(0, 1) = M(1, 0) = comp[1];
        M(1, 1) = comp[2];
        if (dim == 3) {
            M(0, 2) = M(2, 0) = comp[3];
            M(1, 2) = M(2, 1) = comp[4];
            M(2, 2) = comp[5];
        }
        (void)cell;
        return M;
    };
    for (long k = 0; k < nc; ++k) {
        for (long v = 0; v <= dim; ++v) cells(k, v) = static_cast<int>(ts.integer("cell node index"));
        D[k] = read_tensor(k);
        T[k] = read_tensor(k);
        tissue[k] = static_cast<int>(ts.integer("tissue label"));
        irc[k] = ts.real("irc");
    }
    if (!ts.done()) throw ConfigError("mesh: trailing tokens after the last cell");

    return SimplicialMesh(static_cast<int>(dim), std::move(nodes), std::move(cells), std::move(D),
                          std::move(T), std::move(tissue), std::move(irc));
}

void save_mesh(const SimplicialMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open mesh file for writing: " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, " %.9g", v);
        out << buf;
    };
    const int dim = mesh.dim();
    out << "# simplicial mesh\n" << dim << " " << mesh.n_nodes() << " " << mesh.n_cells() << "\n";
    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j) {
        for (int d = 0; d < dim; ++d) put(mesh.nodes()(j, d));
        out << "\n";
    }
    auto put_tensor = [&](const SmallMat& M) {
        put(M(0, 0));
        put(M(0, 1));
        put(M(1, 1));
        if (dim == 3) {
            put(M(0, 2));
            put(M(1, 2));
            put(M(2, 2));
        }
    };
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        for (int v = 0; v <= dim; ++v) out << (v ? " " : "") << mesh.cells()(k, v);
        put_tensor(mesh.tensor_D(k));
        put_tensor(mesh.tensor_T(k));
        out << " " << mesh.tissue(k);
        put(mesh.irc(k));
        out << "\n";
    }
    if (!out) throw IoError("failed writing mesh file: " + path);
}

}  // namespace angio
