#pragma once

#include <string>
#include <vector>

#include "angio/types.hpp"

namespace angio {

// Tissue labels carried per cell. White matter scales the chemotactic
// sensitivity h_v and the nutrient release l_nv by ModelParams::wm_factor.
enum Tissue : int { kCSF = 0, kGM = 1, kWM = 2 };

struct CellGeometry {
    double measure;    // area (2-D) or volume (3-D)
    BasisGrads grads;  // dim x (dim+1); column i is the gradient of basis i
};

// Immutable P1 simplicial mesh (triangles or tetrahedra) carrying per-cell
// anisotropy tensors D (water diffusion) and T (preferential directions), a
// tissue label and the resection indicator irc in [0,1].
class SimplicialMesh {
public:
    SimplicialMesh(int dim, Matrix nodes, IntMatrix cells,
                   std::vector<SmallMat> tensor_D, std::vector<SmallMat> tensor_T,
                   std::vector<int> tissue, Vector irc);

    int dim() const { return dim_; }
    Eigen::Index n_nodes() const { return nodes_.rows(); }
    Eigen::Index n_cells() const { return cells_.rows(); }

    const Matrix& nodes() const { return nodes_; }
    const IntMatrix& cells() const { return cells_; }
    const CellGeometry& cell_geometry(Eigen::Index cell) const { return geometry_[cell]; }
    const SmallMat& tensor_D(Eigen::Index cell) const { return D_[cell]; }
    const SmallMat& tensor_T(Eigen::Index cell) const { return T_[cell]; }
    int tissue(Eigen::Index cell) const { return tissue_[cell]; }
    double irc(Eigen::Index cell) const { return irc_[cell]; }
    const Vector& irc() const { return irc_; }

    // shortest edge over all cells
    double h_min() const { return h_min_; }

    const std::vector<int>& cells_of_node(Eigen::Index node) const { return node_cells_[node]; }
    // nodes sharing at least one cell with `node`, excluding `node` itself
    const std::vector<int>& node_neighbors(Eigen::Index node) const { return node_neighbors_[node]; }

    // Measure-weighted average of a per-cell quantity at the nodes. This is
    // the one rule used to evaluate per-cell coefficients inside lumped
    // integrals (tissue factors, resection indicator).
    Vector nodal_average(const Vector& cell_values) const;

private:
    int dim_;
    Matrix nodes_;
    IntMatrix cells_;
    std::vector<SmallMat> D_, T_;
    std::vector<int> tissue_;
    Vector irc_;
    std::vector<CellGeometry> geometry_;
    std::vector<std::vector<int>> node_cells_;
    std::vector<std::vector<int>> node_neighbors_;
    double h_min_ = 0.0;
};

// Text format, '#' starts a comment anywhere:
//   dim n_nodes n_cells
//   x y [z]                                   (one line per node)
//   i0 i1 i2 [i3] D.. T.. tissue irc          (one line per cell)
// Tensor components are the independent entries in the order
// xx xy yy (2-D) or xx xy yy xz yz zz (3-D). Indices are 0-based.
SimplicialMesh load_mesh(const std::string& path);
void save_mesh(const SimplicialMesh& mesh, const std::string& path);

}  // namespace angio
