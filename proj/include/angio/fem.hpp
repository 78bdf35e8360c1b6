#pragma once

#include <memory>

#include "angio/mesh.hpp"
#include "angio/types.hpp"

namespace angio {

enum class TensorField { Identity, D, T };

// Diagonal of the lumped mass matrix: w_j = sum_{K containing j} |K|/(dim+1).
Vector lumped_mass(const SimplicialMesh& mesh);

// (a, b)^h = sum_j w_j a_j b_j
double lumped_inner(const Vector& w, const Vector& a, const Vector& b);

// Weighted anisotropic stiffness matrix
//   A(i,j) = sum_K coef_K (M_K grad phi_j) . grad phi_i |K|
// where M_K is the selected per-cell tensor, and coef_K is the arithmetic
// mean over the cell's vertices of nodal_coeff (1 if absent) times
// cell_scale[K] (1 if absent). Row sums vanish, so homogeneous Neumann
// boundary conditions are natural and constants lie in the kernel.
SpMat assemble_stiffness(const SimplicialMesh& mesh, TensorField which,
                         const Vector* nodal_coeff = nullptr,
                         const Vector* cell_scale = nullptr);

// Assembled sparse matrix plus a cached solver. Systems up to
// direct_threshold unknowns are factorized (LDLT when symmetric, LU
// otherwise); larger ones use diagonally preconditioned Krylov iterations
// (CG when symmetric, BiCGSTAB otherwise). Every solve is verified to a
// 1e-10 relative residual; the Krylov iteration cap is 10 n. Failure
// throws NumericalAbort.
class SparseOperator {
public:
    explicit SparseOperator(SpMat A, bool symmetric,
                            Eigen::Index direct_threshold = 20000);
    ~SparseOperator();
    SparseOperator(SparseOperator&&) noexcept;
    SparseOperator& operator=(SparseOperator&&) noexcept;

    const SpMat& matrix() const;
    Vector solve(const Vector& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Vector solve_linear(const SpMat& A, const Vector& rhs, bool symmetric);

}  // namespace angio
