#include "angio/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

#include "angio/errors.hpp"

namespace angio {

Vector lumped_mass(const SimplicialMesh& mesh) {
    Vector w = Vector::Zero(mesh.n_nodes());
    const double share = 1.0 / (mesh.dim() + 1);
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        const double m = mesh.cell_geometry(k).measure * share;
        for (int v = 0; v <= mesh.dim(); ++v) w[mesh.cells()(k, v)] += m;
    }
    return w;
}

double lumped_inner(const Vector& w, const Vector& a, const Vector& b) {
    return (w.array() * a.array() * b.array()).sum();
}

SpMat assemble_stiffness(const SimplicialMesh& mesh, TensorField which,
                         const Vector* nodal_coeff, const Vector* cell_scale) {
    const Eigen::Index n = mesh.n_nodes();
    const int nv = mesh.dim() + 1;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(mesh.n_cells()) * nv * nv);

    BasisGrads B(mesh.dim(), nv);
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        const CellGeometry& g = mesh.cell_geometry(k);
        double coef = g.measure;
        if (nodal_coeff) {
            double s = 0.0;
            for (int v = 0; v < nv; ++v) s += (*nodal_coeff)[mesh.cells()(k, v)];
            coef *= s / nv;
        }
        if (cell_scale) coef *= (*cell_scale)[k];
        if (coef == 0.0) continue;

        switch (which) {
            case TensorField::Identity: B = g.grads; break;
            case TensorField::D: B = mesh.tensor_D(k) * g.grads; break;
            case TensorField::T: B = mesh.tensor_T(k) * g.grads; break;
        }
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b)
                trips.emplace_back(mesh.cells()(k, a), mesh.cells()(k, b),
                                   coef * g.grads.col(a).dot(B.col(b)));
    }
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

namespace {

void check_residual(const SpMat& A, const Vector& x, const Vector& b, const char* who) {
    const double r = (A * x - b).norm();
    if (!(r <= 1e-10 * std::max(b.norm(), 1e-30)))
        throw NumericalAbort(std::string(who) + ": linear solve residual " + std::to_string(r) +
                             " exceeds tolerance");
}

}  // namespace

struct SparseOperator::Impl {
    SpMat A;
    bool symmetric = false;
    std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu;
    std::unique_ptr<Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper>> cg;
    std::unique_ptr<Eigen::BiCGSTAB<SpMat>> bicg;
};

SparseOperator::SparseOperator(SpMat A, bool symmetric, Eigen::Index direct_threshold)
    : impl_(std::make_unique<Impl>()) {
    impl_->A = std::move(A);
    impl_->symmetric = symmetric;
    const SpMat& M = impl_->A;
    if (M.rows() != M.cols()) throw NumericalAbort("SparseOperator: matrix is not square");
    const Eigen::Index n = M.rows();
    const Eigen::Index cap = 10 * n;
    if (n <= direct_threshold) {
        if (symmetric) {
            impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
            impl_->ldlt->compute(M);
            if (impl_->ldlt->info() != Eigen::Success)
                throw NumericalAbort("SparseOperator: LDLT factorization failed");
        } else {
            impl_->lu = std::make_unique<Eigen::SparseLU<SpMat>>();
            impl_->lu->compute(M);
            if (impl_->lu->info() != Eigen::Success)
                throw NumericalAbort("SparseOperator: LU factorization failed");
        }
    } else if (symmetric) {
        impl_->cg = std::make_unique<Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper>>();
        impl_->cg->setMaxIterations(cap);
        impl_->cg->setTolerance(1e-12);
        impl_->cg->compute(M);
    } else {
        impl_->bicg = std::make_unique<Eigen::BiCGSTAB<SpMat>>();
        impl_->bicg->setMaxIterations(cap);
        impl_->bicg->setTolerance(1e-12);
        impl_->bicg->compute(M);
    }
}

SparseOperator::~SparseOperator() = default;
SparseOperator::SparseOperator(SparseOperator&&) noexcept = default;
SparseOperator& SparseOperator::operator=(SparseOperator&&) noexcept = default;

const SpMat& SparseOperator::matrix() const { return impl_->A; }

Vector SparseOperator::solve(const Vector& rhs) const {
    const SpMat& A = impl_->A;
    if (rhs.size() != A.rows()) throw NumericalAbort("SparseOperator: rhs size mismatch");
    Vector x;
    if (impl_->ldlt)
        x = impl_->ldlt->solve(rhs);
    else if (impl_->lu)
        x = impl_->lu->solve(rhs);
    else if (impl_->cg)
        x = impl_->cg->solve(rhs);
    else
        x = impl_->bicg->solve(rhs);
    if (!x.allFinite()) throw NumericalAbort("SparseOperator: solver produced non-finite values");

    // One step of iterative refinement before giving up; direct factorizations
    // occasionally need it on badly scaled blocks.
    const Vector r = rhs - A * x;
    if (r.norm() > 1e-10 * std::max(rhs.norm(), 1e-30)) {
        if (impl_->ldlt)
            x += impl_->ldlt->solve(r).eval();
        else if (impl_->lu)
            x += impl_->lu->solve(r).eval();
        else if (impl_->cg)
            x += impl_->cg->solve(r).eval();
        else
            x += impl_->bicg->solve(r).eval();
    }
    check_residual(A, x, rhs, "SparseOperator");
    return x;
}

Vector solve_linear(const SpMat& A, const Vector& rhs, bool symmetric) {
    return SparseOperator(A, symmetric).solve(rhs);
}

}  // namespace angio
