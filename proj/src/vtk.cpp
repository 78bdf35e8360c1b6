#include "angio/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "angio/errors.hpp"

namespace angio {

namespace {

void write_scalars(std::ofstream& out, const char* name, const Vector& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    char buf[48];
    for (Eigen::Index j = 0; j < f.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.9g\n", f[j]);
        out << buf;
    }
}

}  // namespace

void write_vtk(const std::string& path, const SimplicialMesh& mesh,
               const SimulationState& state) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open VTK file for writing: " + path);
    const int dim = mesh.dim();
    const Eigen::Index nn = mesh.n_nodes(), nc = mesh.n_cells();

    out << "# vtk DataFile Version 3.0\n";
    out << "tumor growth state t = " << state.t << "\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    char buf[160];
    for (Eigen::Index j = 0; j < nn; ++j) {
        const double x = mesh.nodes()(j, 0);
        const double y = mesh.nodes()(j, 1);
        const double z = dim == 3 ? mesh.nodes()(j, 2) : 0.0;
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", x, y, z);
        out << buf;
    }
    out << "CELLS " << nc << " " << nc * (dim + 2) << "\n";
    for (Eigen::Index k = 0; k < nc; ++k) {
        out << dim + 1;
        for (int v = 0; v <= dim; ++v) out << " " << mesh.cells()(k, v);
        out << "\n";
    }
    out << "CELL_TYPES " << nc << "\n";
    const int vtk_type = dim == 2 ? 5 : 10;  // triangle / tetrahedron
    for (Eigen::Index k = 0; k < nc; ++k) out << vtk_type << "\n";

    out << "POINT_DATA " << nn << "\n";
    write_scalars(out, "phi_v", state.phi_v);
    write_scalars(out, "phi_d", state.phi_d);
    write_scalars(out, "phi_a", state.phi_a);
    write_scalars(out, "n", state.n);
    write_scalars(out, "c", state.c);

    out << "CELL_DATA " << nc << "\n";
    out << "SCALARS tissue int 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index k = 0; k < nc; ++k) out << mesh.tissue(k) << "\n";
    out << "SCALARS irc double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index k = 0; k < nc; ++k) {
        std::snprintf(buf, sizeof buf, "%.9g\n", mesh.irc(k));
        out << buf;
    }
    if (!out) throw IoError("failed writing VTK file: " + path);
}

namespace {

struct VtkTokens {
    std::vector<std::string> toks;
    size_t pos = 0;

    const std::string& next(const char* what) {
        if (pos >= toks.size())
            throw IoError(std::string("VTK: unexpected end of file, expected ") + what);
        return toks[pos++];
    }
    double real(const char* what) {
        try {
            return std::stod(next(what));
        } catch (const std::exception&) {
            throw IoError(std::string("VTK: expected number for ") + what);
        }
    }
    long integer(const char* what) {
        try {
            return std::stol(next(what));
        } catch (const std::exception&) {
            throw IoError(std::string("VTK: expected integer for ") + what);
        }
    }
    bool expect(const std::string& word) {
        if (pos < toks.size() && toks[pos] == word) {
            ++pos;
            return true;
        }
        return false;
    }
};

}  // namespace

VtkState read_vtk(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open VTK file: " + path);
    // The header comment line is free text; drop the first two lines whole.
    std::string line;
    std::getline(in, line);
    if (line.rfind("# vtk DataFile", 0) != 0) throw IoError("not a VTK legacy file: " + path);
    std::getline(in, line);
    VtkTokens ts;
    {
        std::string tok;
        while (in >> tok) ts.toks.push_back(tok);
    }
    if (!ts.expect("ASCII")) throw IoError("VTK: only ASCII files are supported");
    if (!ts.expect("DATASET") || !ts.expect("UNSTRUCTURED_GRID"))
        throw IoError("VTK: only unstructured grids are supported");

    if (!ts.expect("POINTS")) throw IoError("VTK: POINTS section missing");
    const long nn = ts.integer("point count");
    ts.next("point scalar type");
    if (nn <= 0) throw IoError("VTK: no points");
    Matrix xyz(nn, 3);
    for (long j = 0; j < nn; ++j)
        for (int d = 0; d < 3; ++d) xyz(j, d) = ts.real("point coordinate");

    if (!ts.expect("CELLS")) throw IoError("VTK: CELLS section missing");
    const long nc = ts.integer("cell count");
    ts.integer("cell list size");
    if (nc <= 0) throw IoError("VTK: no cells");
    int dim = 0;
    IntMatrix cells;
    for (long k = 0; k < nc; ++k) {
        const long nv = ts.integer("cell vertex count");
        if (k == 0) {
            if (nv != 3 && nv != 4) throw IoError("VTK: cells must be triangles or tetrahedra");
            dim = static_cast<int>(nv) - 1;
            cells.resize(nc, dim + 1);
        } else if (nv != dim + 1) {
            throw IoError("VTK: cell " + std::to_string(k) + " is not a simplex of dim " +
                          std::to_string(dim));
        }
        for (int v = 0; v <= dim; ++v) {
            const long idx = ts.integer("cell vertex");
            if (idx < 0 || idx >= nn) throw IoError("VTK: cell vertex index out of range");
            cells(k, v) = static_cast<int>(idx);
        }
    }
    if (!ts.expect("CELL_TYPES")) throw IoError("VTK: CELL_TYPES section missing");
    ts.integer("cell type count");
    for (long k = 0; k < nc; ++k) ts.integer("cell type");

    VtkState out;
    out.dim = dim;
    out.nodes = xyz.leftCols(dim);
    out.cells = cells;
    out.state = healthy_state(nn);

    if (!ts.expect("POINT_DATA")) throw IoError("VTK: POINT_DATA section missing");
    ts.integer("point data count");
    while (ts.expect("SCALARS")) {
        const std::string name = ts.next("scalar name");
        ts.next("scalar type");
        ts.next("scalar components");
        if (!ts.expect("LOOKUP_TABLE")) throw IoError("VTK: LOOKUP_TABLE line missing");
        ts.next("lookup table name");
        Vector f(nn);
        for (long j = 0; j < nn; ++j) f[j] = ts.real("scalar value");
        if (name == "phi_v")
            out.state.phi_v = f;
        else if (name == "phi_d")
            out.state.phi_d = f;
        else if (name == "phi_a")
            out.state.phi_a = f;
        else if (name == "n")
            out.state.n = f;
        else if (name == "c")
            out.state.c = f;
        // unknown point fields are skipped
        if (ts.expect("CELL_DATA")) {
            ts.integer("cell data count");
            break;  // cell data (tissue, irc) belongs to the mesh file, not the state
        }
    }
    return out;
}

}  // namespace angio
