#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "roughfem/randfield.hpp"

namespace roughfem {

/// Uniform triangulation of the unit square with h = 2^-level. Square (i, j), with
/// i along x, is split by its rising diagonal into a lower triangle
/// (x0,y0),(x1,y0),(x1,y1) and an upper triangle (x0,y0),(x1,y1),(x0,y1).
/// Triangle index is 2 (i n + j) + {0 lower, 1 upper}; node (i, j) is i (n+1) + j.
struct TriMesh {
    int level = 0;
    int n = 0;  ///< squares per side
    std::vector<std::array<double, 2>> coords;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<bool> boundary;

    double h() const { return 1.0 / n; }
    std::size_t node(int i, int j) const { return static_cast<std::size_t>(i) * (n + 1) + j; }
    std::size_t tri(int i, int j, int upper) const { return 2 * (static_cast<std::size_t>(i) * n + j) + upper; }
};

TriMesh triangulate(int level);

/// Mean of exp(log field) over each triangle. Field cells are assigned by the side
/// of the diagonal their centre lies on; cells centred on the diagonal are bisected
/// by it and count half towards each triangle.
std::vector<double> elementwise_coefficient(const Field2D& field, const TriMesh& mesh);

struct FemSolution2D {
    int level = 0;
    std::uint64_t sample_id = 0;  ///< identifies the coefficient sample it was solved with
    std::vector<double> nodes;    ///< zero on the boundary
    std::vector<std::array<double, 2>> grad;  ///< constant per triangle
};

/// Gradients of the P1 function with the given nodal values.
std::vector<std::array<double, 2>> p1_gradients(const TriMesh& mesh, const std::vector<double>& nodes);

/// P1 stiffness matrix on the interior nodes. dof[v] is the row of node v, or -1 on
/// the boundary.
Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, const std::vector<double>& a,
                                               std::vector<long>& dof);

/// -div(a grad u) = f with u = 0 on the boundary; f is constant per triangle.
/// Solved by sparse Cholesky; throws if the relative residual exceeds 1e-10.
FemSolution2D assemble_solve(const TriMesh& mesh, const std::vector<double>& a, const std::vector<double>& f);
FemSolution2D assemble_solve(const TriMesh& mesh, const std::vector<double>& a, double f);

/// int u over the square.
double integrate_p1(const TriMesh& mesh, const std::vector<double>& nodes);
/// int a |grad u|^2.
double energy(const TriMesh& mesh, const std::vector<double>& a, const FemSolution2D& u);

/// How fine-level gradients enter the two-level estimator on a coarse triangle.
enum class ChildRule {
    per_child,  ///< |d_i(u_{h/2}-u_h) d_i(l_{h/2}-l_h)| on each child, area weighted
    averaged,   ///< children gradients averaged first, then the product is taken
};

struct Estimator2D {
    std::vector<double> terms;  ///< per coarse triangle
    double total = 0.0;
};

/// (1/2) h^2 sum_K a_h sum_i |d_i(u_{h/2} - u_h) d_i(l_{h/2} - l_h)|.
Estimator2D estimator_est_2d(const TriMesh& coarse, const std::vector<double>& a_h, const FemSolution2D& u_h,
                             const FemSolution2D& u_half, const FemSolution2D& l_h, const FemSolution2D& l_half,
                             ChildRule rule = ChildRule::per_child);

/// (1/2) h^2 sum_K (h^2/16) a_h sum_i |D_i^2 u_h D_i^2 l_h|, where D_i^2 w on K is the
/// centred difference of d_i w between the same-orientation neighbours of K along
/// axis i, divided by 2h. Elements on the boundary use the one-sided difference.
Estimator2D estimator_reg_2d(const TriMesh& coarse, const std::vector<double>& a_h, const FemSolution2D& u_h,
                             const FemSolution2D& l_h);

/// int (u_ref - u_h) for a reference solution of the same sample on a finer mesh.
double reference_error_2d(const FemSolution2D& u_ref, const FemSolution2D& u_h);

/// The four children of coarse triangle (i, j, upper) in the once-refined mesh.
std::array<std::size_t, 4> children_of(const TriMesh& fine, int i, int j, int upper);

}  // namespace roughfem
