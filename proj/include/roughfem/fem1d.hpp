#pragma once

#include <string>
#include <utility>
#include <vector>

#include "roughfem/grid.hpp"

namespace roughfem {

/// P1 solution on a uniform dyadic mesh of [0,1].
struct FemSolution {
    int level = 0;
    std::vector<double> nodes;  ///< 2^level + 1 values
    std::vector<double> deriv;  ///< one constant derivative per element

    double h() const { return 1.0 / static_cast<double>(deriv.size()); }
};

enum class ObservableKind { constant, dirac, cosine, tabulated };

/// Linear functional v -> (g, v) with primitive G(x) = -int_x^1 g, so G(1) = 0.
class Observable {
public:
    /// g = c; G(x) = c (x - 1).
    static Observable constant(double c = 1.0);
    /// Point evaluation at x0; G = -1 below x0 and 0 above. x0 must be a mesh node
    /// wherever the observable is used.
    static Observable dirac(double x0);
    /// g = cos(2 pi x); G = sin(2 pi x) / (2 pi).
    static Observable cosine();
    /// Piecewise-constant g, one value per cell of the given level.
    static Observable tabulated(int level, std::vector<double> g);

    ObservableKind kind() const { return kind_; }
    std::string name() const;

    double G(double x) const;
    /// G at the nodes of the given level.
    std::vector<double> G_nodes(int level) const;
    /// Exact cell means of G on the given level.
    std::vector<double> G_cell_means(int level) const;

    /// (g, v) for the P1 function with the given nodal values on `level`.
    double pair(const std::vector<double>& nodal, int level) const;
    /// (g, phi_i) for every hat function of the given level.
    std::vector<double> load_vector(int level) const;

private:
    // (int g phi_left, int g phi_right) over cell j of `level`; not for dirac.
    std::pair<double, double> cell_moments(int level, std::size_t j) const;
    std::size_t dirac_node(int level) const;

    ObservableKind kind_ = ObservableKind::constant;
    double c_ = 1.0;
    double x0_ = 0.5;
    int g_level_ = 0;
    std::vector<double> g_;
    std::vector<double> g_primitive_;  // G at the nodes of g_level_
};

/// Cell means of a fine coefficient on a coarser nested grid, built by repeated
/// pairwise halving so that a_h = (a_{h/2}^- + a_{h/2}^+)/2 holds in floating point.
Coefficient average_coefficient(const Coefficient& fine, int level);

enum class QuadRule { midpoint, trapezoid, forward_euler };

QuadRule parse_quad_rule(const std::string& name);
std::string to_string(QuadRule rule);

/// Per h-cell average of point evaluations of a on its k-cells.
///   midpoint:      a at k-cell midpoints (needs nodal data finer than k)
///   trapezoid:     (a(x_j) + a(x_{j+1}))/2 per k-cell
///   forward_euler: a(x_j) at the left end of each k-cell
Coefficient quadrature_coefficient(const NodalCoefficient& a, int h_level, int k_level, QuadRule rule);

/// Per-cell exact mean of the piecewise-linear interpolant of nodal data.
Coefficient cell_average_of_nodal(const NodalCoefficient& a);

/// Model problem -(a u')' = 0, u(0) = 0, a(1) u'(1) = 1: u_h' = 1/a_h.
FemSolution solve_primal_explicit(const Coefficient& a_h);

/// Dual representation lambda_h' = G_h / a_h with lambda_h(0) = 0. This is the
/// Galerkin solution with load -g and the model-problem boundary conditions.
FemSolution solve_dual_explicit(const Coefficient& a_h, const Observable& g);

enum class Boundary {
    model_problem,          ///< u(0) = 0, natural condition at x = 1
    homogeneous_dirichlet,  ///< u(0) = u(1) = 0
};

/// Unit point flux at x = 1, the right-hand side of the model problem.
std::vector<double> model_problem_load(int level);

/// Assembles the P1 stiffness matrix on the mesh of `mesh_level`, integrating the
/// piecewise-constant coefficient exactly over each element by summing its fine
/// cells, and solves the tridiagonal system. `load` holds (f, phi_i) for every node.
FemSolution assemble_solve_tridiagonal(const Coefficient& a, int mesh_level, const std::vector<double>& load,
                                       Boundary bc);

/// Largest |K u - b| over the free nodes.
double galerkin_residual(const Coefficient& a, const FemSolution& u, const std::vector<double>& load,
                         Boundary bc);

/// Nodal values of the P1 solution interpolated onto a finer nested level.
std::vector<double> prolong_nodes(const FemSolution& u, int level);

}  // namespace roughfem
