#include "roughfem/fem2d.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <string>

#include "roughfem/stats.hpp"

namespace roughfem {

namespace {

constexpr double solver_tolerance = 1e-10;

double structured_integral(int n, const std::vector<double>& U) {
    const double area = 0.5 / (static_cast<double>(n) * n);
    auto at = [&](int i, int j) { return U[static_cast<std::size_t>(i) * (n + 1) + j]; };
    NeumaierSum acc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            acc.add(area * (at(i, j) + at(i + 1, j) + at(i + 1, j + 1)) / 3.0);
            acc.add(area * (at(i, j) + at(i + 1, j + 1) + at(i, j + 1)) / 3.0);
        }
    return acc.value();
}

// Basis gradients (b_k, c_k) and area of a triangle.
struct TriGeometry {
    std::array<std::array<double, 2>, 3> grad;
    double area;
};

TriGeometry geometry(const TriMesh& mesh, std::size_t t) {
    const auto& v = mesh.triangles[t];
    const auto& p0 = mesh.coords[v[0]];
    const auto& p1 = mesh.coords[v[1]];
    const auto& p2 = mesh.coords[v[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    TriGeometry g;
    g.area = 0.5 * std::abs(det);
    g.grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
    g.grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
    g.grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
    return g;
}

void check_coefficient(const TriMesh& mesh, const std::vector<double>& a) {
    if (a.size() != mesh.triangles.size()) throw std::invalid_argument("fem2d: one coefficient per triangle required");
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("fem2d: coefficient must be positive");
}

}  // namespace

TriMesh triangulate(int level) {
    if (level < 1 || level > 14) throw std::invalid_argument("triangulate: level must be in [1, 14]");
    TriMesh m;
    m.level = level;
    m.n = 1 << level;
    const int n = m.n;
    m.coords.resize(static_cast<std::size_t>(n + 1) * (n + 1));
    m.boundary.resize(m.coords.size());
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            m.coords[m.node(i, j)] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
            m.boundary[m.node(i, j)] = i == 0 || j == 0 || i == n || j == n;
        }
    m.triangles.resize(2 * static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            m.triangles[m.tri(i, j, 0)] = {m.node(i, j), m.node(i + 1, j), m.node(i + 1, j + 1)};
            m.triangles[m.tri(i, j, 1)] = {m.node(i, j), m.node(i + 1, j + 1), m.node(i, j + 1)};
        }
    return m;
}

std::vector<double> elementwise_coefficient(const Field2D& field, const TriMesh& mesh) {
    if (field.n < mesh.n || field.n % mesh.n != 0)
        throw std::invalid_argument("elementwise_coefficient: field resolution must refine the mesh");
    const int r = field.n / mesh.n;
    const double weight_total = 0.5 * r * r;
    std::vector<double> a(mesh.triangles.size());
    for (int I = 0; I < mesh.n; ++I)
        for (int J = 0; J < mesh.n; ++J) {
            NeumaierSum lower, upper;
            for (int p = 0; p < r; ++p)
                for (int q = 0; q < r; ++q) {
                    const double v = std::exp(field.at(I * r + p, J * r + q));
                    if (p > q)
                        lower.add(v);
                    else if (p < q)
                        upper.add(v);
                    else {
                        lower.add(0.5 * v);
                        upper.add(0.5 * v);
                    }
                }
            a[mesh.tri(I, J, 0)] = lower.value() / weight_total;
            a[mesh.tri(I, J, 1)] = upper.value() / weight_total;
        }
    for (double v : a)
        if (!std::isfinite(v)) throw std::overflow_error("elementwise_coefficient: non-finite coefficient");
    return a;
}

std::vector<std::array<double, 2>> p1_gradients(const TriMesh& mesh, const std::vector<double>& nodes) {
    std::vector<std::array<double, 2>> g(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto geo = geometry(mesh, t);
        const auto& v = mesh.triangles[t];
        g[t] = {0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            g[t][0] += nodes[v[k]] * geo.grad[k][0];
            g[t][1] += nodes[v[k]] * geo.grad[k][1];
        }
    }
    return g;
}

Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, const std::vector<double>& a,
                                               std::vector<long>& dof) {
    check_coefficient(mesh, a);
    dof.assign(mesh.coords.size(), -1);
    long ndof = 0;
    for (std::size_t v = 0; v < dof.size(); ++v)
        if (!mesh.boundary[v]) dof[v] = ndof++;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto geo = geometry(mesh, t);
        const auto& v = mesh.triangles[t];
        for (int r = 0; r < 3; ++r) {
            const long row = dof[v[r]];
            if (row < 0) continue;
            for (int c = 0; c < 3; ++c) {
                const long col = dof[v[c]];
                if (col < 0) continue;
                trip.emplace_back(row, col,
                                  a[t] * geo.area * (geo.grad[r][0] * geo.grad[c][0] + geo.grad[r][1] * geo.grad[c][1]));
            }
        }
    }
    Eigen::SparseMatrix<double> K(ndof, ndof);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

FemSolution2D assemble_solve(const TriMesh& mesh, const std::vector<double>& a, const std::vector<double>& f) {
    if (f.size() != mesh.triangles.size()) throw std::invalid_argument("assemble_solve: one load value per triangle required");
    std::vector<long> dof;
    const auto K = assemble_stiffness(mesh, a, dof);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(K.rows());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double share = f[t] * geometry(mesh, t).area / 3.0;
        for (auto v : mesh.triangles[t])
            if (dof[v] >= 0) b[dof[v]] += share;
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw std::runtime_error("assemble_solve: factorisation failed");
    const Eigen::VectorXd x = solver.solve(b);
    const double bnorm = b.norm();
    const double rel = bnorm > 0.0 ? (K * x - b).norm() / bnorm : (K * x).norm();
    if (!(rel <= solver_tolerance))
        throw std::runtime_error("assemble_solve: relative residual " + std::to_string(rel) + " above tolerance");

    FemSolution2D u;
    u.level = mesh.level;
    u.nodes.assign(mesh.coords.size(), 0.0);
    for (std::size_t v = 0; v < dof.size(); ++v)
        if (dof[v] >= 0) u.nodes[v] = x[dof[v]];
    u.grad = p1_gradients(mesh, u.nodes);
    return u;
}

FemSolution2D assemble_solve(const TriMesh& mesh, const std::vector<double>& a, double f) {
    return assemble_solve(mesh, a, std::vector<double>(mesh.triangles.size(), f));
}

double integrate_p1(const TriMesh& mesh, const std::vector<double>& nodes) {
    if (nodes.size() != mesh.coords.size()) throw std::invalid_argument("integrate_p1: size mismatch");
    return structured_integral(mesh.n, nodes);
}

double energy(const TriMesh& mesh, const std::vector<double>& a, const FemSolution2D& u) {
    check_coefficient(mesh, a);
    const double area = 0.5 * mesh.h() * mesh.h();
    NeumaierSum acc;
    for (std::size_t t = 0; t < a.size(); ++t)
        acc.add(a[t] * area * (u.grad[t][0] * u.grad[t][0] + u.grad[t][1] * u.grad[t][1]));
    return acc.value();
}

std::array<std::size_t, 4> children_of(const TriMesh& fine, int i, int j, int upper) {
    const int I = 2 * i, J = 2 * j;
    if (upper == 0)
        return {fine.tri(I, J, 0), fine.tri(I + 1, J, 0), fine.tri(I + 1, J + 1, 0), fine.tri(I + 1, J, 1)};
    return {fine.tri(I, J, 1), fine.tri(I, J + 1, 1), fine.tri(I + 1, J + 1, 1), fine.tri(I, J + 1, 0)};
}

Estimator2D estimator_est_2d(const TriMesh& coarse, const std::vector<double>& a_h, const FemSolution2D& u_h,
                             const FemSolution2D& u_half, const FemSolution2D& l_h, const FemSolution2D& l_half,
                             ChildRule rule) {
    check_coefficient(coarse, a_h);
    if (u_h.level != coarse.level || l_h.level != coarse.level || u_half.level != coarse.level + 1 ||
        l_half.level != coarse.level + 1)
        throw std::invalid_argument("estimator_est_2d: solutions are not on nested levels h, h/2");
    TriMesh fine;
    fine.n = 2 * coarse.n;
    const double h = coarse.h();

    Estimator2D est;
    est.terms.resize(coarse.triangles.size());
    NeumaierSum total;
    for (int i = 0; i < coarse.n; ++i)
        for (int j = 0; j < coarse.n; ++j)
            for (int o = 0; o < 2; ++o) {
                const std::size_t K = coarse.tri(i, j, o);
                const auto kids = children_of(fine, i, j, o);
                double s = 0.0;
                if (rule == ChildRule::per_child) {
                    for (std::size_t c : kids)
                        for (int d = 0; d < 2; ++d)
                            s += 0.25 * std::abs((u_half.grad[c][d] - u_h.grad[K][d]) *
                                                 (l_half.grad[c][d] - l_h.grad[K][d]));
                } else {
                    for (int d = 0; d < 2; ++d) {
                        double gu = 0.0, gl = 0.0;
                        for (std::size_t c : kids) {
                            gu += 0.25 * u_half.grad[c][d];
                            gl += 0.25 * l_half.grad[c][d];
                        }
                        s += std::abs((gu - u_h.grad[K][d]) * (gl - l_h.grad[K][d]));
                    }
                }
                est.terms[K] = 0.5 * h * h * a_h[K] * s;
                total.add(est.terms[K]);
            }
    est.total = total.value();
    return est;
}

Estimator2D estimator_reg_2d(const TriMesh& coarse, const std::vector<double>& a_h, const FemSolution2D& u_h,
                             const FemSolution2D& l_h) {
    check_coefficient(coarse, a_h);
    if (u_h.level != coarse.level || l_h.level != coarse.level)
        throw std::invalid_argument("estimator_reg_2d: solutions are not on the coarse mesh");
    const int n = coarse.n;
    const double h = coarse.h();

    // Second difference of gradient component d along axis d, same orientation o.
    auto d2 = [&](const FemSolution2D& w, int i, int j, int o, int d) {
        if (n < 2) return 0.0;
        auto g = [&](int ii, int jj) { return w.grad[coarse.tri(ii, jj, o)][d]; };
        const int p = d == 0 ? i : j;
        auto at = [&](int q) { return d == 0 ? g(q, j) : g(i, q); };
        if (p == 0) return (at(1) - at(0)) / h;
        if (p == n - 1) return (at(n - 1) - at(n - 2)) / h;
        return (at(p + 1) - at(p - 1)) / (2.0 * h);
    };

    Estimator2D est;
    est.terms.resize(coarse.triangles.size());
    NeumaierSum total;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int o = 0; o < 2; ++o) {
                const std::size_t K = coarse.tri(i, j, o);
                double s = 0.0;
                for (int d = 0; d < 2; ++d) s += std::abs(d2(u_h, i, j, o, d) * d2(l_h, i, j, o, d));
                est.terms[K] = 0.5 * h * h * (h * h / 16.0) * a_h[K] * s;
                total.add(est.terms[K]);
            }
    est.total = total.value();
    return est;
}

double reference_error_2d(const FemSolution2D& u_ref, const FemSolution2D& u_h) {
    if (u_ref.sample_id != u_h.sample_id) throw std::invalid_argument("reference_error_2d: solutions use different samples");
    if (u_ref.level <= u_h.level) throw std::invalid_argument("reference_error_2d: reference mesh must be finer");
    return structured_integral(1 << u_ref.level, u_ref.nodes) - structured_integral(1 << u_h.level, u_h.nodes);
}

}  // namespace roughfem
