#include "roughfem/fem1d.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "roughfem/stats.hpp"

namespace roughfem {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double cell_width(int level) { return std::ldexp(1.0, -level); }

void check_positive(const Coefficient& a, const char* who) {
    for (double v : a.values)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": coefficient must be positive");
    if (a.values.size() != (std::size_t{1} << a.level))
        throw std::invalid_argument(std::string(who) + ": coefficient size does not match its level");
}

// Three-point Gauss-Legendre nodes and weights on [0,1].

}  // namespace

Observable Observable::constant(double c) {
    Observable o;
    o.kind_ = ObservableKind::constant;
    o.c_ = c;
    return o;
}

Observable Observable::dirac(double x0) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("Observable::dirac: x0 must lie in (0,1)");
    Observable o;
    o.kind_ = ObservableKind::dirac;
    o.x0_ = x0;
    return o;
}

Observable Observable::cosine() {
    Observable o;
    o.kind_ = ObservableKind::cosine;
    return o;
}

Observable Observable::tabulated(int level, std::vector<double> g) {
    if (level < 0 || g.size() != (std::size_t{1} << level))
        throw std::invalid_argument("Observable::tabulated: size must be 2^level");
    Observable o;
    o.kind_ = ObservableKind::tabulated;
    o.g_level_ = level;
    o.g_ = std::move(g);
    // G(x_j) = -sum of g over cells right of x_j, accumulated from x = 1.
    const double hg = cell_width(level);
    o.g_primitive_.assign(o.g_.size() + 1, 0.0);
    NeumaierSum acc;
    for (std::size_t j = o.g_.size(); j-- > 0;) {
        acc.add(-hg * o.g_[j]);
        o.g_primitive_[j] = acc.value();
    }
    return o;
}

std::string Observable::name() const {
    switch (kind_) {
        case ObservableKind::constant:
            return c_ == 1.0 ? "one" : "constant(" + std::to_string(c_) + ")";
        case ObservableKind::dirac:
            return "dirac(" + std::to_string(x0_) + ")";
        case ObservableKind::cosine:
            return "cos";
        case ObservableKind::tabulated:
            return "tabulated";
    }
    return "unknown";
}

double Observable::G(double x) const {
    switch (kind_) {
        case ObservableKind::constant:
            return c_ * (x - 1.0);
        case ObservableKind::dirac:
            return x < x0_ ? -1.0 : 0.0;
        case ObservableKind::cosine:
            return std::sin(two_pi * x) / two_pi;
        case ObservableKind::tabulated: {
            const double n = static_cast<double>(g_.size());
            const auto j = std::min(static_cast<std::size_t>(x * n), g_.size() - 1);
            const double t = x * n - static_cast<double>(j);
            return g_primitive_[j] + t * (g_primitive_[j + 1] - g_primitive_[j]);
        }
    }
    return 0.0;
}

std::size_t Observable::dirac_node(int level) const {
    const double pos = std::ldexp(x0_, level);
    const double idx = std::round(pos);
    if (pos != idx) throw std::invalid_argument("dirac observable: x0 is not a node of level " + std::to_string(level));
    return static_cast<std::size_t>(idx);
}

std::vector<double> Observable::G_nodes(int level) const {
    const std::size_t n = std::size_t{1} << level;
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j) out[j] = G(static_cast<double>(j) / static_cast<double>(n));
    if (kind_ == ObservableKind::dirac) out[dirac_node(level)] = 0.0;
    out[n] = 0.0;
    return out;
}

std::vector<double> Observable::G_cell_means(int level) const {
    const std::size_t n = std::size_t{1} << level;
    const double h = cell_width(level);
    std::vector<double> out(n);
    switch (kind_) {
        case ObservableKind::constant:
            for (std::size_t j = 0; j < n; ++j) out[j] = c_ * ((static_cast<double>(j) + 0.5) * h - 1.0);
            break;
        case ObservableKind::dirac: {
            const std::size_t k = dirac_node(level);
            for (std::size_t j = 0; j < n; ++j) out[j] = j < k ? -1.0 : 0.0;
            break;
        }
        case ObservableKind::cosine:
            // (cos 2pi x0 - cos 2pi x1) / (4 pi^2 h), written without cancellation.
            for (std::size_t j = 0; j < n; ++j) {
                const double xm = (static_cast<double>(j) + 0.5) * h;
                out[j] = 2.0 * std::sin(two_pi * xm) * std::sin(std::numbers::pi * h) / (two_pi * two_pi * h);
            }
            break;
        case ObservableKind::tabulated:
            if (level >= g_level_) {
                // G is linear inside each g-cell, so the mean is the midpoint value.
                for (std::size_t j = 0; j < n; ++j) out[j] = G((static_cast<double>(j) + 0.5) * h);
            } else {
                const std::size_t r = std::size_t{1} << (g_level_ - level);
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t q = j * r; q < (j + 1) * r; ++q)
                        s += 0.5 * (g_primitive_[q] + g_primitive_[q + 1]);
                    out[j] = s / static_cast<double>(r);
                }
            }
            break;
    }
    return out;
}

std::pair<double, double> Observable::cell_moments(int level, std::size_t j) const {
    const double h = cell_width(level);
    const double x0 = static_cast<double>(j) * h;
    switch (kind_) {
        case ObservableKind::constant:
            return {0.5 * c_ * h, 0.5 * c_ * h};
        case ObservableKind::cosine: {
            // centred form: cos(w(m+s)) against 1/2 -+ s/h on |s| <= h/2
            const double m = x0 + 0.5 * h, t = 0.5 * two_pi * h;
            const double sinc = t < 1e-4 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
            const double t2 = t * t;
            const double odd = t < 0.05 ? t * t2 * (1.0 / 3.0 - t2 * (1.0 / 30.0 - t2 * (1.0 / 840.0 - t2 / 45360.0)))
                                        : std::sin(t) - t * std::cos(t);
            const double A = h * std::cos(two_pi * m) * sinc;
            const double B = -2.0 * std::sin(two_pi * m) * odd / (two_pi * two_pi);
            return {0.5 * A - B / h, 0.5 * A + B / h};
        }
        case ObservableKind::tabulated: {
            if (level >= g_level_) {
                const double g = g_[j >> (level - g_level_)];
                return {0.5 * g * h, 0.5 * g * h};
            }
            const std::size_t r = std::size_t{1} << (g_level_ - level);
            const double hg = cell_width(g_level_);
            double ml = 0.0, mr = 0.0;
            for (std::size_t q = 0; q < r; ++q) {
                const double t = (static_cast<double>(q) + 0.5) / static_cast<double>(r);
                const double g = g_[j * r + q];
                ml += g * hg * (1.0 - t);
                mr += g * hg * t;
            }
            return {ml, mr};
        }
        case ObservableKind::dirac:
            break;
    }
    throw std::logic_error("cell_moments: not defined for dirac");
}

double Observable::pair(const std::vector<double>& nodal, int level) const {
    const std::size_t n = std::size_t{1} << level;
    if (nodal.size() != n + 1) throw std::invalid_argument("Observable::pair: nodal size mismatch");
    if (kind_ == ObservableKind::dirac) return nodal[dirac_node(level)];
    NeumaierSum acc;
    for (std::size_t j = 0; j < n; ++j) {
        const auto [ml, mr] = cell_moments(level, j);
        acc.add(ml * nodal[j] + mr * nodal[j + 1]);
    }
    return acc.value();
}

std::vector<double> Observable::load_vector(int level) const {
    const std::size_t n = std::size_t{1} << level;
    std::vector<double> b(n + 1, 0.0);
    if (kind_ == ObservableKind::dirac) {
        b[dirac_node(level)] = 1.0;
        return b;
    }
    for (std::size_t j = 0; j < n; ++j) {
        const auto [ml, mr] = cell_moments(level, j);
        b[j] += ml;
        b[j + 1] += mr;
    }
    return b;
}

Coefficient average_coefficient(const Coefficient& fine, int level) {
    if (level < 0 || level > fine.level || fine.values.size() != (std::size_t{1} << fine.level))
        throw std::invalid_argument("average_coefficient: target grid is not nested in the fine grid");
    Coefficient c = fine;
    while (c.level > level) {
        std::vector<double> next(c.values.size() / 2);
        for (std::size_t j = 0; j < next.size(); ++j) next[j] = 0.5 * (c.values[2 * j] + c.values[2 * j + 1]);
        c.values = std::move(next);
        --c.level;
    }
    return c;
}

QuadRule parse_quad_rule(const std::string& name) {
    if (name == "midpoint") return QuadRule::midpoint;
    if (name == "trapezoid") return QuadRule::trapezoid;
    if (name == "forward_euler" || name == "forward-euler") return QuadRule::forward_euler;
    throw std::invalid_argument("unknown quadrature rule '" + name + "'");
}

std::string to_string(QuadRule rule) {
    switch (rule) {
        case QuadRule::midpoint:
            return "midpoint";
        case QuadRule::trapezoid:
            return "trapezoid";
        case QuadRule::forward_euler:
            return "forward_euler";
    }
    return "unknown";
}

Coefficient quadrature_coefficient(const NodalCoefficient& a, int h_level, int k_level, QuadRule rule) {
    if (h_level < 0 || k_level < h_level) throw std::invalid_argument("quadrature_coefficient: need k <= h");
    if (a.values.size() != (std::size_t{1} << a.level) + 1)
        throw std::invalid_argument("quadrature_coefficient: nodal size does not match its level");
    const int needed = rule == QuadRule::midpoint ? k_level + 1 : k_level;
    if (needed > a.level) throw std::invalid_argument("quadrature_coefficient: k finer than the sampled grid");

    Coefficient k_cells;
    k_cells.level = k_level;
    k_cells.values.resize(std::size_t{1} << k_level);
    const std::size_t s = std::size_t{1} << (a.level - k_level);
    for (std::size_t j = 0; j < k_cells.values.size(); ++j) {
        switch (rule) {
            case QuadRule::midpoint:
                k_cells.values[j] = a.values[j * s + s / 2];
                break;
            case QuadRule::trapezoid:
                k_cells.values[j] = 0.5 * (a.values[j * s] + a.values[(j + 1) * s]);
                break;
            case QuadRule::forward_euler:
                k_cells.values[j] = a.values[j * s];
                break;
        }
    }
    return average_coefficient(k_cells, h_level);
}

Coefficient cell_average_of_nodal(const NodalCoefficient& a) {
    return quadrature_coefficient(a, a.level, a.level, QuadRule::trapezoid);
}

FemSolution solve_primal_explicit(const Coefficient& a_h) {
    check_positive(a_h, "solve_primal_explicit");
    FemSolution u;
    u.level = a_h.level;
    u.deriv.resize(a_h.values.size());
    std::vector<double> inc(a_h.values.size());
    const double h = a_h.spacing();
    for (std::size_t j = 0; j < inc.size(); ++j) {
        u.deriv[j] = 1.0 / a_h.values[j];
        inc[j] = h * u.deriv[j];
    }
    u.nodes = cumulative_sum(inc);
    return u;
}

FemSolution solve_dual_explicit(const Coefficient& a_h, const Observable& g) {
    check_positive(a_h, "solve_dual_explicit");
    const auto Gh = g.G_cell_means(a_h.level);
    FemSolution l;
    l.level = a_h.level;
    l.deriv.resize(a_h.values.size());
    std::vector<double> inc(a_h.values.size());
    const double h = a_h.spacing();
    for (std::size_t j = 0; j < inc.size(); ++j) {
        l.deriv[j] = Gh[j] / a_h.values[j];
        inc[j] = h * l.deriv[j];
    }
    l.nodes = cumulative_sum(inc);
    return l;
}

std::vector<double> model_problem_load(int level) {
    std::vector<double> b((std::size_t{1} << level) + 1, 0.0);
    b.back() = 1.0;
    return b;
}

namespace {

// Element stiffness factors (int_K a) / h^2 on the mesh of `mesh_level`.
std::vector<double> element_stiffness(const Coefficient& a, int mesh_level) {
    check_positive(a, "assemble_solve_tridiagonal");
    if (mesh_level < 1 || mesh_level > a.level)
        throw std::invalid_argument("assemble_solve_tridiagonal: mesh must be nested in the coefficient grid");
    const std::size_t n = std::size_t{1} << mesh_level;
    const std::size_t r = a.values.size() / n;
    const double k = a.spacing();
    const double h = cell_width(mesh_level);
    std::vector<double> s(n);
    for (std::size_t e = 0; e < n; ++e) {
        NeumaierSum acc;
        for (std::size_t q = e * r; q < (e + 1) * r; ++q) acc.add(k * a.values[q]);
        s[e] = acc.value() / (h * h);
    }
    return s;
}

}  // namespace

FemSolution assemble_solve_tridiagonal(const Coefficient& a, int mesh_level, const std::vector<double>& load,
                                       Boundary bc) {
    const auto s = element_stiffness(a, mesh_level);
    const std::size_t n = s.size();
    if (load.size() != n + 1) throw std::invalid_argument("assemble_solve_tridiagonal: load size mismatch");
    const double h = cell_width(mesh_level);

    // Free nodes 1..last; K_ij = int a phi_i' phi_j'.
    const std::size_t last = bc == Boundary::model_problem ? n : n - 1;
    const std::size_t m = last;
    std::vector<double> diag(m), off(m > 0 ? m - 1 : 0), rhs(m);
    for (std::size_t i = 1; i <= last; ++i) {
        const double right = i < n ? s[i] : 0.0;
        diag[i - 1] = s[i - 1] + right;
        if (i < last) off[i - 1] = -s[i];
        rhs[i - 1] = load[i];
    }
    // Thomas algorithm; pivots of an SPD tridiagonal matrix stay positive.
    for (std::size_t i = 1; i < m; ++i) {
        if (!(diag[i - 1] > 0.0)) throw std::runtime_error("assemble_solve_tridiagonal: nonpositive pivot");
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (m > 0 && !(diag[m - 1] > 0.0)) throw std::runtime_error("assemble_solve_tridiagonal: nonpositive pivot");
    std::vector<double> x(m);
    for (std::size_t i = m; i-- > 0;) {
        const double upper = i + 1 < m ? off[i] * x[i + 1] : 0.0;
        x[i] = (rhs[i] - upper) / diag[i];
    }

    FemSolution u;
    u.level = mesh_level;
    u.nodes.assign(n + 1, 0.0);
    for (std::size_t i = 1; i <= last; ++i) u.nodes[i] = x[i - 1];
    u.deriv.resize(n);
    for (std::size_t e = 0; e < n; ++e) u.deriv[e] = (u.nodes[e + 1] - u.nodes[e]) / h;
    return u;
}

double galerkin_residual(const Coefficient& a, const FemSolution& u, const std::vector<double>& load, Boundary bc) {
    const auto s = element_stiffness(a, u.level);
    const std::size_t n = s.size();
    const double h = cell_width(u.level);
    const std::size_t last = bc == Boundary::model_problem ? n : n - 1;
    double worst = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
        // int a u_h' phi_i' = (int_K a) u'_K / h over the two neighbouring elements.
        double r = s[i - 1] * h * u.deriv[i - 1];
        if (i < n) r -= s[i] * h * u.deriv[i];
        worst = std::max(worst, std::abs(r - load[i]));
    }
    return worst;
}

std::vector<double> prolong_nodes(const FemSolution& u, int level) {
    if (level < u.level) throw std::invalid_argument("prolong_nodes: target level is coarser");
    const std::size_t r = std::size_t{1} << (level - u.level);
    const std::size_t n = u.deriv.size() * r;
    std::vector<double> out(n + 1);
    for (std::size_t J = 0; J <= n; ++J) {
        const std::size_t e = std::min(J / r, u.deriv.size() - 1);
        const double t = static_cast<double>(J - e * r) / static_cast<double>(r);
        out[J] = u.nodes[e] + t * (u.nodes[e + 1] - u.nodes[e]);
    }
    return out;
}

}  // namespace roughfem
