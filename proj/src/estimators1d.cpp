#include "roughfem/estimators1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughfem {

EstimatorReport two_level(const Coefficient& a_fine, const FemSolution& u_c, const FemSolution& u_f,
                          const FemSolution& l_c, const FemSolution& l_f) {
    if (u_c.level != l_c.level || u_f.level != l_f.level || u_c.level >= u_f.level || u_f.level > a_fine.level)
        throw std::invalid_argument("two_level: meshes are not nested");
    const std::size_t nc = u_c.deriv.size();
    const std::size_t per_coarse = a_fine.values.size() / nc;
    const std::size_t per_fine = a_fine.values.size() / u_f.deriv.size();
    const double k = a_fine.spacing();

    EstimatorReport r;
    r.coarse_level = u_c.level;
    r.signed_terms.resize(nc);
    r.abs_terms.resize(nc);
    NeumaierSum total, total_abs;
    for (std::size_t e = 0; e < nc; ++e) {
        NeumaierSum acc;
        for (std::size_t q = e * per_coarse; q < (e + 1) * per_coarse; ++q) {
            const std::size_t f = q / per_fine;
            acc.add(k * a_fine.values[q] * (u_f.deriv[f] - u_c.deriv[e]) * (l_f.deriv[f] - l_c.deriv[e]));
        }
        r.signed_terms[e] = acc.value();
        r.abs_terms[e] = std::abs(acc.value());
        total.add(r.signed_terms[e]);
        total_abs.add(r.abs_terms[e]);
    }
    r.F_tilde = total.value();
    r.F_abs = total_abs.value();
    return r;
}

SingleMeshReport single_mesh_estimator(const Coefficient& a_half, const FemSolution& u_half,
                                       const FemSolution& l_half) {
    if (a_half.level != u_half.level || u_half.level != l_half.level || a_half.level < 1)
        throw std::invalid_argument("single_mesh_estimator: inputs must share the h/2 level");
    for (double v : a_half.values)
        if (!(v > 0.0)) throw std::invalid_argument("single_mesh_estimator: coefficient must be positive");
    const std::size_t nc = a_half.values.size() / 2;
    const double h = 2.0 * a_half.spacing();
    const double h3 = h * h * h;

    SingleMeshReport r;
    r.coarse_level = a_half.level - 1;
    r.terms.resize(nc);
    r.a_star.resize(nc);
    NeumaierSum total, total_abs;
    for (std::size_t e = 0; e < nc; ++e) {
        const double am = a_half.values[2 * e], ap = a_half.values[2 * e + 1];
        const double a_star = 2.0 / (1.0 / am + 1.0 / ap);
        const double d2u = (u_half.deriv[2 * e + 1] - u_half.deriv[2 * e]) / (0.5 * h);
        const double d2l = (l_half.deriv[2 * e + 1] - l_half.deriv[2 * e]) / (0.5 * h);
        r.a_star[e] = a_star;
        r.terms[e] = h3 / 16.0 * a_star * d2u * d2l;
        total.add(r.terms[e]);
        total_abs.add(std::abs(r.terms[e]));
    }
    r.signed_sum = total.value();
    r.E_est = total_abs.value();
    return r;
}

double reference_galerkin_error(const FemSolution& u_ref, const FemSolution& u_h, const Observable& g) {
    if (u_ref.level < u_h.level) throw std::invalid_argument("reference_galerkin_error: reference mesh is coarser");
    auto diff = prolong_nodes(u_h, u_ref.level);
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = u_ref.nodes[j] - diff[j];
    return g.pair(diff, u_ref.level);
}

RatioStats ratio_statistics(const std::vector<double>& errors, const std::vector<double>& estimates, int bins) {
    if (errors.size() != estimates.size()) throw std::invalid_argument("ratio_statistics: size mismatch");
    if (bins < 1) throw std::invalid_argument("ratio_statistics: bins must be positive");
    RatioStats r;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (estimates[i] > 0.0 && std::isfinite(estimates[i]))
            r.ratios.push_back(std::abs(errors[i]) / estimates[i]);
        else
            ++r.excluded;
    }
    r.stats = sample_stats(r.ratios);

    double top = *std::max_element(r.ratios.begin(), r.ratios.end());
    if (!(top > 0.0)) top = 1.0;
    const double width = top / bins;
    r.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) r.bin_edges[b] = b * width;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double c : r.ratios) counts[std::min<std::size_t>(static_cast<std::size_t>(c / width), bins - 1)] += 1.0;
    r.density.resize(counts.size());
    const double norm = static_cast<double>(r.ratios.size()) * width;
    for (std::size_t b = 0; b < counts.size(); ++b) r.density[b] = counts[b] / norm;
    return r;
}

std::optional<double> level_ratio(double F_2h, double F_h) {
    if (F_h == 0.0 || !std::isfinite(F_h)) return std::nullopt;
    return F_2h / F_h;
}

}  // namespace roughfem
