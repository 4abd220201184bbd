#include "heatforms/covering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace heatforms {

VitaliSelection vitali_select(const std::vector<Ball>& candidates, double Rmax,
                              const BallDistance& dist, double dilation, double slack) {
    for (const auto& b : candidates)
        if (!(b.radius > 0) || b.radius > Rmax + 1e-12)
            throw std::invalid_argument("vitali_select: radii must lie in (0, Rmax]");

    VitaliSelection sel;
    sel.dilation = dilation;
    std::size_t m = candidates.size();
    sel.covered_by.assign(m, (std::size_t)-1);
    if (m == 0) {
        sel.disjoint_verified = sel.cover_verified = true;
        return sel;
    }

    // decreasing radius; ties broken by index for determinism
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].radius > candidates[b].radius;
    });

    for (std::size_t idx : order) {
        bool hits = false;
        for (std::size_t s : sel.selected) {
            if (dist(idx, s) <= candidates[idx].radius + candidates[s].radius) {
                sel.covered_by[idx] = s;
                hits = true;
                break;
            }
        }
        if (!hits) {
            sel.selected.push_back(idx);
            sel.covered_by[idx] = idx;
        }
    }

    // post-hoc brute force: disjointness of the selected family
    sel.disjoint_verified = true;
    for (std::size_t i = 0; i < sel.selected.size(); ++i)
        for (std::size_t j = i + 1; j < sel.selected.size(); ++j) {
            std::size_t a = sel.selected[i], b = sel.selected[j];
            if (dist(a, b) <= candidates[a].radius + candidates[b].radius - 1e-12)
                sel.disjoint_verified = false;
        }

    // post-hoc brute force: every candidate sits inside dilation× its cover
    sel.cover_verified = true;
    for (std::size_t idx = 0; idx < m; ++idx) {
        std::size_t c = sel.covered_by[idx];
        double excess =
            dist(idx, c) + candidates[idx].radius - dilation * candidates[c].radius;
        sel.worst_cover_excess = std::max(sel.worst_cover_excess, excess);
        if (excess > slack) sel.cover_verified = false;
    }
    return sel;
}

VitaliSelection vitali_select(const std::vector<Ball>& candidates, double Rmax, double dilation,
                              double slack) {
    auto euclid = [&](std::size_t a, std::size_t b) {
        double s = 0;
        for (std::size_t d = 0; d < candidates[a].center.size(); ++d) {
            double v = candidates[a].center[d] - candidates[b].center[d];
            s += v * v;
        }
        return std::sqrt(s);
    };
    return vitali_select(candidates, Rmax, euclid, dilation, slack);
}

double overlap_bound(int n, double epsilon, double divisor) {
    return std::pow((1 + epsilon) / (1 - epsilon), n / 2.0) * std::pow(divisor, n);
}

Covering build_admissible_covering(const ChartMetric& metric, const RadiusField& field,
                                   const GridGeodesics& geo, double divisor, double dilation) {
    const GridBox& box = field.box;
    Covering cov;
    cov.m = field.m;
    cov.epsilon = field.epsilon;
    cov.divisor = divisor;
    cov.dilation = dilation;
    cov.overlap_bound_T = overlap_bound(box.n, field.epsilon, divisor);
    (void)metric;

    std::vector<Ball> candidates;
    std::vector<std::size_t> cand_points;
    for (std::size_t p = 0; p < box.size(); ++p) {
        if (field.degenerate[p]) {
            cov.excluded_degenerate.push_back(p);
            continue;
        }
        Ball b;
        b.center = box.point(p);
        b.radius = field.r_eps[p] / divisor;
        b.center_point = (long)p;
        candidates.push_back(b);
        cand_points.push_back(p);
    }

    auto dist = [&](std::size_t a, std::size_t b) {
        return geo.distance(cand_points[a], cand_points[b]);
    };
    double rmax = 0;
    for (const auto& b : candidates) rmax = std::max(rmax, b.radius);
    double grid_step = 0;
    for (int a = 0; a < box.n; ++a) grid_step = std::max(grid_step, box.spacing(a));
    VitaliSelection sel = vitali_select(candidates, rmax, dist, dilation, 0.0);
    cov.disjoint_verified = sel.disjoint_verified;
    cov.cover_verified = sel.cover_verified;

    for (std::size_t s : sel.selected) {
        cov.selected.push_back(candidates[s]);
        Ball d = candidates[s];
        d.radius *= dilation;
        cov.dilated.push_back(d);
        Ball patch = candidates[s];
        patch.radius = field.r_eps[cand_points[s]] / kPatchDivisor;
        cov.patches.push_back(patch);
    }

    // membership lists and overlap histograms in the grid-geodesic metric
    std::size_t npts = box.size();
    cov.membership.assign(npts, {});
    cov.overlap.assign(npts, 0);
    std::vector<int> patch_overlap(npts, 0);
    for (std::size_t j = 0; j < cov.dilated.size(); ++j) {
        const auto& dists = geo.distances_from((std::size_t)cov.dilated[j].center_point);
        for (std::size_t p = 0; p < npts; ++p) {
            if (dists[p] <= cov.dilated[j].radius) {
                cov.membership[p].push_back((int)j);
                cov.overlap[p] += 1;
            }
            if (dists[p] <= cov.patches[j].radius) patch_overlap[p] += 1;
        }
    }
    cov.max_overlap = cov.overlap.empty() ? 0 : *std::max_element(cov.overlap.begin(), cov.overlap.end());
    cov.max_patch_overlap =
        patch_overlap.empty() ? 0 : *std::max_element(patch_overlap.begin(), patch_overlap.end());
    return cov;
}

std::string Covering::to_json() const {
    nlohmann::json j;
    j["m"] = m;
    j["epsilon"] = epsilon;
    j["divisor"] = divisor;
    j["dilation"] = dilation;
    j["overlap_bound_T"] = overlap_bound_T;
    j["max_overlap"] = max_overlap;
    j["max_patch_overlap"] = max_patch_overlap;
    j["disjoint_verified"] = disjoint_verified;
    j["cover_verified"] = cover_verified;
    j["excluded_degenerate"] = excluded_degenerate.size();
    nlohmann::json balls = nlohmann::json::array();
    for (std::size_t i = 0; i < selected.size(); ++i) {
        nlohmann::json b;
        b["center"] = selected[i].center;
        b["r"] = selected[i].radius;
        b["r5"] = dilated[i].radius;
        int count = 0;
        if (selected[i].center_point >= 0) count = overlap[(std::size_t)selected[i].center_point];
        b["overlap_count"] = count;
        balls.push_back(b);
    }
    j["balls"] = balls;
    return j.dump(2);
}

WeightField make_weight(const RadiusField& field, double gamma) {
    WeightField w;
    w.gamma = gamma;
    w.values = GridFunction(field.box);
    for (std::size_t p = 0; p < field.box.size(); ++p)
        w.values.values[p] = std::pow(field.r_eps[p], gamma);
    return w;
}

double weighted_norm(const GridFunction& modulus, double tau, const GridFunction* weight,
                     const GridFunction* sqrt_det) {
    if (std::isinf(tau)) return modulus.max_abs();
    if (tau < 1) throw std::invalid_argument("weighted_norm: tau must be >= 1");
    double s = 0;
    for (std::size_t p = 0; p < modulus.size(); ++p) {
        double v = std::abs(modulus.values[p]);
        if (!std::isfinite(v)) throw std::domain_error("weighted_norm: non-finite data");
        double w = weight ? weight->values[p] : 1.0;
        double vol = sqrt_det ? sqrt_det->values[p] : 1.0;
        s += std::pow(v, tau) * w * vol;
    }
    return std::pow(s * modulus.box.cell_volume(), 1.0 / tau);
}

NormEquivalence patch_norm_equivalence(const Covering& cov, const RadiusField& field,
                                       const GridGeodesics& geo, const GridFunction& modulus,
                                       double gamma, double tau, const GridFunction& sqrt_det) {
    if (std::isinf(tau))
        throw std::invalid_argument("patch_norm_equivalence: tau must be finite");
    NormEquivalence eq;
    eq.lower_constant = std::pow(2.0, std::abs(gamma));
    eq.upper_constant = std::pow(2.0, std::abs(gamma)) * cov.overlap_bound_T;

    WeightField w = make_weight(field, gamma);
    double direct = 0;
    for (std::size_t p = 0; p < modulus.size(); ++p)
        direct += std::pow(std::abs(modulus.values[p]), tau) * w.values.values[p] *
                  sqrt_det.values[p];
    eq.direct = direct * modulus.box.cell_volume();

    double sum = 0;
    for (std::size_t j = 0; j < cov.patches.size(); ++j) {
        const Ball& patch = cov.patches[j];
        const auto& dists = geo.distances_from((std::size_t)patch.center_point);
        double local = 0;
        for (std::size_t p = 0; p < modulus.size(); ++p)
            if (dists[p] <= patch.radius)
                local += std::pow(std::abs(modulus.values[p]), tau) * sqrt_det.values[p];
        double R = field.r_eps[(std::size_t)patch.center_point];
        sum += std::pow(R, gamma) * local * modulus.box.cell_volume();
    }
    eq.patch_sum = sum;

    eq.lower_ok = eq.direct <= eq.lower_constant * eq.patch_sum + 1e-12;
    eq.upper_ok = eq.patch_sum <= eq.upper_constant * eq.direct + 1e-12;
    return eq;
}

GlobalAssembly globalize(const std::vector<LocalContribution>& locals, double gamma_w,
                         double shape_value, double omega_norm_wprime) {
    if (locals.empty()) throw std::invalid_argument("globalize: no local reports");
    int k = locals.front().k, alpha = locals.front().alpha;
    double r = locals.front().r;
    for (const auto& l : locals)
        if (l.k != k || l.r != r || l.alpha != alpha)
            throw std::invalid_argument("globalize: mismatched (k, r, alpha) across balls");

    GlobalAssembly out;
    double s = 0;
    for (const auto& l : locals) s += std::pow(l.r_eps, gamma_w) * std::pow(l.local_norm, r);
    out.weighted_lhs = std::pow(s, 1.0 / r);
    out.rhs_base = omega_norm_wprime;
    double denom = shape_value * omega_norm_wprime;
    out.needed_c = denom > 0 ? out.weighted_lhs / denom : 0.0;
    return out;
}

} // namespace heatforms
