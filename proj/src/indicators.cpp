#include "biflp/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

namespace biflp {

namespace {

std::string point_str(double c, double r) {
    return "(" + std::to_string(c) + ", " + std::to_string(r) + ")";
}

bool any_nonpositive_coordinate(const Frontier& f) {
    for (const FrontierPoint& p : f.points())
        if (static_cast<double>(p.cost) <= 0.0 || p.risk <= 0.0) return true;
    return false;
}

}  // namespace

double hypervolume(const Frontier& frontier, std::pair<double, double> reference) {
    if (frontier.empty()) return 0.0;
    // Points arrive cost-ascending with strictly decreasing risk.
    for (const FrontierPoint& p : frontier.points())
        if (!(static_cast<double>(p.cost) < reference.first && p.risk < reference.second))
            throw std::invalid_argument("hypervolume: point " +
                                        point_str(static_cast<double>(p.cost), p.risk) +
                                        " does not dominate the reference point");
    const auto& pts = frontier.points();
    double area = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double right =
            i + 1 < pts.size() ? static_cast<double>(pts[i + 1].cost) : reference.first;
        area += (right - static_cast<double>(pts[i].cost)) * (reference.second - pts[i].risk);
    }
    return area;
}

double hypervolume_gap(const Frontier& A, const Frontier& R, std::pair<double, double> reference) {
    const double hr = hypervolume(R, reference);
    if (hr <= 0.0) throw UndefinedIndicatorError("hypervolume_gap: reference set has zero hypervolume");
    const double ha = hypervolume(A, reference);
    return 100.0 * (hr - ha) / hr;
}

double eps_indicator(const Frontier& A, const Frontier& R) {
    if (A.empty() || R.empty())
        throw std::invalid_argument("eps_indicator: approximation and reference must be non-empty");
    const double shift =
        any_nonpositive_coordinate(A) || any_nonpositive_coordinate(R) ? 1.0 : 0.0;
    double worst = 0.0;
    for (const FrontierPoint& r : R.points()) {
        double best = kInfinity;
        for (const FrontierPoint& a : A.points()) {
            const double f = std::max((static_cast<double>(a.cost) + shift) /
                                          (static_cast<double>(r.cost) + shift),
                                      (a.risk + shift) / (r.risk + shift));
            best = std::min(best, f);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

std::pair<double, double> default_reference(const Frontier& A, const Frontier& R) {
    double cmax = 0.0, rmax = 0.0;
    for (const Frontier* f : {&A, &R})
        for (const FrontierPoint& p : f->points()) {
            cmax = std::max(cmax, static_cast<double>(p.cost));
            rmax = std::max(rmax, p.risk);
        }
    return {cmax + 1.0, rmax + 1.0};
}

IndicatorReport compute_report(const Frontier& A, const Frontier& R) {
    IndicatorReport rep;
    rep.reference_point = default_reference(A, R);
    rep.hypervolume_A = hypervolume(A, rep.reference_point);
    rep.hypervolume_R = hypervolume(R, rep.reference_point);
    if (rep.hypervolume_R <= 0.0)
        throw UndefinedIndicatorError("compute_report: reference set has zero hypervolume");
    rep.gH_percent = 100.0 * (rep.hypervolume_R - rep.hypervolume_A) / rep.hypervolume_R;
    rep.I_eps = eps_indicator(A, R);
    return rep;
}

std::string IndicatorReport::to_json() const {
    nlohmann::json doc;
    doc["hypervolume_A"] = hypervolume_A;
    doc["hypervolume_R"] = hypervolume_R;
    doc["gH_percent"] = gH_percent;
    doc["I_eps"] = I_eps;
    doc["reference_point"] = {reference_point.first, reference_point.second};
    return doc.dump(2) + "\n";
}

}  // namespace biflp
