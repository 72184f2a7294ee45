#pragma once

#include <string>
#include <vector>

#include "biflp/formulations.hpp"

namespace biflp {

enum class Provenance { Exact, Approximate, Reevaluated };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct FrontierPoint {
    long long cost = 0;
    double risk = 0.0;
    std::vector<int> open;  // first-stage y per site
    Provenance provenance = Provenance::Exact;
};

/// Non-dominated points ordered by strictly increasing cost and strictly
/// decreasing risk (minimization in both objectives).
class Frontier {
public:
    Frontier() = default;

    /// Deduplicates, dominance-filters and sorts.
    static Frontier from_points(std::vector<FrontierPoint> points);

    const std::vector<FrontierPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    std::string to_json() const;
    static Frontier from_json(const std::string& bytes);

private:
    std::vector<FrontierPoint> points_;
};

}  // namespace biflp
