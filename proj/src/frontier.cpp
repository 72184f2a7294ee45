#include "biflp/frontier.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace biflp {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Exact: return "exact";
        case Provenance::Approximate: return "approximate";
        case Provenance::Reevaluated: return "re-evaluated";
    }
    return "exact";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "exact") return Provenance::Exact;
    if (s == "approximate") return Provenance::Approximate;
    if (s == "re-evaluated") return Provenance::Reevaluated;
    throw std::invalid_argument("unknown provenance tag '" + s + "'");
}

Frontier Frontier::from_points(std::vector<FrontierPoint> points) {
    std::sort(points.begin(), points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.risk != b.risk) return a.risk < b.risk;
        return a.open < b.open;
    });
    Frontier f;
    for (const FrontierPoint& p : points) {
        if (!f.points_.empty() && p.risk >= f.points_.back().risk) continue;  // dominated
        f.points_.push_back(p);
    }
    return f;
}

std::string Frontier::to_json() const {
    nlohmann::json doc = nlohmann::json::array();
    for (const FrontierPoint& p : points_) {
        nlohmann::json jp;
        jp["cost"] = p.cost;
        jp["risk"] = p.risk;
        jp["y"] = p.open;
        jp["provenance"] = to_string(p.provenance);
        doc.push_back(jp);
    }
    return doc.dump(2) + "\n";
}

Frontier Frontier::from_json(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("frontier: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw std::invalid_argument("frontier: top-level value must be an array");
    std::vector<FrontierPoint> points;
    for (const auto& jp : doc) {
        for (const char* key : {"cost", "risk", "y", "provenance"})
            if (!jp.contains(key))
                throw std::invalid_argument(std::string("frontier: missing field '") + key + "'");
        FrontierPoint p;
        p.cost = jp["cost"].get<long long>();
        p.risk = jp["risk"].get<double>();
        p.open = jp["y"].get<std::vector<int>>();
        p.provenance = provenance_from_string(jp["provenance"].get<std::string>());
        points.push_back(std::move(p));
    }
    return from_points(std::move(points));
}

}  // namespace biflp
