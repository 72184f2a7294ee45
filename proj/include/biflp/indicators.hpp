#pragma once

#include <stdexcept>
#include <utility>

#include "biflp/frontier.hpp"

namespace biflp {

class UndefinedIndicatorError : public std::runtime_error {
public:
    explicit UndefinedIndicatorError(const std::string& what) : std::runtime_error(what) {}
};

struct IndicatorReport {
    double hypervolume_A = 0.0;
    double hypervolume_R = 0.0;
    double gH_percent = 0.0;
    double I_eps = 0.0;
    std::pair<double, double> reference_point = {0.0, 0.0};

    std::string to_json() const;
};

/// Area dominated by the frontier relative to the reference point
/// (minimization in both objectives). Every point must dominate the
/// reference strictly in both coordinates.
double hypervolume(const Frontier& frontier, std::pair<double, double> reference);

/// gH% = 100 * (I_H(R) - I_H(A)) / I_H(R); negative when A covers more area.
double hypervolume_gap(const Frontier& A, const Frontier& R, std::pair<double, double> reference);

/// Multiplicative epsilon indicator: the minimal factor by which A must be
/// scaled so that it weakly dominates R. When any coordinate of A or R is
/// zero, both objectives of both sets are shifted by +1 first.
double eps_indicator(const Frontier& A, const Frontier& R);

/// Reference point one unit beyond the componentwise maximum of A and R.
std::pair<double, double> default_reference(const Frontier& A, const Frontier& R);

IndicatorReport compute_report(const Frontier& A, const Frontier& R);

}  // namespace biflp
