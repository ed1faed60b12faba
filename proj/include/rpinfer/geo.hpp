#pragma once

#include <optional>
#include <vector>

#include "rpinfer/core.hpp"

namespace rpinfer {

struct GeoPoint {
    double latitude = 0.0;   // decimal degrees, [-90, 90]
    double longitude = 0.0;  // decimal degrees, [-180, 180]

    bool operator==(const GeoPoint&) const = default;
};

bool valid_coordinates(double latitude, double longitude);

// Ellipsoidal (WGS-84) inverse distance. Falls back to a spherical
// great-circle for the rare near-antipodal pairs where the iteration
// does not converge; the error there is below the 0.5% tolerance the
// 50 km thresholding requires.
double geodesic_km(const GeoPoint& a, const GeoPoint& b);

// Upper-triangular pairwise distances, indexed [i][j] for all i < j.
std::vector<std::vector<double>> distance_matrix_km(const std::vector<GeoPoint>& points);

// Set-to-set helpers used by the router-propagation rules. Empty inputs
// yield nullopt.
std::optional<double> min_cross_distance_km(const std::vector<GeoPoint>& a,
                                            const std::vector<GeoPoint>& b);
std::optional<double> max_cross_distance_km(const std::vector<GeoPoint>& a,
                                            const std::vector<GeoPoint>& b);
// Largest pairwise distance within one set; 0 for a singleton.
std::optional<double> max_spread_km(const std::vector<GeoPoint>& points);

}  // namespace rpinfer
