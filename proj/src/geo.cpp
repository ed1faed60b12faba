#include "rpinfer/geo.hpp"

#include <cmath>

namespace rpinfer {

namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;
constexpr double kWgs84B = kWgs84A * (1.0 - kWgs84F);
constexpr double kMeanEarthRadiusM = 6371008.8;

double deg2rad(double d) { return d * M_PI / 180.0; }

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.latitude);
    const double phi2 = deg2rad(b.latitude);
    const double dphi = deg2rad(b.latitude - a.latitude);
    const double dlam = deg2rad(b.longitude - a.longitude);
    const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kMeanEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

// Vincenty inverse problem on WGS-84. Returns nullopt when the lambda
// iteration fails to converge (near-antipodal points).
std::optional<double> vincenty_m(const GeoPoint& p1, const GeoPoint& p2) {
    const double U1 = std::atan((1.0 - kWgs84F) * std::tan(deg2rad(p1.latitude)));
    const double U2 = std::atan((1.0 - kWgs84F) * std::tan(deg2rad(p2.latitude)));
    const double L = deg2rad(p2.longitude - p1.longitude);
    const double sinU1 = std::sin(U1), cosU1 = std::cos(U1);
    const double sinU2 = std::sin(U2), cosU2 = std::cos(U2);

    double lambda = L;
    double sinSigma = 0, cosSigma = 0, sigma = 0, cos2Alpha = 0, cos2SigmaM = 0;
    bool converged = false;
    for (int i = 0; i < 200; ++i) {
        const double sinLambda = std::sin(lambda), cosLambda = std::cos(lambda);
        sinSigma = std::sqrt(std::pow(cosU2 * sinLambda, 2) +
                             std::pow(cosU1 * sinU2 - sinU1 * cosU2 * cosLambda, 2));
        if (sinSigma == 0.0) return 0.0;  // coincident
        cosSigma = sinU1 * sinU2 + cosU1 * cosU2 * cosLambda;
        sigma = std::atan2(sinSigma, cosSigma);
        const double sinAlpha = cosU1 * cosU2 * sinLambda / sinSigma;
        cos2Alpha = 1.0 - sinAlpha * sinAlpha;
        cos2SigmaM = cos2Alpha != 0.0 ? cosSigma - 2.0 * sinU1 * sinU2 / cos2Alpha : 0.0;
        const double C = kWgs84F / 16.0 * cos2Alpha * (4.0 + kWgs84F * (4.0 - 3.0 * cos2Alpha));
        const double prev = lambda;
        lambda = L + (1.0 - C) * kWgs84F * sinAlpha *
                         (sigma + C * sinSigma *
                                      (cos2SigmaM + C * cosSigma *
                                                        (-1.0 + 2.0 * cos2SigmaM * cos2SigmaM)));
        if (std::abs(lambda - prev) < 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged) return std::nullopt;

    const double u2 = cos2Alpha * (kWgs84A * kWgs84A - kWgs84B * kWgs84B) / (kWgs84B * kWgs84B);
    const double A = 1.0 + u2 / 16384.0 * (4096.0 + u2 * (-768.0 + u2 * (320.0 - 175.0 * u2)));
    const double B = u2 / 1024.0 * (256.0 + u2 * (-128.0 + u2 * (74.0 - 47.0 * u2)));
    const double dSigma =
        B * sinSigma *
        (cos2SigmaM +
         B / 4.0 *
             (cosSigma * (-1.0 + 2.0 * cos2SigmaM * cos2SigmaM) -
              B / 6.0 * cos2SigmaM * (-3.0 + 4.0 * sinSigma * sinSigma) *
                  (-3.0 + 4.0 * cos2SigmaM * cos2SigmaM)));
    return kWgs84B * A * (sigma - dSigma);
}

}  // namespace

bool valid_coordinates(double latitude, double longitude) {
    return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 &&
           longitude <= 180.0 && std::isfinite(latitude) && std::isfinite(longitude);
}

double geodesic_km(const GeoPoint& a, const GeoPoint& b) {
    if (a == b) return 0.0;
    if (auto m = vincenty_m(a, b)) return *m / 1000.0;
    return haversine_m(a, b) / 1000.0;
}

std::vector<std::vector<double>> distance_matrix_km(const std::vector<GeoPoint>& points) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            m[i][j] = m[j][i] = geodesic_km(points[i], points[j]);
        }
    }
    return m;
}

std::optional<double> min_cross_distance_km(const std::vector<GeoPoint>& a,
                                            const std::vector<GeoPoint>& b) {
    if (a.empty() || b.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pa : a) {
        for (const auto& pb : b) best = std::min(best, geodesic_km(pa, pb));
    }
    return best;
}

std::optional<double> max_cross_distance_km(const std::vector<GeoPoint>& a,
                                            const std::vector<GeoPoint>& b) {
    if (a.empty() || b.empty()) return std::nullopt;
    double best = 0.0;
    for (const auto& pa : a) {
        for (const auto& pb : b) best = std::max(best, geodesic_km(pa, pb));
    }
    return best;
}

std::optional<double> max_spread_km(const std::vector<GeoPoint>& points) {
    if (points.empty()) return std::nullopt;
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            best = std::max(best, geodesic_km(points[i], points[j]));
        }
    }
    return best;
}

}  // namespace rpinfer
