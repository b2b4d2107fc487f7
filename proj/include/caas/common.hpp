#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace caas {

// ============================================================
// Physical constants
// ============================================================

inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kEarthMuKm3S2 = 398600.4418;
inline constexpr double kEarthRotationRadS = 7.2921159e-5;
inline constexpr double kSpeedOfLightKmS = 299792.458;
inline constexpr double kBoltzmann = 1.380649e-23;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kDegToRad; }
inline constexpr double rad2deg(double rad) { return rad * kRadToDeg; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

using SatelliteId = int;
using UeId = int;

// ============================================================
// Errors
// ============================================================

enum class ErrorKind {
    InvalidSpec,
    Domain,
    NotVisible,
    Ordering,
    InsufficientData,
    CoverageViolation,
    Lookup,
    Shape,
    InfeasibleSwitch,
    NoInitialCoverage,
    CoverageGap,
    DualInfeasible,
    Parse,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// ============================================================
// Vec3
// ============================================================

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const { return *this * (1.0 / norm()); }
};

inline double angle_between_deg(const Vec3& a, const Vec3& b) {
    return rad2deg(std::atan2(a.cross(b).norm(), a.dot(b)));
}

}  // namespace caas
