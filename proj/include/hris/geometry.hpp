#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hris {

using Vec3 = Eigen::Vector3d;
using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

class GeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Radio {
  double carrier_hz = 28e9;
  double wavelength = kSpeedOfLight / 28e9;

  static Radio at(double carrier_hz);
};

enum class ArrayKind { ula, planar };

/// Antenna array described by its center and per-element offsets from it.
///
/// ULAs are laid out along x. Planar arrays lie in the x-z plane with the
/// boresight along +y; elements are indexed row-major with x fastest.
struct ArrayGeometry {
  Vec3 center = Vec3::Zero();
  std::vector<Vec3> element_offsets;
  ArrayKind kind = ArrayKind::ula;
  std::size_t nx = 0;
  std::size_t nz = 1;
  double spacing = 0.0;

  std::size_t size() const { return element_offsets.size(); }

  static ArrayGeometry ula(const Vec3& center, std::size_t m, double spacing);
  static ArrayGeometry planar(const Vec3& center, std::size_t nx, std::size_t nz,
                              double spacing);
};

/// (2*pi/lambda) * (p - q) / |q - p|. Throws GeometryError on coincident points.
Vec3 wave_vector(const Vec3& p, const Vec3& q, double wavelength);

/// Response toward the location p: entry n is exp(j <k, offset_n>) with k the
/// wave vector from the array center toward p.
CVector array_response(const ArrayGeometry& arr, const Vec3& p, const Radio& radio);

/// Same as array_response for a far-field unit direction.
CVector array_response_direction(const ArrayGeometry& arr, const Vec3& unit_dir,
                                 const Radio& radio);

/// Unit vector for (azimuth, elevation) in the frame of a planar array facing +y.
/// Azimuth is measured from +y toward +x, elevation from the horizontal plane.
Vec3 direction_from_angles(double azimuth, double elevation);

}  // namespace hris
