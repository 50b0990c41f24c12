#include "hris/geometry.hpp"

#include <cmath>

namespace hris {

Radio Radio::at(double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw GeometryError("carrier frequency must be positive");
  return Radio{carrier_hz, kSpeedOfLight / carrier_hz};
}

ArrayGeometry ArrayGeometry::ula(const Vec3& center, std::size_t m, double spacing) {
  if (m == 0) throw GeometryError("array needs at least one element");
  ArrayGeometry arr;
  arr.center = center;
  arr.kind = ArrayKind::ula;
  arr.nx = m;
  arr.nz = 1;
  arr.spacing = spacing;
  arr.element_offsets.reserve(m);
  const double mid = 0.5 * static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    arr.element_offsets.emplace_back((static_cast<double>(i) - mid) * spacing, 0.0, 0.0);
  }
  return arr;
}

ArrayGeometry ArrayGeometry::planar(const Vec3& center, std::size_t nx, std::size_t nz,
                                    double spacing) {
  if (nx == 0 || nz == 0) throw GeometryError("array needs at least one element");
  ArrayGeometry arr;
  arr.center = center;
  arr.kind = ArrayKind::planar;
  arr.nx = nx;
  arr.nz = nz;
  arr.spacing = spacing;
  arr.element_offsets.reserve(nx * nz);
  const double mid_x = 0.5 * static_cast<double>(nx - 1);
  const double mid_z = 0.5 * static_cast<double>(nz - 1);
  for (std::size_t iz = 0; iz < nz; ++iz) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      arr.element_offsets.emplace_back((static_cast<double>(ix) - mid_x) * spacing, 0.0,
                                       (static_cast<double>(iz) - mid_z) * spacing);
    }
  }
  return arr;
}

Vec3 wave_vector(const Vec3& p, const Vec3& q, double wavelength) {
  const Vec3 d = p - q;
  const double dist = d.norm();
  if (dist == 0.0) throw GeometryError("degenerate link");
  return (2.0 * kPi / wavelength) * d / dist;
}

CVector array_response_direction(const ArrayGeometry& arr, const Vec3& unit_dir,
                                 const Radio& radio) {
  const Vec3 k = (2.0 * kPi / radio.wavelength) * unit_dir;
  CVector a(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t n = 0; n < arr.size(); ++n) {
    a(static_cast<Eigen::Index>(n)) = std::polar(1.0, k.dot(arr.element_offsets[n]));
  }
  return a;
}

CVector array_response(const ArrayGeometry& arr, const Vec3& p, const Radio& radio) {
  const Vec3 k = wave_vector(p, arr.center, radio.wavelength);
  CVector a(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t n = 0; n < arr.size(); ++n) {
    a(static_cast<Eigen::Index>(n)) = std::polar(1.0, k.dot(arr.element_offsets[n]));
  }
  return a;
}

Vec3 direction_from_angles(double azimuth, double elevation) {
  return {std::sin(azimuth) * std::cos(elevation), std::cos(azimuth) * std::cos(elevation),
          std::sin(elevation)};
}

}  // namespace hris
