#include "polaron/special.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>

namespace polaron::special {
namespace {

constexpr double kSeriesSwitch = 1.0;

// sum_{k>=k0} (-1)^k z^{2k} / (2^k k! (2n+2k+1)!!) : spherical Bessel j_n(z)/z^n tail.
double sph_series(int n, double z, int k0) {
  const double z2 = z * z;
  // term_k = (-1)^k z^{2k} / (2^k k! (2n+2k+1)!!)
  double dfact = 1.0;  // (2n+1)!!
  for (int j = 3; j <= 2 * n + 1; j += 2) dfact *= j;
  double term = 1.0 / dfact;
  double sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    if (k >= k0) sum += term;
    if (k >= k0 && std::abs(term) < 1e-18 * std::abs(sum)) break;
    term *= -z2 / (2.0 * (k + 1) * (2.0 * n + 2.0 * k + 3.0));
  }
  return sum;
}

// sum_{k>=k0} (-1)^k (z/2)^{2k} / (k! (k+n)!) : cylindrical Bessel J_n(z)/(z/2)^n tail.
double cyl_series(int n, double z, int k0) {
  const double q = 0.25 * z * z;
  double nfact = 1.0;
  for (int j = 2; j <= n; ++j) nfact *= j;
  double term = 1.0 / nfact;
  double sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    if (k >= k0) sum += term;
    if (k >= k0 && std::abs(term) < 1e-18 * std::abs(sum)) break;
    term *= -q / ((k + 1.0) * (k + 1.0 + n));
  }
  return sum;
}

double sph_j0(double z) { return z < kSeriesSwitch ? sph_series(0, z, 0) : std::sin(z) / z; }
double sph_j1(double z) {
  return z < kSeriesSwitch ? z * sph_series(1, z, 0) : (std::sin(z) / z - std::cos(z)) / z;
}
double sph_j2(double z) {
  if (z < kSeriesSwitch) return z * z * sph_series(2, z, 0);
  return ((3.0 / (z * z) - 1.0) * std::sin(z) - 3.0 * std::cos(z) / z) / z;
}

}  // namespace

double cos_kernel(int d, double z) {
  switch (d) {
    case 1:
      return std::cos(z);
    case 2:
      return boost::math::cyl_bessel_j(0, z);
    default:
      return sph_j0(z);
  }
}

double cos_kernel_minus(int d, double z) {
  switch (d) {
    case 1: {
      const double s = std::sin(0.5 * z);
      return -2.0 * s * s;
    }
    case 2:
      return z < kSeriesSwitch ? cyl_series(0, z, 1) : boost::math::cyl_bessel_j(0, z) - 1.0;
    default:
      return z < kSeriesSwitch ? sph_series(0, z, 1) : std::sin(z) / z - 1.0;
  }
}

double sin_kernel(int d, double z) {
  switch (d) {
    case 1:
      return std::sin(z);
    case 2:
      return boost::math::cyl_bessel_j(1, z);
    default:
      return sph_j1(z);
  }
}

double sin_kernel_minus(int d, double z) {
  switch (d) {
    case 1: {
      if (z >= kSeriesSwitch) return std::sin(z) - z;
      // sin z - z = sum_{k>=1} (-1)^k z^{2k+1} / (2k+1)!
      const double z2 = z * z;
      double term = -z * z2 / 6.0;
      double sum = 0.0;
      for (int k = 1; k < 30; ++k) {
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        term *= -z2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
      }
      return sum;
    }
    case 2:
      return z < kSeriesSwitch ? 0.5 * z * cyl_series(1, z, 1) : boost::math::cyl_bessel_j(1, z) - 0.5 * z;
    default:
      return z < kSeriesSwitch ? z * sph_series(1, z, 1) : sph_j1(z) - z / 3.0;
  }
}

double quad_a(int d, double z) {
  switch (d) {
    case 1:
      return std::cos(z);
    case 2:
      return z < kSeriesSwitch ? 0.5 * cyl_series(1, z, 0) : boost::math::cyl_bessel_j(1, z) / z;
    default:
      return z < kSeriesSwitch ? sph_series(1, z, 0) : sph_j1(z) / z;
  }
}

double quad_a_minus(int d, double z) {
  switch (d) {
    case 1:
      return cos_kernel_minus(1, z);
    case 2:
      return z < kSeriesSwitch ? 0.5 * cyl_series(1, z, 1) : boost::math::cyl_bessel_j(1, z) / z - 0.5;
    default:
      return z < kSeriesSwitch ? sph_series(1, z, 1) : sph_j1(z) / z - 1.0 / 3.0;
  }
}

double quad_b(int d, double z) {
  switch (d) {
    case 1:
      return 0.0;
    case 2:
      return z < kSeriesSwitch ? -0.25 * z * z * cyl_series(2, z, 0) : -boost::math::cyl_bessel_j(2, z);
    default:
      return -sph_j2(z);
  }
}

}  // namespace polaron::special
