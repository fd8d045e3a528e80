#pragma once

// Angular kernels of isotropic Fourier integrals in d = 1, 2, 3.
//
// For a radial f and x = r·e with t = e·P̂ the cosine to a fixed axis P̂,
//   ∫ f(|p|) cos(p·x) dp             = S_d ∫ f p^{d-1} cos_kernel(pr) dp
//   ∫ f(|p|) (p·P̂) sin(p·x) dp       = t · S_d ∫ f p^d sin_kernel(pr) dp
//   ∫ f(|p|) (p·P̂)^2 cos(p·x) dp     = S_d ∫ f p^{d+1} [quad_a(pr) + t^2 quad_b(pr)] dp
// with S_d the area of the unit sphere. The kernels are
//   d = 1: cos z,   sin z,   cos z,        0
//   d = 2: J0(z),   J1(z),   J1(z)/z,     -J2(z)
//   d = 3: j0(z),   j1(z),   j1(z)/z,     -j2(z)
// The *_minus variants subtract the value (or linear term) at z = 0 without cancellation.

namespace polaron::special {

double cos_kernel(int d, double z);
/// cos_kernel(d, z) - 1.
double cos_kernel_minus(int d, double z);

double sin_kernel(int d, double z);
/// sin_kernel(d, z) - z/d.
double sin_kernel_minus(int d, double z);

double quad_a(int d, double z);
/// quad_a(d, z) - 1/d.
double quad_a_minus(int d, double z);
double quad_b(int d, double z);

}  // namespace polaron::special
