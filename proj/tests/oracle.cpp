#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double pi = 3.14159265358979323846;

long double binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients c_j of P_n(x) = sum_j c_j x^j.
std::vector<long double> legendre_coeffs(int n) {
  std::vector<long double> c(n + 1, 0.0L);
  for (int k = 0; 2 * k <= n; ++k) {
    const long double t = ((k % 2) ? -1.0L : 1.0L) * binom(n, k) * binom(2 * n - 2 * k, n) / std::pow(2.0L, n);
    c[n - 2 * k] += t;
  }
  return c;
}

long double poly(const std::vector<long double>& c, long double x) {
  long double s = 0;
  for (std::size_t j = c.size(); j-- > 0;) s = s * x + c[j];
  return s;
}

std::vector<long double> derive(const std::vector<long double>& c) {
  if (c.size() <= 1) return {0.0L};
  std::vector<long double> d(c.size() - 1);
  for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = c[j] * static_cast<long double>(j);
  return d;
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double radial_chi(const apwdg::MixedBasis& basis, double R, int n, double r) {
  if (basis.params().radial == apwdg::RadialKind::Polynomial) return legendre(n, 2.0 * r / R - 1.0);
  return std::pow(r, n) * std::exp(-basis.params().slater_eta * r);
}

cplx sphere_value(const apwdg::MixedBasis& basis, double R, const apwdg::SphereDof& d, const Vec3& x) {
  const double r = x.norm();
  return radial_chi(basis, R, d.n, r) * ylm(d.l, d.m, x);
}

}  // namespace

std::vector<Node> gauss(int n, double a, double b) {
  std::vector<Node> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    out[i] = {0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w};
  }
  return out;
}

double legendre(int n, double x) { return static_cast<double>(poly(legendre_coeffs(n), x)); }

double legendre_deriv(int n, double x) { return static_cast<double>(poly(derive(legendre_coeffs(n)), x)); }

double assoc_legendre(int l, int m, double x) {
  auto c = legendre_coeffs(l);
  for (int i = 0; i < m; ++i) c = derive(c);
  const long double s = std::pow(1.0L - static_cast<long double>(x) * x, m / 2.0L);
  return static_cast<double>(((m % 2) ? -1.0L : 1.0L) * s * poly(c, x));
}

cplx ylm(int l, int m, double theta, double phi) {
  if (m < 0) return ((-m) % 2 ? -1.0 : 1.0) * std::conj(ylm(l, -m, theta, phi));
  const double norm = std::sqrt((2 * l + 1) / (4 * pi) * factorial(l - m) / factorial(l + m));
  return norm * assoc_legendre(l, m, std::cos(theta)) * std::polar(1.0, m * phi);
}

cplx ylm(int l, int m, const Vec3& dir) {
  const double r = dir.norm();
  const double theta = r > 0 ? std::acos(std::clamp(dir.z / r, -1.0, 1.0)) : 0.0;
  const double phi = std::atan2(dir.y, dir.x);
  return ylm(l, m, theta, phi);
}

double sph_bessel(int l, double x) {
  // Composite Gauss-Legendre on [0, pi] with panels finer than the oscillation period.
  const int panels = 8 + static_cast<int>(std::abs(x));
  double s = 0;
  for (int p = 0; p < panels; ++p) {
    for (const auto& nd : gauss(24, pi * p / panels, pi * (p + 1) / panels))
      s += nd.w * std::cos(x * std::cos(nd.x)) * std::pow(std::sin(nd.x), 2 * l + 1);
  }
  return std::pow(x, l) / (std::pow(2.0, l + 1) * factorial(l)) * s;
}

double gaunt(int l1, int m1, int l2, int m2, int l3, int m3) {
  const int n = (l1 + l2 + l3) / 2 + 2;
  const int nphi = l1 + l2 + l3 + 2;
  double s = 0;
  for (const auto& t : gauss(n + 2, -1.0, 1.0)) {
    const double theta = std::acos(t.x);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2 * pi * j / nphi;
      s += t.w * (2 * pi / nphi) *
           (std::conj(ylm(l1, m1, theta, phi)) * ylm(l2, m2, theta, phi) * ylm(l3, m3, theta, phi)).real();
    }
  }
  return s;
}

Ewald::Ewald(double edge, double alpha) : edge_(edge), alpha_(alpha), volume_(edge * edge * edge) {
  const double g = 2 * pi / edge;
  const double kmax = 2 * alpha * std::sqrt(37.0);
  const int nmax = static_cast<int>(kmax / g) + 1;
  for (int a = -nmax; a <= nmax; ++a)
    for (int b = -nmax; b <= nmax; ++b)
      for (int c = -nmax; c <= nmax; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const Vec3 k{g * a, g * b, g * c};
        const double k2 = k.dot(k);
        if (k2 > kmax * kmax) continue;
        modes_.push_back({k, 4 * pi / volume_ * std::exp(-k2 / (4 * alpha * alpha)) / k2});
      }
}

double Ewald::sum(const Vec3& d, bool drop_center) const {
  double s = 0;
  const int images = static_cast<int>(std::ceil(6.0 / (alpha_ * edge_))) + 1;
  for (int a = -images; a <= images; ++a)
    for (int b = -images; b <= images; ++b)
      for (int c = -images; c <= images; ++c) {
        const Vec3 x = d + Vec3{a * edge_, b * edge_, c * edge_};
        const double r = x.norm();
        if (a == 0 && b == 0 && c == 0 && drop_center) {
          s += r > 1e-8 ? -std::erf(alpha_ * r) / r : -2 * alpha_ / std::sqrt(pi);
          continue;
        }
        s += std::erfc(alpha_ * r) / r;
      }
  for (const auto& m : modes_) s += m.w * std::cos(m.k.dot(d));
  return s - pi / (alpha_ * alpha_ * volume_);
}

double Ewald::phi(const Vec3& d) const { return sum(d, false); }
double Ewald::phi_regular(const Vec3& d) const { return sum(d, true); }

BasisValue eval_basis(const apwdg::MixedBasis& basis, std::size_t i, const Vec3& r) {
  BasisValue out{};
  const double D = basis.cell().edge();
  if (i < basis.n_pw()) {
    const auto n = basis.pw()[i].n;
    const Vec3 k{2 * pi * n.n1 / D, 2 * pi * n.n2 / D, 2 * pi * n.n3 / D};
    out.value = std::polar(1.0 / std::sqrt(basis.cell().volume()), k.dot(r));
    const double kc[3] = {k.x, k.y, k.z};
    for (int a = 0; a < 3; ++a) out.grad[a] = cplx(0, kc[a]) * out.value;
    return out;
  }
  const auto& dof = basis.sphere_dofs()[(i - basis.n_pw()) % basis.sphere_block()];
  const double R = basis.sites()[(i - basis.n_pw()) / basis.sphere_block()].radius;
  out.value = sphere_value(basis, R, dof, r);
  const double h = 1e-3 * std::max(r.norm(), 1e-6);
  for (int a = 0; a < 3; ++a) {
    Vec3 e{};
    (a == 0 ? e.x : a == 1 ? e.y : e.z) = h;
    out.grad[a] = (-sphere_value(basis, R, dof, r + 2.0 * e) + 8.0 * sphere_value(basis, R, dof, r + e) -
                   8.0 * sphere_value(basis, R, dof, r - e) + sphere_value(basis, R, dof, r - 2.0 * e)) /
                  (12.0 * h);
  }
  return out;
}

namespace {

struct Accum {
  apwdg::CMatrix H, M;
};

void accumulate(std::size_t n, const std::vector<BasisValue>& v, double w, double pot, const std::vector<char>& mask,
                Accum& acc) {
  for (std::size_t q = 0; q < n; ++q) {
    if (!mask[q]) continue;
    for (std::size_t p = 0; p < n; ++p) {
      if (!mask[p]) continue;
      const cplx vv = v[q].value * std::conj(v[p].value);
      cplx gg = 0;
      for (int a = 0; a < 3; ++a) gg += v[q].grad[a] * std::conj(v[p].grad[a]);
      acc.M(p, q) += w * vv;
      acc.H(p, q) += w * (0.5 * gg + pot * vv);
    }
  }
}

Accum volume_terms(const apwdg::MixedBasis& basis, bool coulomb, int order, const Ewald& ewald) {
  const std::size_t n = basis.total_dim();
  Accum acc{apwdg::CMatrix(n, n), apwdg::CMatrix(n, n)};
  const auto& site = basis.sites().front();
  const Vec3 c = site.center;
  const double R = site.radius, Z = site.charge, D = basis.cell().edge();
  std::vector<char> out_mask(n, 0), in_mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) (i < basis.n_pw() ? out_mask : in_mask)[i] = 1;
  std::vector<BasisValue> vals(n);

  // Interstitial: six pyramids with apex at the site center over the cube centered there.
  const auto gu = gauss(order, -D / 2, D / 2);
  const auto gt = gauss(order, 0.0, 1.0);
  for (int axis = 0; axis < 3; ++axis)
    for (int sgn = -1; sgn <= 1; sgn += 2)
      for (const auto& u : gu)
        for (const auto& v : gu) {
          double w3[3];
          w3[axis] = sgn * D / 2;
          w3[(axis + 1) % 3] = u.x;
          w3[(axis + 2) % 3] = v.x;
          const Vec3 w{w3[0], w3[1], w3[2]};
          const double t0 = R / w.norm();
          for (const auto& t : gt) {
            const double tt = t0 + (1 - t0) * t.x;
            const double jac = tt * tt * (D / 2) * (1 - t0);
            const Vec3 d = w * tt;
            const double pot = coulomb ? -Z * ewald.phi(d) : 0.0;
            for (std::size_t i = 0; i < basis.n_pw(); ++i) vals[i] = eval_basis(basis, i, c + d);
            accumulate(n, vals, u.w * v.w * t.w * jac, pot, out_mask, acc);
          }
        }

  // Ball: spherical coordinates around the center.
  const auto gr = gauss(order, 0.0, R);
  const auto gc = gauss(order, -1.0, 1.0);
  const int nphi = 2 * order;
  for (const auto& r : gr)
    for (const auto& ct : gc)
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2 * pi * j / nphi, st = std::sqrt(1 - ct.x * ct.x);
        const Vec3 d = Vec3{st * std::cos(phi), st * std::sin(phi), ct.x} * r.x;
        const double pot = coulomb ? -Z * (1.0 / r.x + ewald.phi_regular(d)) : 0.0;
        for (std::size_t i = basis.n_pw(); i < n; ++i) vals[i] = eval_basis(basis, i, d);
        accumulate(n, vals, r.w * ct.w * (2 * pi / nphi) * r.x * r.x, pot, in_mask, acc);
      }
  return acc;
}

}  // namespace

apwdg::CMatrix dg_surface_terms(const apwdg::MixedBasis& basis, double sigma, int n_theta) {
  const std::size_t n = basis.total_dim(), npw = basis.n_pw();
  apwdg::CMatrix S(n, n);
  const auto& site = basis.sites().front();
  const double R = site.radius;
  const int nphi = 2 * n_theta;
  std::vector<cplx> jump(n), avg(n);
  for (const auto& ct : gauss(n_theta, -1.0, 1.0))
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2 * pi * j / nphi, st = std::sqrt(1 - ct.x * ct.x);
      const Vec3 rhat{st * std::cos(phi), st * std::sin(phi), ct.x};
      const Vec3 d = rhat * R;
      const double w = ct.w * (2 * pi / nphi) * R * R;
      for (std::size_t i = 0; i < n; ++i) {
        if (i < npw) {
          const BasisValue b = eval_basis(basis, i, site.center + d);
          const cplx dr = b.grad[0] * rhat.x + b.grad[1] * rhat.y + b.grad[2] * rhat.z;
          jump[i] = b.value;
          avg[i] = 0.5 * dr;
        } else {
          const double h = 1e-4 * R;
          const cplx f2 = eval_basis(basis, i, rhat * (R + 2 * h)).value, f1 = eval_basis(basis, i, rhat * (R + h)).value;
          const cplx g1 = eval_basis(basis, i, rhat * (R - h)).value, g2 = eval_basis(basis, i, rhat * (R - 2 * h)).value;
          const cplx dr = (-f2 + 8.0 * f1 - 8.0 * g1 + g2) / (12.0 * h);
          jump[i] = -eval_basis(basis, i, d).value;
          avg[i] = 0.5 * dr;
        }
      }
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t p = 0; p < n; ++p)
          S(p, q) += w * (0.5 * avg[q] * std::conj(jump[p]) + 0.5 * std::conj(avg[p]) * jump[q] +
                          sigma * jump[q] * std::conj(jump[p]));
    }
  return S;
}

DgQuadrature dg_by_quadrature(const apwdg::MixedBasis& basis, double sigma, bool coulomb, double rel_tol,
                              int base_order, int max_levels) {
  if (basis.n_sites() != 1) throw std::invalid_argument("dg_by_quadrature handles a single site");
  const Ewald ewald(basis.cell().edge(), 0.37 * 10.0 / basis.cell().edge());
  const std::size_t n = basis.total_dim();
  DgQuadrature out;
  apwdg::CMatrix prevH, prevM;
  for (int level = 0; level < max_levels; ++level) {
    const int order = base_order << level;
    Accum acc = volume_terms(basis, coulomb, order, ewald);
    const apwdg::CMatrix S = dg_surface_terms(basis, sigma, order + 4);
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t p = 0; p < n; ++p) acc.H(p, q) += S(p, q);
    out.H = acc.H;
    out.M = acc.M;
    out.levels = level + 1;
    if (level > 0) {
      double change = 0;
      const double scale = std::max(apwdg::max_abs(out.H), apwdg::max_abs(out.M));
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t p = 0; p < n; ++p) {
          const double dh = std::abs(out.H(p, q) - prevH(p, q)) / std::max(std::abs(out.H(p, q)), 1e-9 * scale);
          const double dm = std::abs(out.M(p, q) - prevM(p, q)) / std::max(std::abs(out.M(p, q)), 1e-9 * scale);
          change = std::max({change, dh, dm});
        }
      out.last_change = change;
      if (change < rel_tol) break;
    }
    prevH = out.H;
    prevM = out.M;
  }
  return out;
}

cplx interstitial_integral(const apwdg::MixedBasis& basis, const Vec3& k, int order) {
  const auto& site = basis.sites().front();
  const double R = site.radius, D = basis.cell().edge();
  cplx s = 0;
  const auto gu = gauss(order, -D / 2, D / 2);
  const auto gt = gauss(order, 0.0, 1.0);
  for (int axis = 0; axis < 3; ++axis)
    for (int sgn = -1; sgn <= 1; sgn += 2)
      for (const auto& u : gu)
        for (const auto& v : gu) {
          double w3[3];
          w3[axis] = sgn * D / 2;
          w3[(axis + 1) % 3] = u.x;
          w3[(axis + 2) % 3] = v.x;
          const Vec3 w{w3[0], w3[1], w3[2]};
          const double t0 = R / w.norm();
          for (const auto& t : gt) {
            const double tt = t0 + (1 - t0) * t.x;
            s += u.w * v.w * t.w * tt * tt * (D / 2) * (1 - t0) * std::polar(1.0, k.dot(site.center + w * tt));
          }
        }
  return s / basis.cell().volume();
}

}  // namespace oracle
