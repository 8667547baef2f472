#include "apwdg/specialfn.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace apwdg {

namespace {

// Fully normalized associated Legendre functions Pbar_l^m(cos theta) for m >= 0, so that
// Y_lm = Pbar_l^m e^{i m phi}. Stored at lm_index(l, m).
void normalized_legendre(int lmax, double c, double s, double* p) {
  double pmm = 0.5 / std::sqrt(kPi);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    p[lm_index(m, m)] = pmm;
    if (m == lmax) break;
    double p1 = std::sqrt(2.0 * m + 3.0) * c * pmm;
    p[lm_index(m + 1, m)] = p1;
    double p0 = pmm;
    for (int l = m + 2; l <= lmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      const double pl = a * (c * p1 - b * p0);
      p[lm_index(l, m)] = pl;
      p0 = p1;
      p1 = pl;
    }
  }
}

void fill_harmonics(int lmax, double c, double s, cplx eiphi, cplx* out) {
  std::vector<double> p(lm_count(lmax));
  normalized_legendre(lmax, c, s, p.data());
  cplx em(1.0, 0.0);
  for (int m = 0; m <= lmax; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = m; l <= lmax; ++l) {
      const cplx y = p[lm_index(l, m)] * em;
      out[lm_index(l, m)] = y;
      if (m > 0) out[lm_index(l, -m)] = sign * std::conj(y);
    }
    em *= eiphi;
  }
}

long double log_factorial(int n) {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(512);
    t[0] = 0;
    for (int i = 1; i < 512; ++i) t[i] = t[i - 1] + std::log(static_cast<long double>(i));
    return t;
  }();
  return table.at(n);
}

}  // namespace

cplx sph_harm(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) {
    std::ostringstream msg;
    msg << "spherical harmonic index (l=" << l << ", m=" << m << ")";
    throw Error(ErrorCode::InvalidIndex, msg.str());
  }
  std::vector<cplx> all(lm_count(l));
  sph_harm_all(l, std::cos(theta), phi, all.data());
  return all[lm_index(l, m)];
}

void sph_harm_all(int lmax, double cos_theta, double phi, cplx* out) {
  const double s = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  fill_harmonics(lmax, cos_theta, s, std::polar(1.0, phi), out);
}

void sph_harm_all(int lmax, const Vec3& v, cplx* out) {
  const double r = v.norm();
  if (r == 0.0) {
    fill_harmonics(lmax, 1.0, 0.0, cplx(1.0, 0.0), out);
    return;
  }
  const double rho = std::hypot(v.x, v.y);
  const cplx eiphi = rho > 0 ? cplx(v.x / rho, v.y / rho) : cplx(1.0, 0.0);
  fill_harmonics(lmax, v.z / r, rho / r, eiphi, out);
}

std::vector<cplx> sph_harm_all(int lmax, const Vec3& v) {
  std::vector<cplx> out(lm_count(lmax));
  sph_harm_all(lmax, v, out.data());
  return out;
}

double double_factorial(int n) {
  double f = 1;
  for (int k = n; k > 1; k -= 2) f *= k;
  return f;
}

void sph_bessel_all(int lmax, double x, double* j, double* dj) {
  const int top = lmax + 1;  // one extra order for the derivative identity
  std::vector<double> f(top + 1, 0.0);
  if (x == 0.0) {
    for (int l = 0; l <= lmax; ++l) {
      j[l] = l == 0 ? 1.0 : 0.0;
      if (dj) dj[l] = l == 1 ? 1.0 / 3.0 : 0.0;
    }
    return;
  }
  if (x < 1.0) {
    // Power series; terms shrink at least by x^2/6 per step.
    const double h = -0.5 * x * x;
    double xl = 1.0;
    for (int l = 0; l <= top; ++l) {
      const double lead = xl / double_factorial(2 * l + 1);
      double term = 1.0, sum = 1.0, dsum = l;  // dsum carries sum of (l+2k) c_k x^{2k}
      for (int k = 1; k < 60; ++k) {
        term *= h / (k * (2.0 * l + 2.0 * k + 1.0));
        sum += term;
        dsum += (l + 2.0 * k) * term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      f[l] = lead * sum;
      if (l <= lmax) {
        j[l] = f[l];
        if (dj) dj[l] = lead * dsum / x;
      }
      xl *= x;
    }
    return;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  if (x >= top) {
    f[0] = j0;
    f[1] = j1;
    for (int l = 1; l < top; ++l) f[l + 1] = (2.0 * l + 1.0) / x * f[l] - f[l - 1];
  } else {
    const int start = top + 20 + static_cast<int>(std::sqrt(40.0 * top));
    std::vector<double> g(start + 2, 0.0);
    g[start] = 1e-300;
    for (int l = start; l >= 1; --l) {
      g[l - 1] = (2.0 * l + 1.0) / x * g[l] - g[l + 1];
      if (std::abs(g[l - 1]) > 1e250) {
        for (int k = l - 1; k <= start; ++k) g[k] *= 1e-250;
      }
    }
    const double scale = std::abs(j0) >= std::abs(j1) ? j0 / g[0] : j1 / g[1];
    for (int l = 0; l <= top; ++l) f[l] = g[l] * scale;
  }
  for (int l = 0; l <= lmax; ++l) {
    j[l] = f[l];
    if (dj) dj[l] = l == 0 ? -f[1] : f[l - 1] - (l + 1.0) / x * f[l];
  }
}

std::pair<double, double> sph_bessel(int l, double x) {
  if (l < 0 || x < 0) throw Error(ErrorCode::InvalidArgument, "sph_bessel requires l >= 0 and x >= 0");
  std::vector<double> j(l + 1), dj(l + 1);
  sph_bessel_all(l, x, j.data(), dj.data());
  return {j[l], dj[l]};
}

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  const int tmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int tmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  if (tmin > tmax) return 0.0;
  const long double lpref =
      0.5L * (log_factorial(j1 + j2 - j3) + log_factorial(j1 - j2 + j3) + log_factorial(-j1 + j2 + j3) -
              log_factorial(j1 + j2 + j3 + 1) + log_factorial(j1 + m1) + log_factorial(j1 - m1) +
              log_factorial(j2 + m2) + log_factorial(j2 - m2) + log_factorial(j3 + m3) + log_factorial(j3 - m3));
  long double sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    const long double lt = log_factorial(t) + log_factorial(j3 - j2 + t + m1) + log_factorial(j3 - j1 + t - m2) +
                           log_factorial(j1 + j2 - j3 - t) + log_factorial(j1 - t - m1) +
                           log_factorial(j2 - t + m2);
    const long double term = std::exp(lpref - lt);
    sum += (t % 2 == 0) ? term : -term;
  }
  const int phase = j1 - j2 - m3;
  return static_cast<double>((phase % 2 == 0) ? sum : -sum);
}

namespace {

double gaunt_quadrature(int l, int m, int l2, int m2, int l3, int m3) {
  const int lmax = std::max({l, l2, l3});
  const AngularGrid grid = angular_grid((l + l2 + l3) / 2 + 1);
  std::vector<cplx> y(lm_count(lmax));
  cplx sum = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sph_harm_all(lmax, grid.cos_theta[i], grid.phi[i], y.data());
    sum += grid.weight[i] * std::conj(y[lm_index(l, m)]) * y[lm_index(l2, m2)] * y[lm_index(l3, m3)];
  }
  return sum.real();
}

void self_check_gaunt() {
  static std::once_flag once;
  static bool ok = true;
  std::call_once(once, [] {
    for (int l = 0; l <= 2; ++l)
      for (int l2 = 0; l2 <= 2; ++l2)
        for (int l3 = 0; l3 <= 2; ++l3)
          for (int m2 = -l2; m2 <= l2; ++m2)
            for (int m3 = -l3; m3 <= l3; ++m3) {
              const int m = m2 + m3;
              if (std::abs(m) > l) continue;
              if (std::abs(gaunt(l, m, l2, m2, l3, m3) - gaunt_quadrature(l, m, l2, m2, l3, m3)) > 1e-12) ok = false;
            }
  });
  if (!ok) throw Error(ErrorCode::QuadratureUnderResolved, "Gaunt table disagrees with angular quadrature");
}

}  // namespace

double gaunt(int l, int m, int l2, int m2, int l3, int m3) {
  if (m != m2 + m3) return 0.0;
  if ((l + l2 + l3) % 2 != 0) return 0.0;
  if (l < std::abs(l2 - l3) || l > l2 + l3) return 0.0;
  if (std::abs(m) > l || std::abs(m2) > l2 || std::abs(m3) > l3) return 0.0;
  const double pref = std::sqrt((2.0 * l + 1.0) * (2.0 * l2 + 1.0) * (2.0 * l3 + 1.0) / (4.0 * kPi));
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return sign * pref * wigner3j(l, l2, l3, 0, 0, 0) * wigner3j(l, l2, l3, -m, m2, m3);
}

GauntTable::GauntTable(int lmax, int lmax3) : lmax_(lmax), lmax3_(lmax3), nlm_(lm_count(lmax)) {
  self_check_gaunt();
  data_.assign(static_cast<std::size_t>(nlm_) * nlm_ * (lmax3 + 1), 0.0);
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m)
      for (int l2 = 0; l2 <= lmax; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2)
          for (int l3 = std::abs(l - l2); l3 <= std::min(l + l2, lmax3); l3 += 2) {
            const int m3 = m - m2;
            if (std::abs(m3) > l3) continue;
            data_[(static_cast<std::size_t>(lm_index(l, m)) * nlm_ + lm_index(l2, m2)) * (lmax3 + 1) + l3] =
                gaunt(l, m, l2, m2, l3, m3);
          }
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1 || !(a < b)) throw Error(ErrorCode::InvalidArgument, "gauss_legendre requires n >= 1 and a < b");
  QuadratureRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        double r0 = 1.0, r1 = x;
        for (int k = 2; k <= n; ++k) {
          const double r2 = ((2.0 * k - 1.0) * x * r1 - (k - 1.0) * r0) / k;
          r0 = r1;
          r1 = r2;
        }
        dp = n == 1 ? 1.0 : n * (x * r1 - r0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = mid - half * x;
    q.nodes[n - 1 - i] = mid + half * x;
    q.weights[i] = q.weights[n - 1 - i] = half * w;
  }
  return q;
}

Vec3 AngularGrid::direction(std::size_t i) const {
  const double c = cos_theta[i];
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return {s * std::cos(phi[i]), s * std::sin(phi[i]), c};
}

AngularGrid angular_grid(int n_theta, int n_phi) {
  const QuadratureRule gl = gauss_legendre(n_theta, -1.0, 1.0);
  AngularGrid g;
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j) {
      g.cos_theta.push_back(gl.nodes[i]);
      g.phi.push_back(2.0 * kPi * j / n_phi);
      g.weight.push_back(gl.weights[i] * 2.0 * kPi / n_phi);
    }
  return g;
}

AngularGrid angular_grid(int lmax) { return angular_grid(lmax + 2, 2 * lmax + 3); }

void radial_basis_all(const RadialFamily& family, double r, double* value, double* deriv) {
  const int N = family.max_degree;
  if (family.kind == RadialKind::Polynomial) {
    const double t = 2.0 * r / family.radius - 1.0;
    const double scale = 2.0 / family.radius;
    double p0 = 1.0, p1 = t, d0 = 0.0, d1 = 1.0;
    value[0] = 1.0;
    deriv[0] = 0.0;
    if (N >= 1) {
      value[1] = t;
      deriv[1] = scale;
    }
    for (int n = 1; n < N; ++n) {
      const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
      const double d2 = d0 + (2.0 * n + 1.0) * p1;
      value[n + 1] = p2;
      deriv[n + 1] = d2 * scale;
      p0 = p1;
      p1 = p2;
      d0 = d1;
      d1 = d2;
    }
    return;
  }
  const double eta = family.slater_eta;
  const double e = std::exp(-eta * r);
  double rn = 1.0;  // r^n
  for (int n = 0; n <= N; ++n) {
    value[n] = rn * e;
    const double rnm1 = n == 0 ? 0.0 : (n == 1 ? 1.0 : std::pow(r, n - 1));
    deriv[n] = (n * rnm1 - eta * rn) * e;
    rn *= r;
  }
}

std::pair<double, double> radial_basis_eval(const RadialFamily& family, int n, double r) {
  const double tol = 1e-12 * family.radius;
  if (n < 0 || n > family.max_degree || r < -tol || r > family.radius + tol) {
    std::ostringstream msg;
    msg << "radial basis index n=" << n << " at r=" << r << " outside [0, " << family.max_degree << "] x [0, "
        << family.radius << "]";
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
  std::vector<double> v(family.max_degree + 1), d(family.max_degree + 1);
  radial_basis_all(family, std::clamp(r, 0.0, family.radius), v.data(), d.data());
  return {v[n], d[n]};
}

}  // namespace apwdg
