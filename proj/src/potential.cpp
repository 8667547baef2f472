#include "apwdg/potential.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "apwdg/parallel.hpp"
#include "apwdg/specialfn.hpp"

namespace apwdg {

FourierGrid::FourierGrid(int kmax) : kmax_(kmax), side_(2 * kmax + 1) {
  if (kmax < 0) throw Error(ErrorCode::InvalidArgument, "FourierGrid cutoff must be >= 0");
  data_.assign(static_cast<std::size_t>(side_) * side_ * side_, cplx(0.0));
}

cplx& FourierGrid::at(const IVec3& n) {
  if (!contains(n)) throw Error(ErrorCode::OutOfRange, "Fourier index outside the coefficient ball");
  return data_[offset(n)];
}

double FourierGrid::l2_norm() const {
  double s = 0;
  for_each([&](const IVec3&, const cplx& v) { s += std::norm(v); });
  return std::sqrt(s);
}

double FourierGrid::reality_defect() const {
  double d = 0;
  for_each([&](const IVec3& n, const cplx& v) { d = std::max(d, std::abs((*this)(-n) - std::conj(v))); });
  return d;
}

FourierGrid& FourierGrid::axpy(double a, const FourierGrid& x) {
  if (x.empty()) return *this;
  if (x.kmax() > kmax_) {
    FourierGrid grown(x.kmax());
    for_each([&](const IVec3& n, const cplx& v) { grown.at(n) = v; });
    *this = std::move(grown);
  }
  x.for_each([&](const IVec3& n, const cplx& v) { at(n) += a * v; });
  return *this;
}

FourierGrid& FourierGrid::scale(double a) {
  for (auto& v : data_) v *= a;
  return *this;
}

EwaldKernel::EwaldKernel(double edge, double alpha)
    : edge_(edge), alpha_(alpha > 0 ? alpha : 5.0 / edge), volume_(edge * edge * edge) {
  // Keep modes whose Gaussian damping exceeds 1e-16.
  // Image shell m is at least (m + 1/2) D away; erfc(6) < 1e-16.
  images_ = std::max(1, static_cast<int>(std::ceil(6.0 / (alpha_ * edge_) - 0.5)));
  const double g = 2.0 * kPi / edge_;
  const double kc = 2.0 * alpha_ * std::sqrt(std::log(1e16));
  nmax_ = static_cast<int>(std::ceil(kc / g));
  for (int a = 0; a <= nmax_; ++a)
    for (int b = -nmax_; b <= nmax_; ++b)
      for (int c = -nmax_; c <= nmax_; ++c) {
        const bool upper = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
        if (!upper) continue;
        const double k2 = g * g * (a * a + b * b + c * c);
        if (k2 > kc * kc) continue;
        const double w = 2.0 * 4.0 * kPi / volume_ * std::exp(-k2 / (4.0 * alpha_ * alpha_)) / k2;
        modes_.push_back({a, b, c, w});
      }
}

double EwaldKernel::real_space(const Vec3& dmin, bool drop_center_singularity) const {
  double s = 0;
  const int m = images_;
  for (int a = -m; a <= m; ++a)
    for (int b = -m; b <= m; ++b)
      for (int c = -m; c <= m; ++c) {
        const Vec3 d = dmin + Vec3{a * edge_, b * edge_, c * edge_};
        const double r = d.norm();
        if (a == 0 && b == 0 && c == 0 && drop_center_singularity) {
          // erfc(ar)/r - 1/r = -erf(ar)/r
          const double x = alpha_ * r;
          if (x < 1e-4)
            s -= 2.0 * alpha_ / std::sqrt(kPi) * (1.0 - x * x / 3.0 + x * x * x * x / 10.0);
          else
            s -= std::erf(x) / r;
          continue;
        }
        s += std::erfc(alpha_ * r) / r;
      }
  return s;
}

double EwaldKernel::reciprocal(const Vec3& d) const {
  const double g = 2.0 * kPi / edge_;
  const int w = 2 * nmax_ + 1;
  std::vector<cplx> ex(w), ey(w), ez(w);
  const cplx bx = std::polar(1.0, g * d.x), by = std::polar(1.0, g * d.y), bz = std::polar(1.0, g * d.z);
  ex[nmax_] = ey[nmax_] = ez[nmax_] = 1.0;
  for (int n = 1; n <= nmax_; ++n) {
    ex[nmax_ + n] = ex[nmax_ + n - 1] * bx;
    ey[nmax_ + n] = ey[nmax_ + n - 1] * by;
    ez[nmax_ + n] = ez[nmax_ + n - 1] * bz;
    ex[nmax_ - n] = std::conj(ex[nmax_ + n]);
    ey[nmax_ - n] = std::conj(ey[nmax_ + n]);
    ez[nmax_ - n] = std::conj(ez[nmax_ + n]);
  }
  double s = 0;
  for (const auto& m : modes_) s += m.weight * (ex[nmax_ + m.n1] * ey[nmax_ + m.n2] * ez[nmax_ + m.n3]).real();
  return s;
}

double EwaldKernel::phi(const Vec3& d) const {
  const Vec3 dmin = UnitCell(edge_).minimum_image(d);
  if (dmin.norm() < 1e-14 * edge_) throw Error(ErrorCode::AtSingularity, "potential evaluated at a nucleus");
  return real_space(dmin, false) + reciprocal(dmin) - kPi / (alpha_ * alpha_ * volume_);
}

double EwaldKernel::phi_regular(const Vec3& d) const {
  const Vec3 dmin = UnitCell(edge_).minimum_image(d);
  return real_space(dmin, true) + reciprocal(dmin) - kPi / (alpha_ * alpha_ * volume_);
}

bool PotentialSpec::has_coulomb() const {
  return std::any_of(coulomb_charge.begin(), coulomb_charge.end(), [](double z) { return z != 0.0; });
}

cplx PotentialSpec::coulomb_fourier(const IVec3& n) const {
  if (n.norm2() == 0) return 0.0;
  const Wavevector w = make_wavevector(cell, n);
  cplx s = 0;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (coulomb_charge[j] == 0.0) continue;
    s += coulomb_charge[j] * std::polar(1.0, -w.k.dot(sites[j].center));
  }
  return -4.0 * kPi / std::sqrt(cell.volume()) / (w.norm * w.norm) * s;
}

cplx PotentialSpec::fourier(const IVec3& n) const {
  if (n.norm2() > k_cutoff * k_cutoff) return 0.0;
  return coulomb_fourier(n) + extra(n);
}

namespace {

std::shared_ptr<const EwaldKernel> shared_ewald(double edge) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const EwaldKernel>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[edge];
  if (!slot) slot = std::make_shared<EwaldKernel>(edge);
  return slot;
}

PotentialSpec base_spec(const UnitCell& cell, const std::vector<AtomicSite>& sites, int k_cutoff) {
  if (k_cutoff < 1) throw Error(ErrorCode::InvalidArgument, "potential cutoff K_pot must be >= 1");
  PotentialSpec spec;
  spec.cell = cell;
  spec.sites = sites;
  spec.coulomb_charge.assign(sites.size(), 0.0);
  spec.k_cutoff = k_cutoff;
  spec.ewald = shared_ewald(cell.edge());
  return spec;
}

}  // namespace

PotentialSpec zero_potential(const UnitCell& cell, const std::vector<AtomicSite>& sites, int k_cutoff) {
  return base_spec(cell, sites, k_cutoff);
}

PotentialSpec periodized_coulomb_fourier(const UnitCell& cell, const std::vector<AtomicSite>& sites, int k_cutoff) {
  PotentialSpec spec = base_spec(cell, sites, k_cutoff);
  for (std::size_t j = 0; j < sites.size(); ++j) spec.coulomb_charge[j] = sites[j].charge;
  return spec;
}

PotentialSpec fourier_potential(const UnitCell& cell, const std::vector<AtomicSite>& sites, FourierGrid coeffs,
                                int k_cutoff) {
  PotentialSpec spec = base_spec(cell, sites, k_cutoff);
  spec.extra = std::move(coeffs);
  return spec;
}

FourierGrid read_fourier_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open Fourier coefficient file " + path);
  struct Row {
    IVec3 n;
    cplx v;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0, kmax = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r;
    double re = 0, im = 0;
    if (!(ss >> r.n.n1 >> r.n.n2 >> r.n.n3 >> re >> im)) {
      if (rows.empty() && lineno == 1) continue;  // header
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected n1,n2,n3,re,im";
      throw Error(ErrorCode::ConfigParse, msg.str());
    }
    r.v = {re, im};
    kmax = std::max(kmax, static_cast<int>(std::ceil(std::sqrt(double(r.n.norm2())))));
    rows.push_back(r);
  }
  FourierGrid grid(kmax);
  for (const auto& r : rows) grid.at(r.n) = r.v;
  double vmax = 0;
  grid.for_each([&](const IVec3&, const cplx& v) { vmax = std::max(vmax, std::abs(v)); });
  if (grid.reality_defect() > 1e-10 * std::max(vmax, 1e-300))
    throw Error(ErrorCode::InvalidArgument, path + ": coefficients do not satisfy V(-k) = conj V(k)");
  FourierGrid sym(kmax);
  grid.for_each([&](const IVec3& n, const cplx& v) { sym.at(n) = 0.5 * (v + std::conj(grid(-n))); });
  return sym;
}

double evaluate_extra_point(const PotentialSpec& spec, const Vec3& r) {
  if (spec.extra.empty()) return 0.0;
  const int kmax = std::min(spec.extra.kmax(), spec.k_cutoff);
  const double g = spec.cell.dk();
  const int w = 2 * kmax + 1;
  std::vector<cplx> ex(w), ey(w), ez(w);
  for (int n = -kmax; n <= kmax; ++n) {
    ex[n + kmax] = std::polar(1.0, g * n * r.x);
    ey[n + kmax] = std::polar(1.0, g * n * r.y);
    ez[n + kmax] = std::polar(1.0, g * n * r.z);
  }
  cplx s = 0;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = -kmax; b <= kmax; ++b) {
      const cplx exy = ex[a + kmax] * ey[b + kmax];
      for (int c = -kmax; c <= kmax; ++c) {
        const IVec3 n{a, b, c};
        if (n.norm2() > kmax * kmax) continue;
        s += spec.extra(n) * exy * ez[c + kmax];
      }
    }
  return s.real() / std::sqrt(spec.cell.volume());
}

double evaluate_potential_point(const PotentialSpec& spec, const Vec3& r) {
  double v = 0;
  for (std::size_t j = 0; j < spec.sites.size(); ++j)
    if (spec.coulomb_charge[j] != 0.0) v -= spec.coulomb_charge[j] * spec.ewald->phi(r - spec.sites[j].center);
  return v + evaluate_extra_point(spec, r);
}

namespace {

double coulomb_remainder(const PotentialSpec& spec, int site, const Vec3& r) {
  double v = 0;
  for (std::size_t j = 0; j < spec.sites.size(); ++j) {
    const double z = spec.coulomb_charge[j];
    if (z == 0.0) continue;
    const Vec3 d = r - spec.sites[j].center;
    v -= z * (static_cast<int>(j) == site ? spec.ewald->phi_regular(d) : spec.ewald->phi(d));
  }
  return v;
}

// Margin above l_pot keeps higher multipoles of the remainder from aliasing onto l <= l_pot.
constexpr int kAliasMargin = 10;

void check_angular_orthonormality(int l_pot) {
  static std::mutex mutex;
  static std::set<int> verified;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (verified.count(l_pot)) return;
  }
  const AngularGrid grid = angular_grid(l_pot + kAliasMargin);
  const int nlm = lm_count(l_pot);
  std::vector<cplx> y(grid.size() * nlm);
  for (std::size_t a = 0; a < grid.size(); ++a) sph_harm_all(l_pot, grid.cos_theta[a], grid.phi[a], &y[a * nlm]);
  double defect = 0;
  for (int p = 0; p < nlm; ++p)
    for (int q = p; q < nlm; ++q) {
      cplx s = 0;
      for (std::size_t a = 0; a < grid.size(); ++a) s += grid.weight[a] * std::conj(y[a * nlm + p]) * y[a * nlm + q];
      defect = std::max(defect, std::abs(s - (p == q ? 1.0 : 0.0)));
    }
  if (defect > 1e-10) {
    std::ostringstream msg;
    msg << "angular grid for L_pot=" << l_pot << " fails orthonormality (defect " << defect << ")";
    throw Error(ErrorCode::QuadratureUnderResolved, msg.str());
  }
  std::lock_guard<std::mutex> lock(mutex);
  verified.insert(l_pot);
}

}  // namespace

double smooth_remainder(const PotentialSpec& spec, int site, const Vec3& r) {
  return coulomb_remainder(spec, site, r) + evaluate_extra_point(spec, r);
}

SphereExpansion coulomb_sphere_expansion(const PotentialSpec& spec, int site, int l_pot,
                                         const std::vector<double>& radial_nodes) {
  if (site < 0 || site >= static_cast<int>(spec.sites.size()))
    throw Error(ErrorCode::InvalidIndex, "sphere expansion site index out of range");
  const AtomicSite& s = spec.sites[site];
  for (double r : radial_nodes)
    if (!(r > 0) || r > s.radius * (1 + 1e-12))
      throw Error(ErrorCode::OutOfRange, "radial nodes must lie in (0, R]");
  SphereExpansion e;
  e.site = site;
  e.center = s.center;
  e.radius = s.radius;
  e.singular_charge = spec.coulomb_charge[site];
  e.l_pot = l_pot;
  e.nodes = radial_nodes;
  const int nlm = lm_count(l_pot);
  const std::size_t nr = radial_nodes.size();
  e.w.assign(nlm * nr, cplx(0.0));
  if (!spec.has_coulomb()) return e;

  check_angular_orthonormality(l_pot);
  const AngularGrid grid = angular_grid(l_pot + kAliasMargin);
  std::vector<cplx> ystar(grid.size() * nlm);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    sph_harm_all(l_pot, grid.cos_theta[a], grid.phi[a], &ystar[a * nlm]);
    for (int p = 0; p < nlm; ++p) ystar[a * nlm + p] = std::conj(ystar[a * nlm + p]) * grid.weight[a];
  }
  parallel_for(0, nr, [&](std::size_t i) {
    std::vector<cplx> acc(nlm, 0.0);
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const double wv = coulomb_remainder(spec, site, s.center + grid.direction(a) * radial_nodes[i]);
      for (int p = 0; p < nlm; ++p) acc[p] += wv * ystar[a * nlm + p];
    }
    for (int p = 0; p < nlm; ++p) e.w[p * nr + i] = acc[p];
  });
  return e;
}

void add_extra_expansion(const PotentialSpec& spec, const FourierGrid& extra, SphereExpansion& e) {
  if (extra.empty()) return;
  const int kmax = std::min(extra.kmax(), spec.k_cutoff);
  const int l_pot = e.l_pot;
  const int nlm = lm_count(l_pot);
  const std::size_t nr = e.nodes.size();
  const UnitCell& cell = spec.cell;
  // Group sum_k Vhat_k e^{ik.R} conj Y_lm(khat) by shell |n|^2.
  std::vector<int> shell_of(kmax * kmax + 1, -1);
  std::vector<int> shell_n2;
  for (int n2 = 0; n2 <= kmax * kmax; ++n2) {
    shell_of[n2] = static_cast<int>(shell_n2.size());
    shell_n2.push_back(n2);
  }
  std::vector<cplx> acc(shell_n2.size() * nlm, 0.0);
  std::vector<char> used(shell_n2.size(), 0);
  std::vector<cplx> y(nlm);
  extra.for_each([&](const IVec3& n, const cplx& v) {
    if (v == 0.0 || n.norm2() > kmax * kmax) return;
    const Wavevector w = make_wavevector(cell, n);
    const cplx a = v * std::polar(1.0, w.k.dot(e.center));
    sph_harm_all(l_pot, w.k, y.data());
    const int sh = shell_of[n.norm2()];
    used[sh] = 1;
    for (int p = 0; p < nlm; ++p) acc[sh * nlm + p] += a * std::conj(y[p]);
  });
  const double pref = 4.0 * kPi / std::sqrt(cell.volume());
  std::vector<double> jl(l_pot + 1);
  std::vector<cplx> il(l_pot + 1);
  for (int l = 0; l <= l_pot; ++l) il[l] = std::pow(cplx(0.0, 1.0), l);
  for (std::size_t sh = 0; sh < shell_n2.size(); ++sh) {
    if (!used[sh]) continue;
    const double k = cell.dk() * std::sqrt(double(shell_n2[sh]));
    for (std::size_t i = 0; i < nr; ++i) {
      sph_bessel_all(l_pot, k * e.nodes[i], jl.data(), nullptr);
      for (int l = 0; l <= l_pot; ++l) {
        const cplx f = pref * il[l] * jl[l];
        for (int m = -l; m <= l; ++m) e.w[lm_index(l, m) * nr + i] += f * acc[sh * nlm + lm_index(l, m)];
      }
    }
  }
}

SphereExpansion sphere_expansion(const PotentialSpec& spec, int site, int l_pot,
                                 const std::vector<double>& radial_nodes) {
  SphereExpansion e = coulomb_sphere_expansion(spec, site, l_pot, radial_nodes);
  add_extra_expansion(spec, spec.extra, e);
  return e;
}

double SphereExpansion::reconstruct(std::size_t node, const Vec3& direction) const {
  std::vector<cplx> y(lm_count(l_pot));
  sph_harm_all(l_pot, direction, y.data());
  cplx s = 0;
  for (int p = 0; p < lm_count(l_pot); ++p) s += smooth(p, node) * y[p];
  return -singular_charge / nodes[node] + s.real();
}

double SphereExpansion::degree_norm(int l) const {
  double s = 0;
  for (int m = -l; m <= l; ++m)
    for (std::size_t i = 0; i < nodes.size(); ++i) s += std::norm(smooth(lm_index(l, m), i));
  return std::sqrt(s);
}

FourierGrid hartree_fourier(const UnitCell& cell, const FourierGrid& density) {
  if (density.empty()) return {};
  FourierGrid vh(density.kmax());
  const double g2 = cell.dk() * cell.dk();
  density.for_each([&](const IVec3& n, const cplx& v) {
    if (n.norm2() == 0) return;
    vh.at(n) = 4.0 * kPi * v / (g2 * n.norm2());
  });
  return vh;
}

}  // namespace apwdg
