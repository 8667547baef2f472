#include "apwdg/geometry.hpp"

#include <algorithm>
#include <sstream>

namespace apwdg {

UnitCell::UnitCell(double edge) : edge_(edge) {
  if (!(edge > 0)) throw Error(ErrorCode::InvalidArgument, "cell edge must be positive");
}

Vec3 UnitCell::minimum_image(const Vec3& r) const {
  auto wrap = [this](double x) { return x - edge_ * std::round(x / edge_); };
  return {wrap(r.x), wrap(r.y), wrap(r.z)};
}

Wavevector make_wavevector(const UnitCell& cell, const IVec3& n) {
  const double g = cell.dk();
  Wavevector w;
  w.n = n;
  w.k = {g * n.n1, g * n.n2, g * n.n3};
  w.norm = g * std::sqrt(static_cast<double>(n.norm2()));
  return w;
}

std::vector<Wavevector> reciprocal_vectors(const UnitCell& cell, int K) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "plane-wave cutoff K must be >= 1");
  std::vector<IVec3> ns;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b)
      for (int c = -K; c <= K; ++c)
        if (a * a + b * b + c * c <= K * K) ns.push_back({a, b, c});
  std::sort(ns.begin(), ns.end(), [](const IVec3& p, const IVec3& q) {
    if (p.norm2() != q.norm2()) return p.norm2() < q.norm2();
    return p < q;
  });
  std::vector<Wavevector> out;
  out.reserve(ns.size());
  for (const auto& n : ns) out.push_back(make_wavevector(cell, n));
  return out;
}

std::optional<SiteViolation> validate_sites(const UnitCell& cell, const std::vector<AtomicSite>& sites) {
  const double tol = 1e-12 * cell.edge();
  const double half = 0.5 * cell.edge();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = sites[i];
    std::ostringstream msg;
    if (!(s.radius > 0)) {
      msg << "site " << i << " has non-positive radius " << s.radius;
      return SiteViolation{ErrorCode::SphereOutsideCell, int(i), -1, msg.str()};
    }
    const double reach = std::max({std::abs(s.center.x), std::abs(s.center.y), std::abs(s.center.z)}) + s.radius;
    if (reach >= half - tol) {
      msg << "sphere of site " << i << " (radius " << s.radius << ") is not strictly inside the cell";
      return SiteViolation{ErrorCode::SphereOutsideCell, int(i), -1, msg.str()};
    }
  }
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const double d = (sites[i].center - sites[j].center).norm();
      if (d <= sites[i].radius + sites[j].radius + tol) {
        std::ostringstream msg;
        msg << "spheres of sites " << i << " and " << j << " overlap (distance " << d << ", radii "
            << sites[i].radius << " + " << sites[j].radius << ")";
        return SiteViolation{ErrorCode::OverlappingSpheres, int(i), int(j), msg.str()};
      }
    }
  return std::nullopt;
}

void require_valid_sites(const UnitCell& cell, const std::vector<AtomicSite>& sites) {
  if (auto v = validate_sites(cell, sites)) throw Error(v->code, v->message);
}

double interstitial_volume(const UnitCell& cell, const std::vector<AtomicSite>& sites) {
  double v = cell.volume();
  for (const auto& s : sites) v -= 4.0 * kPi / 3.0 * s.radius * s.radius * s.radius;
  return v;
}

}  // namespace apwdg
