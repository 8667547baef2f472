#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apwdg/common.hpp"

namespace apwdg {

// Cubic cell Omega = [-D/2, D/2]^3.
class UnitCell {
 public:
  explicit UnitCell(double edge);
  double edge() const { return edge_; }
  double volume() const { return edge_ * edge_ * edge_; }
  // 2*pi/D, the reciprocal lattice spacing.
  double dk() const { return 2.0 * kPi / edge_; }
  // Maps a point to its periodic image nearest to the origin.
  Vec3 minimum_image(const Vec3& r) const;

 private:
  double edge_;
};

struct AtomicSite {
  Vec3 center;
  double radius = 1.0;
  double charge = 1.0;
};

struct IVec3 {
  int n1 = 0, n2 = 0, n3 = 0;
  int norm2() const { return n1 * n1 + n2 * n2 + n3 * n3; }
  IVec3 operator-(const IVec3& o) const { return {n1 - o.n1, n2 - o.n2, n3 - o.n3}; }
  IVec3 operator-() const { return {-n1, -n2, -n3}; }
  bool operator==(const IVec3&) const = default;
  auto operator<=>(const IVec3&) const = default;
};

struct Wavevector {
  IVec3 n;
  Vec3 k;
  double norm = 0;
};

Wavevector make_wavevector(const UnitCell& cell, const IVec3& n);

// All k with |k| <= 2 pi K / D, ordered by (|n|^2, n1, n2, n3).
std::vector<Wavevector> reciprocal_vectors(const UnitCell& cell, int K);

struct SiteViolation {
  ErrorCode code;  // OverlappingSpheres or SphereOutsideCell
  int first = -1;
  int second = -1;
  std::string message;
};

std::optional<SiteViolation> validate_sites(const UnitCell& cell, const std::vector<AtomicSite>& sites);
// Throws Error carrying the violation.
void require_valid_sites(const UnitCell& cell, const std::vector<AtomicSite>& sites);

double interstitial_volume(const UnitCell& cell, const std::vector<AtomicSite>& sites);

}  // namespace apwdg
