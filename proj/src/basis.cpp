#include "apwdg/basis.hpp"

#include <algorithm>
#include <sstream>

namespace apwdg {

int BasisParams::varrho() const { return std::max({K, N, L}); }

std::optional<std::string> BasisParams::balance_warning() const {
  const int lo = std::min({K, N, L});
  const int hi = varrho();
  if (lo > 0 && hi <= 4 * lo) return std::nullopt;
  std::ostringstream msg;
  msg << "unbalanced discretization (K=" << K << ", N=" << N << ", L=" << L << "): max/min exceeds 4";
  return msg.str();
}

MixedBasis::MixedBasis(const UnitCell& cell, std::vector<AtomicSite> sites, const BasisParams& params)
    : cell_(cell), sites_(std::move(sites)), params_(params) {
  if (params.K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (params.N < 0 || params.L < 0) throw Error(ErrorCode::InvalidArgument, "N and L must be >= 0");
  if (params.epsilon < 0) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (params.radial == RadialKind::Slater && !(params.slater_eta > 0))
    throw Error(ErrorCode::InvalidArgument, "Slater exponent must be positive");
  require_valid_sites(cell_, sites_);
  pw_ = reciprocal_vectors(cell_, params.K);
  for (std::size_t i = 0; i < pw_.size(); ++i) pw_lookup_[pw_[i].n] = static_cast<long>(i);
  for (int l = 0; l <= params.L; ++l)
    for (int m = -l; m <= l; ++m)
      for (int n = 0; n <= params.N; ++n) sphere_dofs_.push_back({n, l, m});
}

long MixedBasis::pw_index(const IVec3& n) const {
  auto it = pw_lookup_.find(n);
  return it == pw_lookup_.end() ? -1 : it->second;
}

int MixedBasis::region_of(const Vec3& point) const {
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    const Vec3 d = cell_.minimum_image(point - sites_[j].center);
    if (d.norm() <= sites_[j].radius) return static_cast<int>(j);
  }
  return -1;
}

RadialFamily MixedBasis::radial_family(int site) const {
  return {params_.radial, params_.N, sites_.at(site).radius, params_.slater_eta};
}

std::vector<std::string> MixedBasis::warnings() const {
  std::vector<std::string> w;
  if (auto b = params_.balance_warning()) w.push_back(*b);
  return w;
}

std::shared_ptr<const MixedBasis> build_mixed_basis(const UnitCell& cell, const std::vector<AtomicSite>& sites,
                                                    const BasisParams& params) {
  return std::make_shared<const MixedBasis>(cell, sites, params);
}

cplx eval_pw_part(const MixedBasis& basis, const CVector& coeffs, const Vec3& point) {
  const int K = basis.params().K;
  const double g = basis.cell().dk();
  std::vector<cplx> ex(2 * K + 1), ey(2 * K + 1), ez(2 * K + 1);
  for (int n = -K; n <= K; ++n) {
    ex[n + K] = std::polar(1.0, g * n * point.x);
    ey[n + K] = std::polar(1.0, g * n * point.y);
    ez[n + K] = std::polar(1.0, g * n * point.z);
  }
  cplx s = 0;
  const auto& pw = basis.pw();
  for (std::size_t p = 0; p < pw.size(); ++p)
    s += coeffs[p] * ex[pw[p].n.n1 + K] * ey[pw[p].n.n2 + K] * ez[pw[p].n.n3 + K];
  return s / std::sqrt(basis.cell().volume());
}

cplx eval_sphere_part(const MixedBasis& basis, const CVector& coeffs, int site, const Vec3& offset) {
  const int N = basis.params().N, L = basis.params().L;
  const RadialFamily fam = basis.radial_family(site);
  std::vector<double> chi(N + 1), dchi(N + 1);
  radial_basis_all(fam, std::min(offset.norm(), fam.radius), chi.data(), dchi.data());
  std::vector<cplx> y(lm_count(L));
  sph_harm_all(L, offset, y.data());
  const std::size_t off = basis.sphere_offset(site);
  cplx s = 0;
  for (int lm = 0; lm < lm_count(L); ++lm) {
    cplx radial = 0;
    for (int n = 0; n <= N; ++n) radial += coeffs[off + static_cast<std::size_t>(lm) * (N + 1) + n] * chi[n];
    s += radial * y[lm];
  }
  return s;
}

cplx eval_dg_function(const DgFunction& fn, const Vec3& point) {
  const MixedBasis& b = *fn.basis;
  const int site = b.region_of(point);
  if (site < 0) return eval_pw_part(b, fn.coeffs, point);
  return eval_sphere_part(b, fn.coeffs, site, b.cell().minimum_image(point - b.sites()[site].center));
}

cplx trace_jump(const DgFunction& fn, int site, double theta, double phi) {
  const MixedBasis& b = *fn.basis;
  if (site < 0 || site >= static_cast<int>(b.n_sites())) throw Error(ErrorCode::InvalidIndex, "site index out of range");
  const double R = b.sites()[site].radius;
  const Vec3 offset{R * std::sin(theta) * std::cos(phi), R * std::sin(theta) * std::sin(phi), R * std::cos(theta)};
  return eval_pw_part(b, fn.coeffs, b.sites()[site].center + offset) - eval_sphere_part(b, fn.coeffs, site, offset);
}

CVector constant_function_coefficients(const MixedBasis& basis) {
  if (basis.params().radial != RadialKind::Polynomial)
    throw Error(ErrorCode::InvalidArgument, "the constant function needs the polynomial radial family");
  CVector c(basis.total_dim(), 0.0);
  c[0] = std::sqrt(basis.cell().volume());
  for (std::size_t j = 0; j < basis.n_sites(); ++j) c[basis.sphere_index(int(j), 0, 0, 0)] = std::sqrt(4.0 * kPi);
  return c;
}

bool is_nested(const MixedBasis& coarse, const MixedBasis& fine) {
  const auto& a = coarse.params();
  const auto& b = fine.params();
  if (coarse.cell().edge() != fine.cell().edge() || coarse.n_sites() != fine.n_sites()) return false;
  if (a.radial != b.radial || (a.radial == RadialKind::Slater && a.slater_eta != b.slater_eta)) return false;
  if (a.K > b.K || a.N > b.N || a.L > b.L) return false;
  for (std::size_t j = 0; j < coarse.n_sites(); ++j) {
    const auto& s = coarse.sites()[j];
    const auto& t = fine.sites()[j];
    if (!(s.center == t.center) || s.radius != t.radius) return false;
  }
  return true;
}

std::vector<std::size_t> embedding_map(const MixedBasis& coarse, const MixedBasis& fine) {
  if (!is_nested(coarse, fine)) throw Error(ErrorCode::InvalidArgument, "basis is not nested in the reference basis");
  std::vector<std::size_t> map(coarse.total_dim());
  for (std::size_t p = 0; p < coarse.n_pw(); ++p) map[p] = static_cast<std::size_t>(fine.pw_index(coarse.pw()[p].n));
  for (std::size_t j = 0; j < coarse.n_sites(); ++j)
    for (std::size_t q = 0; q < coarse.sphere_block(); ++q) {
      const SphereDof& d = coarse.sphere_dofs()[q];
      map[coarse.sphere_offset(int(j)) + q] = fine.sphere_index(int(j), d.n, d.l, d.m);
    }
  return map;
}

CVector embed(const MixedBasis& coarse, const CVector& coeffs, const MixedBasis& fine) {
  const auto map = embedding_map(coarse, fine);
  CVector out(fine.total_dim(), 0.0);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] = coeffs[i];
  return out;
}

}  // namespace apwdg
