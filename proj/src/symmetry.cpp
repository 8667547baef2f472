#include "apwdg/symmetry.hpp"

#include <algorithm>
#include <map>

#include "apwdg/parallel.hpp"

namespace apwdg {

namespace {

const std::array<Reflection, 8>& all_reflections() {
  static const std::array<Reflection, 8> table = [] {
    std::array<Reflection, 8> t;
    for (int i = 0; i < 8; ++i) t[i].s = {(i & 1) ? -1 : 1, (i & 2) ? -1 : 1, (i & 4) ? -1 : 1};
    return t;
  }();
  return table;
}

Vec3 reflect(const Reflection& r, const Vec3& v) { return {r.s[0] * v.x, r.s[1] * v.y, r.s[2] * v.z}; }
IVec3 reflect(const Reflection& r, const IVec3& n) { return {r.s[0] * n.n1, r.s[1] * n.n2, r.s[2] * n.n3}; }

// Site whose center is the reflected center of `site`, or -1.
int site_image(const UnitCell& cell, const std::vector<AtomicSite>& sites, const Reflection& r, int site) {
  const Vec3 target = reflect(r, sites[site].center);
  const double tol = 1e-9 * cell.edge();
  for (std::size_t j = 0; j < sites.size(); ++j)
    if (cell.minimum_image(target - sites[j].center).norm() <= tol) return static_cast<int>(j);
  return -1;
}

// Y_lm(s x) = factor * Y_{l, m'}(x).
std::pair<int, cplx> harmonic_image(const Reflection& r, int l, int m) {
  double f = 1.0;
  if (r.s[2] < 0 && ((l + m) % 2 != 0)) f = -f;
  if (r.s[1] < 0) {
    if (m % 2 != 0) f = -f;
    m = -m;
  }
  if (r.s[0] < 0) m = -m;
  return {m, f};
}

}  // namespace

std::vector<Reflection> detect_reflections(const MixedBasis& basis, const PotentialSpec& potential) {
  std::vector<Reflection> out;
  const auto& sites = basis.sites();
  double extra_scale = 0.0;
  potential.extra.for_each([&](const IVec3&, const cplx& v) { extra_scale = std::max(extra_scale, std::abs(v)); });
  for (const Reflection& r : all_reflections()) {
    bool ok = true;
    for (std::size_t j = 0; ok && j < sites.size(); ++j) {
      const int t = site_image(basis.cell(), sites, r, int(j));
      ok = t >= 0 && std::abs(sites[t].radius - sites[j].radius) <= 1e-12 * sites[j].radius &&
           sites[t].charge == sites[j].charge;
    }
    for (std::size_t j = 0; ok && j < potential.sites.size(); ++j) {
      const double z = j < potential.coulomb_charge.size() ? potential.coulomb_charge[j] : 0.0;
      if (z == 0.0) continue;
      const int t = site_image(potential.cell, potential.sites, r, int(j));
      ok = t >= 0 && potential.coulomb_charge.size() > std::size_t(t) && potential.coulomb_charge[t] == z;
    }
    if (ok && extra_scale > 0) {
      potential.extra.for_each([&](const IVec3& n, const cplx& v) {
        if (std::abs(potential.extra(reflect(r, n)) - v) > 1e-10 * extra_scale) ok = false;
      });
    }
    if (ok) out.push_back(r);
  }
  return out;
}

SymmetryReduction::SymmetryReduction(const MixedBasis& basis, const PotentialSpec& potential, bool enabled)
    : basis_(basis) {
  group_ = enabled ? detect_reflections(basis, potential) : std::vector<Reflection>{Reflection{}};
  const std::size_t g = group_.size();
  for (const Reflection& r : group_) {
    std::vector<int> img(basis.n_sites());
    for (std::size_t j = 0; j < basis.n_sites(); ++j) img[j] = site_image(basis.cell(), basis.sites(), r, int(j));
    site_image_.push_back(std::move(img));
  }
  for (int p = 0; p < 8; ++p) {
    const std::array<int, 3> par{p & 1, (p >> 1) & 1, (p >> 2) & 1};
    std::vector<int> chi(g);
    for (std::size_t e = 0; e < g; ++e) {
      int c = 1;
      for (int i = 0; i < 3; ++i)
        if (par[i] && group_[e].s[i] < 0) c = -c;
      chi[e] = c;
    }
    if (std::find(characters_.begin(), characters_.end(), chi) == characters_.end()) {
      characters_.push_back(chi);
      irreps_.push_back(par);
    }
  }
  columns_.resize(irreps_.size());

  const std::size_t n = basis.total_dim();
  std::vector<char> visited(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i]) continue;
    std::vector<DofImage> imgs;
    for (const Reflection& r : group_) {
      imgs.push_back(image(r, i));
      visited[imgs.back().index] = 1;
    }
    for (std::size_t c = 0; c < irreps_.size(); ++c) {
      std::map<std::size_t, cplx> acc;
      for (std::size_t e = 0; e < g; ++e) acc[imgs[e].index] += double(characters_[c][e]) * imgs[e].factor / double(g);
      double norm = 0;
      for (const auto& [idx, v] : acc) norm += std::norm(v);
      norm = std::sqrt(norm);
      if (norm < 1e-10) continue;
      Column col;
      col.rep = i;
      col.rep_weight = norm;
      for (const auto& [idx, v] : acc)
        if (std::abs(v) > 1e-14) col.terms.emplace_back(idx, v / norm);
      columns_[c].push_back(std::move(col));
    }
  }
}

std::string SymmetryReduction::irrep_label(int irrep) const {
  const auto& p = irreps_.at(irrep);
  return std::to_string(p[0]) + std::to_string(p[1]) + std::to_string(p[2]);
}

DofImage SymmetryReduction::image(const Reflection& r, std::size_t dof) const {
  const std::size_t npw = basis_.n_pw();
  if (dof < npw) {
    const long idx = basis_.pw_index(reflect(r, basis_.pw()[dof].n));
    if (idx < 0) throw Error(ErrorCode::SymmetryMismatch, "reflected wavevector missing from the basis");
    return {static_cast<std::size_t>(idx), 1.0};
  }
  const std::size_t block = basis_.sphere_block();
  const int site = static_cast<int>((dof - npw) / block);
  const SphereDof& d = basis_.sphere_dofs()[(dof - npw) % block];
  int target = -1;
  for (std::size_t e = 0; e < group_.size(); ++e)
    if (group_[e] == r) target = site_image_[e][site];
  if (target < 0) target = site_image(basis_.cell(), basis_.sites(), r, site);
  if (target < 0) throw Error(ErrorCode::SymmetryMismatch, "reflection does not map the sites onto themselves");
  const auto [m2, f] = harmonic_image(r, d.l, d.m);
  return {basis_.sphere_index(target, d.n, d.l, m2), f};
}

CVector SymmetryReduction::apply(const Reflection& r, const CVector& x) const {
  if (x.size() != basis_.total_dim()) throw Error(ErrorCode::InvalidArgument, "vector length does not match the basis");
  CVector y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const DofImage im = image(r, i);
    y[im.index] += im.factor * x[i];
  }
  return y;
}

void SymmetryReduction::fill_block(const OperatorTables& tables, int irrep, CMatrix* H, CMatrix* M, CMatrix* A,
                                   CMatrix* J) const {
  if (trivial()) {
    tables.fill(H, M, A, J);
    return;
  }
  const auto& cols = columns_.at(irrep);
  const std::size_t nb = cols.size();
  for (CMatrix* X : {H, M, A, J})
    if (X) *X = CMatrix(nb, nb);
  parallel_for(0, nb, [&](std::size_t b) {
    for (std::size_t a = 0; a <= b; ++a) {
      OperatorTables::Entry acc{0.0, 0.0, 0.0, 0.0};
      for (const auto& [q, u] : cols[b].terms) {
        const OperatorTables::Entry e = tables.entry(cols[a].rep, q);
        acc.H += e.H * u;
        acc.M += e.M * u;
        acc.A += e.A * u;
        acc.J += e.J * u;
      }
      const double w = 1.0 / cols[a].rep_weight;
      if (H) (*H)(a, b) = acc.H * w;
      if (M) (*M)(a, b) = acc.M * w;
      if (A) (*A)(a, b) = acc.A * w;
      if (J) (*J)(a, b) = acc.J * w;
    }
  });
  for (CMatrix* X : {H, M, A, J})
    if (X) {
      for (std::size_t i = 0; i < nb; ++i) (*X)(i, i) = (*X)(i, i).real();
      mirror_upper(*X);
    }
}

CVector SymmetryReduction::expand(int irrep, const CVector& block) const {
  const auto& cols = columns_.at(irrep);
  if (block.size() != cols.size()) throw Error(ErrorCode::InvalidArgument, "block vector length mismatch");
  CVector x(basis_.total_dim(), 0.0);
  for (std::size_t a = 0; a < cols.size(); ++a)
    for (const auto& [q, u] : cols[a].terms) x[q] += u * block[a];
  return x;
}

CVector SymmetryReduction::restrict_to(int irrep, const CVector& full) const {
  const auto& cols = columns_.at(irrep);
  if (full.size() != basis_.total_dim()) throw Error(ErrorCode::InvalidArgument, "vector length does not match the basis");
  CVector c(cols.size(), 0.0);
  for (std::size_t a = 0; a < cols.size(); ++a)
    for (const auto& [q, u] : cols[a].terms) c[a] += std::conj(u) * full[q];
  return c;
}

}  // namespace apwdg
