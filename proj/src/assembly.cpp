#include "apwdg/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "apwdg/parallel.hpp"
#include "apwdg/specialfn.hpp"

namespace apwdg {

double penalty_sigma(const BasisParams& params, double C_sigma) {
  if (!(C_sigma > 0)) throw Error(ErrorCode::InvalidArgument, "C_sigma must be positive");
  return C_sigma * std::pow(static_cast<double>(params.varrho()), 2.0 + 2.0 * params.epsilon);
}

PenaltySpec make_penalty(const BasisParams& params, double C_sigma) {
  return {C_sigma, params.epsilon, penalty_sigma(params, C_sigma)};
}

int default_l_pot(const BasisParams& params, const AssemblyOptions& opts) {
  return opts.l_pot >= 0 ? opts.l_pot : 2 * params.L;
}

QuadratureRule radial_rule(const MixedBasis& basis, int site, const AssemblyOptions& opts) {
  const double R = basis.sites().at(site).radius;
  int n = opts.radial_points;
  if (n <= 0) {
    // The ball part of V(k_q - k_p) integrates j_l(|k| r) with |k| up to 2 * 2 pi K / D.
    const double kmax = 2.0 * basis.cell().dk() * basis.params().K;
    n = std::max(basis.params().N + 10, static_cast<int>(std::ceil(kmax * R)) + 16);
  }
  return gauss_legendre(n, 0.0, R);
}

std::vector<SphereExpansion> build_sphere_expansions(const MixedBasis& basis, const PotentialSpec& potential,
                                                     const AssemblyOptions& opts) {
  std::vector<SphereExpansion> out;
  const int l_pot = default_l_pot(basis.params(), opts);
  for (std::size_t j = 0; j < basis.n_sites(); ++j)
    out.push_back(sphere_expansion(potential, static_cast<int>(j), l_pot, radial_rule(basis, int(j), opts).nodes));
  return out;
}

namespace {

struct SiteTables {
  double R = 1.0;
  Vec3 center;
  double Z = 0.0;
  // (4 pi R^2 / sqrt|Omega|) e^{-i k_p.R_j} (-i)^l Y_lm(khat_p), [p * nlm + lm]
  std::vector<cplx> phase_y;
  // j_l(k_p R) and k_p j_l'(k_p R), [p * (L + 1) + l]
  std::vector<double> jl, kdjl;
  std::vector<double> chi_R, dchi_R;
  // radial integrals, [n * nb + n']
  std::vector<double> gram, kin1, kin0, sing;
  // int r^2 chi_n chi_n' w_lm dr, [(n * nb + n') * nlm_pot + lm]
  std::vector<cplx> pot;
  // partial-wave surface data up to l_cut, [p * (l_cut + 1) + l]
  std::vector<double> jl_cut, kdjl_cut;
};

}  // namespace

struct OperatorTables::Impl {
  const MixedBasis& basis;
  double sigma = 0, volume = 0, g = 0;
  int K = 0, N = 0, L = 0, nb = 0, l_pot = 0, nlm = 0, nlm_pot = 0;
  SurfaceSum surface = SurfaceSum::ClosedForm;
  int l_cut = 0;
  mutable std::vector<std::string> warnings;
  mutable std::atomic<double> max_tail{0.0};

  int dmax = 0, side = 0;
  std::vector<cplx> U, V, F, G;  // functions of n_q - n_p
  std::vector<SiteTables> sites;
  std::unique_ptr<GauntTable> gaunt;

  explicit Impl(const MixedBasis& b) : basis(b) {}

  std::size_t didx(const IVec3& d) const {
    return (static_cast<std::size_t>(d.n1 + dmax) * side + (d.n2 + dmax)) * side + (d.n3 + dmax);
  }

  void surface_partial_wave(std::size_t p, std::size_t q, cplx& flux, cplx& jump) const;
  cplx coupling_h(const SiteTables& s, std::size_t p, int n, int l, int lm) const {
    const std::size_t jl_at = p * (L + 1) + l;
    return s.phase_y[p * nlm + lm] *
           (0.25 * s.jl[jl_at] * s.dchi_R[n] - 0.25 * s.chi_R[n] * s.kdjl[jl_at] - sigma * s.jl[jl_at] * s.chi_R[n]);
  }
  cplx coupling_j(const SiteTables& s, std::size_t p, int n, int l, int lm) const {
    return -s.phase_y[p * nlm + lm] * s.jl[p * (L + 1) + l] * s.chi_R[n];
  }
  Entry sphere_entry(int site, std::size_t a, std::size_t b) const;
};

void OperatorTables::Impl::surface_partial_wave(std::size_t p, std::size_t q, cplx& flux, cplx& jump) const {
  const auto& kp = basis.pw()[p];
  const auto& kq = basis.pw()[q];
  const double c = (kp.norm > 0 && kq.norm > 0) ? kp.k.dot(kq.k) / (kp.norm * kq.norm) : 1.0;
  flux = jump = 0.0;
  for (const auto& s : sites) {
    const double* jp = &s.jl_cut[p * (l_cut + 1)];
    const double* jq = &s.jl_cut[q * (l_cut + 1)];
    const double* dp = &s.kdjl_cut[p * (l_cut + 1)];
    const double* dq = &s.kdjl_cut[q * (l_cut + 1)];
    double pl0 = 1.0, pl1 = c;
    double fsum = 0, jsum = 0, last = 0, total = 0;
    for (int l = 0; l <= l_cut; ++l) {
      const double pl = l == 0 ? 1.0 : (l == 1 ? c : ((2.0 * l - 1.0) * c * pl1 - (l - 1.0) * pl0) / l);
      if (l >= 2) {
        pl0 = pl1;
        pl1 = pl;
      }
      const double w = (2.0 * l + 1.0) * pl;
      const double ft = w * 0.25 * (dq[l] * jp[l] + jq[l] * dp[l]);
      const double jt = w * jq[l] * jp[l];
      fsum += ft;
      jsum += jt;
      last = std::abs(ft) + sigma * std::abs(jt);
      total += last;
    }
    if (total > 0) {
      double prev = max_tail.load();
      const double rel = last / total;
      while (rel > prev && !max_tail.compare_exchange_weak(prev, rel)) {
      }
    }
    const double pref = 4.0 * kPi * s.R * s.R / volume;
    const cplx ph = std::polar(1.0, (kq.k - kp.k).dot(s.center));
    flux += pref * ph * fsum;
    jump += pref * ph * jsum;
  }
}

OperatorTables::Entry OperatorTables::Impl::sphere_entry(int site, std::size_t a, std::size_t b) const {
  const SiteTables& s = sites[site];
  const int lma = static_cast<int>(a / nb), na = static_cast<int>(a % nb);
  const int lmb = static_cast<int>(b / nb), nbb = static_cast<int>(b % nb);
  const std::size_t rr = static_cast<std::size_t>(na) * nb + nbb;
  Entry e{0.0, 0.0, 0.0, 0.0};
  const int la = static_cast<int>(std::sqrt(double(lma)) + 1e-9), ma = lma - la * la - la;
  const int lb = static_cast<int>(std::sqrt(double(lmb)) + 1e-9), mb = lmb - lb * lb - lb;
  if (lma == lmb) {
    const double R2 = s.R * s.R;
    e.M = s.gram[rr];
    e.A = 0.5 * (s.kin1[rr] + la * (la + 1.0) * s.kin0[rr]);
    e.J = R2 * s.chi_R[na] * s.chi_R[nbb];
    e.H = e.A - s.Z * s.sing[rr] +
          R2 * (-0.25 * s.chi_R[na] * s.dchi_R[nbb] - 0.25 * s.dchi_R[na] * s.chi_R[nbb]) + sigma * e.J;
  }
  const int mh = ma - mb;
  cplx v = 0;
  for (int lh = std::max(std::abs(la - lb), std::abs(mh)); lh <= std::min(la + lb, l_pot); ++lh) {
    if ((la + lb + lh) % 2) continue;
    const double gc = (*gaunt)(lma, lmb, lh);
    if (gc != 0.0) v += gc * s.pot[rr * nlm_pot + lm_index(lh, mh)];
  }
  e.H += v;
  return e;
}

OperatorTables::OperatorTables(const MixedBasis& basis, const PotentialSpec& potential,
                               const std::vector<SphereExpansion>& expansions, const AssemblyOptions& opts)
    : impl_(std::make_unique<Impl>(basis)) {
  Impl& m = *impl_;
  const auto& params = basis.params();
  m.sigma = penalty_sigma(params, opts.C_sigma);
  m.volume = basis.cell().volume();
  m.g = basis.cell().dk();
  m.K = params.K;
  m.N = params.N;
  m.L = params.L;
  m.nb = params.N + 1;
  m.l_pot = default_l_pot(params, opts);
  m.nlm = lm_count(m.L);
  m.nlm_pot = lm_count(m.l_pot);
  m.surface = opts.surface;
  m.l_cut = opts.l_cut >= 0 ? opts.l_cut : m.L + 12;
  m.warnings = basis.warnings();
  if (potential.k_cutoff < 2 * m.K) {
    std::ostringstream msg;
    msg << "potential cutoff K_pot=" << potential.k_cutoff << " < 2K=" << 2 * m.K
        << " truncates V(k_q - k_p)";
    m.warnings.push_back(msg.str());
  }
  if (expansions.size() != basis.n_sites())
    throw Error(ErrorCode::InvalidArgument, "one sphere expansion per site is required");
  m.gaunt = std::make_unique<GauntTable>(m.L, m.l_pot);

  const double sqrt_vol = std::sqrt(m.volume);
  const auto& pw = basis.pw();
  const std::size_t npw = pw.size();

  // Per-site radial and coupling tables.
  m.sites.resize(basis.n_sites());
  for (std::size_t j = 0; j < basis.n_sites(); ++j) {
    SiteTables& s = m.sites[j];
    const AtomicSite& site = basis.sites()[j];
    const SphereExpansion& ex = expansions[j];
    if (ex.l_pot < m.l_pot) throw Error(ErrorCode::InvalidArgument, "sphere expansion L_pot below assembly L_pot");
    s.R = site.radius;
    s.center = site.center;
    s.Z = ex.singular_charge;
    const RadialFamily fam = basis.radial_family(int(j));
    const QuadratureRule rule = radial_rule(basis, int(j), opts);
    if (rule.nodes.size() != ex.nodes.size())
      throw Error(ErrorCode::InvalidArgument, "sphere expansion nodes do not match the radial rule");
    const std::size_t nr = rule.nodes.size();
    std::vector<double> chi(nr * m.nb), dchi(nr * m.nb);
    for (std::size_t i = 0; i < nr; ++i) radial_basis_all(fam, rule.nodes[i], &chi[i * m.nb], &dchi[i * m.nb]);
    s.chi_R.resize(m.nb);
    s.dchi_R.resize(m.nb);
    radial_basis_all(fam, s.R, s.chi_R.data(), s.dchi_R.data());
    const std::size_t nb2 = static_cast<std::size_t>(m.nb) * m.nb;
    s.gram.assign(nb2, 0.0);
    s.kin1.assign(nb2, 0.0);
    s.kin0.assign(nb2, 0.0);
    s.sing.assign(nb2, 0.0);
    s.pot.assign(nb2 * m.nlm_pot, 0.0);
    for (int a = 0; a < m.nb; ++a)
      for (int b = 0; b < m.nb; ++b) {
        const std::size_t rr = static_cast<std::size_t>(a) * m.nb + b;
        for (std::size_t i = 0; i < nr; ++i) {
          const double r = rule.nodes[i], w = rule.weights[i];
          const double cc = chi[i * m.nb + a] * chi[i * m.nb + b];
          s.gram[rr] += w * r * r * cc;
          s.kin1[rr] += w * r * r * dchi[i * m.nb + a] * dchi[i * m.nb + b];
          s.kin0[rr] += w * cc;
          s.sing[rr] += w * r * cc;
        }
        for (int lm = 0; lm < m.nlm_pot; ++lm) {
          cplx acc = 0;
          for (std::size_t i = 0; i < nr; ++i) {
            const double r = rule.nodes[i];
            acc += rule.weights[i] * r * r * chi[i * m.nb + a] * chi[i * m.nb + b] * ex.smooth(lm, i);
          }
          s.pot[rr * m.nlm_pot + lm] = acc;
        }
      }

    s.phase_y.resize(npw * m.nlm);
    s.jl.resize(npw * (m.L + 1));
    s.kdjl.resize(npw * (m.L + 1));
    parallel_for(0, npw, [&](std::size_t p) {
      std::vector<cplx> y(m.nlm);
      sph_harm_all(m.L, pw[p].k, y.data());
      const cplx ph = 4.0 * kPi * s.R * s.R / sqrt_vol * std::polar(1.0, -pw[p].k.dot(s.center));
      cplx mil = 1.0;
      for (int l = 0; l <= m.L; ++l) {
        for (int mm = -l; mm <= l; ++mm) s.phase_y[p * m.nlm + lm_index(l, mm)] = ph * mil * y[lm_index(l, mm)];
        mil *= cplx(0.0, -1.0);
      }
      std::vector<double> jv(m.L + 1), dj(m.L + 1);
      sph_bessel_all(m.L, pw[p].norm * s.R, jv.data(), dj.data());
      for (int l = 0; l <= m.L; ++l) {
        s.jl[p * (m.L + 1) + l] = jv[l];
        s.kdjl[p * (m.L + 1) + l] = pw[p].norm * dj[l];
      }
    });
    if (m.surface == SurfaceSum::PartialWave) {
      s.jl_cut.resize(npw * (m.l_cut + 1));
      s.kdjl_cut.resize(npw * (m.l_cut + 1));
      std::vector<double> jv(m.l_cut + 1), dj(m.l_cut + 1);
      for (std::size_t p = 0; p < npw; ++p) {
        sph_bessel_all(m.l_cut, pw[p].norm * s.R, jv.data(), dj.data());
        for (int l = 0; l <= m.l_cut; ++l) {
          s.jl_cut[p * (m.l_cut + 1) + l] = jv[l];
          s.kdjl_cut[p * (m.l_cut + 1) + l] = pw[p].norm * dj[l];
        }
      }
    }
  }

  // Plane-wave block tables over d = n_q - n_p, |d| <= 2K.
  m.dmax = 2 * m.K;
  m.side = 2 * m.dmax + 1;
  const std::size_t ncube = static_cast<std::size_t>(m.side) * m.side * m.side;
  m.U.assign(ncube, 0.0);
  m.V.assign(ncube, 0.0);
  m.F.assign(ncube, 0.0);
  m.G.assign(ncube, 0.0);

  // Ball integrals int r^2 v_lm(r) j_l(s r) dr per site and shell s = g sqrt(d2).
  const int d2max = m.dmax * m.dmax;
  const bool have_potential = potential.has_coulomb() || !potential.extra.empty();
  std::vector<std::vector<cplx>> ball(basis.n_sites());
  if (have_potential) {
    for (std::size_t j = 0; j < basis.n_sites(); ++j) {
      const SphereExpansion& ex = expansions[j];
      const QuadratureRule rule = radial_rule(basis, int(j), opts);
      const double R = m.sites[j].R, Z = m.sites[j].Z;
      auto& tab = ball[j];
      tab.assign(static_cast<std::size_t>(d2max + 1) * m.nlm_pot, 0.0);
      parallel_for(0, d2max + 1, [&](std::size_t d2) {
        const double k = m.g * std::sqrt(double(d2));
        std::vector<double> jv(m.l_pot + 1);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          const double r = rule.nodes[i];
          sph_bessel_all(m.l_pot, k * r, jv.data(), nullptr);
          for (int l = 0; l <= m.l_pot; ++l) {
            const double f = rule.weights[i] * r * r * jv[l];
            for (int mm = -l; mm <= l; ++mm) tab[d2 * m.nlm_pot + lm_index(l, mm)] += f * ex.smooth(lm_index(l, mm), i);
          }
        }
        const double singular = k > 0 ? (1.0 - std::cos(k * R)) / (k * k) : 0.5 * R * R;
        tab[d2 * m.nlm_pot] += -Z * std::sqrt(4.0 * kPi) * singular;
      });
    }
  }

  parallel_for(0, static_cast<std::size_t>(m.side), [&](std::size_t ia) {
    std::vector<cplx> y(m.nlm_pot);
    const int a = static_cast<int>(ia) - m.dmax;
    for (int b = -m.dmax; b <= m.dmax; ++b)
      for (int c = -m.dmax; c <= m.dmax; ++c) {
        const IVec3 d{a, b, c};
        const int d2 = d.norm2();
        if (d2 > d2max) continue;
        const std::size_t at = m.didx(d);
        const Wavevector w = make_wavevector(basis.cell(), d);
        const double s = w.norm;
        cplx u = d2 == 0 ? 1.0 : 0.0, f = 0.0, gj = 0.0, v = 0.0;
        if (have_potential) {
          v = potential.fourier(-d) / sqrt_vol;
          sph_harm_all(m.l_pot, w.k, y.data());
        }
        for (std::size_t j = 0; j < m.sites.size(); ++j) {
          const SiteTables& st = m.sites[j];
          const cplx ph = std::polar(1.0, w.k.dot(st.center));
          const double x = s * st.R;
          double jv[2];
          sph_bessel_all(1, x, jv, nullptr);
          const double ball_vol = s > 0 ? 4.0 * kPi * st.R * st.R * jv[1] / s : 4.0 * kPi / 3.0 * st.R * st.R * st.R;
          const double area = 4.0 * kPi * st.R * st.R / m.volume;
          u -= ph * ball_vol / m.volume;
          f += ph * area * (-0.25 * s * jv[1]);
          gj += ph * area * jv[0];
          if (have_potential) {
            cplx acc = 0, il = 1.0;
            for (int l = 0; l <= m.l_pot; ++l) {
              cplx part = 0;
              for (int mm = -l; mm <= l; ++mm)
                part += y[lm_index(l, mm)] * ball[j][static_cast<std::size_t>(d2) * m.nlm_pot + lm_index(l, mm)];
              acc += il * part;
              il *= cplx(0.0, 1.0);
            }
            v -= 4.0 * kPi / m.volume * ph * acc;
          }
        }
        m.U[at] = u;
        m.F[at] = f;
        m.G[at] = gj;
        m.V[at] = v;
      }
  });
}

OperatorTables::~OperatorTables() = default;

double OperatorTables::sigma() const { return impl_->sigma; }
const MixedBasis& OperatorTables::basis() const { return impl_->basis; }
const std::vector<std::string>& OperatorTables::warnings() const { return impl_->warnings; }

OperatorTables::Entry OperatorTables::entry(std::size_t p, std::size_t q) const {
  const Impl& m = *impl_;
  const std::size_t npw = m.basis.n_pw();
  if (p < npw && q < npw) {
    const auto& kp = m.basis.pw()[p];
    const auto& kq = m.basis.pw()[q];
    const std::size_t at = m.didx(kq.n - kp.n);
    Entry e;
    e.M = m.U[at];
    e.A = 0.5 * kp.k.dot(kq.k) * m.U[at];
    cplx flux = m.F[at], jump = m.G[at];
    if (m.surface == SurfaceSum::PartialWave) m.surface_partial_wave(p, q, flux, jump);
    e.J = jump;
    e.H = e.A + m.V[at] + flux + m.sigma * jump;
    return e;
  }
  if (p >= npw && q < npw) {
    Entry e = entry(q, p);
    return {std::conj(e.H), std::conj(e.M), std::conj(e.A), std::conj(e.J)};
  }
  const std::size_t block = m.basis.sphere_block();
  if (p < npw) {
    const int site = static_cast<int>((q - npw) / block);
    const SphereDof& d = m.basis.sphere_dofs()[(q - npw) % block];
    const SiteTables& s = m.sites[site];
    const int lm = lm_index(d.l, d.m);
    return {m.coupling_h(s, p, d.n, d.l, lm), 0.0, 0.0, m.coupling_j(s, p, d.n, d.l, lm)};
  }
  const int sp = static_cast<int>((p - npw) / block), sq = static_cast<int>((q - npw) / block);
  if (sp != sq) return {0.0, 0.0, 0.0, 0.0};
  return m.sphere_entry(sp, (p - npw) % block, (q - npw) % block);
}

void OperatorTables::fill(CMatrix* H, CMatrix* M, CMatrix* A, CMatrix* J) const {
  const Impl& m = *impl_;
  const std::size_t n = m.basis.total_dim();
  const std::size_t npw = m.basis.n_pw();
  for (CMatrix* X : {H, M, A, J})
    if (X) *X = CMatrix(n, n);
  parallel_for(0, n, [&](std::size_t q) {
    for (std::size_t p = 0; p <= q; ++p) {
      if (p >= npw && q >= npw) {
        const std::size_t block = m.basis.sphere_block();
        if ((p - npw) / block != (q - npw) / block) continue;
      }
      const Entry e = entry(p, q);
      if (H) (*H)(p, q) = e.H;
      if (M) (*M)(p, q) = e.M;
      if (A) (*A)(p, q) = e.A;
      if (J) (*J)(p, q) = e.J;
    }
  });
  for (CMatrix* X : {H, M, A, J})
    if (X) {
      for (std::size_t i = 0; i < n; ++i) (*X)(i, i) = (*X)(i, i).real();
      mirror_upper(*X);
    }
  if (m.surface == SurfaceSum::PartialWave && m.max_tail.load() > 1e-12) {
    std::ostringstream msg;
    msg << "TruncationWarning: partial-wave surface sum at l_cut=" << m.l_cut << " has relative tail "
        << m.max_tail.load();
    if (std::find(m.warnings.begin(), m.warnings.end(), msg.str()) == m.warnings.end())
      m.warnings.push_back(msg.str());
  }
}

AssembledOperators assemble(const MixedBasis& basis, const PotentialSpec& potential,
                            const std::vector<SphereExpansion>& expansions, const AssemblyOptions& opts) {
  OperatorTables tables(basis, potential, expansions, opts);
  AssembledOperators ops;
  ops.sigma = tables.sigma();
  tables.fill(&ops.H, &ops.M, opts.auxiliary ? &ops.A_lap : nullptr, opts.auxiliary ? &ops.J : nullptr);
  ops.warnings = tables.warnings();
  return ops;
}

AssembledOperators assemble(const MixedBasis& basis, const PotentialSpec& potential, const AssemblyOptions& opts) {
  return assemble(basis, potential, build_sphere_expansions(basis, potential, opts), opts);
}

namespace {

std::vector<SphereExpansion> empty_expansions(const MixedBasis& basis, const AssemblyOptions& opts) {
  const PotentialSpec zero = zero_potential(basis.cell(), basis.sites(), std::max(1, 2 * basis.params().K));
  return build_sphere_expansions(basis, zero, opts);
}

}  // namespace

CMatrix assemble_overlap(const MixedBasis& basis) {
  AssemblyOptions opts;
  const PotentialSpec zero = zero_potential(basis.cell(), basis.sites(), std::max(1, 2 * basis.params().K));
  OperatorTables tables(basis, zero, empty_expansions(basis, opts), opts);
  CMatrix M;
  tables.fill(nullptr, &M, nullptr, nullptr);
  return M;
}

CMatrix assemble_hamiltonian(const MixedBasis& basis, const PotentialSpec& potential,
                             const std::vector<SphereExpansion>& expansions, const PenaltySpec& penalty,
                             AssemblyOptions opts) {
  opts.C_sigma = penalty.C_sigma;
  OperatorTables tables(basis, potential, expansions, opts);
  CMatrix H;
  tables.fill(&H, nullptr, nullptr, nullptr);
  return H;
}

LaplaceJump assemble_laplace_mass_jump(const MixedBasis& basis, const PenaltySpec& penalty) {
  AssemblyOptions opts;
  opts.C_sigma = penalty.C_sigma;
  const PotentialSpec zero = zero_potential(basis.cell(), basis.sites(), std::max(1, 2 * basis.params().K));
  OperatorTables tables(basis, zero, empty_expansions(basis, opts), opts);
  LaplaceJump out;
  tables.fill(nullptr, nullptr, &out.A_lap, &out.J);
  return out;
}

}  // namespace apwdg
