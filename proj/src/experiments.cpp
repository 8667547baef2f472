#include "apwdg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace apwdg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cplx block_form(const CMatrix& A, const CVector& x, const CVector& y) { return form(A, x, y); }

}  // namespace

PotentialSpec ProblemSpec::potential_for(int K, const std::vector<AtomicSite>* override_sites) const {
  const auto& s = override_sites ? *override_sites : sites;
  const int kp = effective_k_pot(K);
  switch (potential) {
    case PotentialKind::Coulomb:
      return periodized_coulomb_fourier(cell, s, kp);
    case PotentialKind::Zero:
      return zero_potential(cell, s, kp);
    case PotentialKind::Fourier:
      return fourier_potential(cell, s, extra, kp);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown potential kind");
}

EigenSolution pw_reference_solve(const UnitCell& cell, const PotentialSpec& potential, int K_ref, int nev,
                                 bool use_symmetry) {
  if (K_ref < 1) throw Error(ErrorCode::InvalidArgument, "K_ref must be >= 1");
  BasisParams params;
  params.K = K_ref;
  auto basis = build_mixed_basis(cell, {}, params);
  SystemOptions opts;
  opts.use_symmetry = use_symmetry;
  DgSystem system(basis, potential, opts);
  return system.solve(std::min<int>(nev, static_cast<int>(basis->total_dim())));
}

const AssembledOperators& ReferenceOperators::block(int irrep) {
  auto it = blocks_.find(irrep);
  if (it != blocks_.end()) return it->second;
  AssembledOperators ops;
  ops.sigma = system_.sigma();
  system_.symmetry().fill_block(system_.tables(), irrep, nullptr, &ops.M, &ops.A_lap, &ops.J);
  return blocks_.emplace(irrep, std::move(ops)).first->second;
}

std::vector<ErrorRecord> dg_error(const MixedBasis& basis, const EigenSolution& solution,
                                  ReferenceOperators& reference, const EigenSolution& reference_solution,
                                  const std::vector<int>& track, std::vector<std::string>* warnings) {
  const DgSystem& ref = reference.system();
  const MixedBasis& fine = ref.basis();
  const bool nested = is_nested(basis, fine);
  std::vector<std::size_t> map;
  if (nested) map = embedding_map(basis, fine);
  std::vector<ErrorRecord> out;
  std::set<std::size_t> used;
  for (const int idx : track) {
    if (idx < 1 || static_cast<std::size_t>(idx) > reference_solution.size())
      throw Error(ErrorCode::InvalidIndex, "tracked eigenpair index exceeds the reference solution");
    const std::size_t r = static_cast<std::size_t>(idx - 1);
    ErrorRecord rec;
    rec.eig_index = idx;
    std::size_t match = r < solution.size() ? r : solution.size() - 1;
    CVector yb, best_xb;
    const AssembledOperators* ops = nullptr;
    if (nested) {
      const int irrep = reference_solution.irreps[r];
      ops = &reference.block(irrep);
      yb = ref.symmetry().restrict_to(irrep, reference_solution.vector(r));
      double best = -1.0;
      for (std::size_t j = 0; j < solution.size(); ++j) {
        if (used.count(j)) continue;
        const CVector u = solution.vector(j);
        CVector x(fine.total_dim(), 0.0);
        for (std::size_t i = 0; i < map.size(); ++i) x[map[i]] = u[i];
        CVector xb = ref.symmetry().restrict_to(irrep, x);
        const double ov = std::abs(block_form(ops->M, yb, xb));
        if (ov > best + 1e-12) {
          best = ov;
          match = j;
          best_xb = std::move(xb);
        }
      }
      if (best < 0.5) {
        if (warnings) {
          std::ostringstream msg;
          msg << "IndexMismatch: reference pair " << idx << " has no trial pair with overlap above 0.5 (best "
              << best << ")";
          warnings->push_back(msg.str());
        }
        ops = nullptr;
      } else if (match != r && warnings) {
        std::ostringstream msg;
        msg << "reference pair " << idx << " matched to trial pair " << match + 1 << " by overlap";
        warnings->push_back(msg.str());
      }
    }
    used.insert(match);
    rec.eigenvalue = solution.eigenvalues[match];
    rec.eig_error = std::abs(solution.eigenvalues[match] - reference_solution.eigenvalues[r]);
    if (ops) {
      const cplx ov = block_form(ops->M, yb, best_xb);
      const cplx phase = std::abs(ov) > 0 ? std::conj(ov) / std::abs(ov) : cplx(1.0);
      CVector e(yb.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = phase * best_xb[i] - yb[i];
      const double m2 = block_form(ops->M, e, e).real();
      const double a2 = block_form(ops->A_lap, e, e).real();
      const double j2 = block_form(ops->J, e, e).real();
      rec.l2_error = std::sqrt(std::max(0.0, m2));
      rec.dg_error = std::sqrt(std::max(0.0, 2.0 * a2 + m2 + ref.sigma() * j2));
    }
    out.push_back(rec);
  }
  return out;
}

void StudyConfig::validate() const {
  static const std::set<std::string> vars{"K", "N", "L", "R", "C_sigma"};
  if (!vars.count(sweep_var)) throw Error(ErrorCode::InvalidArgument, "sweep variable must be one of K, N, L, R, C_sigma");
  if (values.empty() && pw_values.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep");
  if (!std::is_sorted(values.begin(), values.end()))
    throw Error(ErrorCode::InvalidArgument, "sweep values must be ascending");
  if (track.empty()) throw Error(ErrorCode::InvalidArgument, "no eigenpairs tracked");
  for (int t : track)
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "tracked indices are 1-based");
  for (double v : values) {
    const BasisParams p = params_at(v);
    if (p.K > reference.K || p.N > reference.N || p.L > reference.L) {
      std::ostringstream msg;
      msg << "reference (K=" << reference.K << ", N=" << reference.N << ", L=" << reference.L
          << ") does not dominate sweep point " << sweep_var << "=" << v;
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
  }
}

BasisParams StudyConfig::params_at(double value) const {
  BasisParams p = base;
  const int iv = static_cast<int>(std::lround(value));
  if (sweep_var == "K") p.K = iv;
  if (sweep_var == "N") p.N = iv;
  if (sweep_var == "L") p.L = iv;
  return p;
}

std::vector<AtomicSite> StudyConfig::sites_at(double value) const {
  std::vector<AtomicSite> s = problem.sites;
  if (sweep_var == "R")
    for (auto& site : s) site.radius = value;
  return s;
}

double StudyConfig::c_sigma_at(double value) const { return sweep_var == "C_sigma" ? value : C_sigma; }

namespace {

struct BuiltSystem {
  std::unique_ptr<DgSystem> system;
  EigenSolution solution;
  double assemble_s = 0.0, solve_s = 0.0;
};

BuiltSystem build_and_solve(const StudyConfig& cfg, const BasisParams& params, const std::vector<AtomicSite>& sites,
                            double c_sigma, int nev) {
  BuiltSystem out;
  SystemOptions opts;
  opts.assembly = cfg.assembly;
  opts.assembly.C_sigma = c_sigma;
  opts.use_symmetry = cfg.use_symmetry;
  auto basis = build_mixed_basis(cfg.problem.cell, sites, params);
  nev = std::min<int>(nev, static_cast<int>(basis->total_dim()));
  PotentialSpec pot;
  if (cfg.scf) {
    ScfConfig sc = cfg.scf_config;
    const ScfState st = scf_solve(cfg.problem.cell, sites, params, sc, opts);
    for (const auto& h : st.history) {
      out.assemble_s += h.assemble_s;
      out.solve_s += h.solve_s;
    }
    const int kp = sc.k_pot > 0 ? sc.k_pot : 4 * params.K;
    pot = periodized_coulomb_fourier(cfg.problem.cell, sites, kp);
    pot.extra = hartree_fourier(cfg.problem.cell, st.density);
    pot.extra.scale(sc.hartree_scale);
  } else {
    pot = cfg.problem.potential_for(params.K, &sites);
  }
  const auto t0 = std::chrono::steady_clock::now();
  out.system = std::make_unique<DgSystem>(basis, pot, opts);
  out.assemble_s += seconds_since(t0);
  SolveTiming t;
  out.solution = out.system->solve(nev, &t);
  out.assemble_s += t.assemble_s;
  out.solve_s += t.solve_s;
  return out;
}

}  // namespace

StudyResult convergence_study(const StudyConfig& config) {
  config.validate();
  StudyResult result;
  const int nev_ref = *std::max_element(config.track.begin(), config.track.end());
  const double c_ref = config.reference_C_sigma > 0 ? config.reference_C_sigma : config.C_sigma;
  BuiltSystem ref = build_and_solve(config, config.reference, config.problem.sites, c_ref, nev_ref);
  result.reference_eigenvalues = ref.solution.eigenvalues;
  result.reference_dofs = ref.system->basis().total_dim();
  for (const auto& w : ref.system->warnings()) result.warnings.push_back("reference: " + w);
  ReferenceOperators ref_ops(*ref.system);

  for (const double v : config.values) {
    const BasisParams params = config.params_at(v);
    const auto sites = config.sites_at(v);
    BuiltSystem pt = build_and_solve(config, params, sites, config.c_sigma_at(v), nev_ref + 2);
    auto recs = dg_error(pt.system->basis(), pt.solution, ref_ops, ref.solution, config.track, &result.warnings);
    for (auto& r : recs) {
      r.sweep_var = config.sweep_var;
      r.value = v;
      r.dofs = pt.system->basis().total_dim();
      r.assemble_s = pt.assemble_s;
      r.solve_s = pt.solve_s;
      result.records.push_back(r);
    }
  }

  for (const int K : config.pw_values) {
    const auto t0 = std::chrono::steady_clock::now();
    BasisParams params;
    params.K = K;
    auto basis = build_mixed_basis(config.problem.cell, {}, params);
    SystemOptions opts;
    opts.use_symmetry = config.use_symmetry;
    PotentialSpec pot;
    if (config.scf) {
      // The plane-wave baseline of a self-consistent problem uses the converged DG density.
      pot = periodized_coulomb_fourier(config.problem.cell, config.problem.sites, 4 * K);
      pot.extra = ref.system->potential().extra;
    } else {
      pot = config.problem.potential_for(K);
    }
    DgSystem system(basis, pot, opts);
    const double setup = seconds_since(t0);
    SolveTiming t;
    const EigenSolution sol = system.solve(std::min<int>(nev_ref + 2, static_cast<int>(basis->total_dim())), &t);
    for (const int idx : config.track) {
      ErrorRecord r;
      r.sweep_var = "K_pw";
      r.value = K;
      r.dofs = basis->total_dim();
      r.eig_index = idx;
      const std::size_t i = std::min<std::size_t>(idx - 1, sol.size() - 1);
      r.eigenvalue = sol.eigenvalues[i];
      r.eig_error = std::abs(sol.eigenvalues[i] - ref.solution.eigenvalues[idx - 1]);
      r.assemble_s = setup + t.assemble_s;
      r.solve_s = t.solve_s;
      result.records.push_back(r);
    }
  }
  return result;
}

InverseEstimate surface_inverse_estimate(const UnitCell& cell, const AtomicSite& site, const BasisParams& params,
                                         int l_cut) {
  if (l_cut < params.L + 12) throw Error(ErrorCode::InvalidArgument, "L_cut must be at least L + 12");
  MixedBasis basis(cell, {site}, params);
  const int nlm = lm_count(l_cut);
  const double R = site.radius;
  // C = sum_i t_i t_i^H over all trace vectors t_i in harmonic coefficients.
  CMatrix C(nlm, nlm);
  auto add = [&](const std::vector<cplx>& t) {
    for (int j = 0; j < nlm; ++j) {
      if (t[j] == 0.0) continue;
      for (int i = 0; i <= j; ++i) C(i, j) += t[i] * std::conj(t[j]);
    }
  };
  const RadialFamily fam = basis.radial_family(0);
  std::vector<double> chi(params.N + 1), dchi(params.N + 1);
  radial_basis_all(fam, R, chi.data(), dchi.data());
  for (int n = 0; n <= params.N; ++n)
    for (int lm = 0; lm < lm_count(params.L); ++lm) {
      std::vector<cplx> t(nlm, 0.0);
      t[lm] = chi[n];
      add(t);
    }
  const double pref = 4.0 * kPi / std::sqrt(cell.volume());
  std::vector<cplx> y(nlm);
  std::vector<double> jl(l_cut + 1);
  for (const auto& w : basis.pw()) {
    sph_harm_all(l_cut, w.k, y.data());
    sph_bessel_all(l_cut, w.norm * R, jl.data(), nullptr);
    const cplx ph = pref * std::polar(1.0, w.k.dot(site.center));
    std::vector<cplx> t(nlm);
    cplx il = 1.0;
    for (int l = 0; l <= l_cut; ++l) {
      for (int m = -l; m <= l; ++m) t[lm_index(l, m)] = ph * il * jl[l] * std::conj(y[lm_index(l, m)]);
      il *= cplx(0.0, 1.0);
    }
    add(t);
  }
  std::vector<double> mu(nlm);
  const lapack_int ln = nlm;
  if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', ln, reinterpret_cast<lapack_complex_double*>(C.data()), ln,
                     mu.data()) != 0)
    throw Error(ErrorCode::ConvergenceFailure, "trace-space eigensolver failed");
  const double cut = 1e-10 * mu.back();
  std::vector<int> keep;
  for (int i = 0; i < nlm; ++i)
    if (mu[i] > cut) keep.push_back(i);
  const int k = static_cast<int>(keep.size());
  // Q^H D Q with D = diag(l(l+1) + 1); the surface mass is the identity in these coordinates.
  CMatrix S(k, k);
  for (int b = 0; b < k; ++b)
    for (int a = 0; a <= b; ++a) {
      cplx acc = 0;
      for (int l = 0; l <= l_cut; ++l)
        for (int m = -l; m <= l; ++m) {
          const int i = lm_index(l, m);
          acc += std::conj(C(i, keep[a])) * (l * (l + 1.0) + 1.0) * C(i, keep[b]);
        }
      S(a, b) = acc;
    }
  std::vector<double> lam(k);
  if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', k, reinterpret_cast<lapack_complex_double*>(S.data()), k,
                     lam.data()) != 0)
    throw Error(ErrorCode::ConvergenceFailure, "surface eigensolver failed");
  InverseEstimate out;
  out.varrho = params.varrho();
  out.radius = R;
  out.lambda_max = lam.back();
  out.trace_rank = k;
  out.dropped_modes = nlm - k;
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace apwdg
