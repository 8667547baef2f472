#include "apwdg/scf.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <sstream>

#include "apwdg/parallel.hpp"

namespace apwdg {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// Cubic complex grid with wrapped integer indexing.
class FftGrid {
 public:
  explicit FftGrid(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n) {}
  int n() const { return n_; }
  cplx& at(int a, int b, int c) { return data_[index(a, b, c)]; }
  cplx* data() { return data_.data(); }
  std::size_t size() const { return data_.size(); }
  void transform(int sign) {
    std::unique_lock lock(fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_3d(n_, n_, n_, reinterpret_cast<fftw_complex*>(data_.data()),
                                      reinterpret_cast<fftw_complex*>(data_.data()), sign, FFTW_ESTIMATE);
    lock.unlock();
    fftw_execute(plan);
    lock.lock();
    fftw_destroy_plan(plan);
  }

 private:
  std::size_t index(int a, int b, int c) const {
    auto w = [this](int x) { return static_cast<std::size_t>(((x % n_) + n_) % n_); };
    return (w(a) * n_ + w(b)) * n_ + w(c);
  }
  int n_;
  std::vector<cplx> data_;
};

double ball_transform(double k, double R) {
  if (k == 0.0) return 4.0 * kPi / 3.0 * R * R * R;
  double j[2];
  sph_bessel_all(1, k * R, j, nullptr);
  return 4.0 * kPi * R * R * j[1] / k;
}

// Adds occ * (transform of the plane-wave part restricted to the interstitial).
void add_interstitial(const MixedBasis& basis, const CVector& u, double occ, int k_pot, int grid_n,
                      FourierGrid& rho) {
  const int K = basis.params().K;
  const double vol = basis.cell().volume();
  const int need = 4 * K + 2 * k_pot + 1;
  const int n = good_fft_size(std::max(grid_n, need));
  FftGrid c(n), ball(n);
  for (std::size_t p = 0; p < basis.n_pw(); ++p) {
    const IVec3& m = basis.pw()[p].n;
    c.at(m.n1, m.n2, m.n3) = u[p];
  }
  c.transform(FFTW_BACKWARD);
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = std::norm(c.data()[i]);
  // b'(d) = sum_j conj of the ball transform at k_d, for |d_i| <= 2K + k_pot.
  const int dmax = 2 * K + k_pot;
  const double g = basis.cell().dk();
  if (basis.n_sites() > 0) {
    parallel_for(0, static_cast<std::size_t>(2 * dmax + 1), [&](std::size_t ia) {
      const int a = static_cast<int>(ia) - dmax;
      for (int b = -dmax; b <= dmax; ++b)
        for (int cc = -dmax; cc <= dmax; ++cc) {
          const Vec3 k{g * a, g * b, g * cc};
          const double kn = k.norm();
          cplx v = 0;
          for (const auto& s : basis.sites()) v += std::polar(ball_transform(kn, s.radius), -k.dot(s.center));
          ball.at(a, b, cc) = v;
        }
    });
    ball.transform(FFTW_BACKWARD);
    for (std::size_t i = 0; i < ball.size(); ++i) ball.data()[i] *= c.data()[i];
    ball.transform(FFTW_FORWARD);
  }
  c.transform(FFTW_FORWARD);
  const double n3 = double(n) * n * n;
  const double pref = occ / (std::sqrt(vol) * n3);
  for (int a = -k_pot; a <= k_pot; ++a)
    for (int b = -k_pot; b <= k_pot; ++b)
      for (int cc = -k_pot; cc <= k_pot; ++cc) {
        const IVec3 m{a, b, cc};
        if (!rho.contains(m)) continue;
        cplx v = c.at(a, b, cc);
        if (basis.n_sites() > 0) v -= ball.at(a, b, cc) / vol;
        rho.at(m) += pref * v;
      }
}

// Adds occ * (transform of the sphere part of site j).
void add_sphere(const MixedBasis& basis, const CVector& u, double occ, int site, int k_pot, const GauntTable& gaunt,
                FourierGrid& rho) {
  const auto& prm = basis.params();
  const int L = prm.L, Lr = 2 * prm.L, nb = prm.N + 1;
  const int nlm = lm_count(L), nlr = lm_count(Lr);
  const AtomicSite& s = basis.sites()[site];
  const double g = basis.cell().dk();
  const double gmax = g * k_pot;
  const int nr = std::max(prm.N + 10, static_cast<int>(std::ceil(gmax * s.radius)) + 16);
  const QuadratureRule rule = gauss_legendre(nr, 0.0, s.radius);
  const RadialFamily fam = basis.radial_family(site);
  const std::size_t off = basis.sphere_offset(site);

  // rho_LM(r_i) = sum conj(f_a) f_b Gaunt(b, a, L) with f_lm(r) = sum_n u_nlm chi_n(r).
  std::vector<cplx> rlm(static_cast<std::size_t>(nlr) * nr, 0.0);
  std::vector<double> chi(nb), dchi(nb);
  std::vector<cplx> f(nlm);
  for (int i = 0; i < nr; ++i) {
    radial_basis_all(fam, rule.nodes[i], chi.data(), dchi.data());
    for (int lm = 0; lm < nlm; ++lm) {
      cplx acc = 0;
      for (int n = 0; n < nb; ++n) acc += u[off + static_cast<std::size_t>(lm) * nb + n] * chi[n];
      f[lm] = acc;
    }
    for (int la = 0; la <= L; ++la)
      for (int ma = -la; ma <= la; ++ma) {
        const int a = lm_index(la, ma);
        if (f[a] == 0.0) continue;
        for (int lb = 0; lb <= L; ++lb)
          for (int mb = -lb; mb <= lb; ++mb) {
            const int b = lm_index(lb, mb);
            const cplx prod = std::conj(f[a]) * f[b];
            if (prod == 0.0) continue;
            const int M = mb - ma;
            for (int Lh = std::max(std::abs(la - lb), std::abs(M)); Lh <= la + lb; ++Lh) {
              if ((la + lb + Lh) % 2) continue;
              const double gc = gaunt(b, a, Lh);
              if (gc != 0.0) rlm[static_cast<std::size_t>(lm_index(Lh, M)) * nr + i] += gc * prod;
            }
          }
      }
  }
  // Radial integrals per shell: I_LM(k) = int r^2 j_L(k r) rho_LM(r) dr.
  const int n2max = k_pot * k_pot;
  std::vector<cplx> I(static_cast<std::size_t>(n2max + 1) * nlr, 0.0);
  parallel_for(0, static_cast<std::size_t>(n2max + 1), [&](std::size_t n2) {
    const double k = g * std::sqrt(double(n2));
    std::vector<double> j(Lr + 1);
    for (int i = 0; i < nr; ++i) {
      const double r = rule.nodes[i];
      sph_bessel_all(Lr, k * r, j.data(), nullptr);
      const double w = rule.weights[i] * r * r;
      for (int l = 0; l <= Lr; ++l)
        for (int m = -l; m <= l; ++m)
          I[n2 * nlr + lm_index(l, m)] += w * j[l] * rlm[static_cast<std::size_t>(lm_index(l, m)) * nr + i];
    }
  });
  const double pref = occ * 4.0 * kPi / std::sqrt(basis.cell().volume());
  parallel_for(0, static_cast<std::size_t>(2 * k_pot + 1), [&](std::size_t ia) {
    const int a = static_cast<int>(ia) - k_pot;
    std::vector<cplx> y(nlr);
    for (int b = -k_pot; b <= k_pot; ++b)
      for (int c = -k_pot; c <= k_pot; ++c) {
        const IVec3 m{a, b, c};
        const int n2 = m.norm2();
        if (n2 > n2max) continue;
        const Vec3 k{g * a, g * b, g * c};
        sph_harm_all(Lr, k, y.data());
        cplx acc = 0, mil = 1.0;
        for (int l = 0; l <= Lr; ++l) {
          cplx part = 0;
          for (int mm = -l; mm <= l; ++mm) part += y[lm_index(l, mm)] * I[n2 * nlr + lm_index(l, mm)];
          acc += mil * part;
          mil *= cplx(0.0, -1.0);
        }
        rho.at(m) += pref * std::polar(1.0, -k.dot(s.center)) * acc;
      }
  });
}

}  // namespace

void ScfConfig::validate() const {
  if (!(mixing_alpha > 0.0 && mixing_alpha <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "mixing_alpha must lie in (0, 1]");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (occupation < 0.0) throw Error(ErrorCode::InvalidArgument, "occupation must be >= 0");
  if (k_pot < 0) throw Error(ErrorCode::InvalidArgument, "k_pot must be >= 0");
  if (density_grid < 0) throw Error(ErrorCode::InvalidArgument, "density_grid must be >= 0");
}

int default_density_grid(const BasisParams& params, int k_pot) {
  return good_fft_size(4 * params.K + 2 * k_pot + 1);
}

FourierGrid density_fourier(const MixedBasis& basis, const EigenSolution& solution,
                            const std::vector<double>& occupations, int grid_n, int k_pot) {
  if (k_pot < 1) throw Error(ErrorCode::InvalidArgument, "density cutoff must be >= 1");
  if (grid_n > 0 && grid_n < 2 * k_pot + 1) {
    std::ostringstream msg;
    msg << "density grid " << grid_n << " < 2*K_pot+1 = " << 2 * k_pot + 1;
    throw Error(ErrorCode::GridTooCoarse, msg.str());
  }
  if (occupations.size() > solution.size())
    throw Error(ErrorCode::InvalidArgument, "more occupations than computed orbitals");
  if (solution.eigenvectors.rows() != basis.total_dim())
    throw Error(ErrorCode::InvalidArgument, "orbitals do not match the basis");
  FourierGrid rho(k_pot);
  std::unique_ptr<GauntTable> gaunt;
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    const double occ = occupations[i];
    if (occ == 0.0) continue;
    if (!gaunt && basis.n_sites() > 0) gaunt = std::make_unique<GauntTable>(basis.params().L, 2 * basis.params().L);
    const CVector u = solution.vector(i);
    add_interstitial(basis, u, occ, k_pot, grid_n, rho);
    for (std::size_t j = 0; j < basis.n_sites(); ++j) add_sphere(basis, u, occ, int(j), k_pot, *gaunt, rho);
  }
  // Enforce rho(-g) = conj rho(g).
  FourierGrid sym(k_pot);
  rho.for_each([&](const IVec3& m, const cplx& v) { sym.at(m) = 0.5 * (v + std::conj(rho(-m))); });
  return sym;
}

namespace {

double coefficient_distance(const FourierGrid& a, const FourierGrid& b) {
  double s = 0;
  a.for_each([&](const IVec3& m, const cplx& v) { s += std::norm(v - b(m)); });
  return std::sqrt(s);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ScfState scf_solve(const UnitCell& cell, const std::vector<AtomicSite>& sites, const BasisParams& params,
                   const ScfConfig& config, const SystemOptions& options) {
  config.validate();
  const int k_pot = config.k_pot > 0 ? config.k_pot : 4 * params.K;
  if (config.density_grid > 0 && config.density_grid < 2 * k_pot + 1) {
    std::ostringstream msg;
    msg << "density grid " << config.density_grid << " < 2*K_pot+1 = " << 2 * k_pot + 1;
    throw Error(ErrorCode::GridTooCoarse, msg.str());
  }
  ScfState state;
  state.basis = build_mixed_basis(cell, sites, params);
  const MixedBasis& basis = *state.basis;
  const PotentialSpec external = periodized_coulomb_fourier(cell, sites, k_pot);
  // The Coulomb part of the sphere expansions does not change between iterations.
  std::vector<SphereExpansion> coulomb;
  for (std::size_t j = 0; j < basis.n_sites(); ++j)
    coulomb.push_back(coulomb_sphere_expansion(external, int(j), default_l_pot(params, options.assembly),
                                               radial_rule(basis, int(j), options.assembly).nodes));
  const std::vector<double> occ{config.occupation};
  const double charge_target = config.occupation;
  const double sqrt_vol = std::sqrt(cell.volume());

  int ground_irrep = 0;
  auto solve_with = [&](const FourierGrid& rho_in, ScfIteration& rec) {
    PotentialSpec pot = external;
    if (config.hartree_scale != 0.0) {
      pot.extra = hartree_fourier(cell, rho_in);
      pot.extra.scale(config.hartree_scale);
    }
    std::vector<SphereExpansion> exps = coulomb;
    for (auto& e : exps) add_extra_expansion(pot, pot.extra, e);
    const auto t0 = std::chrono::steady_clock::now();
    DgSystem system(state.basis, pot, options, std::move(exps));
    const double setup = seconds_since(t0);
    SolveTiming timing;
    EigenSolution sol = system.solve(1, &timing, ground_irrep);
    ground_irrep = sol.irreps[0];
    rec.assemble_s = setup + timing.assemble_s;
    rec.solve_s = timing.solve_s;
    return sol;
  };

  // Initial density: lowest orbital of the external potential alone.
  ScfIteration init;
  EigenSolution sol = solve_with(FourierGrid(k_pot), init);
  FourierGrid rho_in = density_fourier(basis, sol, occ, config.density_grid, k_pot);
  state.max_charge_error = std::abs(rho_in(IVec3{}).real() * sqrt_vol - charge_target);

  for (int it = 1; it <= config.max_iters; ++it) {
    ScfIteration rec;
    rec.iteration = it;
    sol = solve_with(rho_in, rec);
    const FourierGrid rho_out = density_fourier(basis, sol, occ, config.density_grid, k_pot);
    rec.residual = coefficient_distance(rho_out, rho_in);
    rec.eigenvalue = sol.eigenvalues[0];
    rec.charge = rho_out(IVec3{}).real() * sqrt_vol;
    state.max_charge_error = std::max(state.max_charge_error, std::abs(rec.charge - charge_target));
    state.history.push_back(rec);
    state.iterations = it;
    state.solution = std::move(sol);
    if (rec.residual < config.tol) {
      state.converged = true;
      state.density = std::move(rho_in);
      return state;
    }
    FourierGrid next = rho_in;
    next.scale(1.0 - config.mixing_alpha).axpy(config.mixing_alpha, rho_out);
    rho_in = std::move(next);
    state.max_charge_error =
        std::max(state.max_charge_error, std::abs(rho_in(IVec3{}).real() * sqrt_vol - charge_target));
  }
  state.density = std::move(rho_in);
  std::ostringstream msg;
  msg << "SCF did not converge in " << config.max_iters << " iterations (last residual "
      << state.history.back().residual << ")";
  throw ScfNotConverged(msg.str(), std::move(state));
}

}  // namespace apwdg
