#include "apwdg/system.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace apwdg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DgSystem::DgSystem(std::shared_ptr<const MixedBasis> basis, PotentialSpec potential, const SystemOptions& opts,
                   std::vector<SphereExpansion> expansions)
    : basis_(std::move(basis)), potential_(std::move(potential)), expansions_(std::move(expansions)) {
  const auto t0 = std::chrono::steady_clock::now();
  if (expansions_.empty() && basis_->n_sites() > 0)
    expansions_ = build_sphere_expansions(*basis_, potential_, opts.assembly);
  tables_ = std::make_unique<OperatorTables>(*basis_, potential_, expansions_, opts.assembly);
  symmetry_ = std::make_unique<SymmetryReduction>(*basis_, potential_, opts.use_symmetry);
  setup_s_ = seconds_since(t0);
}

AssembledOperators DgSystem::block(int irrep, bool auxiliary) const {
  AssembledOperators ops;
  ops.sigma = sigma();
  ops.warnings = warnings();
  symmetry_->fill_block(*tables_, irrep, &ops.H, &ops.M, auxiliary ? &ops.A_lap : nullptr,
                        auxiliary ? &ops.J : nullptr);
  return ops;
}

AssembledOperators DgSystem::full(bool auxiliary) const {
  AssembledOperators ops;
  ops.sigma = sigma();
  ops.warnings = warnings();
  tables_->fill(&ops.H, &ops.M, auxiliary ? &ops.A_lap : nullptr, auxiliary ? &ops.J : nullptr);
  return ops;
}

EigenSolution DgSystem::solve(int nev, SolveTiming* timing, int first_irrep) const {
  if (nev < 1 || static_cast<std::size_t>(nev) > basis_->total_dim())
    throw Error(ErrorCode::InvalidArgument, "nev must lie in [1, total_dim]");
  struct Pair {
    double value;
    int irrep;
    CVector block;
    double residual, relative;
  };
  std::vector<Pair> pairs;
  double cond = 0.0;
  SolveTiming t;
  std::vector<int> order(symmetry_->n_irreps());
  std::iota(order.begin(), order.end(), 0);
  if (first_irrep > 0 && first_irrep < static_cast<int>(order.size()))
    std::rotate(order.begin(), order.begin() + first_irrep, order.begin() + first_irrep + 1);
  for (const int c : order) {
    const std::size_t dim = symmetry_->block_dim(c);
    if (dim == 0) continue;
    auto t0 = std::chrono::steady_clock::now();
    AssembledOperators ops;
    symmetry_->fill_block(*tables_, c, &ops.H, &ops.M, nullptr, nullptr);
    t.assemble_s += seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    if (pairs.size() >= static_cast<std::size_t>(nev)) {
      std::vector<double> vals;
      for (const auto& p : pairs) vals.push_back(p.value);
      std::nth_element(vals.begin(), vals.begin() + (nev - 1), vals.end());
      const double cut = vals[nev - 1] + 1e-10 * std::max(1.0, std::abs(vals[nev - 1]));
      const bool skip = eigenvalues_above(ops.H, ops.M, cut);
      if (skip) {
        t.solve_s += seconds_since(t0);
        continue;
      }
    }
    const int k = static_cast<int>(std::min<std::size_t>(nev, dim));
    EigenSolution part = solve_generalized(ops.H, ops.M, k);
    t.solve_s += seconds_since(t0);
    cond = std::max(cond, part.mass_condition);
    for (int i = 0; i < k; ++i)
      pairs.push_back({part.eigenvalues[i], c, part.vector(i), part.residual_norms[i], part.relative_residuals[i]});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.value < b.value || (a.value == b.value && a.irrep < b.irrep);
  });
  pairs.resize(nev);

  EigenSolution out;
  out.mass_condition = cond;
  out.eigenvectors = CMatrix(basis_->total_dim(), nev);
  for (int i = 0; i < nev; ++i) {
    out.eigenvalues.push_back(pairs[i].value);
    out.residual_norms.push_back(pairs[i].residual);
    out.relative_residuals.push_back(pairs[i].relative);
    out.irreps.push_back(pairs[i].irrep);
    const CVector x = symmetry_->expand(pairs[i].irrep, pairs[i].block);
    std::copy(x.begin(), x.end(), out.eigenvectors.col(i));
  }
  normalize_phases(out.eigenvectors);
  if (timing) *timing = t;
  return out;
}

}  // namespace apwdg
