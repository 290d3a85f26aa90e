#include <algorithm>
#include <cmath>

#include "mulearn/learn.hpp"

namespace mulearn {

namespace {

void project(const std::vector<double>& v, std::vector<double>& w, int num_nonnegative) {
  w = v;
  for (std::size_t i = w.size() - num_nonnegative; i < w.size(); ++i) w[i] = std::max(0.0, w[i]);
}

double norm(std::span<const double> w) { return std::sqrt(dot(w, w)); }

}  // namespace

void CutBlock::set_positive(std::vector<double> psi) {
  positive_psi = std::move(psi);
  for (auto& cut : cuts) {
    cut.dpsi.resize(positive_psi.size());
    for (std::size_t j = 0; j < positive_psi.size(); ++j) cut.dpsi[j] = positive_psi[j] - cut.psi[j];
  }
}

std::size_t WorkingSet::total_cuts() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.cuts.size();
  return n;
}

double slack_weight(const WorkingSet& ws, const CutBlock& block, const QpSettings& s) {
  const double base = s.C / static_cast<double>(ws.blocks.size());
  return block.weak ? base * s.alpha_balance : base;
}

double primal_objective(const WorkingSet& ws, std::span<const double> w, const QpSettings& s,
                        const std::vector<std::vector<double>>* positives) {
  double obj = 0.5 * dot(w, w);
  for (std::size_t n = 0; n < ws.blocks.size(); ++n) {
    const auto& block = ws.blocks[n];
    if (block.cuts.empty()) continue;
    const double pos = dot(w, positives ? (*positives)[n] : block.positive_psi);
    double xi = 0.0;
    for (const auto& cut : block.cuts) xi = std::max(xi, cut.loss - pos + dot(w, cut.psi));
    obj += slack_weight(ws, block, s) * xi;
  }
  return obj;
}

QpResult solve_qp(WorkingSet& ws, int dim, const QpSettings& s) {
  if (s.num_nonnegative < 0 || s.num_nonnegative > dim) throw ValidationError("bad nonnegative block size");
  std::vector<double> v(dim, 0.0), w;
  for (const auto& block : ws.blocks)
    for (const auto& cut : block.cuts)
      if (cut.dual != 0)
        for (int j = 0; j < dim; ++j) v[j] += cut.dual * cut.dpsi[j];
  project(v, w, s.num_nonnegative);

  QpResult out;
  std::vector<double> g;
  std::vector<double> step(dim);
  constexpr int kInnerSteps = 20;
  for (out.sweeps = 0; out.sweeps < s.max_sweeps;) {
    ++out.sweeps;
    const double tol = s.tolerance * (1.0 + norm(w));
    double worst = 0.0;
    for (auto& block : ws.blocks) {
      auto& cuts = block.cuts;
      if (cuts.empty()) continue;
      const double budget = slack_weight(ws, block, s);
      for (int inner = 0; inner < kInnerSteps; ++inner) {
        g.resize(cuts.size());
        double spent = 0.0;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
          g[j] = cuts[j].loss - dot(w, cuts[j].dpsi);
          spent += cuts[j].dual;
        }
        const double idle = std::max(0.0, budget - spent);
        // Index -1 is the implicit slack variable with zero gradient.
        int up = -1, down = -1;
        double g_up = 0.0, g_down = 0.0;
        bool have_down = idle > 0;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
          if (g[j] > g_up) {
            g_up = g[j];
            up = static_cast<int>(j);
          }
          if (cuts[j].dual > 0 && (!have_down || g[j] < g_down)) {
            g_down = g[j];
            down = static_cast<int>(j);
            have_down = true;
          }
        }
        if (!have_down) break;
        const double resid = g_up - g_down;
        if (inner == 0) worst = std::max(worst, resid);
        if (resid <= tol || up == down) break;

        double curvature = 0.0;
        for (int j = 0; j < dim; ++j) {
          step[j] = (up >= 0 ? cuts[up].dpsi[j] : 0.0) - (down >= 0 ? cuts[down].dpsi[j] : 0.0);
          curvature += step[j] * step[j];
        }
        const double available = down >= 0 ? cuts[down].dual : idle;
        const double t = curvature > 0 ? std::min(available, resid / curvature) : available;
        if (t <= 0) break;
        if (up >= 0) cuts[up].dual += t;
        if (down >= 0) cuts[down].dual = (t == available) ? 0.0 : cuts[down].dual - t;
        for (int j = 0; j < dim; ++j) v[j] += t * step[j];
        project(v, w, s.num_nonnegative);
      }
    }
    if (worst <= tol) {
      out.converged = true;
      out.kkt_residual = worst;
      break;
    }
    out.kkt_residual = worst;
  }

  out.weights = w;
  out.slacks.assign(ws.blocks.size(), 0.0);
  for (std::size_t n = 0; n < ws.blocks.size(); ++n)
    for (const auto& cut : ws.blocks[n].cuts)
      out.slacks[n] = std::max(out.slacks[n], cut.loss - dot(w, cut.dpsi));
  out.objective = primal_objective(ws, w, s);
  return out;
}

}  // namespace mulearn
