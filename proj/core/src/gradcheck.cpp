#include "drp/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "drp/error.hpp"
#include "drp/rng.hpp"

namespace drp {

namespace {

// Sample the coordinates to probe. Blocks can be dominated by rows that the
// batch never touches (embedding tables), where analytic and numeric
// gradients are both zero; biasing toward coordinates with nonzero analytic
// gradient keeps the check informative without changing its contract.
std::vector<std::size_t> pick_coords(const Tensor& grad, std::size_t want,
                                     Rng& rng) {
  const std::size_t n = grad.size();
  if (n <= want) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < n; ++i) {
    if (grad[i] != 0.0) nonzero.push_back(i);
  }
  std::vector<std::size_t> coords;
  coords.reserve(want);
  const std::size_t from_nonzero =
      std::min(nonzero.size(), (want * 3) / 4);
  if (!nonzero.empty()) {
    rng.shuffle(nonzero.data(), nonzero.size());
    coords.assign(nonzero.begin(), nonzero.begin() + from_nonzero);
  }
  while (coords.size() < want) coords.push_back(rng.below(n));
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return coords;
}

}  // namespace

GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::function<void()>& compute_grads,
                                std::span<ParamBlock* const> params,
                                const GradCheckConfig& cfg) {
  const double l0 = loss();
  const double l1 = loss();
  if (l0 != l1) {
    throw DeterminismError("loss closure is not deterministic: " +
                           std::to_string(l0) + " vs " + std::to_string(l1));
  }

  for (auto* p : params) p->zero_grad();
  compute_grads();

  Rng rng(cfg.seed);
  GradCheckReport report;
  report.pass = true;

  auto fd_at = [&](ParamBlock* p, std::size_t idx, double h) {
    const double saved = p->value[idx];
    p->value[idx] = saved + h;
    const double lp = loss();
    p->value[idx] = saved - h;
    const double lm = loss();
    p->value[idx] = saved;
    return (lp - lm) / (2.0 * h);
  };
  auto rel_err = [](double g, double fd) {
    return std::abs(g - fd) / std::max(1e-8, std::abs(g) + std::abs(fd));
  };

  for (auto* p : params) {
    GradCheckEntry entry;
    entry.param = p->name;
    const auto coords = pick_coords(p->grad, cfg.coords_per_block, rng);
    for (std::size_t idx : coords) {
      const double g = p->grad[idx];
      const double fd1 = fd_at(p, idx, cfg.step);
      double rel = rel_err(g, fd1);
      if (rel >= cfg.tolerance) {
        // Central differences are invalid at non-smooth points (ReLU
        // kinks). Two step sizes agree in smooth regions; a disagreement
        // marks a kink crossing, which says nothing about the analytic
        // gradient. A wrong backward produces *consistent* finite
        // differences and still fails here.
        const double fd2 = fd_at(p, idx, 0.5 * cfg.step);
        const bool consistent =
            std::abs(fd1 - fd2) <=
            0.1 * std::max(std::abs(fd1), std::abs(fd2)) + 1e-11;
        if (!consistent) {
          ++entry.coords_skipped;
          continue;
        }
        rel = std::min(rel, rel_err(g, fd2));
      }
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    entry.coords_checked = coords.size();
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst_param = p->name;
    }
    report.per_param.push_back(std::move(entry));
  }

  report.pass = report.max_rel_err < cfg.tolerance;
  return report;
}

}  // namespace drp
