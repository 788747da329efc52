#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drp/param.hpp"

namespace drp {

struct GradCheckConfig {
  double step = 1e-4;
  double tolerance = 1e-3;
  // Coordinates sampled per block; all coordinates if the block is smaller.
  std::size_t coords_per_block = 64;
  std::uint64_t seed = 0x5eedULL;
};

struct GradCheckEntry {
  std::string param;
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;  // non-smooth points (activation kinks)
};

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst_param;
  std::vector<GradCheckEntry> per_param;
};

// Central finite differences against hand-derived gradients.
//
// loss:          deterministic forward pass returning the scalar loss; it is
//                called repeatedly with perturbed parameters.
// compute_grads: zero + forward + backward; fills every block's grad.
//
// Relative error per coordinate is |g - g_fd| / max(1e-8, |g| + |g_fd|).
// Throws DeterminismError if two unperturbed loss calls disagree.
GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::function<void()>& compute_grads,
                                std::span<ParamBlock* const> params,
                                const GradCheckConfig& cfg = {});

}  // namespace drp
