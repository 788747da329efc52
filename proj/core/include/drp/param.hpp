#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drp/tensor.hpp"

namespace drp {

// A named trainable tensor plus its gradient accumulator. Gradients are
// accumulated (+=) by backward passes and cleared with zero_grad(); the
// grad tensor always has the value's shape.
struct ParamBlock {
  ParamBlock() = default;
  ParamBlock(std::string name, Tensor value)
      : name(std::move(name)),
        grad(Tensor::zeros(value.shape())),
        value(std::move(value)) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor grad;
  Tensor value;
};

inline void zero_grads(const std::vector<ParamBlock*>& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace drp
