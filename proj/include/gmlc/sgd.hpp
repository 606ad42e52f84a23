#pragma once

#include "gmlc/param.hpp"

namespace gmlc {

// Momentum SGD with L2 weight decay folded into the gradient:
//   buffer <- momentum * buffer + (grad + weight_decay * value)
//   value  <- value - lr * buffer
// Requires live gradients; the store must be zeroed before the next backward.
void sgd_step(ParamStore& store, double lr, double momentum, double weight_decay);

}  // namespace gmlc
