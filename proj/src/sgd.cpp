#include "gmlc/sgd.hpp"

#include <cmath>

#include "gmlc/error.hpp"

namespace gmlc {

void sgd_step(ParamStore& store, double lr, double momentum, double weight_decay) {
    if (!(lr > 0.0)) throw ContractError("sgd_step: lr must be positive");
    if (!store.grads_live()) throw ContractError("sgd_step: gradients not populated");
    for (Param& p : store) {
        for (double g : p.grad.v)
            if (!std::isfinite(g)) throw NumericError("sgd_step: non-finite gradient in '" + p.name + "'");
        for (size_t i = 0; i < p.value.v.size(); ++i) {
            double step = p.grad.v[i] + weight_decay * p.value.v[i];
            p.momentum.v[i] = momentum * p.momentum.v[i] + step;
            p.value.v[i] -= lr * p.momentum.v[i];
        }
    }
}

}  // namespace gmlc
