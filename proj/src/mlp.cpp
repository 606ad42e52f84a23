#include "gmlc/mlp.hpp"

#include <cmath>

#include "gmlc/error.hpp"

namespace gmlc {

namespace {

void check_spec(const MlpSpec& spec, const std::string& name) {
    if (spec.widths.size() < 2)
        throw ContractError("mlp '" + name + "': needs at least [in, out] widths");
    for (int w : spec.widths)
        if (w < 1) throw ContractError("mlp '" + name + "': non-positive width");
}

}  // namespace

void make_mlp(ParamStore& store, const std::string& name, const MlpSpec& spec, Rng& rng) {
    check_spec(spec, name);
    for (int l = 0; l < spec.num_layers(); ++l) {
        int in = spec.widths[static_cast<size_t>(l)];
        int out = spec.widths[static_cast<size_t>(l) + 1];
        // Fan-in uniform init with the gain chosen for what follows the
        // layer: rectified layers get variance 2/in (the rectifier halves
        // second moments), the final layer variance 1/in. These stacks
        // compose many MLPs end to end with no normalization, so any
        // systematic per-layer gain off 1 compounds geometrically — decay
        // starves gradients, growth saturates the sigmoid head.
        bool hidden = l + 1 < spec.num_layers();
        double bound = std::sqrt((hidden ? 6.0 : 3.0) / static_cast<double>(in));
        Tensor w({out, in});
        for (double& x : w.v) x = rng.uniform(-bound, bound);
        // Hidden biases start slightly positive so rectifier units begin
        // active; a narrow layer whose units all go dead for every input
        // stops gradient flow to everything upstream of it permanently.
        Tensor b = hidden ? Tensor::full({out}, 0.1) : Tensor({out});
        if (!hidden)
            for (double& x : b.v) x = rng.uniform(-bound, bound);
        store.create(name + ".W" + std::to_string(l), std::move(w));
        store.create(name + ".b" + std::to_string(l), std::move(b));
    }
}

int mlp_apply(Tape& tape, const MlpSpec& spec, ParamStore& store, const std::string& name, int x) {
    check_spec(spec, name);
    const Tensor& xin = tape.value(x);
    if (xin.ndim() != 1 || xin.extent(0) != spec.in_width())
        throw ShapeError("mlp '" + name + "': input " + xin.shape_str() + ", expected (" +
                         std::to_string(spec.in_width()) + ")");
    int h = x;
    for (int l = 0; l < spec.num_layers(); ++l) {
        Param& w = store.at(name + ".W" + std::to_string(l));
        Param& b = store.at(name + ".b" + std::to_string(l));
        if (w.value.extent(1) != tape.value(h).extent(0))
            throw ShapeError("mlp '" + name + "' layer " + std::to_string(l) + ": input " +
                             tape.value(h).shape_str() + " vs weight " + w.value.shape_str());
        h = tape.add(tape.matmul(tape.param(w), h), tape.param(b));
        bool last = l == spec.num_layers() - 1;
        if (!last)
            h = tape.relu(h);
        else if (spec.out_act == OutAct::Sigmoid)
            h = tape.sigmoid(h);
    }
    return h;
}

}  // namespace gmlc
