#pragma once

#include <string>
#include <vector>

#include "gmlc/param.hpp"
#include "gmlc/rng.hpp"
#include "gmlc/tape.hpp"

namespace gmlc {

enum class OutAct : uint8_t { Identity, Sigmoid };

// widths = [input, hidden..., output]; at least one affine layer (two
// entries). Hidden activations are relu; the output activation is configured.
struct MlpSpec {
    std::vector<int> widths;
    OutAct out_act = OutAct::Identity;

    int num_layers() const { return static_cast<int>(widths.size()) - 1; }
    int in_width() const { return widths.front(); }
    int out_width() const { return widths.back(); }
};

// Registers <name>.W0/<name>.b0 ... in the store, initialized uniformly on
// [-1/sqrt(fan_in), +1/sqrt(fan_in)] in a fixed draw order (W row-major, then
// b, per layer), so a seed pins every weight.
void make_mlp(ParamStore& store, const std::string& name, const MlpSpec& spec, Rng& rng);

// Records the full forward pass for one input vector and returns the output
// node id. The input extent must match spec.widths[0].
int mlp_apply(Tape& tape, const MlpSpec& spec, ParamStore& store, const std::string& name, int x);

}  // namespace gmlc
