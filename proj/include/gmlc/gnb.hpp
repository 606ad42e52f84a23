#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmlc/graph.hpp"
#include "gmlc/mlp.hpp"
#include "gmlc/param.hpp"
#include "gmlc/tape.hpp"

namespace gmlc {

// Shape plan for the block. conv_widths[l] is the latent width produced by
// convolution layer l (the stack depth is its length); the encoder maps every
// raw attribute family to conv_widths[0]. Each function family is an MLP with
// relu hidden layers: a hidden-widths field left unset means one hidden layer
// as wide as the function's input; an explicitly empty list means a single
// affine layer.
struct GnbConfig {
    int d = 0;
    int d_w = 0;
    std::vector<int> conv_widths = {512, 256};
    std::optional<std::vector<int>> encoder_hidden;
    std::optional<std::vector<int>> conv_hidden;
    std::optional<std::vector<int>> decoder_hidden;

    int layers() const { return static_cast<int>(conv_widths.size()); }
    void validate() const;
};

// All function families (encoders, per-layer aggregation/update MLPs, the
// decoder) with their parameters in one store. Family names double as the
// checkpoint naming scheme: enc.<family>, conv<l>.<symbol>, dec.e, each with
// .W<k>/.b<k> leaves.
struct Model {
    GnbConfig config;
    ParamStore store;
    std::map<std::string, MlpSpec> specs;

    const MlpSpec& spec(const std::string& family) const;
};

// Builds every family in a fixed order; each family's weights come from its
// own named substream of the seed, so adding families elsewhere never shifts
// existing draws.
Model make_model(const GnbConfig& config, uint64_t seed);

// Tape-resident graph attributes during one forward pass. The layer counters
// enforce the legal call order: encode, then per layer nodes-then-edges, then
// decode.
struct GraphState {
    const AssignmentGraph* graph = nullptr;
    std::vector<int> v_inst;
    std::vector<int> v_label;
    std::vector<int> e_inst;
    std::vector<int> e_label;
    std::vector<int> e_match;  // index i * C + j
    int node_layers = 0;
    int edge_layers = 0;
};

// Maps every raw node/edge attribute into the latent space (width
// conv_widths[0]); topology is untouched.
GraphState encode(Tape& tape, const AssignmentGraph& graph, Model& model);

// One synchronous node update: every aggregation reads the pre-layer state.
// Instance nodes mix a spatial-neighbor mean and an all-labels mean; label
// nodes mirror that with label-neighbor and all-instances means. An empty
// neighborhood contributes a zero vector.
void node_convolution(Tape& tape, GraphState& state, int layer, Model& model);

// Edge updates for all three families, reading this layer's updated nodes.
void edge_convolution(Tape& tape, GraphState& state, int layer, Model& model);

// Per-matching-edge sigmoid score nodes (shape {1} each), index i * C + j.
std::vector<int> decode(Tape& tape, GraphState& state, Model& model);

// Runs the whole block on a private tape and returns the score matrix S
// (M x C, entries in (0,1)).
Tensor forward(const AssignmentGraph& graph, Model& model);

// Same pass on a caller-owned tape, for training; returns the score node ids.
std::vector<int> forward_scores(Tape& tape, const AssignmentGraph& graph, Model& model);

}  // namespace gmlc
