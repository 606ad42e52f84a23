#include "gmlc/gnb.hpp"

#include "gmlc/error.hpp"
#include "gmlc/rng.hpp"

namespace gmlc {

void GnbConfig::validate() const {
    if (d < 1 || d_w < 1) throw ConfigError("gnb: d and d_w must be at least 1");
    if (conv_widths.empty()) throw ConfigError("gnb: need at least one convolution layer");
    for (int w : conv_widths)
        if (w < 1) throw ConfigError("gnb: non-positive latent width");
    for (const auto& hidden : {encoder_hidden, conv_hidden, decoder_hidden})
        if (hidden)
            for (int w : *hidden)
                if (w < 1) throw ConfigError("gnb: non-positive hidden width");
}

const MlpSpec& Model::spec(const std::string& family) const {
    auto it = specs.find(family);
    if (it == specs.end()) throw ContractError("model: unknown family '" + family + "'");
    return it->second;
}

namespace {

std::vector<int> plan_widths(int in, const std::optional<std::vector<int>>& hidden, int out) {
    std::vector<int> w{in};
    if (hidden) {
        for (int h : *hidden) w.push_back(h);
    } else {
        // Default: one hidden layer as wide as the input. Sizing it from the
        // output would pinch narrowing functions (the decoder ends at width 1,
        // and a one-unit rectifier that goes dead freezes the whole model).
        w.push_back(in);
    }
    w.push_back(out);
    return w;
}

struct FamilyPlan {
    std::string name;
    MlpSpec spec;
};

std::vector<FamilyPlan> plan_families(const GnbConfig& cfg) {
    std::vector<FamilyPlan> plan;
    int w0 = cfg.conv_widths[0];
    auto enc = [&](const std::string& name, int in) {
        plan.push_back({name, {plan_widths(in, cfg.encoder_hidden, w0), OutAct::Identity}});
    };
    enc("enc.node_inst", cfg.d);
    enc("enc.node_label", cfg.d_w);
    enc("enc.edge_inst", 8);
    enc("enc.edge_label", 2 * cfg.d_w);
    enc("enc.edge_match", cfg.d + cfg.d_w);

    for (int l = 0; l < cfg.layers(); ++l) {
        int a = l == 0 ? w0 : cfg.conv_widths[static_cast<size_t>(l) - 1];
        int b = cfg.conv_widths[static_cast<size_t>(l)];
        std::string p = "conv" + std::to_string(l) + ".";
        auto fam = [&](const std::string& name, int in) {
            plan.push_back({p + name, {plan_widths(in, cfg.conv_hidden, b), OutAct::Identity}});
        };
        fam("agg_inst_inst", 2 * a);
        fam("agg_inst_label", 2 * a);
        fam("upd_inst", a + 2 * b);
        fam("agg_label_label", 2 * a);
        fam("agg_label_inst", 2 * a);
        fam("upd_label", a + 2 * b);
        fam("agg_edge_inst", 2 * b);
        fam("upd_edge_inst", a + b);
        fam("agg_edge_label", 2 * b);
        fam("upd_edge_label", a + b);
        fam("agg_edge_match", 2 * b);
        fam("upd_edge_match", a + b);
    }
    int wk = cfg.conv_widths.back();
    plan.push_back({"dec.e", {plan_widths(wk, cfg.decoder_hidden, 1), OutAct::Sigmoid}});
    return plan;
}

int apply_family(Tape& tape, Model& model, const std::string& family, int x) {
    return mlp_apply(tape, model.spec(family), model.store, family, x);
}

void check_stage(bool ok, const std::string& what) {
    if (!ok) throw ContractError("gnb: " + what);
}

}  // namespace

Model make_model(const GnbConfig& config, uint64_t seed) {
    config.validate();
    Model model;
    model.config = config;
    for (const FamilyPlan& fp : plan_families(config)) {
        Rng rng(substream_seed(seed, "init." + fp.name));
        make_mlp(model.store, fp.name, fp.spec, rng);
        model.specs.emplace(fp.name, fp.spec);
    }
    // Shrink the decoder's output layer: scores start near one half, where
    // cross-entropy gradients are moderate. Starting deep in the sigmoid
    // tails puts scores inside the loss clamp, whose gradient is zero — a
    // state training cannot leave.
    const MlpSpec& dec = model.specs.at("dec.e");
    std::string last = std::to_string(dec.num_layers() - 1);
    for (const char* leaf : {"W", "b"})
        for (double& v : model.store.at("dec.e." + std::string(leaf) + last).value.v) v *= 0.1;
    return model;
}

GraphState encode(Tape& tape, const AssignmentGraph& graph, Model& model) {
    const GnbConfig& cfg = model.config;
    if (graph.d != cfg.d)
        throw ShapeError("enc.node_inst: feature extent " + std::to_string(graph.d) + ", configured " +
                         std::to_string(cfg.d));
    if (graph.d_w != cfg.d_w)
        throw ShapeError("enc.node_label: embedding extent " + std::to_string(graph.d_w) + ", configured " +
                         std::to_string(cfg.d_w));
    GraphState s;
    s.graph = &graph;
    for (const Tensor& v : graph.v_inst) s.v_inst.push_back(apply_family(tape, model, "enc.node_inst", tape.leaf(v)));
    for (const Tensor& v : graph.v_label)
        s.v_label.push_back(apply_family(tape, model, "enc.node_label", tape.leaf(v)));
    for (const Tensor& e : graph.inst_edge_attr)
        s.e_inst.push_back(apply_family(tape, model, "enc.edge_inst", tape.leaf(e)));
    for (const Tensor& e : graph.label_edge_attr)
        s.e_label.push_back(apply_family(tape, model, "enc.edge_label", tape.leaf(e)));
    for (const Tensor& e : graph.match_attr)
        s.e_match.push_back(apply_family(tape, model, "enc.edge_match", tape.leaf(e)));
    return s;
}

void node_convolution(Tape& tape, GraphState& state, int layer, Model& model) {
    check_stage(state.graph != nullptr, "node convolution before encode");
    const AssignmentGraph& g = *state.graph;
    check_stage(layer >= 0 && layer < model.config.layers(), "layer index out of range");
    check_stage(state.node_layers == layer, "node convolution layers must run in order");
    check_stage(state.edge_layers == layer, "node convolution must follow the previous edge convolution");
    std::string p = "conv" + std::to_string(layer) + ".";
    int b = model.config.conv_widths[static_cast<size_t>(layer)];

    std::vector<int> new_inst(static_cast<size_t>(g.M));
    std::vector<int> new_label(static_cast<size_t>(g.C));

    for (int i = 0; i < g.M; ++i) {
        // spatial neighbors through outgoing instance edges
        std::vector<int> parts;
        for (int e : g.inst_out[static_cast<size_t>(i)]) {
            int j = g.inst_edges[static_cast<size_t>(e)].dst;
            parts.push_back(apply_family(
                tape, model, p + "agg_inst_inst",
                tape.concat({state.e_inst[static_cast<size_t>(e)], state.v_inst[static_cast<size_t>(j)]})));
        }
        int spatial = parts.empty() ? tape.leaf(Tensor::zeros({b})) : tape.mean_over_set(parts);

        // every label through the matching edges
        parts.clear();
        for (int j = 0; j < g.C; ++j) {
            int e = g.match_index(i, j);
            parts.push_back(apply_family(
                tape, model, p + "agg_inst_label",
                tape.concat({state.e_match[static_cast<size_t>(e)], state.v_label[static_cast<size_t>(j)]})));
        }
        int semantic = tape.mean_over_set(parts);

        new_inst[static_cast<size_t>(i)] =
            apply_family(tape, model, p + "upd_inst",
                         tape.concat({state.v_inst[static_cast<size_t>(i)], spatial, semantic}));
    }

    for (int i = 0; i < g.C; ++i) {
        std::vector<int> parts;
        for (int e : g.label_out[static_cast<size_t>(i)]) {
            int j = g.label_edges[static_cast<size_t>(e)].dst;
            parts.push_back(apply_family(
                tape, model, p + "agg_label_label",
                tape.concat({state.e_label[static_cast<size_t>(e)], state.v_label[static_cast<size_t>(j)]})));
        }
        int semantic = parts.empty() ? tape.leaf(Tensor::zeros({b})) : tape.mean_over_set(parts);

        parts.clear();
        for (int j = 0; j < g.M; ++j) {
            int e = g.match_index(j, i);
            parts.push_back(apply_family(
                tape, model, p + "agg_label_inst",
                tape.concat({state.e_match[static_cast<size_t>(e)], state.v_inst[static_cast<size_t>(j)]})));
        }
        int spatial = tape.mean_over_set(parts);

        new_label[static_cast<size_t>(i)] =
            apply_family(tape, model, p + "upd_label",
                         tape.concat({state.v_label[static_cast<size_t>(i)], semantic, spatial}));
    }

    state.v_inst = std::move(new_inst);
    state.v_label = std::move(new_label);
    state.node_layers = layer + 1;
}

void edge_convolution(Tape& tape, GraphState& state, int layer, Model& model) {
    check_stage(state.graph != nullptr, "edge convolution before encode");
    const AssignmentGraph& g = *state.graph;
    check_stage(layer >= 0 && layer < model.config.layers(), "layer index out of range");
    check_stage(state.node_layers == layer + 1, "edge convolution needs this layer's node convolution first");
    check_stage(state.edge_layers == layer, "edge convolution layers must run in order");
    std::string p = "conv" + std::to_string(layer) + ".";

    auto update_family = [&](const std::vector<EdgeRef>& edges, std::vector<int>& attrs,
                             const std::vector<int>& src_nodes, const std::vector<int>& dst_nodes,
                             const std::string& agg, const std::string& upd) {
        for (size_t e = 0; e < edges.size(); ++e) {
            int assembled = apply_family(tape, model, agg,
                                         tape.concat({src_nodes[static_cast<size_t>(edges[e].src)],
                                                      dst_nodes[static_cast<size_t>(edges[e].dst)]}));
            attrs[e] = apply_family(tape, model, upd, tape.concat({attrs[e], assembled}));
        }
    };
    update_family(g.inst_edges, state.e_inst, state.v_inst, state.v_inst, p + "agg_edge_inst", p + "upd_edge_inst");
    update_family(g.label_edges, state.e_label, state.v_label, state.v_label, p + "agg_edge_label",
                  p + "upd_edge_label");

    for (int i = 0; i < g.M; ++i) {
        for (int j = 0; j < g.C; ++j) {
            size_t e = static_cast<size_t>(g.match_index(i, j));
            int assembled =
                apply_family(tape, model, p + "agg_edge_match",
                             tape.concat({state.v_inst[static_cast<size_t>(i)], state.v_label[static_cast<size_t>(j)]}));
            state.e_match[e] = apply_family(tape, model, p + "upd_edge_match", tape.concat({state.e_match[e], assembled}));
        }
    }
    state.edge_layers = layer + 1;
}

std::vector<int> decode(Tape& tape, GraphState& state, Model& model) {
    check_stage(state.graph != nullptr, "decode before encode");
    check_stage(state.node_layers == model.config.layers() && state.edge_layers == model.config.layers(),
                "decode needs the full convolution stack first");
    std::vector<int> scores;
    scores.reserve(state.e_match.size());
    for (int e : state.e_match) scores.push_back(apply_family(tape, model, "dec.e", e));
    return scores;
}

std::vector<int> forward_scores(Tape& tape, const AssignmentGraph& graph, Model& model) {
    GraphState state = encode(tape, graph, model);
    for (int l = 0; l < model.config.layers(); ++l) {
        node_convolution(tape, state, l, model);
        edge_convolution(tape, state, l, model);
    }
    return decode(tape, state, model);
}

Tensor forward(const AssignmentGraph& graph, Model& model) {
    Tape tape;
    std::vector<int> ids = forward_scores(tape, graph, model);
    Tensor s({graph.M, graph.C});
    for (int i = 0; i < graph.M; ++i)
        for (int j = 0; j < graph.C; ++j) s.at2(i, j) = tape.value(ids[static_cast<size_t>(graph.match_index(i, j))])[0];
    return s;
}

}  // namespace gmlc
