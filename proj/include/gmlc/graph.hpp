#pragma once

#include <string>
#include <vector>

#include "gmlc/tensor.hpp"

namespace gmlc {

// Normalized bounding box: x, y, w, h in [0,1] image coordinates.
struct BBox {
    double x = 0, y = 0, w = 0, h = 0;
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
};

// One detected region: feature vector, box, detector confidence, and the
// detector's preliminary class guess (used only for reporting).
struct Instance {
    Tensor feature;  // extent d
    BBox bbox;
    double confidence = 0.0;
    int cls = 0;
};

struct LabelVocab {
    std::vector<std::string> names;
    Tensor embeddings;  // C x d_w

    int num_classes() const { return static_cast<int>(names.size()); }
    int dim() const { return embeddings.ndim() == 2 ? embeddings.extent(1) : 0; }
    Tensor embedding(int i) const;
    void validate() const;  // unique names, row count == name count
};

struct EdgeRef {
    int src = 0;
    int dst = 0;
};

// Directed spatial graph over instances: node attr = feature, edge attr =
// both endpoint boxes as corner coordinates (x, y, x+w, y+h), extent 8.
// Each node points at its knn_k nearest peers by box-center distance.
struct InstanceGraphPart {
    std::vector<Tensor> nodes;
    std::vector<EdgeRef> edges;
    std::vector<Tensor> edge_attr;
    std::vector<std::vector<int>> out_edges;  // per node, edge ids, ascending dst
};

// Complete directed semantic graph over labels: node attr = embedding,
// edge (i -> j) attr = concat(w_i, w_j), extent 2 * d_w.
struct LabelGraphPart {
    std::vector<Tensor> nodes;
    std::vector<EdgeRef> edges;
    std::vector<Tensor> edge_attr;
    std::vector<std::vector<int>> out_edges;
};

// Both subgraphs plus one matching edge per (instance, label) pair with
// attr = concat(feature_i, embedding_j), indexed i * C + j.
struct AssignmentGraph {
    int M = 0, C = 0, d = 0, d_w = 0;
    std::vector<Tensor> v_inst;   // M node attrs, extent d
    std::vector<Tensor> v_label;  // C node attrs, extent d_w
    std::vector<EdgeRef> inst_edges;
    std::vector<Tensor> inst_edge_attr;
    std::vector<std::vector<int>> inst_out;
    std::vector<EdgeRef> label_edges;
    std::vector<Tensor> label_edge_attr;
    std::vector<std::vector<int>> label_out;
    std::vector<Tensor> match_attr;  // M * C

    int match_index(int i, int j) const { return i * C + j; }
    void validate() const;
};

// Keeps the min(m, size) highest-confidence instances; stable on ties so
// equal-confidence instances preserve their original relative order.
std::vector<Instance> select_top_m(const std::vector<Instance>& instances, int m);

InstanceGraphPart build_instance_graph(const std::vector<Instance>& instances, int knn_k);
LabelGraphPart build_label_graph(const LabelVocab& vocab);
AssignmentGraph build_assignment_graph(InstanceGraphPart g_o, LabelGraphPart g_l);

// Full per-image pipeline: top-m selection, then all three graphs.
AssignmentGraph build_image_graph(const std::vector<Instance>& instances, const LabelVocab& vocab,
                                  int top_m, int knn_k);

}  // namespace gmlc
