#include "gmlc/graph.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "gmlc/error.hpp"

namespace gmlc {

Tensor LabelVocab::embedding(int i) const {
    if (i < 0 || i >= num_classes()) throw ContractError("label vocab: index " + std::to_string(i) + " out of range");
    int dw = dim();
    Tensor row({dw});
    for (int k = 0; k < dw; ++k) row[k] = embeddings.at2(i, k);
    return row;
}

void LabelVocab::validate() const {
    if (names.empty()) throw DataError("label vocab: no labels");
    if (embeddings.ndim() != 2 || embeddings.extent(0) != num_classes())
        throw ShapeError("label vocab: embedding matrix " + embeddings.shape_str() + " for " +
                         std::to_string(names.size()) + " names");
    std::unordered_set<std::string> seen;
    for (const std::string& n : names)
        if (!seen.insert(n).second) throw DataError("label vocab: duplicate name '" + n + "'");
}

std::vector<Instance> select_top_m(const std::vector<Instance>& instances, int m) {
    if (m < 1) throw ContractError("select_top_m: m must be at least 1");
    std::vector<size_t> order(instances.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return instances[a].confidence > instances[b].confidence; });
    size_t keep = std::min(static_cast<size_t>(m), instances.size());
    std::vector<Instance> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(instances[order[i]]);
    return out;
}

namespace {

Tensor corner_pair_attr(const BBox& a, const BBox& b) {
    return Tensor({8}, {a.x, a.y, a.x + a.w, a.y + a.h, b.x, b.y, b.x + b.w, b.y + b.h});
}

}  // namespace

InstanceGraphPart build_instance_graph(const std::vector<Instance>& instances, int knn_k) {
    if (instances.empty()) throw ContractError("instance graph: needs at least one instance");
    if (knn_k < 1) throw ContractError("instance graph: k must be at least 1");
    int m = static_cast<int>(instances.size());
    int d = instances[0].feature.extent(0);
    for (const Instance& inst : instances)
        if (inst.feature.ndim() != 1 || inst.feature.extent(0) != d)
            throw ShapeError("instance graph: feature " + inst.feature.shape_str() + ", expected (" +
                             std::to_string(d) + ")");

    InstanceGraphPart g;
    g.nodes.reserve(static_cast<size_t>(m));
    for (const Instance& inst : instances) g.nodes.push_back(inst.feature);
    g.out_edges.assign(static_cast<size_t>(m), {});

    int k = std::min(knn_k, m - 1);
    for (int i = 0; i < m; ++i) {
        // k nearest peers by squared center distance, ties to the lower index
        std::vector<std::pair<double, int>> dist;
        dist.reserve(static_cast<size_t>(m) - 1);
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            double dx = instances[static_cast<size_t>(i)].bbox.cx() - instances[static_cast<size_t>(j)].bbox.cx();
            double dy = instances[static_cast<size_t>(i)].bbox.cy() - instances[static_cast<size_t>(j)].bbox.cy();
            dist.emplace_back(dx * dx + dy * dy, j);
        }
        std::sort(dist.begin(), dist.end());
        std::vector<int> chosen;
        for (int n = 0; n < k; ++n) chosen.push_back(dist[static_cast<size_t>(n)].second);
        std::sort(chosen.begin(), chosen.end());  // canonical emission order
        for (int j : chosen) {
            g.out_edges[static_cast<size_t>(i)].push_back(static_cast<int>(g.edges.size()));
            g.edges.push_back({i, j});
            g.edge_attr.push_back(
                corner_pair_attr(instances[static_cast<size_t>(i)].bbox, instances[static_cast<size_t>(j)].bbox));
        }
    }
    return g;
}

LabelGraphPart build_label_graph(const LabelVocab& vocab) {
    vocab.validate();
    int c = vocab.num_classes();
    int dw = vocab.dim();
    LabelGraphPart g;
    g.nodes.reserve(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i) g.nodes.push_back(vocab.embedding(i));
    g.out_edges.assign(static_cast<size_t>(c), {});
    for (int i = 0; i < c; ++i) {
        for (int j = 0; j < c; ++j) {
            if (j == i) continue;
            Tensor attr({2 * dw});
            for (int t = 0; t < dw; ++t) {
                attr[t] = g.nodes[static_cast<size_t>(i)][t];
                attr[dw + t] = g.nodes[static_cast<size_t>(j)][t];
            }
            g.out_edges[static_cast<size_t>(i)].push_back(static_cast<int>(g.edges.size()));
            g.edges.push_back({i, j});
            g.edge_attr.push_back(std::move(attr));
        }
    }
    return g;
}

AssignmentGraph build_assignment_graph(InstanceGraphPart g_o, LabelGraphPart g_l) {
    AssignmentGraph g;
    g.M = static_cast<int>(g_o.nodes.size());
    g.C = static_cast<int>(g_l.nodes.size());
    if (g.M < 1 || g.C < 1) throw ContractError("assignment graph: needs instances and labels");
    g.d = g_o.nodes[0].extent(0);
    g.d_w = g_l.nodes[0].extent(0);
    g.v_inst = std::move(g_o.nodes);
    g.v_label = std::move(g_l.nodes);
    g.inst_edges = std::move(g_o.edges);
    g.inst_edge_attr = std::move(g_o.edge_attr);
    g.inst_out = std::move(g_o.out_edges);
    g.label_edges = std::move(g_l.edges);
    g.label_edge_attr = std::move(g_l.edge_attr);
    g.label_out = std::move(g_l.out_edges);

    g.match_attr.reserve(static_cast<size_t>(g.M) * static_cast<size_t>(g.C));
    for (int i = 0; i < g.M; ++i) {
        for (int j = 0; j < g.C; ++j) {
            Tensor attr({g.d + g.d_w});
            for (int t = 0; t < g.d; ++t) attr[t] = g.v_inst[static_cast<size_t>(i)][t];
            for (int t = 0; t < g.d_w; ++t) attr[g.d + t] = g.v_label[static_cast<size_t>(j)][t];
            g.match_attr.push_back(std::move(attr));
        }
    }
    g.validate();
    return g;
}

AssignmentGraph build_image_graph(const std::vector<Instance>& instances, const LabelVocab& vocab,
                                  int top_m, int knn_k) {
    std::vector<Instance> kept = select_top_m(instances, top_m);
    return build_assignment_graph(build_instance_graph(kept, knn_k), build_label_graph(vocab));
}

void AssignmentGraph::validate() const {
    if (static_cast<int>(v_inst.size()) != M || static_cast<int>(v_label.size()) != C)
        throw ContractError("assignment graph: node count mismatch");
    if (match_attr.size() != static_cast<size_t>(M) * static_cast<size_t>(C))
        throw ContractError("assignment graph: matching edge count != M*C");
    for (const Tensor& t : match_attr)
        if (t.extent(0) != d + d_w) throw ContractError("assignment graph: matching attr extent");
    if (inst_edges.size() != inst_edge_attr.size() || label_edges.size() != label_edge_attr.size())
        throw ContractError("assignment graph: edge/attr size mismatch");

    auto check_side = [](const std::vector<EdgeRef>& edges, const std::vector<std::vector<int>>& out, int n,
                         const char* what) {
        std::set<std::pair<int, int>> seen;
        for (const EdgeRef& e : edges) {
            if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
                throw ContractError(std::string("assignment graph: ") + what + " endpoint out of range");
            if (e.src == e.dst) throw ContractError(std::string("assignment graph: ") + what + " self-loop");
            if (!seen.emplace(e.src, e.dst).second)
                throw ContractError(std::string("assignment graph: duplicate ") + what);
        }
        size_t listed = 0;
        for (int i = 0; i < n; ++i) {
            for (int id : out[static_cast<size_t>(i)]) {
                if (id < 0 || static_cast<size_t>(id) >= edges.size() || edges[static_cast<size_t>(id)].src != i)
                    throw ContractError(std::string("assignment graph: ") + what + " adjacency inconsistent");
                ++listed;
            }
        }
        if (listed != edges.size())
            throw ContractError(std::string("assignment graph: ") + what + " adjacency incomplete");
    };
    check_side(inst_edges, inst_out, M, "instance edge");
    check_side(label_edges, label_out, C, "label edge");
}

}  // namespace gmlc
