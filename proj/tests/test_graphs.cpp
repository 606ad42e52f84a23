#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "gmlc/error.hpp"
#include "gmlc/graph.hpp"
#include "gmlc/rng.hpp"

using namespace gmlc;

namespace {

Instance make_inst(double conf, double cx, double cy, std::vector<double> feat, int cls = 0) {
    Instance inst;
    inst.feature = Tensor::vec(std::move(feat));
    inst.bbox = {cx - 0.01, cy - 0.01, 0.02, 0.02};
    inst.confidence = conf;
    inst.cls = cls;
    return inst;
}

std::vector<Instance> random_instances(Rng& rng, int m, int d) {
    std::vector<Instance> out;
    for (int i = 0; i < m; ++i) {
        Instance inst;
        inst.feature = Tensor({d});
        for (double& x : inst.feature.v) x = rng.uniform(-1, 1);
        inst.bbox.x = rng.uniform(0.0, 0.7);
        inst.bbox.y = rng.uniform(0.0, 0.7);
        inst.bbox.w = rng.uniform(0.01, 0.25);
        inst.bbox.h = rng.uniform(0.01, 0.25);
        inst.confidence = rng.next_double();
        inst.cls = rng.uniform_int(0, 4);
        out.push_back(std::move(inst));
    }
    return out;
}

LabelVocab random_vocab(Rng& rng, int c, int dw) {
    LabelVocab v;
    v.embeddings = Tensor({c, dw});
    for (double& x : v.embeddings.v) x = rng.uniform(-1, 1);
    for (int i = 0; i < c; ++i) v.names.push_back("label" + std::to_string(i));
    return v;
}

// Exhaustive neighbor oracle: all peers sorted by (center distance, index).
std::vector<int> knn_oracle(const std::vector<Instance>& inst, int i, int k) {
    std::vector<std::pair<double, int>> all;
    for (int j = 0; j < static_cast<int>(inst.size()); ++j) {
        if (j == i) continue;
        double dx = inst[static_cast<size_t>(i)].bbox.cx() - inst[static_cast<size_t>(j)].bbox.cx();
        double dy = inst[static_cast<size_t>(i)].bbox.cy() - inst[static_cast<size_t>(j)].bbox.cy();
        all.emplace_back(std::sqrt(dx * dx + dy * dy), j);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    for (int n = 0; n < std::min<int>(k, static_cast<int>(all.size())); ++n) out.push_back(all[static_cast<size_t>(n)].second);
    std::sort(out.begin(), out.end());
    return out;
}

std::set<std::pair<int, int>> edge_set(const std::vector<EdgeRef>& edges) {
    std::set<std::pair<int, int>> s;
    for (const EdgeRef& e : edges) s.emplace(e.src, e.dst);
    return s;
}

}  // namespace

TEST_CASE("top-m keeps the highest-confidence instances in order") {
    std::vector<Instance> inst{make_inst(0.9, 0.1, 0.1, {0}), make_inst(0.2, 0.2, 0.2, {1}),
                               make_inst(0.5, 0.3, 0.3, {2})};
    auto out = select_top_m(inst, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0].feature[0] == 0.0);
    CHECK(out[1].feature[0] == 2.0);
}

TEST_CASE("top-m beyond the list is a stable no-op") {
    std::vector<Instance> inst{make_inst(0.5, 0.1, 0.1, {0}), make_inst(0.7, 0.2, 0.2, {1}),
                               make_inst(0.5, 0.3, 0.3, {2}), make_inst(0.5, 0.4, 0.4, {3})};
    auto out = select_top_m(inst, 99);
    REQUIRE(out.size() == 4);
    CHECK(out[0].feature[0] == 1.0);
    CHECK(out[1].feature[0] == 0.0);  // the three 0.5s keep original order
    CHECK(out[2].feature[0] == 2.0);
    CHECK(out[3].feature[0] == 3.0);
    CHECK(select_top_m({}, 5).empty());
    CHECK_THROWS_AS(select_top_m(inst, 0), ContractError);
}

TEST_CASE("top-m matches a full-sort oracle on 100 instances") {
    Rng rng(404);
    std::vector<Instance> inst = random_instances(rng, 100, 3);
    auto out = select_top_m(inst, 35);
    REQUIRE(out.size() == 35);

    std::vector<int> order(100);
    for (int i = 0; i < 100; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (inst[static_cast<size_t>(a)].confidence != inst[static_cast<size_t>(b)].confidence)
            return inst[static_cast<size_t>(a)].confidence > inst[static_cast<size_t>(b)].confidence;
        return a < b;
    });
    for (int i = 0; i < 35; ++i) {
        const Instance& want = inst[static_cast<size_t>(order[static_cast<size_t>(i)])];
        CHECK(out[static_cast<size_t>(i)].confidence == want.confidence);
        CHECK(out[static_cast<size_t>(i)].feature.v == want.feature.v);
    }
}

TEST_CASE("single instance yields a one-node edgeless graph") {
    auto g = build_instance_graph({make_inst(0.5, 0.3, 0.3, {1, 2})}, 3);
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK(g.out_edges[0].empty());
}

TEST_CASE("collinear centers pick the hand-computed nearest neighbors") {
    std::vector<Instance> inst{make_inst(0.9, 0.1, 0.5, {0}), make_inst(0.8, 0.2, 0.5, {1}),
                               make_inst(0.7, 0.9, 0.5, {2})};
    auto g = build_instance_graph(inst, 1);
    CHECK(edge_set(g.edges) == std::set<std::pair<int, int>>{{0, 1}, {1, 0}, {2, 1}});
}

TEST_CASE("instance edge attributes hold both corner boxes") {
    std::vector<Instance> inst{make_inst(0.9, 0.1, 0.5, {0}), make_inst(0.8, 0.2, 0.5, {1})};
    inst[0].bbox = {0.0625, 0.125, 0.25, 0.25};
    inst[1].bbox = {0.5, 0.375, 0.25, 0.125};
    auto g = build_instance_graph(inst, 1);
    REQUIRE(g.edges.size() == 2);
    // edge 0 -> 1: (x, y, x+w, y+h) of box 0 then box 1 (exact binary fractions)
    size_t e01 = g.edges[0].src == 0 ? 0 : 1;
    CHECK(g.edge_attr[e01].v == std::vector<double>{0.0625, 0.125, 0.3125, 0.375, 0.5, 0.375, 0.75, 0.5});
}

TEST_CASE("out-degree is min(k, M-1) everywhere") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        int m = rng.uniform_int(1, 12);
        int k = rng.uniform_int(1, 6);
        auto inst = random_instances(rng, m, 4);
        auto g = build_instance_graph(inst, k);
        int want = std::min(k, m - 1);
        for (const auto& out : g.out_edges) CHECK(static_cast<int>(out.size()) == want);
        CHECK(static_cast<int>(g.edges.size()) == m * want);
    }
}

TEST_CASE("knn edges match the exhaustive pairwise oracle") {
    Rng rng(212);
    for (int trial = 0; trial < 50; ++trial) {
        int m = rng.uniform_int(2, 10);
        int k = rng.uniform_int(1, 5);
        auto inst = random_instances(rng, m, 2);
        auto g = build_instance_graph(inst, k);
        for (int i = 0; i < m; ++i) {
            std::vector<int> got;
            for (int id : g.out_edges[static_cast<size_t>(i)]) {
                CHECK(g.edges[static_cast<size_t>(id)].src == i);
                got.push_back(g.edges[static_cast<size_t>(id)].dst);
            }
            CHECK(got == knn_oracle(inst, i, k));
        }
    }
}

TEST_CASE("knn is invariant under uniform translation") {
    Rng rng(313);
    auto inst = random_instances(rng, 8, 2);
    auto base = build_instance_graph(inst, 2);
    auto shifted = inst;
    for (Instance& s : shifted) {
        s.bbox.x += 0.05;
        s.bbox.y -= 0.03;
    }
    auto moved = build_instance_graph(shifted, 2);
    CHECK(edge_set(base.edges) == edge_set(moved.edges));
    REQUIRE(base.edge_attr.size() == moved.edge_attr.size());
    for (size_t e = 0; e < base.edges.size(); ++e) {
        CHECK(moved.edges[e].src == base.edges[e].src);
        CHECK(moved.edges[e].dst == base.edges[e].dst);
        for (int t : {0, 2, 4, 6})
            CHECK(moved.edge_attr[e][t] == doctest::Approx(base.edge_attr[e][t] + 0.05).epsilon(1e-12));
        for (int t : {1, 3, 5, 7})
            CHECK(moved.edge_attr[e][t] == doctest::Approx(base.edge_attr[e][t] - 0.03).epsilon(1e-12));
    }
}

TEST_CASE("permuting instances renames edges consistently") {
    Rng rng(515);
    auto inst = random_instances(rng, 7, 3);
    auto base = build_instance_graph(inst, 3);

    std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};  // new index of original i is position of i
    std::vector<Instance> permuted(7);
    std::vector<int> new_of_old(7);
    for (int newi = 0; newi < 7; ++newi) {
        permuted[static_cast<size_t>(newi)] = inst[static_cast<size_t>(perm[static_cast<size_t>(newi)])];
        new_of_old[static_cast<size_t>(perm[static_cast<size_t>(newi)])] = newi;
    }
    auto moved = build_instance_graph(permuted, 3);

    std::set<std::pair<int, int>> want;
    for (const EdgeRef& e : base.edges)
        want.emplace(new_of_old[static_cast<size_t>(e.src)], new_of_old[static_cast<size_t>(e.dst)]);
    CHECK(edge_set(moved.edges) == want);
}

TEST_CASE("label graph is complete, directed, and self-loop free") {
    Rng rng(616);
    CHECK(build_label_graph(random_vocab(rng, 1, 4)).edges.empty());

    LabelVocab v3 = random_vocab(rng, 3, 4);
    auto g3 = build_label_graph(v3);
    REQUIRE(g3.edges.size() == 6);
    // (0 -> 1) carries concat(w0, w1); (1 -> 0) carries concat(w1, w0)
    for (size_t e = 0; e < g3.edges.size(); ++e) {
        const EdgeRef& ref = g3.edges[e];
        CHECK(ref.src != ref.dst);
        for (int t = 0; t < 4; ++t) {
            CHECK(g3.edge_attr[e][t] == v3.embeddings.at2(ref.src, t));
            CHECK(g3.edge_attr[e][4 + t] == v3.embeddings.at2(ref.dst, t));
        }
    }

    auto g20 = build_label_graph(random_vocab(rng, 20, 8));
    CHECK(g20.edges.size() == 380);
}

TEST_CASE("assignment graph counts and attribute extents") {
    Rng rng(717);
    auto g = build_assignment_graph(build_instance_graph(random_instances(rng, 2, 5), 1),
                                    build_label_graph(random_vocab(rng, 3, 4)));
    CHECK(g.M == 2);
    CHECK(g.C == 3);
    CHECK(g.match_attr.size() == 6);
    for (const Tensor& t : g.match_attr) CHECK(t.extent(0) == 5 + 4);
    g.validate();

    auto big = build_assignment_graph(build_instance_graph(random_instances(rng, 10, 5), 3),
                                      build_label_graph(random_vocab(rng, 20, 4)));
    CHECK(big.match_attr.size() == 200);
    CHECK(big.label_edges.size() == 380);
    CHECK(big.inst_edges.size() == 30);

    // matching attr = concat(feature_i, embedding_j)
    for (int i = 0; i < big.M; ++i)
        for (int j = 0; j < big.C; ++j) {
            const Tensor& attr = big.match_attr[static_cast<size_t>(big.match_index(i, j))];
            for (int t = 0; t < 5; ++t) CHECK(attr[t] == big.v_inst[static_cast<size_t>(i)][t]);
            for (int t = 0; t < 4; ++t) CHECK(attr[5 + t] == big.v_label[static_cast<size_t>(j)][t]);
        }
}

TEST_CASE("matching edge count is M*C over random shapes") {
    Rng rng(818);
    for (int trial = 0; trial < 25; ++trial) {
        int m = rng.uniform_int(1, 9);
        int c = rng.uniform_int(1, 7);
        auto g = build_assignment_graph(build_instance_graph(random_instances(rng, m, 3), 2),
                                        build_label_graph(random_vocab(rng, c, 3)));
        CHECK(g.match_attr.size() == static_cast<size_t>(m) * static_cast<size_t>(c));
        CHECK(g.label_edges.size() == static_cast<size_t>(c) * static_cast<size_t>(c - 1));
        g.validate();
    }
}

TEST_CASE("graph construction is deterministic") {
    Rng r1(99), r2(99);
    auto i1 = random_instances(r1, 6, 4);
    auto i2 = random_instances(r2, 6, 4);
    auto v1 = random_vocab(r1, 4, 3);
    auto v2 = random_vocab(r2, 4, 3);
    auto g1 = build_image_graph(i1, v1, 5, 2);
    auto g2 = build_image_graph(i2, v2, 5, 2);
    CHECK(g1.M == g2.M);
    REQUIRE(g1.match_attr.size() == g2.match_attr.size());
    for (size_t i = 0; i < g1.match_attr.size(); ++i) CHECK(g1.match_attr[i].v == g2.match_attr[i].v);
    REQUIRE(g1.inst_edges.size() == g2.inst_edges.size());
    for (size_t e = 0; e < g1.inst_edges.size(); ++e) {
        CHECK(g1.inst_edges[e].src == g2.inst_edges[e].src);
        CHECK(g1.inst_edges[e].dst == g2.inst_edges[e].dst);
        CHECK(g1.inst_edge_attr[e].v == g2.inst_edge_attr[e].v);
    }
}

TEST_CASE("vocab validation rejects duplicates and ragged shapes") {
    LabelVocab v;
    v.names = {"a", "b", "a"};
    v.embeddings = Tensor({3, 2});
    CHECK_THROWS_AS(v.validate(), DataError);
    v.names = {"a", "b"};
    CHECK_THROWS_AS(v.validate(), ShapeError);
}
