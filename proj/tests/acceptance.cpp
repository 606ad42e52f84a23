// End-to-end acceptance checks. Each criterion prints exactly one
// [PASS]/[FAIL] line; the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "gmlc/checkpoint.hpp"
#include "gmlc/data.hpp"
#include "gmlc/gnb.hpp"
#include "gmlc/graph.hpp"
#include "gmlc/metrics.hpp"
#include "gmlc/param.hpp"
#include "gmlc/rng.hpp"
#include "gmlc/tape.hpp"
#include "gmlc/training.hpp"

using namespace gmlc;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Instance> random_instances(Rng& rng, int m, int d) {
    std::vector<Instance> instances;
    for (int i = 0; i < m; ++i) {
        Instance inst;
        inst.feature = Tensor({d});
        for (double& v : inst.feature.v) v = rng.uniform(-1.0, 1.0);
        inst.bbox.x = rng.uniform(0.0, 0.75);
        inst.bbox.y = rng.uniform(0.0, 0.75);
        inst.bbox.w = rng.uniform(0.05, 0.2);
        inst.bbox.h = rng.uniform(0.05, 0.2);
        inst.confidence = rng.uniform(0.1, 1.0);
        instances.push_back(std::move(inst));
    }
    return instances;
}

LabelVocab random_vocab(Rng& rng, int c, int d_w) {
    LabelVocab vocab;
    vocab.embeddings = Tensor({c, d_w});
    for (double& v : vocab.embeddings.v) v = rng.uniform(-1.0, 1.0);
    for (int j = 0; j < c; ++j) vocab.names.push_back("label" + std::to_string(j));
    return vocab;
}

// Independent ranking-based average precision: sort by (score desc, index
// asc), then average the running precision at each positive rank.
double oracle_ap(const std::vector<double>& scores, const std::vector<uint8_t>& truths) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    double sum = 0.0;
    int positives = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (!truths[static_cast<size_t>(order[rank])]) continue;
        ++positives;
        sum += static_cast<double>(positives) / static_cast<double>(rank + 1);
    }
    return sum / positives;
}

struct Criterion {
    bool pass = false;
    std::string detail;
};

Criterion criterion_gradients() {
    auto t0 = std::chrono::steady_clock::now();
    GradcheckReport report = run_pipeline_gradcheck({4, 3}, 1, 1e-5, 1e-4, 1e-7);
    double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "analytic vs central differences: max rel err %.2e over %zu families, %.1f s",
                  report.max_rel_err, report.families.size(), secs);
    return {report.all_within(1e-4) && secs < 30.0, buf};
}

Criterion criterion_equivariance() {
    Rng rng(202);
    GnbConfig config;
    config.d = 3;
    config.d_w = 2;
    config.conv_widths = {4, 3};
    Model model = make_model(config, 17);
    double max_dev = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int m = rng.uniform_int(2, 8), c = rng.uniform_int(2, 6);
        int k = rng.uniform_int(1, m - 1);
        std::vector<Instance> instances = random_instances(rng, m, config.d);
        LabelVocab vocab = random_vocab(rng, c, config.d_w);
        Tensor s = forward(build_assignment_graph(build_instance_graph(instances, k), build_label_graph(vocab)),
                           model);

        std::vector<int> iperm(static_cast<size_t>(m));
        std::iota(iperm.begin(), iperm.end(), 0);
        rng.shuffle(iperm);
        std::vector<Instance> pinst;
        for (int idx : iperm) pinst.push_back(instances[static_cast<size_t>(idx)]);
        Tensor si = forward(build_assignment_graph(build_instance_graph(pinst, k), build_label_graph(vocab)),
                            model);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < c; ++j)
                max_dev = std::max(max_dev, std::fabs(si.at2(i, j) - s.at2(iperm[static_cast<size_t>(i)], j)));

        std::vector<int> lperm(static_cast<size_t>(c));
        std::iota(lperm.begin(), lperm.end(), 0);
        rng.shuffle(lperm);
        LabelVocab pvocab;
        pvocab.embeddings = Tensor({c, config.d_w});
        for (int j = 0; j < c; ++j) {
            int src = lperm[static_cast<size_t>(j)];
            pvocab.names.push_back(vocab.names[static_cast<size_t>(src)]);
            for (int t = 0; t < config.d_w; ++t) pvocab.embeddings.at2(j, t) = vocab.embeddings.at2(src, t);
        }
        Tensor sl = forward(build_assignment_graph(build_instance_graph(instances, k), build_label_graph(pvocab)),
                            model);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < c; ++j)
                max_dev = std::max(max_dev, std::fabs(sl.at2(i, j) - s.at2(i, lperm[static_cast<size_t>(j)])));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "rows/columns track instance/label permutations: max deviation %.2e", max_dev);
    return {max_dev <= 1e-12, buf};
}

Criterion criterion_learnability() {
    auto t0 = std::chrono::steady_clock::now();
    SynthConfig scfg;
    scfg.classes = 6;
    scfg.feature_dim = 16;
    scfg.embed_dim = 8;
    scfg.train_images = 200;
    scfg.test_images = 100;
    scfg.noise_sigma = 0.05;
    scfg.distractor_rate = 0.3;
    scfg.seed = 1;
    SynthOutput synth = synth_generate(scfg);

    GnbConfig gcfg;
    gcfg.d = 16;
    gcfg.d_w = 8;
    gcfg.conv_widths = {32, 16};
    Model model = make_model(gcfg, 1001);

    TrainConfig tcfg;
    tcfg.epochs = 60;
    tcfg.lr = 0.01;
    tcfg.lr_decay = 10;
    tcfg.lr_period = 30;
    tcfg.momentum = 0.9;
    tcfg.weight_decay = 1e-4;
    tcfg.beta = 0.4;
    tcfg.seed = 1;
    tcfg.top_m = 10;
    tcfg.knn_k = 2;
    tcfg.grad_accum = 40;  // per-image steps diverge at this rate/momentum; see notes
    train(synth.train, synth.vocab, model, tcfg);

    auto scores = score_dataset(synth.test, synth.vocab, model, tcfg.top_m, tcfg.knn_k);
    std::vector<std::vector<uint8_t>> truths;
    for (const ImageRecord& rec : synth.test.records) truths.push_back(rec.labels);
    EvalResult result = evaluate(scores, truths, 0.5, 3);
    double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "held-out mAP %.4f (need >= 0.95), CF1 %.4f (need >= 0.85), %.0f s (budget 600)",
                  result.ap.map, result.all.f1_class, secs);
    return {result.ap.map >= 0.95 && result.all.f1_class >= 0.85 && secs < 600.0, buf};
}

Criterion criterion_loss_rules() {
    Rng rng(404);
    double max_dev = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int c = rng.uniform_int(1, 10);
        std::vector<double> p;
        std::vector<uint8_t> y;
        for (int j = 0; j < c; ++j) {
            p.push_back(rng.uniform(0.001, 0.999));
            y.push_back(rng.uniform(0.0, 1.0) < 0.5 ? 1 : 0);
        }
        double plain = 0.0;
        for (int j = 0; j < c; ++j)
            plain -= y[static_cast<size_t>(j)] ? std::log(p[static_cast<size_t>(j)])
                                               : std::log(1.0 - p[static_cast<size_t>(j)]);
        std::vector<double> ones(static_cast<size_t>(c), 1.0);
        max_dev = std::max(max_dev, std::fabs(weighted_bce_loss(p, y, ones) - plain));
    }

    int weight_mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        uint8_t y = rng.uniform(0.0, 1.0) < 0.5 ? 1 : 0;
        double r = rng.uniform(0.01, 0.99);
        double beta = rng.uniform(0.0, 2.0);
        double want = y ? std::exp(beta * (1.0 - r)) : std::exp(beta * r);
        if (class_weights({y}, {r}, beta)[0] != want) ++weight_mismatches;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "zero-strength weighting equals plain cross-entropy (max dev %.2e); %d/1000 weight mismatches",
                  max_dev, weight_mismatches);
    return {max_dev <= 1e-12 && weight_mismatches == 0, buf};
}

Criterion criterion_metric_oracles() {
    Rng rng(505);
    double max_dev = 0.0;
    int set_mismatches = 0;

    for (int trial = 0; trial < 50; ++trial) {  // single-class ranking
        int n = rng.uniform_int(2, 40);
        std::vector<double> scores;
        std::vector<uint8_t> truths;
        bool any = false;
        for (int i = 0; i < n; ++i) {
            scores.push_back(rng.uniform_int(0, 9) / 10.0);  // coarse grid provokes ties
            truths.push_back(rng.uniform(0.0, 1.0) < 0.4 ? 1 : 0);
            any |= truths.back() == 1;
        }
        if (!any) truths[0] = 1;
        max_dev = std::max(max_dev, std::fabs(average_precision(scores, truths) - oracle_ap(scores, truths)));
    }

    for (int trial = 0; trial < 50; ++trial) {  // matrix-level mean + prf suites
        int n = rng.uniform_int(2, 40), c = rng.uniform_int(2, 10);
        std::vector<std::vector<double>> scores(static_cast<size_t>(n));
        std::vector<std::vector<uint8_t>> truths(static_cast<size_t>(n)), preds(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < c; ++j) {
                scores[static_cast<size_t>(i)].push_back(rng.uniform(0.0, 1.0));
                truths[static_cast<size_t>(i)].push_back(rng.uniform(0.0, 1.0) < 0.4 ? 1 : 0);
                preds[static_cast<size_t>(i)].push_back(rng.uniform(0.0, 1.0) < 0.5 ? 1 : 0);
            }
        for (int j = 0; j < c; ++j) truths[static_cast<size_t>(rng.uniform_int(0, n - 1))][static_cast<size_t>(j)] = 1;

        MapResult mr = mean_average_precision(scores, truths);
        double want_map = 0.0;
        for (int j = 0; j < c; ++j) {
            std::vector<double> col_s;
            std::vector<uint8_t> col_t;
            for (int i = 0; i < n; ++i) {
                col_s.push_back(scores[static_cast<size_t>(i)][static_cast<size_t>(j)]);
                col_t.push_back(truths[static_cast<size_t>(i)][static_cast<size_t>(j)]);
            }
            want_map += oracle_ap(col_s, col_t);
        }
        want_map /= c;
        max_dev = std::max(max_dev, std::fabs(mr.map - want_map));

        PrfSuite suite = prf_suite(preds, truths);
        double cp = 0, cr = 0, f1 = 0;
        int64_t tp_all = 0, fp_all = 0, fn_all = 0;
        for (int j = 0; j < c; ++j) {
            int64_t tp = 0, fp = 0, fn = 0;
            for (int i = 0; i < n; ++i) {
                bool pr = preds[static_cast<size_t>(i)][static_cast<size_t>(j)];
                bool tr = truths[static_cast<size_t>(i)][static_cast<size_t>(j)];
                tp += pr && tr;
                fp += pr && !tr;
                fn += !pr && tr;
            }
            cp += tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
            cr += tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
            tp_all += tp;
            fp_all += fp;
            fn_all += fn;
        }
        cp /= c;
        cr /= c;
        f1 = cp + cr > 0 ? 2 * cp * cr / (cp + cr) : 0.0;
        double op = tp_all + fp_all ? static_cast<double>(tp_all) / (tp_all + fp_all) : 0.0;
        double or_ = tp_all + fn_all ? static_cast<double>(tp_all) / (tp_all + fn_all) : 0.0;
        double of1 = op + or_ > 0 ? 2 * op * or_ / (op + or_) : 0.0;
        max_dev = std::max({max_dev, std::fabs(suite.p_class - cp), std::fabs(suite.r_class - cr),
                            std::fabs(suite.f1_class - f1), std::fabs(suite.p_overall - op),
                            std::fabs(suite.r_overall - or_), std::fabs(suite.f1_overall - of1)});
    }

    for (int trial = 0; trial < 50; ++trial) {  // top-3 selection order statistics
        int c = rng.uniform_int(1, 10);
        std::vector<double> p;
        for (int j = 0; j < c; ++j) p.push_back(rng.uniform_int(0, 9) / 10.0);
        std::vector<uint8_t> got = topk_select(p, 3);
        std::vector<int> order(p.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
        std::vector<uint8_t> want(p.size(), 0);
        for (int r = 0; r < std::min(3, c); ++r) want[static_cast<size_t>(order[static_cast<size_t>(r)])] = 1;
        if (got != want) ++set_mismatches;
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "ranking, suite, and top-3 metrics vs enumeration: max dev %.2e, %d set mismatches", max_dev,
                  set_mismatches);
    return {max_dev <= 1e-12 && set_mismatches == 0, buf};
}

Criterion criterion_graphs() {
    Rng rng(606);
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int m = rng.uniform_int(1, 10), c = rng.uniform_int(1, 8), k = rng.uniform_int(1, 5);
        std::vector<Instance> instances = random_instances(rng, m, 3);
        LabelVocab vocab = random_vocab(rng, c, 2);
        AssignmentGraph graph =
            build_assignment_graph(build_instance_graph(instances, k), build_label_graph(vocab));

        if (static_cast<int>(graph.match_attr.size()) != m * c) ++bad;
        if (static_cast<int>(graph.label_edges.size()) != c * (c - 1)) ++bad;
        int want_deg = std::min(k, m - 1);
        for (int i = 0; i < m; ++i) {
            const auto& out = graph.inst_out[static_cast<size_t>(i)];
            if (static_cast<int>(out.size()) != want_deg) {
                ++bad;
                continue;
            }
            std::vector<std::pair<double, int>> by_dist;  // squared distance orders identically
            double cx = instances[static_cast<size_t>(i)].bbox.x + instances[static_cast<size_t>(i)].bbox.w / 2;
            double cy = instances[static_cast<size_t>(i)].bbox.y + instances[static_cast<size_t>(i)].bbox.h / 2;
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                double jx = instances[static_cast<size_t>(j)].bbox.x + instances[static_cast<size_t>(j)].bbox.w / 2;
                double jy = instances[static_cast<size_t>(j)].bbox.y + instances[static_cast<size_t>(j)].bbox.h / 2;
                by_dist.push_back({(cx - jx) * (cx - jx) + (cy - jy) * (cy - jy), j});
            }
            std::sort(by_dist.begin(), by_dist.end());
            std::vector<int> want, got;
            for (int r = 0; r < want_deg; ++r) want.push_back(by_dist[static_cast<size_t>(r)].second);
            std::sort(want.begin(), want.end());
            for (int e : out) got.push_back(graph.inst_edges[static_cast<size_t>(e)].dst);
            std::sort(got.begin(), got.end());
            if (got != want) ++bad;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "edge counts, out-degrees, and neighbor sets vs pairwise oracle: %d mismatches",
                  bad);
    return {bad == 0, buf};
}

Criterion criterion_determinism() {
    SynthConfig scfg;
    scfg.classes = 4;
    scfg.feature_dim = 8;
    scfg.embed_dim = 4;
    scfg.train_images = 20;
    scfg.test_images = 10;
    scfg.seed = 5;
    SynthOutput synth = synth_generate(scfg);

    GnbConfig gcfg;
    gcfg.d = 8;
    gcfg.d_w = 4;
    gcfg.conv_widths = {8, 6};
    TrainConfig tcfg;
    tcfg.epochs = 5;
    tcfg.seed = 3;
    tcfg.knn_k = 2;

    auto run_once = [&](Model& model) { return train(synth.train, synth.vocab, model, tcfg); };
    Model m1 = make_model(gcfg, 77);
    Model m2 = make_model(gcfg, 77);
    TrainResult r1 = run_once(m1), r2 = run_once(m2);

    bool identical = r1.history.size() == r2.history.size();
    for (size_t i = 0; identical && i < r1.history.size(); ++i)
        identical = r1.history[i].mean_loss == r2.history[i].mean_loss && r1.history[i].lr == r2.history[i].lr;
    for (auto it1 = m1.store.begin(), it2 = m2.store.begin(); identical && it1 != m1.store.end(); ++it1, ++it2)
        identical = it1->value.v == it2->value.v;

    auto before = score_dataset(synth.test, synth.vocab, m1, tcfg.top_m, tcfg.knn_k);
    namespace fs = std::filesystem;
    fs::path dir = fs::current_path() / "acceptance_scratch";
    fs::create_directories(dir);
    std::string ckpt = (dir / "round_trip.ckpt").string();
    save_checkpoint(ckpt, m1.store, {});
    Model m3 = make_model(gcfg, 99);  // different init, fully overwritten by the load
    load_checkpoint(ckpt, m3.store);
    auto after = score_dataset(synth.test, synth.vocab, m3, tcfg.top_m, tcfg.knn_k);
    double max_dev = 0.0;
    for (size_t i = 0; i < before.size(); ++i)
        for (size_t j = 0; j < before[i].size(); ++j)
            max_dev = std::max(max_dev, std::fabs(before[i][j] - after[i][j]));

    char buf[160];
    std::snprintf(buf, sizeof(buf), "fixed-seed reruns bit-identical: %s; save/load score shift %.2e",
                  identical ? "yes" : "NO", max_dev);
    return {identical && max_dev <= 1e-12, buf};
}

Criterion criterion_max_pool() {
    Rng rng(808);
    int bad = 0;
    double max_fd = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int m = rng.uniform_int(1, 12), c = rng.uniform_int(1, 10);
        Tensor s({m, c});
        for (double& v : s.v) v = rng.uniform(0.0, 1.0);

        std::vector<int> argmax;
        Tensor pooled = max_pool_scores(s, &argmax);
        for (int j = 0; j < c; ++j) {
            double want = s.at2(0, j);
            int want_row = 0;
            for (int i = 1; i < m; ++i)
                if (s.at2(i, j) > want) {
                    want = s.at2(i, j);
                    want_row = i;
                }
            if (pooled[j] != want || argmax[static_cast<size_t>(j)] != want_row) ++bad;
        }

        // gradient of sum(pooled) w.r.t. the matrix: 1 on argmax rows only
        ParamStore store;
        std::vector<int> row_ids;
        Tape tape;
        for (int i = 0; i < m; ++i) {
            Tensor row({c});
            for (int j = 0; j < c; ++j) row[j] = s.at2(i, j);
            row_ids.push_back(tape.param(store.create("row" + std::to_string(i), row)));
        }
        int loss = tape.scalar_sum(tape.max_over_set(row_ids));
        store.zero_grad();
        backward(tape, loss, store);
        int i = 0;
        for (const Param& p : store) {
            for (int j = 0; j < c; ++j) {
                double want_g = argmax[static_cast<size_t>(j)] == i ? 1.0 : 0.0;
                if (p.grad[j] != want_g) ++bad;
            }
            ++i;
        }

        // finite-difference spot check on non-argmax entries with a stable gap
        const double eps = 1e-6;
        for (int j = 0; j < c && m > 1; ++j) {
            int other = argmax[static_cast<size_t>(j)] == 0 ? m - 1 : 0;
            if (pooled[j] - s.at2(other, j) <= 2 * eps) continue;
            Tensor bumped = s;
            bumped.at2(other, j) += eps;
            Tensor repooled = max_pool_scores(bumped);
            max_fd = std::max(max_fd, std::fabs(repooled[j] - pooled[j]) / eps);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "column max + winner-only gradient: %d mismatches, off-winner sensitivity %.2e", bad, max_fd);
    return {bad == 0 && max_fd <= 1e-9, buf};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Criterion (*run)();
    };
    const Entry entries[] = {
        {"pipeline gradient correctness", criterion_gradients},
        {"permutation equivariance", criterion_equivariance},
        {"synthetic learnability", criterion_learnability},
        {"loss reductions", criterion_loss_rules},
        {"metric oracles", criterion_metric_oracles},
        {"graph construction", criterion_graphs},
        {"determinism and persistence", criterion_determinism},
        {"max-pool semantics", criterion_max_pool},
    };
    int failures = 0;
    int index = 0;
    for (const Entry& entry : entries) {
        ++index;
        Criterion result = entry.run();
        std::printf("[%s] criterion %d (%s): %s\n", result.pass ? "PASS" : "FAIL", index, entry.name,
                    result.detail.c_str());
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures;
}
