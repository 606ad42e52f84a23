#include "gmlc/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gmlc/error.hpp"
#include "gmlc/format.hpp"
#include "gmlc/metrics.hpp"
#include "gmlc/rng.hpp"
#include "gmlc/sgd.hpp"

namespace gmlc {

Tensor max_pool_scores(const Tensor& scores, std::vector<int>* argmax) {
    if (scores.ndim() != 2) throw ShapeError("max_pool_scores: expected a rank-2 matrix, got " + scores.shape_str());
    int m = scores.extent(0), c = scores.extent(1);
    if (m < 1) throw ContractError("max_pool_scores: image with zero instances");
    Tensor out({c});
    if (argmax) argmax->assign(c, 0);
    for (int j = 0; j < c; ++j) {
        double best = scores.at2(0, j);
        int row = 0;
        for (int i = 1; i < m; ++i)
            if (scores.at2(i, j) > best) {
                best = scores.at2(i, j);
                row = i;
            }
        out.v[j] = best;
        if (argmax) (*argmax)[j] = row;
    }
    return out;
}

std::vector<double> class_weights(const std::vector<uint8_t>& labels, const std::vector<double>& frequencies,
                                  double beta) {
    if (labels.size() != frequencies.size())
        throw ShapeError("class_weights: " + std::to_string(labels.size()) + " labels vs " +
                         std::to_string(frequencies.size()) + " frequencies");
    std::vector<double> w(labels.size());
    for (size_t c = 0; c < labels.size(); ++c)
        w[c] = labels[c] ? std::exp(beta * (1.0 - frequencies[c])) : std::exp(beta * frequencies[c]);
    return w;
}

double weighted_bce_loss(const std::vector<double>& probs, const std::vector<uint8_t>& labels,
                         const std::vector<double>& weights) {
    if (probs.size() != labels.size() || probs.size() != weights.size())
        throw ShapeError("weighted_bce_loss: sizes differ (" + std::to_string(probs.size()) + " probs, " +
                         std::to_string(labels.size()) + " labels, " + std::to_string(weights.size()) + " weights)");
    if (probs.empty()) throw ShapeError("weighted_bce_loss: no classes");
    constexpr double kEps = 1e-12;
    double loss = 0.0;
    for (size_t c = 0; c < probs.size(); ++c) {
        double p = std::clamp(probs[c], kEps, 1.0 - kEps);
        loss -= weights[c] * (labels[c] ? std::log(p) : std::log(1.0 - p));
    }
    return loss;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("train: epochs must be non-negative");
    if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (!(lr_decay > 0.0)) throw ConfigError("train: lr_decay must be positive");
    if (lr_period < 1) throw ConfigError("train: lr_period must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be non-negative");
    if (!(beta >= 0.0)) throw ConfigError("train: beta must be non-negative");
    if (top_m < 1) throw ConfigError("train: top_m must be positive");
    if (knn_k < 1) throw ConfigError("train: knn_k must be positive");
    if (grad_accum < 1) throw ConfigError("train: grad_accum must be positive");
}

double lr_at(int epoch, const TrainConfig& config) {
    if (epoch < 0) throw ContractError("lr_at: negative epoch");
    double lr = config.lr;
    for (int q = epoch / config.lr_period; q > 0; --q) lr /= config.lr_decay;
    return lr;
}

int build_image_loss(Tape& tape, const AssignmentGraph& graph, Model& model, const std::vector<uint8_t>& labels,
                     const std::vector<double>& weights) {
    int c = graph.C;
    if (int(labels.size()) != c || int(weights.size()) != c)
        throw ShapeError("build_image_loss: " + std::to_string(labels.size()) + " labels and " +
                         std::to_string(weights.size()) + " weights for " + std::to_string(c) + " classes");

    std::vector<int> scores = forward_scores(tape, graph, model);
    std::vector<int> pooled(c);
    for (int j = 0; j < c; ++j) {
        std::vector<int> column(graph.M);
        for (int i = 0; i < graph.M; ++i) column[i] = scores[graph.match_index(i, j)];
        pooled[j] = tape.max_over_set(column);
    }
    int p = tape.concat(pooled);

    // Clamp to [eps, 1-eps] inside the op vocabulary: lower clamp is a max
    // against a constant, upper clamp is the same trick on the negation.
    constexpr double kEps = 1e-12;
    int neg_ones = tape.leaf(Tensor::full({c}, -1.0));
    int low = tape.max_over_set({p, tape.leaf(Tensor::full({c}, kEps))});
    int high = tape.max_over_set({tape.mul(low, neg_ones), tape.leaf(Tensor::full({c}, kEps - 1.0))});
    int clamped = tape.mul(high, neg_ones);

    int one_minus = tape.add(tape.leaf(Tensor::full({c}, 1.0)), tape.mul(clamped, neg_ones));
    Tensor y({c}), ny({c}), negw({c});
    for (int j = 0; j < c; ++j) {
        y.v[j] = labels[j] ? 1.0 : 0.0;
        ny.v[j] = 1.0 - y.v[j];
        negw.v[j] = -weights[j];
    }
    int inner = tape.add(tape.mul(tape.leaf(y), tape.log(clamped)), tape.mul(tape.leaf(ny), tape.log(one_minus)));
    return tape.scalar_sum(tape.mul(tape.leaf(negw), inner));
}

TrainResult train(const Dataset& dataset, const LabelVocab& vocab, Model& model, const TrainConfig& config,
                  const Dataset* val, const std::function<void(const EpochStats&)>& after_epoch) {
    config.validate();
    if (dataset.records.empty()) throw DataError("train: empty dataset");
    if (vocab.num_classes() != dataset.num_classes)
        throw ShapeError("train: vocabulary has " + std::to_string(vocab.num_classes()) + " classes, dataset has " +
                         std::to_string(dataset.num_classes));
    if (model.config.d != dataset.feature_dim)
        throw ShapeError("train: model expects feature extent " + std::to_string(model.config.d) + ", dataset has " +
                         std::to_string(dataset.feature_dim));
    if (model.config.d_w != vocab.dim())
        throw ShapeError("train: model expects embedding extent " + std::to_string(model.config.d_w) +
                         ", vocabulary has " + std::to_string(vocab.dim()));
    if (val && (val->num_classes != dataset.num_classes || val->feature_dim != dataset.feature_dim))
        throw ShapeError("train: validation set shape differs from training set");

    std::vector<double> freqs = label_frequencies(dataset);
    size_t n = dataset.records.size();
    std::vector<std::vector<double>> weights(n);
    std::vector<AssignmentGraph> graphs;
    graphs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        weights[i] = class_weights(dataset.records[i].labels, freqs, config.beta);
        graphs.push_back(build_image_graph(dataset.records[i].instances, vocab, config.top_m, config.knn_k));
    }

    Rng shuffle_rng(substream_seed(config.seed, "train.shuffle"));
    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double lr = lr_at(epoch, config);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (size_t pos = 0; pos < n;) {
            size_t end = std::min(pos + size_t(config.grad_accum), n);
            Tape tape;
            std::vector<int> losses;
            for (size_t q = pos; q < end; ++q) {
                int idx = order[q];
                int node = build_image_loss(tape, graphs[idx], model, dataset.records[idx].labels, weights[idx]);
                double value = tape.value(node).v[0];
                if (!std::isfinite(value))
                    throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", image '" +
                                       dataset.records[idx].id + "'");
                loss_sum += value;
                losses.push_back(node);
            }
            int window = losses.size() == 1 ? losses.front() : tape.mean_over_set(losses);
            model.store.zero_grad();
            backward(tape, window, model.store);
            sgd_step(model.store, lr, config.momentum, config.weight_decay);
            pos = end;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_sum / double(n);
        stats.lr = lr;
        if (val) {
            std::vector<std::vector<double>> scores = score_dataset(*val, vocab, model, config.top_m, config.knn_k);
            std::vector<std::vector<uint8_t>> truths;
            truths.reserve(val->records.size());
            for (const ImageRecord& rec : val->records) truths.push_back(rec.labels);
            stats.val_map = mean_average_precision(scores, truths).map;
            stats.has_val = true;
        }
        result.history.push_back(stats);
        if (after_epoch) after_epoch(stats);
    }
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write history file: " + path);
    out << "epoch,mean_loss,lr,val_mAP\n";
    for (const EpochStats& st : history) {
        out << st.epoch << ',' << fmt_double(st.mean_loss) << ',' << fmt_double(st.lr) << ',';
        if (st.has_val) out << fmt_double(st.val_map);
        out << '\n';
    }
    if (!out) throw DataError("failed writing history file: " + path);
}

std::vector<std::vector<double>> score_dataset(const Dataset& dataset, const LabelVocab& vocab, Model& model,
                                               int top_m, int knn_k) {
    std::vector<std::vector<double>> rows;
    rows.reserve(dataset.records.size());
    for (const ImageRecord& rec : dataset.records) {
        AssignmentGraph graph = build_image_graph(rec.instances, vocab, top_m, knn_k);
        rows.push_back(max_pool_scores(forward(graph, model)).v);
    }
    return rows;
}

Prediction predict(const std::vector<Instance>& instances, const LabelVocab& vocab, Model& model, int top_m,
                   int knn_k, double threshold) {
    AssignmentGraph graph = build_image_graph(instances, vocab, top_m, knn_k);
    Prediction out;
    Tensor pooled = max_pool_scores(forward(graph, model), &out.support);
    out.scores = pooled.v;
    for (size_t c = 0; c < out.scores.size(); ++c)
        if (out.scores[c] > threshold) out.predicted_classes.push_back(int(c));
    return out;
}

GradcheckReport run_pipeline_gradcheck(const std::vector<int>& conv_widths, uint64_t seed, double eps, double rtol,
                                       double atol) {
    const int d = 3, d_w = 2;
    Rng rng(substream_seed(seed, "gradcheck.data"));

    std::vector<Instance> instances(2);
    for (Instance& inst : instances) {
        inst.feature = Tensor({d});
        for (double& v : inst.feature.v) v = rng.uniform(-1.0, 1.0);
    }
    instances[0].bbox = {0.15, 0.2, 0.3, 0.25};
    instances[0].confidence = 0.9;
    instances[0].cls = 0;
    instances[1].bbox = {0.55, 0.5, 0.3, 0.2};
    instances[1].confidence = 0.6;
    instances[1].cls = 1;

    LabelVocab vocab;
    vocab.names = {"a", "b"};
    vocab.embeddings = Tensor::zeros({2, d_w});
    for (double& v : vocab.embeddings.v) v = rng.uniform(-1.0, 1.0);

    GnbConfig config;
    config.d = d;
    config.d_w = d_w;
    config.conv_widths = conv_widths;
    Model model = make_model(config, seed);

    AssignmentGraph graph = build_image_graph(instances, vocab, 2, 1);
    std::vector<uint8_t> labels = {1, 0};
    std::vector<double> weights = class_weights(labels, {0.25, 0.75}, 0.4);

    model.store.zero_grad();
    {
        Tape tape;
        int loss = build_image_loss(tape, graph, model, labels, weights);
        backward(tape, loss, model.store);
    }
    std::vector<Tensor> reference = finite_difference_grad(
        model.store,
        [&]() {
            Tape tape;
            return tape.value(build_image_loss(tape, graph, model, labels, weights)).v[0];
        },
        eps);
    return compare_gradients(model.store, reference, rtol, atol);
}

}  // namespace gmlc
