#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmlc/data.hpp"
#include "gmlc/gnb.hpp"
#include "gmlc/gradcheck.hpp"
#include "gmlc/graph.hpp"
#include "gmlc/tape.hpp"
#include "gmlc/tensor.hpp"

namespace gmlc {

// Per-class column maximum of an instances-by-classes score matrix; optional
// argmax receives the winning instance row per class (first row on ties).
// A matrix with zero rows is a caller bug.
Tensor max_pool_scores(const Tensor& scores, std::vector<int>* argmax = nullptr);

// w_c = exp(beta * (1 - r_c)) for positive classes, exp(beta * r_c) for
// negative ones, where r_c is the training frequency of class c.
std::vector<double> class_weights(const std::vector<uint8_t>& labels, const std::vector<double>& frequencies,
                                  double beta);

// Weighted binary cross-entropy over classes; probabilities are clamped to
// [1e-12, 1 - 1e-12] before the logs.
double weighted_bce_loss(const std::vector<double>& probs, const std::vector<uint8_t>& labels,
                         const std::vector<double>& weights);

struct TrainConfig {
    int epochs = 90;
    double lr = 0.01;
    double lr_decay = 10.0;  // divide the rate by this ...
    int lr_period = 30;      // ... every this many epochs
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double beta = 0.0;  // class reweighting strength
    uint64_t seed = 1;
    int top_m = 10;
    int knn_k = 3;
    int grad_accum = 1;  // images averaged into one parameter step
    void validate() const;
};

// Step-decayed rate for a zero-based epoch index.
double lr_at(int epoch, const TrainConfig& config);

// Differentiable image loss: forward scores, per-class max pooling, clamp,
// weighted cross-entropy. Returns the scalar loss node.
int build_image_loss(Tape& tape, const AssignmentGraph& graph, Model& model, const std::vector<uint8_t>& labels,
                     const std::vector<double>& weights);

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double lr = 0.0;
    double val_map = 0.0;
    bool has_val = false;
};

struct TrainResult {
    std::vector<EpochStats> history;
};

// SGD training over per-image losses (shuffled each epoch, deterministic in
// the seed). `val` adds a per-epoch mAP column; `after_epoch` runs once per
// epoch after its optimizer steps (checkpoint hooks and the like).
TrainResult train(const Dataset& dataset, const LabelVocab& vocab, Model& model, const TrainConfig& config,
                  const Dataset* val = nullptr,
                  const std::function<void(const EpochStats&)>& after_epoch = nullptr);

// `epoch,mean_loss,lr,val_mAP` rows; the last field is empty without a
// validation set.
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// Pooled per-class scores for every image, rows aligned with dataset order.
std::vector<std::vector<double>> score_dataset(const Dataset& dataset, const LabelVocab& vocab, Model& model,
                                               int top_m, int knn_k);

struct Prediction {
    std::vector<double> scores;          // pooled, one per class
    std::vector<int> support;            // winning instance row per class
    std::vector<int> predicted_classes;  // classes scoring strictly above the threshold
};

Prediction predict(const std::vector<Instance>& instances, const LabelVocab& vocab, Model& model, int top_m,
                   int knn_k, double threshold = 0.5);

// End-to-end analytic-vs-finite-difference comparison on a tiny fixed problem
// (two instances, two classes) with the given convolution widths.
GradcheckReport run_pipeline_gradcheck(const std::vector<int>& conv_widths, uint64_t seed, double eps = 1e-5,
                                       double rtol = 1e-4, double atol = 1e-7);

}  // namespace gmlc
