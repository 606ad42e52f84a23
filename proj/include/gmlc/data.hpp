#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmlc/graph.hpp"
#include "gmlc/tensor.hpp"

namespace gmlc {

struct ImageRecord {
    std::string id;
    std::vector<Instance> instances;  // boxes normalized to the unit square
    std::vector<uint8_t> labels;      // multi-hot, length num_classes
};

struct Dataset {
    int feature_dim = 0;
    int num_classes = 0;
    std::vector<ImageRecord> records;
};

// One JSON object per line: {"id", "width", "height", "labels", "instances"}
// with instances carrying {"feature", "bbox", "confidence", "class"}. Boxes
// arrive in pixel units and are normalized by image width/height on load.
// Malformed lines and inconsistent records raise data errors naming the line
// or record. num_classes 0 infers the class count from the labels seen.
Dataset load_dataset(const std::string& path, int num_classes = 0);

// Canonical re-serialization: unit width/height, normalized boxes, sorted
// labels, fixed key order, shortest exact number formatting. save(load(f)) of
// a canonical file reproduces it byte for byte.
void save_dataset(const Dataset& dataset, const std::string& path);
std::string serialize_dataset(const Dataset& dataset);

// Text embeddings, one `<name> <v1> <v2> ...` line per label. With names
// given, every name must appear (missing ones are an error); with names empty
// the vocabulary is the file's first-occurrence order. A repeated name keeps
// the last line and warns on stderr.
LabelVocab load_embeddings(const std::string& path, const std::vector<std::string>& names = {});
void save_embeddings(const LabelVocab& vocab, const std::string& path);

// Fraction of images carrying each label.
std::vector<double> label_frequencies(const Dataset& dataset);

struct SynthConfig {
    int classes = 6;
    int feature_dim = 16;
    int embed_dim = 8;
    int train_images = 200;
    int test_images = 100;
    int min_instances = 2;
    int max_instances = 5;
    double distractor_rate = 0.3;
    double noise_sigma = 0.05;
    uint64_t seed = 1;
    void validate() const;
};

struct SynthOutput {
    Dataset train;
    Dataset test;
    LabelVocab vocab;
    Tensor prototypes;  // classes x feature_dim, the noise-free class features
    Tensor junk;        // feature_dim, the distractor feature
};

// Deterministic synthetic corpus: each class owns a feature prototype (well
// separated from the others) and a home region of the image; instances are
// prototype + Gaussian noise placed near the class anchor, padded with
// duplicates up to a random count, plus optional junk distractors with low
// confidence. Labels are Bernoulli draws with per-class rates stepping from
// 0.55 down to 0.15 (empty drawings are retried).
SynthOutput synth_generate(const SynthConfig& config);

}  // namespace gmlc
