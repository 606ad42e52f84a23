#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmlc/data.hpp"
#include "gmlc/training.hpp"

namespace gmlc {

// Every tunable of every subcommand, resolvable from defaults alone. A run
// writes its resolved config next to its outputs, and rerunning from that
// file reproduces the outputs byte-for-byte.
struct RunConfig {
    uint64_t seed = 1;         // master seed; all sub-streams derive from it
    std::string out = "out";   // output directory
    std::string data;          // dataset consumed by train/eval/predict
    std::string embeddings;    // label embedding file
    std::string checkpoint;    // model read by eval/predict; "" = <out>/checkpoint.ckpt

    SynthConfig synth;                           // synth.* keys
    std::vector<int> conv_widths = {512, 256};   // gnb.conv_widths

    TrainConfig train;      // train.* keys
    std::string resume;     // train.resume: checkpoint to continue from
    std::string val_data;   // train.val_data: per-epoch mAP dataset
    int ckpt_every = 0;     // train.ckpt_every: periodic snapshots, 0 = off

    double threshold = 0.5;  // eval.threshold
    int topk = 3;            // eval.topk

    std::string predict_id;                      // predict.id
    std::vector<int> gradcheck_widths = {4, 3};  // gradcheck.widths

    void validate() const;
};

// Single key assignment; unknown keys and unparsable values are ConfigErrors.
void set_config_key(RunConfig& config, const std::string& key, const std::string& value);

// Defaults, then the optional config file, then `key=value` overrides in
// order, then the dedicated seed/out flags. Later sources win.
RunConfig resolve_run_config(const std::string& config_path, const std::vector<std::string>& overrides,
                             const std::optional<uint64_t>& seed, const std::string& out);

// Sorted `key=value` lines covering every key; doubles print exactly.
std::string serialize_run_config(const RunConfig& config);

// Writes <out>/<command>.resolved.cfg, creating the directory if needed.
void write_resolved_config(const RunConfig& config, const std::string& command);

}  // namespace gmlc
