#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "gmlc/checkpoint.hpp"
#include "gmlc/data.hpp"
#include "gmlc/error.hpp"
#include "gmlc/format.hpp"
#include "gmlc/gnb.hpp"
#include "gmlc/metrics.hpp"
#include "gmlc/rng.hpp"
#include "gmlc/training.hpp"

namespace gmlc {
namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + path + "' for writing");
    file << text;
}

LabelVocab vocab_for(const RunConfig& run) {
    if (run.embeddings.empty()) throw ConfigError("config: embeddings path required");
    return load_embeddings(run.embeddings);
}

Dataset data_for(const RunConfig& run, int num_classes) {
    if (run.data.empty()) throw ConfigError("config: data path required");
    return load_dataset(run.data, num_classes);
}

Model model_for(const RunConfig& run, const Dataset& dataset, const LabelVocab& vocab) {
    GnbConfig config;
    config.d = dataset.feature_dim;
    config.d_w = vocab.dim();
    config.conv_widths = run.conv_widths;
    return make_model(config, substream_seed(run.seed, "init"));
}

std::string checkpoint_path(const RunConfig& run) {
    return run.checkpoint.empty() ? run.out + "/checkpoint.ckpt" : run.checkpoint;
}

std::map<std::string, std::string> model_meta(const Model& model) {
    std::string widths;
    for (size_t i = 0; i < model.config.conv_widths.size(); ++i) {
        if (i) widths += ',';
        widths += std::to_string(model.config.conv_widths[i]);
    }
    return {{"d", std::to_string(model.config.d)},
            {"d_w", std::to_string(model.config.d_w)},
            {"conv_widths", widths}};
}

std::vector<std::vector<uint8_t>> truth_rows(const Dataset& dataset) {
    std::vector<std::vector<uint8_t>> truths;
    truths.reserve(dataset.records.size());
    for (const ImageRecord& record : dataset.records) truths.push_back(record.labels);
    return truths;
}

}  // namespace

void cmd_synth(const RunConfig& run) {
    SynthOutput output = synth_generate(run.synth);
    write_resolved_config(run, "synth");
    save_dataset(output.train, run.out + "/train.jsonl");
    save_dataset(output.test, run.out + "/test.jsonl");
    save_embeddings(output.vocab, run.out + "/embeddings.txt");
    std::cout << "wrote " << run.out << "/train.jsonl (" << output.train.records.size() << " images), "
              << run.out << "/test.jsonl (" << output.test.records.size() << " images), " << run.out
              << "/embeddings.txt (" << output.vocab.num_classes() << " labels)\n";
}

void cmd_train(const RunConfig& run) {
    LabelVocab vocab = vocab_for(run);
    Dataset dataset = data_for(run, vocab.num_classes());
    Dataset val;
    bool has_val = !run.val_data.empty();
    if (has_val) val = load_dataset(run.val_data, vocab.num_classes());

    Model model = model_for(run, dataset, vocab);
    if (!run.resume.empty()) load_checkpoint(run.resume, model.store);

    write_resolved_config(run, "train");
    std::function<void(const EpochStats&)> snapshot;
    if (run.ckpt_every > 0)
        snapshot = [&](const EpochStats& stats) {
            if ((stats.epoch + 1) % run.ckpt_every == 0)
                save_checkpoint(run.out + "/checkpoint-" + std::to_string(stats.epoch) + ".ckpt", model.store,
                                model_meta(model));
        };

    TrainResult result = train(dataset, vocab, model, run.train, has_val ? &val : nullptr, snapshot);
    save_checkpoint(run.out + "/checkpoint.ckpt", model.store, model_meta(model));
    write_history_csv(result.history, run.out + "/history.csv");

    if (!result.history.empty()) {
        const EpochStats& last = result.history.back();
        std::cout << "epoch " << last.epoch << " mean_loss " << fmt_double(last.mean_loss);
        if (last.has_val) std::cout << " val_mAP " << fmt_double(last.val_map);
        std::cout << "\n";
    }
    std::cout << "wrote " << run.out << "/checkpoint.ckpt and " << run.out << "/history.csv\n";
}

void cmd_eval(const RunConfig& run) {
    LabelVocab vocab = vocab_for(run);
    Dataset dataset = data_for(run, vocab.num_classes());
    Model model = model_for(run, dataset, vocab);
    load_checkpoint(checkpoint_path(run), model.store);

    auto scores = score_dataset(dataset, vocab, model, run.train.top_m, run.train.knn_k);
    EvalResult result = evaluate(scores, truth_rows(dataset), run.threshold, run.topk);
    std::string report = format_report(result, vocab.names);

    write_resolved_config(run, "eval");
    write_text(run.out + "/eval_report.txt", report);
    std::cout << report;
}

void cmd_predict(const RunConfig& run) {
    if (run.predict_id.empty()) throw ConfigError("config: predict.id required");
    LabelVocab vocab = vocab_for(run);
    Dataset dataset = data_for(run, vocab.num_classes());
    Model model = model_for(run, dataset, vocab);
    load_checkpoint(checkpoint_path(run), model.store);

    const ImageRecord* record = nullptr;
    for (const ImageRecord& r : dataset.records)
        if (r.id == run.predict_id) record = &r;
    if (!record) throw DataError("predict: no record '" + run.predict_id + "' in " + run.data);

    Prediction prediction =
        predict(record->instances, vocab, model, run.train.top_m, run.train.knn_k, run.threshold);
    std::string text;
    for (int c = 0; c < vocab.num_classes(); ++c)
        text += vocab.names[c] + " " + fmt_double(prediction.scores[c]) + " instance " +
                std::to_string(prediction.support[c]) + "\n";
    text += "predicted";
    for (int c : prediction.predicted_classes) text += " " + vocab.names[c];
    text += "\n";

    write_resolved_config(run, "predict");
    write_text(run.out + "/predict.txt", text);
    std::cout << text;
}

void cmd_gradcheck(const RunConfig& run) {
    GradcheckReport report = run_pipeline_gradcheck(run.gradcheck_widths, run.seed);
    const FamilyReport* worst = nullptr;
    std::string text;
    for (const FamilyReport& family : report.families) {
        text += family.family + " " + fmt_double(family.max_rel_err) + "\n";
        if (!worst || family.max_rel_err > worst->max_rel_err) worst = &family;
    }
    text += "max " + fmt_double(report.max_rel_err) + "\n";
    bool ok = report.max_rel_err <= 1e-3;
    text += ok ? "PASS\n" : "FAIL\n";

    write_resolved_config(run, "gradcheck");
    write_text(run.out + "/gradcheck.txt", text);
    std::cout << text;
    if (!ok)
        throw NumericError("gradient check failed: " + worst->family + " at relative error " +
                           fmt_double(worst->max_rel_err));
}

}  // namespace gmlc
