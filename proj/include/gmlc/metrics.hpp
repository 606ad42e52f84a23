#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gmlc {

// Average precision of one class: images ranked by descending score (ties by
// image index); AP = mean of precision@rank over the ranks of positives.
// Requires at least one positive.
double average_precision(const std::vector<double>& scores, const std::vector<uint8_t>& truths);

struct MapResult {
    double map = 0.0;
    std::vector<double> per_class;  // meaningful only where valid
    std::vector<uint8_t> valid;     // class has at least one positive
};

// Unweighted mean of per-class AP over classes with positives; classes with
// none are excluded with a warning on stderr. No valid class at all is a data
// error.
MapResult mean_average_precision(const std::vector<std::vector<double>>& scores,
                                 const std::vector<std::vector<uint8_t>>& truths);

struct PrfSuite {
    double p_class = 0, r_class = 0, f1_class = 0;     // macro: averaged per-class
    double p_overall = 0, r_overall = 0, f1_overall = 0;  // micro: pooled counts
};

struct ConfusionTotals {
    int64_t tp = 0, fp = 0, fn = 0;
};

PrfSuite prf_suite(const std::vector<std::vector<uint8_t>>& predictions,
                   const std::vector<std::vector<uint8_t>>& truths);
ConfusionTotals pooled_counts(const std::vector<std::vector<uint8_t>>& predictions,
                              const std::vector<std::vector<uint8_t>>& truths);

// Exactly min(k, C) positives at the k highest entries, ties to lower index.
std::vector<uint8_t> topk_select(const std::vector<double>& p, int k = 3);

struct EvalResult {
    MapResult ap;
    PrfSuite all;   // positives = scores strictly above the threshold
    PrfSuite top3;  // positives forced to the top-k scores per image
};

EvalResult evaluate(const std::vector<std::vector<double>>& scores,
                    const std::vector<std::vector<uint8_t>>& truths, double threshold = 0.5, int topk = 3);

// Flat `key value` lines: mAP, all.CP ... top3.OF1, then per-class ap.<name>
// rows ("n/a" for classes without positives). Values print exactly.
std::string format_report(const EvalResult& result, const std::vector<std::string>& label_names);

}  // namespace gmlc
