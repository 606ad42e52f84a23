#include "gmlc/metrics.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gmlc/error.hpp"
#include "gmlc/format.hpp"

namespace gmlc {

namespace {

std::vector<int> rank_order(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

void check_grid(const std::vector<std::vector<uint8_t>>& a, const std::vector<std::vector<uint8_t>>& b,
                const char* what) {
    if (a.size() != b.size())
        throw ShapeError(std::string(what) + ": row counts differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    if (a.empty()) throw DataError(std::string(what) + ": no images");
    size_t c = a.front().size();
    if (c == 0) throw DataError(std::string(what) + ": no classes");
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].size() != c || b[i].size() != c)
            throw ShapeError(std::string(what) + ": ragged row " + std::to_string(i));
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double p, double r) { return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

double average_precision(const std::vector<double>& scores, const std::vector<uint8_t>& truths) {
    if (scores.size() != truths.size())
        throw ShapeError("average_precision: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(truths.size()) + " truths");
    if (scores.empty()) throw DataError("average_precision: no images");
    long positives = std::count_if(truths.begin(), truths.end(), [](uint8_t t) { return t != 0; });
    if (positives == 0) throw ContractError("average_precision: class has no positive images");

    std::vector<int> order = rank_order(scores);
    double sum = 0.0;
    long hits = 0;
    for (size_t r = 0; r < order.size(); ++r) {
        if (truths[order[r]] != 0) {
            ++hits;
            sum += double(hits) / double(r + 1);
        }
    }
    return sum / double(positives);
}

MapResult mean_average_precision(const std::vector<std::vector<double>>& scores,
                                 const std::vector<std::vector<uint8_t>>& truths) {
    if (scores.size() != truths.size())
        throw ShapeError("mean_average_precision: row counts differ");
    if (scores.empty()) throw DataError("mean_average_precision: no images");
    size_t c = truths.front().size();
    for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i].size() != c || truths[i].size() != c)
            throw ShapeError("mean_average_precision: ragged row " + std::to_string(i));
    if (c == 0) throw DataError("mean_average_precision: no classes");

    MapResult out;
    out.per_class.assign(c, 0.0);
    out.valid.assign(c, 0);
    double sum = 0.0;
    int valid = 0;
    for (size_t j = 0; j < c; ++j) {
        std::vector<double> s(scores.size());
        std::vector<uint8_t> t(scores.size());
        bool any = false;
        for (size_t i = 0; i < scores.size(); ++i) {
            s[i] = scores[i][j];
            t[i] = truths[i][j];
            any = any || t[i] != 0;
        }
        if (!any) {
            std::cerr << "warning: class " << j << " has no positive images; excluded from mAP\n";
            continue;
        }
        out.per_class[j] = average_precision(s, t);
        out.valid[j] = 1;
        sum += out.per_class[j];
        ++valid;
    }
    if (valid == 0) throw DataError("mean_average_precision: no class has any positive image");
    out.map = sum / double(valid);
    return out;
}

ConfusionTotals pooled_counts(const std::vector<std::vector<uint8_t>>& predictions,
                              const std::vector<std::vector<uint8_t>>& truths) {
    check_grid(predictions, truths, "pooled_counts");
    ConfusionTotals t;
    for (size_t i = 0; i < predictions.size(); ++i)
        for (size_t j = 0; j < predictions[i].size(); ++j) {
            bool p = predictions[i][j] != 0, y = truths[i][j] != 0;
            t.tp += p && y;
            t.fp += p && !y;
            t.fn += !p && y;
        }
    return t;
}

PrfSuite prf_suite(const std::vector<std::vector<uint8_t>>& predictions,
                   const std::vector<std::vector<uint8_t>>& truths) {
    check_grid(predictions, truths, "prf_suite");
    size_t c = truths.front().size();
    std::vector<int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
    for (size_t i = 0; i < predictions.size(); ++i)
        for (size_t j = 0; j < c; ++j) {
            bool p = predictions[i][j] != 0, y = truths[i][j] != 0;
            tp[j] += p && y;
            fp[j] += p && !y;
            fn[j] += !p && y;
        }

    PrfSuite out;
    int64_t tp_all = 0, fp_all = 0, fn_all = 0;
    for (size_t j = 0; j < c; ++j) {
        out.p_class += safe_div(double(tp[j]), double(tp[j] + fp[j]));
        out.r_class += safe_div(double(tp[j]), double(tp[j] + fn[j]));
        tp_all += tp[j];
        fp_all += fp[j];
        fn_all += fn[j];
    }
    out.p_class /= double(c);
    out.r_class /= double(c);
    out.f1_class = f1_of(out.p_class, out.r_class);
    out.p_overall = safe_div(double(tp_all), double(tp_all + fp_all));
    out.r_overall = safe_div(double(tp_all), double(tp_all + fn_all));
    out.f1_overall = f1_of(out.p_overall, out.r_overall);
    return out;
}

std::vector<uint8_t> topk_select(const std::vector<double>& p, int k) {
    if (k < 1) throw ContractError("topk_select: k must be positive");
    if (p.empty()) throw DataError("topk_select: no scores");
    std::vector<int> order = rank_order(p);
    std::vector<uint8_t> out(p.size(), 0);
    size_t take = std::min<size_t>(size_t(k), p.size());
    for (size_t i = 0; i < take; ++i) out[order[i]] = 1;
    return out;
}

EvalResult evaluate(const std::vector<std::vector<double>>& scores,
                    const std::vector<std::vector<uint8_t>>& truths, double threshold, int topk) {
    EvalResult out;
    out.ap = mean_average_precision(scores, truths);
    std::vector<std::vector<uint8_t>> thresholded(scores.size()), topped(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        thresholded[i].resize(scores[i].size());
        for (size_t j = 0; j < scores[i].size(); ++j) thresholded[i][j] = scores[i][j] > threshold ? 1 : 0;
        topped[i] = topk_select(scores[i], topk);
    }
    out.all = prf_suite(thresholded, truths);
    out.top3 = prf_suite(topped, truths);
    return out;
}

std::string format_report(const EvalResult& result, const std::vector<std::string>& label_names) {
    if (label_names.size() != result.ap.valid.size())
        throw ShapeError("format_report: " + std::to_string(label_names.size()) + " names vs " +
                         std::to_string(result.ap.valid.size()) + " classes");
    std::ostringstream os;
    os << "mAP " << fmt_double(result.ap.map) << "\n";
    auto suite = [&](const char* prefix, const PrfSuite& s) {
        os << prefix << ".CP " << fmt_double(s.p_class) << "\n";
        os << prefix << ".CR " << fmt_double(s.r_class) << "\n";
        os << prefix << ".CF1 " << fmt_double(s.f1_class) << "\n";
        os << prefix << ".OP " << fmt_double(s.p_overall) << "\n";
        os << prefix << ".OR " << fmt_double(s.r_overall) << "\n";
        os << prefix << ".OF1 " << fmt_double(s.f1_overall) << "\n";
    };
    suite("all", result.all);
    suite("top3", result.top3);
    for (size_t j = 0; j < label_names.size(); ++j) {
        os << "ap." << label_names[j] << ' ';
        if (result.ap.valid[j])
            os << fmt_double(result.ap.per_class[j]) << "\n";
        else
            os << "n/a\n";
    }
    return os.str();
}

}  // namespace gmlc
