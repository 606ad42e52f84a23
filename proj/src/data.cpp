#include "gmlc/data.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gmlc/error.hpp"
#include "gmlc/format.hpp"
#include "gmlc/rng.hpp"

namespace gmlc {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::string& path, size_t line, const std::string& why) {
    throw DataError(path + ": line " + std::to_string(line) + ": " + why);
}

[[noreturn]] void fail_record(const std::string& id, const std::string& why) {
    throw DataError("record '" + id + "': " + why);
}

double number_field(const json& obj, const char* key, const std::string& id) {
    if (!obj.contains(key) || !obj[key].is_number()) fail_record(id, std::string("missing numeric '") + key + "'");
    return obj[key].get<double>();
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

// Raw records before the class count is known.
struct RawRecord {
    std::string id;
    std::vector<Instance> instances;
    std::vector<int> label_ids;
};

RawRecord parse_record(const json& obj, const std::string& path, size_t line) {
    if (!obj.is_object()) fail_line(path, line, "not a JSON object");
    if (!obj.contains("id") || !obj["id"].is_string()) fail_line(path, line, "missing string 'id'");
    RawRecord rec;
    rec.id = obj["id"].get<std::string>();

    double width = number_field(obj, "width", rec.id);
    double height = number_field(obj, "height", rec.id);
    if (!(width > 0.0) || !(height > 0.0)) fail_record(rec.id, "width and height must be positive");

    if (!obj.contains("labels") || !obj["labels"].is_array()) fail_record(rec.id, "missing 'labels' array");
    for (const auto& l : obj["labels"]) {
        if (!l.is_number_integer()) fail_record(rec.id, "labels must be integers");
        int v = l.get<int>();
        if (v < 0) fail_record(rec.id, "negative label index");
        if (std::find(rec.label_ids.begin(), rec.label_ids.end(), v) != rec.label_ids.end())
            fail_record(rec.id, "duplicate label index " + std::to_string(v));
        rec.label_ids.push_back(v);
    }

    if (!obj.contains("instances") || !obj["instances"].is_array()) fail_record(rec.id, "missing 'instances' array");
    if (obj["instances"].empty()) fail_record(rec.id, "no instances");
    for (const auto& inst : obj["instances"]) {
        if (!inst.is_object()) fail_record(rec.id, "instance is not an object");
        if (!inst.contains("feature") || !inst["feature"].is_array() || inst["feature"].empty())
            fail_record(rec.id, "instance missing non-empty 'feature' array");
        Instance out;
        std::vector<double> feat;
        for (const auto& v : inst["feature"]) {
            if (!v.is_number()) fail_record(rec.id, "feature entries must be numbers");
            feat.push_back(v.get<double>());
        }
        out.feature = Tensor({int(feat.size())}, feat);
        if (!out.feature.all_finite()) fail_record(rec.id, "non-finite feature value");

        if (!inst.contains("bbox") || !inst["bbox"].is_array() || inst["bbox"].size() != 4)
            fail_record(rec.id, "instance 'bbox' must be [x, y, w, h]");
        double b[4];
        for (int i = 0; i < 4; ++i) {
            if (!inst["bbox"][i].is_number()) fail_record(rec.id, "bbox entries must be numbers");
            b[i] = inst["bbox"][i].get<double>();
            if (!std::isfinite(b[i])) fail_record(rec.id, "non-finite bbox value");
        }
        if (!(b[2] > 0.0) || !(b[3] > 0.0)) fail_record(rec.id, "bbox width and height must be positive");
        if (b[0] < 0.0 || b[1] < 0.0) fail_record(rec.id, "bbox origin must be non-negative");
        if (b[0] + b[2] > width) fail_record(rec.id, "bbox exceeds image width");
        if (b[1] + b[3] > height) fail_record(rec.id, "bbox exceeds image height");
        out.bbox.x = b[0] / width;
        out.bbox.y = b[1] / height;
        // Division may round past the border; pull back inside the unit square.
        out.bbox.w = std::min(b[2] / width, 1.0 - out.bbox.x);
        out.bbox.h = std::min(b[3] / height, 1.0 - out.bbox.y);

        out.confidence = number_field(inst, "confidence", rec.id);
        if (!(out.confidence >= 0.0 && out.confidence <= 1.0))
            fail_record(rec.id, "confidence must lie in [0, 1]");
        if (!inst.contains("class") || !inst["class"].is_number_integer())
            fail_record(rec.id, "instance missing integer 'class'");
        out.cls = inst["class"].get<int>();
        if (out.cls < 0) fail_record(rec.id, "negative instance class");
        rec.instances.push_back(std::move(out));
    }
    return rec;
}

}  // namespace

Dataset load_dataset(const std::string& path, int num_classes) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::vector<RawRecord> raw;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            fail_line(path, line_no, e.what());
        }
        RawRecord rec = parse_record(obj, path, line_no);
        if (!seen_ids.insert(rec.id).second) fail_record(rec.id, "duplicate record id");
        for (int l : rec.label_ids) max_label = std::max(max_label, l);
        raw.push_back(std::move(rec));
    }
    if (raw.empty()) throw DataError("dataset file has no records: " + path);

    Dataset ds;
    ds.feature_dim = raw.front().instances.front().feature.extent(0);
    for (const RawRecord& rec : raw)
        for (const Instance& inst : rec.instances)
            if (inst.feature.extent(0) != ds.feature_dim)
                fail_record(rec.id, "feature extent " + std::to_string(inst.feature.extent(0)) +
                                        " differs from first record's " + std::to_string(ds.feature_dim));

    if (num_classes > 0) {
        ds.num_classes = num_classes;
        if (max_label >= num_classes)
            throw DataError("label index " + std::to_string(max_label) + " outside the declared " +
                            std::to_string(num_classes) + " classes");
    } else {
        if (max_label < 0) throw DataError("cannot infer class count: no record carries a label");
        ds.num_classes = max_label + 1;
    }

    ds.records.reserve(raw.size());
    for (RawRecord& rec : raw) {
        ImageRecord out;
        out.id = std::move(rec.id);
        out.instances = std::move(rec.instances);
        out.labels.assign(ds.num_classes, 0);
        for (int l : rec.label_ids) out.labels[l] = 1;
        ds.records.push_back(std::move(out));
    }
    return ds;
}

std::string serialize_dataset(const Dataset& dataset) {
    std::ostringstream os;
    for (const ImageRecord& rec : dataset.records) {
        os << "{\"id\":\"" << json_escape(rec.id) << "\",\"width\":1,\"height\":1,\"labels\":[";
        bool first = true;
        for (size_t j = 0; j < rec.labels.size(); ++j)
            if (rec.labels[j]) {
                if (!first) os << ',';
                os << j;
                first = false;
            }
        os << "],\"instances\":[";
        for (size_t i = 0; i < rec.instances.size(); ++i) {
            const Instance& inst = rec.instances[i];
            if (i) os << ',';
            os << "{\"feature\":[";
            for (int d = 0; d < inst.feature.extent(0); ++d) {
                if (d) os << ',';
                os << fmt_double(inst.feature.v[d]);
            }
            os << "],\"bbox\":[" << fmt_double(inst.bbox.x) << ',' << fmt_double(inst.bbox.y) << ','
               << fmt_double(inst.bbox.w) << ',' << fmt_double(inst.bbox.h) << "],\"confidence\":"
               << fmt_double(inst.confidence) << ",\"class\":" << inst.cls << '}';
        }
        os << "]}\n";
    }
    return os.str();
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << serialize_dataset(dataset);
    if (!out) throw DataError("failed writing dataset file: " + path);
}

LabelVocab load_embeddings(const std::string& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings file: " + path);

    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<double>> table;
    std::string line;
    size_t line_no = 0;
    int dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string name;
        if (!(ss >> name)) continue;
        std::vector<double> vec;
        std::string tok;
        while (ss >> tok) vec.push_back(parse_double(tok, "embeddings " + path + " line " + std::to_string(line_no)));
        if (vec.empty()) fail_line(path, line_no, "embedding line has no values");
        if (dim < 0) dim = int(vec.size());
        if (int(vec.size()) != dim)
            fail_line(path, line_no,
                      "embedding has " + std::to_string(vec.size()) + " values, expected " + std::to_string(dim));
        if (table.count(name))
            std::cerr << "warning: duplicate embedding for '" << name << "' (line " << line_no
                      << "); last occurrence wins\n";
        else
            order.push_back(name);
        table[name] = std::move(vec);
    }
    if (order.empty()) throw DataError("embeddings file has no entries: " + path);

    const std::vector<std::string>& want = names.empty() ? order : names;
    std::vector<std::string> missing;
    for (const std::string& n : want)
        if (!table.count(n)) missing.push_back(n);
    if (!missing.empty()) {
        std::string msg = "embeddings file " + path + " is missing:";
        for (const std::string& n : missing) msg += " " + n;
        throw DataError(msg);
    }

    LabelVocab vocab;
    vocab.names = want;
    vocab.embeddings = Tensor::zeros({int(want.size()), dim});
    for (size_t i = 0; i < want.size(); ++i) {
        const std::vector<double>& vec = table[want[i]];
        std::copy(vec.begin(), vec.end(), vocab.embeddings.v.begin() + ptrdiff_t(i) * dim);
    }
    vocab.validate();
    return vocab;
}

void save_embeddings(const LabelVocab& vocab, const std::string& path) {
    vocab.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embeddings file: " + path);
    for (int i = 0; i < vocab.num_classes(); ++i) {
        out << vocab.names[i];
        for (int d = 0; d < vocab.dim(); ++d) out << ' ' << fmt_double(vocab.embeddings.at2(i, d));
        out << '\n';
    }
    if (!out) throw DataError("failed writing embeddings file: " + path);
}

std::vector<double> label_frequencies(const Dataset& dataset) {
    if (dataset.records.empty()) throw DataError("label_frequencies: empty dataset");
    std::vector<double> r(dataset.num_classes, 0.0);
    for (const ImageRecord& rec : dataset.records)
        for (int j = 0; j < dataset.num_classes; ++j) r[j] += rec.labels[j] != 0;
    for (double& v : r) v /= double(dataset.records.size());
    return r;
}

void SynthConfig::validate() const {
    if (classes < 1) throw ConfigError("synth: classes must be positive");
    if (feature_dim < 1 || embed_dim < 1) throw ConfigError("synth: dimensions must be positive");
    if (train_images < 1 || test_images < 1) throw ConfigError("synth: image counts must be positive");
    if (min_instances < 1 || max_instances < min_instances)
        throw ConfigError("synth: need 1 <= min_instances <= max_instances");
    if (!(distractor_rate >= 0.0 && distractor_rate <= 1.0))
        throw ConfigError("synth: distractor_rate must lie in [0, 1]");
    if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise_sigma must be non-negative");
}

namespace {

// Draw until the candidate sits at least `min_sep` from every row already in
// `rows`; feature space is U[-1,1]^d so separation 1 is easy for desk sizes.
std::vector<double> separated_point(Rng& rng, int d, const std::vector<std::vector<double>>& rows, double min_sep) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> cand(d);
        for (double& v : cand) v = rng.uniform(-1.0, 1.0);
        bool ok = true;
        for (const auto& row : rows) {
            double dist2 = 0.0;
            for (int i = 0; i < d; ++i) dist2 += (cand[i] - row[i]) * (cand[i] - row[i]);
            if (dist2 < min_sep * min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) return cand;
    }
    throw ContractError("synth: could not separate class prototypes; feature_dim too small for this many classes");
}

Dataset make_split(const SynthConfig& cfg, const char* prefix, Rng& rng,
                   const std::vector<std::vector<double>>& protos, const std::vector<double>& junk,
                   const std::vector<std::pair<double, double>>& anchors, const std::vector<double>& rates,
                   int count) {
    Dataset ds;
    ds.feature_dim = cfg.feature_dim;
    ds.num_classes = cfg.classes;
    ds.records.reserve(count);

    auto noisy = [&](const std::vector<double>& base) {
        Tensor t({cfg.feature_dim});
        for (int i = 0; i < cfg.feature_dim; ++i) t.v[i] = base[i] + cfg.noise_sigma * rng.normal();
        return t;
    };
    auto place = [&](double cx, double cy) {
        BBox b;
        b.w = rng.uniform(0.04, 0.12);
        b.h = rng.uniform(0.04, 0.12);
        b.x = std::clamp(cx - b.w / 2.0, 0.0, 1.0 - b.w);
        b.y = std::clamp(cy - b.h / 2.0, 0.0, 1.0 - b.h);
        return b;
    };

    for (int n = 0; n < count; ++n) {
        ImageRecord rec;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s-%04d", prefix, n);
        rec.id = buf;

        std::vector<int> present;
        for (int attempt = 0; attempt < 1000 && present.empty(); ++attempt) {
            rec.labels.assign(cfg.classes, 0);
            for (int c = 0; c < cfg.classes; ++c)
                if (rng.next_double() < rates[c]) {
                    rec.labels[c] = 1;
                    present.push_back(c);
                }
        }
        if (present.empty()) throw ContractError("synth: failed to draw a non-empty label set");

        int target = rng.uniform_int(cfg.min_instances, cfg.max_instances);
        std::vector<int> classes_for_instances = present;
        while (int(classes_for_instances.size()) < target)
            classes_for_instances.push_back(present[size_t(rng.uniform_int(0, int(present.size()) - 1))]);

        for (int c : classes_for_instances) {
            Instance inst;
            inst.feature = noisy(protos[c]);
            inst.bbox = place(anchors[c].first + rng.uniform(-0.06, 0.06),
                              anchors[c].second + rng.uniform(-0.06, 0.06));
            inst.confidence = rng.uniform(0.5, 1.0);
            inst.cls = c;
            rec.instances.push_back(std::move(inst));

            if (rng.next_double() < cfg.distractor_rate) {
                Instance d;
                d.feature = noisy(junk);
                d.bbox = place(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
                d.confidence = rng.uniform(0.1, 0.6);
                d.cls = rng.uniform_int(0, cfg.classes - 1);
                rec.instances.push_back(std::move(d));
            }
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace

SynthOutput synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthOutput out;

    Rng proto_rng(substream_seed(cfg.seed, "synth.proto"));
    std::vector<std::vector<double>> protos;
    for (int c = 0; c < cfg.classes; ++c) protos.push_back(separated_point(proto_rng, cfg.feature_dim, protos, 1.0));
    std::vector<double> junk = separated_point(proto_rng, cfg.feature_dim, protos, 1.0);

    std::vector<std::pair<double, double>> anchors(cfg.classes);
    for (auto& a : anchors) a = {proto_rng.uniform(0.15, 0.85), proto_rng.uniform(0.15, 0.85)};

    std::vector<double> rates(cfg.classes);
    for (int c = 0; c < cfg.classes; ++c)
        rates[c] = cfg.classes == 1 ? 0.55 : 0.55 - 0.40 * double(c) / double(cfg.classes - 1);

    out.prototypes = Tensor::zeros({cfg.classes, cfg.feature_dim});
    for (int c = 0; c < cfg.classes; ++c)
        std::copy(protos[c].begin(), protos[c].end(), out.prototypes.v.begin() + ptrdiff_t(c) * cfg.feature_dim);
    out.junk = Tensor({cfg.feature_dim}, junk);

    Rng embed_rng(substream_seed(cfg.seed, "synth.embed"));
    out.vocab.embeddings = Tensor::zeros({cfg.classes, cfg.embed_dim});
    for (int c = 0; c < cfg.classes; ++c) {
        out.vocab.names.push_back("label" + std::to_string(c));
        double norm2 = 0.0;
        std::vector<double> e(cfg.embed_dim);
        do {
            norm2 = 0.0;
            for (double& v : e) {
                v = embed_rng.normal();
                norm2 += v * v;
            }
        } while (norm2 == 0.0);
        double inv = 1.0 / std::sqrt(norm2);
        for (int d = 0; d < cfg.embed_dim; ++d) out.vocab.embeddings.at2(c, d) = e[d] * inv;
    }
    out.vocab.validate();

    Rng train_rng(substream_seed(cfg.seed, "synth.train"));
    out.train = make_split(cfg, "train", train_rng, protos, junk, anchors, rates, cfg.train_images);
    Rng test_rng(substream_seed(cfg.seed, "synth.test"));
    out.test = make_split(cfg, "test", test_rng, protos, junk, anchors, rates, cfg.test_images);
    return out;
}

}  // namespace gmlc
