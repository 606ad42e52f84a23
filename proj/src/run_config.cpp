#include "gmlc/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "gmlc/error.hpp"
#include "gmlc/format.hpp"

namespace gmlc {
namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long to_long(const std::string& key, const std::string& value) {
    try {
        return parse_long(value, key);
    } catch (const DataError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return parse_double(value, key);
    } catch (const DataError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::vector<int> to_widths(const std::string& key, const std::string& value) {
    std::vector<int> widths;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) widths.push_back(static_cast<int>(to_long(key, trim(part))));
    if (widths.empty()) throw ConfigError("config: " + key + ": expected a comma-separated width list");
    return widths;
}

std::string from_widths(const std::vector<int>& widths) {
    std::string s;
    for (size_t i = 0; i < widths.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(widths[i]);
    }
    return s;
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define STR_FIELD(member) \
    { [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; }, \
      [](const RunConfig& c) { return c.member; } }
#define INT_FIELD(member) \
    { [](RunConfig& c, const std::string& k, const std::string& v) { c.member = static_cast<int>(to_long(k, v)); }, \
      [](const RunConfig& c) { return std::to_string(c.member); } }
#define DBL_FIELD(member) \
    { [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
      [](const RunConfig& c) { return fmt_double(c.member); } }
#define WID_FIELD(member) \
    { [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_widths(k, v); }, \
      [](const RunConfig& c) { return from_widths(c.member); } }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"seed",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              c.seed = static_cast<uint64_t>(to_long(k, v));
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }}},
        {"out", STR_FIELD(out)},
        {"data", STR_FIELD(data)},
        {"embeddings", STR_FIELD(embeddings)},
        {"checkpoint", STR_FIELD(checkpoint)},
        {"synth.classes", INT_FIELD(synth.classes)},
        {"synth.feature_dim", INT_FIELD(synth.feature_dim)},
        {"synth.embed_dim", INT_FIELD(synth.embed_dim)},
        {"synth.train_images", INT_FIELD(synth.train_images)},
        {"synth.test_images", INT_FIELD(synth.test_images)},
        {"synth.min_instances", INT_FIELD(synth.min_instances)},
        {"synth.max_instances", INT_FIELD(synth.max_instances)},
        {"synth.distractor_rate", DBL_FIELD(synth.distractor_rate)},
        {"synth.noise_sigma", DBL_FIELD(synth.noise_sigma)},
        {"gnb.conv_widths", WID_FIELD(conv_widths)},
        {"train.epochs", INT_FIELD(train.epochs)},
        {"train.lr", DBL_FIELD(train.lr)},
        {"train.lr_decay", DBL_FIELD(train.lr_decay)},
        {"train.lr_period", INT_FIELD(train.lr_period)},
        {"train.momentum", DBL_FIELD(train.momentum)},
        {"train.weight_decay", DBL_FIELD(train.weight_decay)},
        {"train.beta", DBL_FIELD(train.beta)},
        {"train.top_m", INT_FIELD(train.top_m)},
        {"train.knn_k", INT_FIELD(train.knn_k)},
        {"train.grad_accum", INT_FIELD(train.grad_accum)},
        {"train.resume", STR_FIELD(resume)},
        {"train.val_data", STR_FIELD(val_data)},
        {"train.ckpt_every", INT_FIELD(ckpt_every)},
        {"eval.threshold", DBL_FIELD(threshold)},
        {"eval.topk", INT_FIELD(topk)},
        {"predict.id", STR_FIELD(predict_id)},
        {"gradcheck.widths", WID_FIELD(gradcheck_widths)},
    };
    return table;
}

#undef STR_FIELD
#undef INT_FIELD
#undef DBL_FIELD
#undef WID_FIELD

}  // namespace

void RunConfig::validate() const {
    synth.validate();
    TrainConfig t = train;
    t.seed = seed;
    t.validate();
    for (int w : conv_widths)
        if (w < 1) throw ConfigError("config: gnb.conv_widths: widths must be positive");
    for (int w : gradcheck_widths)
        if (w < 1) throw ConfigError("config: gradcheck.widths: widths must be positive");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("config: eval.threshold must lie in (0,1)");
    if (topk < 1) throw ConfigError("config: eval.topk must be at least 1");
    if (ckpt_every < 0) throw ConfigError("config: train.ckpt_every must be non-negative");
    if (out.empty()) throw ConfigError("config: out must not be empty");
}

void set_config_key(RunConfig& config, const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(config, key, value);
}

RunConfig resolve_run_config(const std::string& config_path, const std::vector<std::string>& overrides,
                             const std::optional<uint64_t>& seed, const std::string& out) {
    RunConfig config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("config: cannot open '" + config_path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError(config_path + ": line " + std::to_string(lineno) + ": expected key=value");
            set_config_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        }
    }
    for (const std::string& kv : overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("config: --set expects key=value, got '" + kv + "'");
        set_config_key(config, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed) config.seed = *seed;
    if (!out.empty()) config.out = out;
    config.synth.seed = config.seed;
    config.train.seed = config.seed;
    config.validate();
    return config;
}

std::string serialize_run_config(const RunConfig& config) {
    std::string text;
    for (const auto& [key, field] : fields()) text += key + "=" + field.get(config) + "\n";
    return text;
}

void write_resolved_config(const RunConfig& config, const std::string& command) {
    std::filesystem::create_directories(config.out);
    std::string path = config.out + "/" + command + ".resolved.cfg";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + path + "' for writing");
    file << serialize_run_config(config);
}

}  // namespace gmlc
