#include "gmlc/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "gmlc/error.hpp"
#include "gmlc/format.hpp"

namespace gmlc {

namespace {

constexpr const char* kMagic = "gmlc-checkpoint v1";

bool has_space(const std::string& s) {
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
    return false;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    out << kMagic << "\n";
    for (const auto& [k, v] : meta) {
        if (k.empty() || has_space(k) || has_space(v))
            throw ContractError("checkpoint: meta entries must be non-empty and whitespace-free");
        out << "meta " << k << " " << v << "\n";
    }
    for (const Param& p : store) {
        out << "tensor " << p.name << " " << p.value.ndim();
        for (int e : p.value.shape) out << " " << e;
        out << "\n";
        for (size_t i = 0; i < p.value.v.size(); ++i) {
            out << fmt_hex(p.value.v[i]);
            out << ((i % 4 == 3 || i + 1 == p.value.v.size()) ? "\n" : " ");
        }
    }
    out << "end\n";
    if (!out) throw DataError("checkpoint: write failed for '" + path + "'");
}

std::map<std::string, std::string> load_checkpoint(const std::string& path, ParamStore& store) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw DataError("checkpoint '" + path + "': bad header");

    std::map<std::string, std::string> meta;
    std::set<std::string> filled;
    bool saw_end = false;
    std::string word;
    while (in >> word) {
        if (word == "end") {
            saw_end = true;
            break;
        }
        if (word == "meta") {
            std::string k, v;
            if (!(in >> k >> v)) throw DataError("checkpoint '" + path + "': truncated meta line");
            meta[k] = v;
        } else if (word == "tensor") {
            std::string name;
            int rank = 0;
            if (!(in >> name >> rank) || rank < 1)
                throw DataError("checkpoint '" + path + "': bad tensor header");
            std::vector<int> shape(static_cast<size_t>(rank));
            for (int& e : shape)
                if (!(in >> e)) throw DataError("checkpoint '" + path + "': truncated shape for '" + name + "'");
            Param* p = store.find(name);
            if (!p) throw DataError("checkpoint '" + path + "': unknown parameter '" + name + "'");
            if (p->value.shape != shape)
                throw DataError("checkpoint '" + path + "': shape mismatch for '" + name + "'");
            for (double& x : p->value.v) {
                std::string tok;
                if (!(in >> tok)) throw DataError("checkpoint '" + path + "': truncated values for '" + name + "'");
                x = parse_double(tok, "checkpoint value of '" + name + "'");
            }
            if (!filled.insert(name).second)
                throw DataError("checkpoint '" + path + "': duplicate tensor '" + name + "'");
        } else {
            throw DataError("checkpoint '" + path + "': unexpected token '" + word + "'");
        }
    }
    if (!saw_end) throw DataError("checkpoint '" + path + "': missing end marker (truncated?)");
    if (filled.size() != store.size()) {
        std::ostringstream missing;
        for (const Param& p : store)
            if (!filled.count(p.name)) missing << " " << p.name;
        throw DataError("checkpoint '" + path + "': missing tensors:" + missing.str());
    }
    return meta;
}

}  // namespace gmlc
