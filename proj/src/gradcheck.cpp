#include "gmlc/gradcheck.hpp"

#include <cctype>
#include <cmath>
#include <unordered_map>

#include "gmlc/error.hpp"

namespace gmlc {

std::vector<Tensor> finite_difference_grad(ParamStore& store, const std::function<double()>& f, double eps) {
    if (!(eps > 0.0)) throw ContractError("finite_difference_grad: eps must be positive");
    std::vector<Tensor> out;
    out.reserve(store.size());
    for (Param& p : store) {
        Tensor g = Tensor::zeros(p.value.shape);
        for (size_t i = 0; i < p.value.v.size(); ++i) {
            double saved = p.value.v[i];
            p.value.v[i] = saved + eps;
            double hi = f();
            p.value.v[i] = saved - eps;
            double lo = f();
            p.value.v[i] = saved;
            if (!std::isfinite(hi) || !std::isfinite(lo))
                throw NumericError("finite_difference_grad: non-finite evaluation at '" + p.name + "'");
            g.v[i] = (hi - lo) / (2.0 * eps);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::string family_of(const std::string& param_name) {
    size_t dot = param_name.rfind('.');
    if (dot == std::string::npos || dot + 2 > param_name.size()) return param_name;
    char kind = param_name[dot + 1];
    if (kind != 'W' && kind != 'b') return param_name;
    for (size_t i = dot + 2; i < param_name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(param_name[i]))) return param_name;
    if (dot + 2 == param_name.size()) return param_name;  // bare ".W" is not a leaf suffix
    return param_name.substr(0, dot);
}

GradcheckReport compare_gradients(const ParamStore& store, const std::vector<Tensor>& reference,
                                  double rtol, double atol) {
    if (reference.size() != store.size())
        throw ContractError("compare_gradients: reference count differs from store size");
    if (!(rtol > 0.0)) throw ContractError("compare_gradients: rtol must be positive");
    GradcheckReport report;
    std::unordered_map<std::string, size_t> fam_index;
    double floor = atol / rtol;
    size_t idx = 0;
    for (const Param& p : store) {
        const Tensor& ref = reference[idx++];
        if (ref.shape != p.grad.shape)
            throw ContractError("compare_gradients: shape mismatch for '" + p.name + "'");
        std::string fam = family_of(p.name);
        auto [it, fresh] = fam_index.emplace(fam, report.families.size());
        if (fresh) report.families.push_back({fam, 0.0, "", 0});
        FamilyReport& fr = report.families[it->second];
        fr.values += ref.numel();
        for (size_t i = 0; i < ref.v.size(); ++i) {
            double a = p.grad.v[i], r = ref.v[i];
            double err = std::fabs(a - r) / (std::max(std::fabs(a), std::fabs(r)) + floor);
            if (err > fr.max_rel_err) {
                fr.max_rel_err = err;
                fr.worst_param = p.name;
            }
            if (err > report.max_rel_err) report.max_rel_err = err;
        }
    }
    return report;
}

}  // namespace gmlc
