#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gmlc/param.hpp"

namespace gmlc {

// Central-difference gradient of a scalar function of the store's parameters.
// f is called with the store temporarily perturbed one coordinate at a time
// and must rebuild its computation from the current values on every call.
// Returns one tensor per parameter, in store order.
std::vector<Tensor> finite_difference_grad(ParamStore& store, const std::function<double()>& f, double eps);

// A family groups the weight/bias leaves of one function (the parameter name
// with its trailing .W<k>/.b<k> stripped), e.g. "enc.node_inst".
struct FamilyReport {
    std::string family;
    double max_rel_err = 0.0;
    std::string worst_param;
    int64_t values = 0;
};

struct GradcheckReport {
    std::vector<FamilyReport> families;  // store order
    double max_rel_err = 0.0;

    bool all_within(double tol) const { return max_rel_err <= tol; }
};

// Relative error between analytic (Param.grad) and reference gradients:
//   err = |a - r| / (max(|a|, |r|) + atol / rtol)
// so err <= rtol is the usual mixed absolute/relative acceptance test.
GradcheckReport compare_gradients(const ParamStore& store, const std::vector<Tensor>& reference,
                                  double rtol, double atol);

std::string family_of(const std::string& param_name);

}  // namespace gmlc
