#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <utility>

#include "gmlc/error.hpp"
#include "gmlc/tensor.hpp"

namespace gmlc {

// One learnable tensor with its gradient and momentum buffer.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor momentum;

    Param(std::string n, Tensor v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(Tensor::zeros(value.shape)),
          momentum(Tensor::zeros(value.shape)) {}
};

// Ordered collection of uniquely named parameters. Iteration order is
// insertion order, which fixes the layout of checkpoints and
// finite-difference sweeps. Gradients follow an explicit lifecycle:
// zero_grad() -> backward populates them (marking them live) -> sgd_step
// consumes them; a second backward without zeroing is rejected.
class ParamStore {
  public:
    Param& create(const std::string& name, Tensor value) {
        if (index_.count(name)) throw ContractError("param store: duplicate name '" + name + "'");
        params_.emplace_back(name, std::move(value));
        index_.emplace(name, params_.size() - 1);
        return params_.back();
    }

    Param* find(const std::string& name) {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &params_[it->second];
    }
    const Param* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &params_[it->second];
    }

    Param& at(const std::string& name) {
        Param* p = find(name);
        if (!p) throw ContractError("param store: unknown name '" + name + "'");
        return *p;
    }
    const Param& at(const std::string& name) const {
        const Param* p = find(name);
        if (!p) throw ContractError("param store: unknown name '" + name + "'");
        return *p;
    }

    size_t size() const { return params_.size(); }
    bool empty() const { return params_.empty(); }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad() {
        for (Param& p : params_)
            for (double& g : p.grad.v) g = 0.0;
        grads_live_ = false;
    }

    bool grads_live() const { return grads_live_; }
    void mark_grads_live() { grads_live_ = true; }

    int64_t total_values() const {
        int64_t n = 0;
        for (const Param& p : params_) n += p.value.numel();
        return n;
    }

  private:
    std::deque<Param> params_;
    std::unordered_map<std::string, size_t> index_;
    bool grads_live_ = false;
};

}  // namespace gmlc
