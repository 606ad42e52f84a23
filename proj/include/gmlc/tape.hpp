#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gmlc/param.hpp"
#include "gmlc/tensor.hpp"

namespace gmlc {

// Recorded-operation reverse-mode gradient engine over a fixed vocabulary of
// eleven operations. No broadcasting: shapes must match exactly where required,
// and set reshaping happens only through explicit concat/slice. The tape is a
// DAG in topological order (inputs always have smaller ids than consumers);
// backward() walks it once in reverse.
enum class Op : uint8_t {
    Leaf,
    Matmul,     // (m x n) matrix times (n) vector -> (m)
    Add,        // elementwise, equal shapes
    Concat,     // rank-1 inputs -> one rank-1 output
    Slice,      // rank-1 contiguous range [begin, end)
    Relu,
    Sigmoid,
    Log,
    Mul,        // elementwise (Hadamard), equal shapes
    MeanSet,    // elementwise mean over n equal-shape inputs
    MaxSet,     // elementwise max over n equal-shape inputs; first input wins ties
    ScalarSum,  // sum of all elements -> shape {1}
};

struct TapeNode {
    Op op = Op::Leaf;
    Tensor value;
    std::vector<int> inputs;
    Param* param = nullptr;       // set when this leaf mirrors a learnable parameter
    int slice_begin = 0;          // Slice only
    std::vector<int> winner;      // MaxSet only: winning input index per element
};

class Tape {
  public:
    int leaf(Tensor value);
    int param(Param& p);  // re-pushing the same Param returns the existing leaf

    int matmul(int a, int x);
    int add(int a, int b);
    int concat(const std::vector<int>& parts);
    int slice(int a, int begin, int end);
    int relu(int a);
    int sigmoid(int a);
    int log(int a);
    int mul(int a, int b);
    int mean_over_set(const std::vector<int>& parts);
    int max_over_set(const std::vector<int>& parts);
    int scalar_sum(int a);

    const Tensor& value(int id) const { return nodes_[check_id(id)].value; }
    size_t size() const { return nodes_.size(); }
    const TapeNode& node(int id) const { return nodes_[check_id(id)]; }
    bool backward_done() const { return backward_done_; }

    friend void backward(Tape& tape, int loss_id, ParamStore& store);

  private:
    int push(TapeNode n);
    size_t check_id(int id) const;
    const Tensor& in(int id) const { return nodes_[check_id(id)].value; }

    std::vector<TapeNode> nodes_;
    std::unordered_map<Param*, int> param_ids_;
    bool backward_done_ = false;
};

// Accumulates d(loss)/d(param) into every parameter leaf's grad and marks the
// store's gradients live. The loss node must be scalar. Running twice without
// an intervening zero_grad() is rejected: silent accumulation hides bugs.
void backward(Tape& tape, int loss_id, ParamStore& store);

}  // namespace gmlc
