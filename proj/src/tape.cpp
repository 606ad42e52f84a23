#include "gmlc/tape.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "gmlc/error.hpp"

namespace gmlc {

namespace {

std::string shape_pair(const Tensor& a, const Tensor& b) {
    return a.shape_str() + " vs " + b.shape_str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    return std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0;
}

}  // namespace

size_t Tape::check_id(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
        throw ContractError("tape: node id " + std::to_string(id) + " out of range");
    return static_cast<size_t>(id);
}

int Tape::push(TapeNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
}

int Tape::leaf(Tensor value) {
    TapeNode n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

int Tape::param(Param& p) {
    auto it = param_ids_.find(&p);
    if (it != param_ids_.end()) return it->second;
    TapeNode n;
    n.op = Op::Leaf;
    n.value = p.value;
    n.param = &p;
    int id = push(std::move(n));
    param_ids_.emplace(&p, id);
    return id;
}

int Tape::matmul(int a, int x) {
    const Tensor& m = in(a);
    const Tensor& v = in(x);
    if (m.ndim() != 2 || v.ndim() != 1)
        throw ShapeError("matmul: need matrix and vector, got " + shape_pair(m, v));
    if (m.extent(1) != v.extent(0))
        throw ShapeError("matmul: inner extents differ, " + shape_pair(m, v));
    int rows = m.extent(0), cols = m.extent(1);
    TapeNode n;
    n.op = Op::Matmul;
    n.inputs = {a, x};
    n.value = Tensor({rows});
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* mr = m.v.data() + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += mr[c] * v.v[static_cast<size_t>(c)];
        n.value[r] = acc;
    }
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    const Tensor& ta = in(a);
    const Tensor& tb = in(b);
    if (!ta.same_shape(tb)) throw ShapeError("add: shapes differ, " + shape_pair(ta, tb));
    TapeNode n;
    n.op = Op::Add;
    n.inputs = {a, b};
    n.value = ta;
    for (size_t i = 0; i < n.value.v.size(); ++i) n.value.v[i] += tb.v[i];
    return push(std::move(n));
}

int Tape::concat(const std::vector<int>& parts) {
    if (parts.empty()) throw ContractError("concat: empty input set");
    int total = 0;
    for (int id : parts) {
        const Tensor& t = in(id);
        if (t.ndim() != 1) throw ShapeError("concat: rank-1 inputs only, got " + t.shape_str());
        total += t.extent(0);
    }
    TapeNode n;
    n.op = Op::Concat;
    n.inputs = parts;
    n.value = Tensor({total});
    int off = 0;
    for (int id : parts) {
        const Tensor& t = in(id);
        std::memcpy(n.value.v.data() + off, t.v.data(), t.v.size() * sizeof(double));
        off += t.extent(0);
    }
    return push(std::move(n));
}

int Tape::slice(int a, int begin, int end) {
    const Tensor& t = in(a);
    if (t.ndim() != 1) throw ShapeError("slice: rank-1 input only, got " + t.shape_str());
    if (begin < 0 || end <= begin || end > t.extent(0))
        throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for extent " + std::to_string(t.extent(0)));
    TapeNode n;
    n.op = Op::Slice;
    n.inputs = {a};
    n.slice_begin = begin;
    n.value = Tensor({end - begin});
    std::memcpy(n.value.v.data(), t.v.data() + begin, static_cast<size_t>(end - begin) * sizeof(double));
    return push(std::move(n));
}

int Tape::relu(int a) {
    TapeNode n;
    n.op = Op::Relu;
    n.inputs = {a};
    n.value = in(a);
    for (double& x : n.value.v) x = x > 0.0 ? x : 0.0;
    return push(std::move(n));
}

int Tape::sigmoid(int a) {
    TapeNode n;
    n.op = Op::Sigmoid;
    n.inputs = {a};
    n.value = in(a);
    for (double& x : n.value.v) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(n));
}

int Tape::log(int a) {
    TapeNode n;
    n.op = Op::Log;
    n.inputs = {a};
    n.value = in(a);
    for (double& x : n.value.v) x = std::log(x);
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    const Tensor& ta = in(a);
    const Tensor& tb = in(b);
    if (!ta.same_shape(tb)) throw ShapeError("mul: shapes differ, " + shape_pair(ta, tb));
    TapeNode n;
    n.op = Op::Mul;
    n.inputs = {a, b};
    n.value = ta;
    for (size_t i = 0; i < n.value.v.size(); ++i) n.value.v[i] *= tb.v[i];
    return push(std::move(n));
}

int Tape::mean_over_set(const std::vector<int>& parts) {
    if (parts.empty()) throw ContractError("mean_over_set: empty input set");
    const Tensor& first = in(parts[0]);
    for (int id : parts)
        if (!in(id).same_shape(first))
            throw ShapeError("mean_over_set: shapes differ, " + shape_pair(first, in(id)));
    TapeNode n;
    n.op = Op::MeanSet;
    n.inputs = parts;
    // The mean of identical inputs must reproduce them bit-for-bit, which
    // sum-then-divide cannot promise; short-circuit that case.
    bool all_same = true;
    for (size_t k = 1; k < parts.size() && all_same; ++k)
        all_same = bitwise_equal(in(parts[k]), first);
    if (all_same) {
        n.value = first;
    } else {
        n.value = Tensor::zeros(first.shape);
        for (int id : parts) {
            const Tensor& t = in(id);
            for (size_t i = 0; i < n.value.v.size(); ++i) n.value.v[i] += t.v[i];
        }
        double inv = 1.0 / static_cast<double>(parts.size());
        for (double& x : n.value.v) x *= inv;
    }
    return push(std::move(n));
}

int Tape::max_over_set(const std::vector<int>& parts) {
    if (parts.empty()) throw ContractError("max_over_set: empty input set");
    const Tensor& first = in(parts[0]);
    for (int id : parts)
        if (!in(id).same_shape(first))
            throw ShapeError("max_over_set: shapes differ, " + shape_pair(first, in(id)));
    TapeNode n;
    n.op = Op::MaxSet;
    n.inputs = parts;
    n.value = first;
    n.winner.assign(first.v.size(), 0);
    for (size_t k = 1; k < parts.size(); ++k) {
        const Tensor& t = in(parts[k]);
        for (size_t i = 0; i < n.value.v.size(); ++i) {
            if (t.v[i] > n.value.v[i]) {  // strict: earliest input keeps ties
                n.value.v[i] = t.v[i];
                n.winner[i] = static_cast<int>(k);
            }
        }
    }
    return push(std::move(n));
}

int Tape::scalar_sum(int a) {
    TapeNode n;
    n.op = Op::ScalarSum;
    n.inputs = {a};
    double acc = 0.0;
    for (double x : in(a).v) acc += x;
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

void backward(Tape& tape, int loss_id, ParamStore& store) {
    size_t loss = tape.check_id(loss_id);
    if (tape.nodes_[loss].value.numel() != 1)
        throw ContractError("backward: loss node must be scalar, got " + tape.nodes_[loss].value.shape_str());
    if (tape.backward_done_)
        throw ContractError("backward: tape already differentiated");
    if (store.grads_live())
        throw ContractError("backward: gradients already live; zero_grad() first");

    std::vector<Tensor> adj(loss + 1);
    for (size_t i = 0; i <= loss; ++i) adj[i] = Tensor::zeros(tape.nodes_[i].value.shape);
    adj[loss].v[0] = 1.0;

    for (size_t idx = loss + 1; idx-- > 0;) {
        const TapeNode& n = tape.nodes_[idx];
        const Tensor& g = adj[idx];
        switch (n.op) {
            case Op::Leaf:
                if (n.param) {
                    Tensor& pg = n.param->grad;
                    for (size_t i = 0; i < pg.v.size(); ++i) pg.v[i] += g.v[i];
                }
                break;
            case Op::Matmul: {
                const Tensor& m = tape.nodes_[static_cast<size_t>(n.inputs[0])].value;
                const Tensor& x = tape.nodes_[static_cast<size_t>(n.inputs[1])].value;
                Tensor& gm = adj[static_cast<size_t>(n.inputs[0])];
                Tensor& gx = adj[static_cast<size_t>(n.inputs[1])];
                int rows = m.extent(0), cols = m.extent(1);
                for (int r = 0; r < rows; ++r) {
                    double gr = g.v[static_cast<size_t>(r)];
                    if (gr == 0.0) continue;
                    size_t base = static_cast<size_t>(r) * cols;
                    for (int c = 0; c < cols; ++c) {
                        gm.v[base + c] += gr * x.v[static_cast<size_t>(c)];
                        gx.v[static_cast<size_t>(c)] += gr * m.v[base + c];
                    }
                }
                break;
            }
            case Op::Add: {
                for (int k = 0; k < 2; ++k) {
                    Tensor& gi = adj[static_cast<size_t>(n.inputs[static_cast<size_t>(k)])];
                    for (size_t i = 0; i < g.v.size(); ++i) gi.v[i] += g.v[i];
                }
                break;
            }
            case Op::Concat: {
                size_t off = 0;
                for (int id : n.inputs) {
                    Tensor& gi = adj[static_cast<size_t>(id)];
                    for (size_t i = 0; i < gi.v.size(); ++i) gi.v[i] += g.v[off + i];
                    off += gi.v.size();
                }
                break;
            }
            case Op::Slice: {
                Tensor& gi = adj[static_cast<size_t>(n.inputs[0])];
                for (size_t i = 0; i < g.v.size(); ++i) gi.v[static_cast<size_t>(n.slice_begin) + i] += g.v[i];
                break;
            }
            case Op::Relu: {
                const Tensor& x = tape.nodes_[static_cast<size_t>(n.inputs[0])].value;
                Tensor& gi = adj[static_cast<size_t>(n.inputs[0])];
                for (size_t i = 0; i < g.v.size(); ++i)
                    if (x.v[i] > 0.0) gi.v[i] += g.v[i];
                break;
            }
            case Op::Sigmoid: {
                Tensor& gi = adj[static_cast<size_t>(n.inputs[0])];
                for (size_t i = 0; i < g.v.size(); ++i) {
                    double s = n.value.v[i];
                    gi.v[i] += g.v[i] * s * (1.0 - s);
                }
                break;
            }
            case Op::Log: {
                const Tensor& x = tape.nodes_[static_cast<size_t>(n.inputs[0])].value;
                Tensor& gi = adj[static_cast<size_t>(n.inputs[0])];
                for (size_t i = 0; i < g.v.size(); ++i) gi.v[i] += g.v[i] / x.v[i];
                break;
            }
            case Op::Mul: {
                const Tensor& a = tape.nodes_[static_cast<size_t>(n.inputs[0])].value;
                const Tensor& b = tape.nodes_[static_cast<size_t>(n.inputs[1])].value;
                Tensor& ga = adj[static_cast<size_t>(n.inputs[0])];
                Tensor& gb = adj[static_cast<size_t>(n.inputs[1])];
                for (size_t i = 0; i < g.v.size(); ++i) {
                    ga.v[i] += g.v[i] * b.v[i];
                    gb.v[i] += g.v[i] * a.v[i];
                }
                break;
            }
            case Op::MeanSet: {
                double inv = 1.0 / static_cast<double>(n.inputs.size());
                for (int id : n.inputs) {
                    Tensor& gi = adj[static_cast<size_t>(id)];
                    for (size_t i = 0; i < g.v.size(); ++i) gi.v[i] += g.v[i] * inv;
                }
                break;
            }
            case Op::MaxSet: {
                for (size_t i = 0; i < g.v.size(); ++i) {
                    Tensor& gi = adj[static_cast<size_t>(n.inputs[static_cast<size_t>(n.winner[i])])];
                    gi.v[i] += g.v[i];
                }
                break;
            }
            case Op::ScalarSum: {
                Tensor& gi = adj[static_cast<size_t>(n.inputs[0])];
                double gs = g.v[0];
                for (double& x : gi.v) x += gs;
                break;
            }
        }
    }
    tape.backward_done_ = true;
    store.mark_grads_live();
}

}  // namespace gmlc
