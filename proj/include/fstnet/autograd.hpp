#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fstnet/tensor.hpp"

namespace fstnet {

template <typename T>
class NodeT;
template <typename T>
using VarT = std::shared_ptr<NodeT<T>>;
using Var = VarT<float>;

// One value in the reverse-mode graph. Op nodes are created per forward pass
// and freed with the last Var referencing them; parameters are long-lived
// nodes whose grad accumulates across backward passes until an optimizer
// step clears it.
template <typename T>
class NodeT {
  public:
    TensorT<T> value;
    std::vector<T> grad;  // same length as value.data once touched
    std::string name;     // nonempty for parameters
    std::vector<VarT<T>> parents;
    std::function<void(NodeT<T>&)> backward_fn;

    explicit NodeT(TensorT<T> v) : value(std::move(v)) {}

    std::vector<T>& ensure_grad() {
        if (grad.size() != value.numel()) grad.assign(value.numel(), T(0));
        return grad;
    }
    void zero_grad() { grad.assign(value.numel(), T(0)); }
};

template <typename T>
VarT<T> make_var(TensorT<T> v) {
    return std::make_shared<NodeT<T>>(std::move(v));
}

template <typename T>
VarT<T> make_param(TensorT<T> v, std::string name) {
    auto n = make_var(std::move(v));
    n->name = std::move(name);
    n->ensure_grad();
    return n;
}

// Reverse sweep from a scalar root; grads accumulate into every reachable
// node (inputs included), so callers can read input sensitivities directly.
template <typename T>
void backward(const VarT<T>& root) {
    require(root != nullptr && root->value.numel() == 1, "backward: root must be a scalar node");

    std::vector<NodeT<T>*> order;  // parents before children
    std::unordered_set<NodeT<T>*> seen;
    std::vector<std::pair<NodeT<T>*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        NodeT<T>* node = stack.back().first;
        const std::size_t i = stack.back().second;
        if (i < node->parents.size()) {
            ++stack.back().second;
            NodeT<T>* p = node->parents[i].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
    }
}

}  // namespace fstnet
