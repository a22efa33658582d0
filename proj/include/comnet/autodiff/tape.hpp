#pragma once

#include "../core/array.hpp"

#include <functional>
#include <vector>

namespace comnet::ad {

class Tape;

// Handle to a node on a Tape.
struct Var
{
  int id = -1;
};

// Values are flat double arrays. Complex nodes store interleaved (re, im)
// pairs, so their gradient slot holds dL/dre + i dL/dim, and for a
// complex-linear map y = L z the pullback is simply L^H applied to that
// complex gradient.
struct Node
{
  std::vector<Index> dims;
  bool complex = false;
  bool requires_grad = false;
  std::vector<double> value;
  std::vector<double> grad; // empty until something flows into it
  std::vector<int> parents;
  std::function<void(Tape &, int)> backward;
};

class Tape
{
public:
  Var leaf(std::vector<double> value, std::vector<Index> dims, bool complex, bool requires_grad)
  {
    Node n;
    n.dims = std::move(dims);
    n.complex = complex;
    n.requires_grad = requires_grad;
    n.value = std::move(value);
    check_size(n);
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  Var constant(std::vector<double> value, std::vector<Index> dims, bool complex)
  {
    return leaf(std::move(value), std::move(dims), complex, false);
  }

  // Appends an operation node. `backward` is dropped when no parent needs a
  // gradient.
  Var record(std::vector<double> value, std::vector<Index> dims, bool complex, std::vector<int> parents,
             std::function<void(Tape &, int)> backward)
  {
    int const id = static_cast<int>(nodes_.size());
    bool needs = false;
    for (int p : parents) {
      if (p < 0 || p >= id) {
        throw InternalError("Tape: node " + std::to_string(id) + " refers to parent " + std::to_string(p) +
                            " that is not recorded before it (cycle)");
      }
      needs = needs || nodes_[static_cast<std::size_t>(p)].requires_grad;
    }
    Node n;
    n.dims = std::move(dims);
    n.complex = complex;
    n.requires_grad = needs;
    n.value = std::move(value);
    n.parents = std::move(parents);
    if (needs) {
      n.backward = std::move(backward);
    }
    check_size(n);
    nodes_.push_back(std::move(n));
    return {id};
  }

  Node &node(Var v) { return nodes_.at(static_cast<std::size_t>(v.id)); }
  Node const &node(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }
  Node &node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }

  std::vector<double> const &value(Var v) const { return node(v).value; }

  // Gradient slot of node id, zero-initialized on first use.
  std::vector<double> &grad_slot(int id)
  {
    Node &n = node(id);
    if (n.grad.empty()) {
      n.grad.assign(n.value.size(), 0.0);
    }
    return n.grad;
  }

  bool wants_grad(int id) const { return nodes_.at(static_cast<std::size_t>(id)).requires_grad; }

  // Gradient of a parameter after backward(); zeros when nothing reached it.
  std::vector<double> grad(Var v) const
  {
    Node const &n = node(v);
    return n.grad.empty() ? std::vector<double>(n.value.size(), 0.0) : n.grad;
  }

  // Reverse sweep from a scalar node. Insertion order is a topological order,
  // so a single backwards pass suffices.
  void backward(Var loss)
  {
    Node &l = node(loss);
    if (l.value.size() != 1 || l.complex) {
      throw InvalidArgument("Tape::backward: loss must be a real scalar");
    }
    grad_slot(loss.id)[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
      Node &n = nodes_[static_cast<std::size_t>(id)];
      if (n.grad.empty() || !n.backward) {
        continue;
      }
      n.backward(*this, id);
    }
  }

  std::size_t size() const { return nodes_.size(); }

private:
  static void check_size(Node const &n)
  {
    std::size_t count = n.complex ? 2 : 1;
    for (Index d : n.dims) {
      count *= static_cast<std::size_t>(d);
    }
    if (count != n.value.size()) {
      throw InternalError("Tape: value size does not match declared shape");
    }
  }

  std::vector<Node> nodes_;
};

inline Cx *as_complex(std::vector<double> &v) { return reinterpret_cast<Cx *>(v.data()); }
inline Cx const *as_complex(std::vector<double> const &v) { return reinterpret_cast<Cx const *>(v.data()); }

} // namespace comnet::ad
