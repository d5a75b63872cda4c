#pragma once

// Minimal reverse-mode differentiation over real vectors.
//
// A Graph is a tape built for one timestep and discarded afterwards. Nodes only
// reference earlier nodes, so the tape order is a topological order and
// backward() is a single reverse sweep. detach() is the gradient barrier: its
// forward value is a bitwise copy of its operand and it propagates nothing.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maelstrom/numerics.hpp"

namespace maelstrom::ad {

/// A named tensor with a gradient accumulator.
///
/// Frozen params are never written by backward() and never updated by an
/// optimizer; their accumulator stays at exactly zero.
struct Param {
    Param() = default;
    Param(std::string name, Matrix value, bool frozen = false);

    std::string name;
    Matrix value;
    Matrix grad;
    bool frozen = false;

    void zero_grad() { grad.fill(0.0); }
    std::size_t size() const noexcept { return value.size(); }
};

enum class Op { input, parameter, affine, tanh, relu, add, concat, detach, mse_loss, softmax_xent };

const char* op_name(Op op) noexcept;

/// Handle into a Graph.
struct Node {
    std::size_t index = 0;
};

class Graph {
  public:
    /// Constant leaf.
    Node input(Vector value);
    /// Leaf whose value is the flattened param; backward accumulates into it.
    Node parameter(Param& p);

    /// W x + b. W is (out x in), b is (out x 1).
    Node affine(Param& w, Param& b, Node x);
    Node tanh(Node x);
    Node relu(Node x);
    Node add(Node a, Node b);
    Node concat(Node a, Node b);
    Node detach(Node x);

    /// sum((pred - target)^2) / dim
    Node mse_loss(Node pred, std::span<const double> target);
    /// -log softmax(logits)[cls]
    Node softmax_xent_loss(Node logits, std::size_t cls);

    const Vector& value(Node n) const { return at(n).value; }
    /// Gradient of the last backward() root with respect to n.
    const Vector& grad(Node n) const { return at(n).grad; }
    Op op(Node n) const { return at(n).op; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Scalar value of a one-element node.
    double scalar(Node n) const;

    /// Accumulates d(loss)/d(param) into every reachable non-frozen Param.
    /// Throws UsageError unless loss holds exactly one value.
    void backward(Node loss);

  private:
    struct Entry {
        Op op;
        std::size_t lhs = 0;
        std::size_t rhs = 0;
        Param* weight = nullptr;
        Param* bias = nullptr;
        Vector value{};
        Vector grad{};
        Vector aux{};  // mse target or softmax probabilities
    };

    const Entry& at(Node n) const;
    Node push(Entry e);

    std::vector<Entry> nodes_;
};

/// Builds a fresh graph and returns its scalar loss node. Must be deterministic.
using GraphBuilder = std::function<Node(Graph&)>;

/// Central differences at eps = 1e-5 carry ~1e-11 roundoff on O(1) losses, so
/// smaller gradients are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-6;

/// Largest relative disagreement between reverse-mode gradients and central
/// differences over every coordinate of every non-frozen param; the
/// denominator is max(|analytic|, |numeric|, kGradCheckFloor). Leaves param
/// values unchanged and param accumulators holding the analytic gradient.
double grad_check(const GraphBuilder& builder, std::span<Param* const> params, double eps = 1e-5);

}  // namespace maelstrom::ad
