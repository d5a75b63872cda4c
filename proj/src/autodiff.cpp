#include "maelstrom/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maelstrom/error.hpp"

namespace maelstrom::ad {

Param::Param(std::string name_, Matrix value_, bool frozen_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(value.rows(), value.cols(), 0.0),
      frozen(frozen_) {}

const char* op_name(Op op) noexcept {
    switch (op) {
        case Op::input: return "input";
        case Op::parameter: return "parameter";
        case Op::affine: return "affine";
        case Op::tanh: return "tanh";
        case Op::relu: return "relu";
        case Op::add: return "add";
        case Op::concat: return "concat";
        case Op::detach: return "detach";
        case Op::mse_loss: return "mse_loss";
        case Op::softmax_xent: return "softmax_xent";
    }
    return "unknown";
}

const Graph::Entry& Graph::at(Node n) const {
    if (n.index >= nodes_.size()) throw UsageError("node does not belong to this graph");
    return nodes_[n.index];
}

Node Graph::push(Entry e) {
    e.grad.assign(e.value.size(), 0.0);
    nodes_.push_back(std::move(e));
    return Node{nodes_.size() - 1};
}

Node Graph::input(Vector value) {
    Entry e{.op = Op::input};
    e.value = std::move(value);
    return push(std::move(e));
}

Node Graph::parameter(Param& p) {
    Entry e{.op = Op::parameter, .weight = &p};
    e.value.assign(p.value.data().begin(), p.value.data().end());
    return push(std::move(e));
}

Node Graph::affine(Param& w, Param& b, Node x) {
    const Vector& xv = at(x).value;
    if (w.value.cols() != xv.size() || b.value.rows() != w.value.rows() || b.value.cols() != 1) {
        throw ShapeError("affine '" + w.name + "': weight " + std::to_string(w.value.rows()) + "x" +
                         std::to_string(w.value.cols()) + ", bias " +
                         std::to_string(b.value.rows()) + "x" + std::to_string(b.value.cols()) +
                         ", input " + std::to_string(xv.size()));
    }
    Entry e{.op = Op::affine, .lhs = x.index, .weight = &w, .bias = &b};
    e.value.assign(b.value.data().begin(), b.value.data().end());
    matvec_accumulate(w.value, xv, e.value);
    return push(std::move(e));
}

Node Graph::tanh(Node x) {
    Entry e{.op = Op::tanh, .lhs = x.index};
    e.value = at(x).value;
    for (double& v : e.value) v = std::tanh(v);
    return push(std::move(e));
}

Node Graph::relu(Node x) {
    Entry e{.op = Op::relu, .lhs = x.index};
    e.value = at(x).value;
    for (double& v : e.value) v = v > 0.0 ? v : 0.0;
    return push(std::move(e));
}

Node Graph::add(Node a, Node b) {
    const Vector& av = at(a).value;
    const Vector& bv = at(b).value;
    if (av.size() != bv.size()) throw ShapeError("add: operand lengths differ");
    Entry e{.op = Op::add, .lhs = a.index, .rhs = b.index};
    e.value.resize(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) e.value[i] = av[i] + bv[i];
    return push(std::move(e));
}

Node Graph::concat(Node a, Node b) {
    Entry e{.op = Op::concat, .lhs = a.index, .rhs = b.index};
    e.value = at(a).value;
    const Vector& bv = at(b).value;
    e.value.insert(e.value.end(), bv.begin(), bv.end());
    return push(std::move(e));
}

Node Graph::detach(Node x) {
    Entry e{.op = Op::detach, .lhs = x.index};
    e.value = at(x).value;
    return push(std::move(e));
}

Node Graph::mse_loss(Node pred, std::span<const double> target) {
    const Vector& pv = at(pred).value;
    if (pv.size() != target.size() || pv.empty()) throw ShapeError("mse_loss: target length mismatch");
    Entry e{.op = Op::mse_loss, .lhs = pred.index};
    e.aux.assign(target.begin(), target.end());
    double s = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double d = pv[i] - target[i];
        s += d * d;
    }
    e.value = {s / static_cast<double>(pv.size())};
    return push(std::move(e));
}

Node Graph::softmax_xent_loss(Node logits, std::size_t cls) {
    const Vector& z = at(logits).value;
    if (cls >= z.size()) {
        throw InputError("class index " + std::to_string(cls) + " out of range for " +
                         std::to_string(z.size()) + " logits");
    }
    Entry e{.op = Op::softmax_xent, .lhs = logits.index};
    const double zmax = *std::max_element(z.begin(), z.end());
    e.aux.resize(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        e.aux[i] = std::exp(z[i] - zmax);
        total += e.aux[i];
    }
    for (double& p : e.aux) p /= total;
    e.value = {-(z[cls] - zmax - std::log(total))};
    e.rhs = cls;
    return push(std::move(e));
}

double Graph::scalar(Node n) const {
    const Vector& v = at(n).value;
    if (v.size() != 1) throw UsageError("node is not scalar");
    return v[0];
}

void Graph::backward(Node loss) {
    if (at(loss).value.size() != 1) {
        throw UsageError("backward needs a scalar root, got " + std::to_string(at(loss).value.size()) +
                         " values");
    }
    for (Entry& e : nodes_) std::fill(e.grad.begin(), e.grad.end(), 0.0);
    nodes_[loss.index].grad[0] = 1.0;

    for (std::size_t idx = loss.index + 1; idx-- > 0;) {
        Entry& e = nodes_[idx];
        const Vector& g = e.grad;
        switch (e.op) {
            case Op::input:
            case Op::detach:
                break;
            case Op::parameter: {
                if (e.weight->frozen) break;
                auto acc = e.weight->grad.data();
                for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
                break;
            }
            case Op::affine: {
                Entry& x = nodes_[e.lhs];
                Param& w = *e.weight;
                Param& b = *e.bias;
                if (!w.frozen) {
                    for (std::size_t r = 0; r < w.value.rows(); ++r) {
                        if (g[r] == 0.0) continue;
                        auto grow = w.grad.row(r);
                        for (std::size_t c = 0; c < x.value.size(); ++c) grow[c] += g[r] * x.value[c];
                    }
                }
                if (!b.frozen) {
                    auto bg = b.grad.data();
                    for (std::size_t r = 0; r < g.size(); ++r) bg[r] += g[r];
                }
                const Vector gx = matvec_transposed(w.value, g);
                for (std::size_t c = 0; c < gx.size(); ++c) x.grad[c] += gx[c];
                break;
            }
            case Op::tanh: {
                Entry& x = nodes_[e.lhs];
                for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * (1.0 - e.value[i] * e.value[i]);
                break;
            }
            case Op::relu: {
                Entry& x = nodes_[e.lhs];
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (x.value[i] > 0.0) x.grad[i] += g[i];
                break;
            }
            case Op::add: {
                for (std::size_t i = 0; i < g.size(); ++i) nodes_[e.lhs].grad[i] += g[i];
                for (std::size_t i = 0; i < g.size(); ++i) nodes_[e.rhs].grad[i] += g[i];
                break;
            }
            case Op::concat: {
                Entry& a = nodes_[e.lhs];
                const std::size_t split = a.value.size();
                for (std::size_t i = 0; i < split; ++i) a.grad[i] += g[i];
                Entry& b = nodes_[e.rhs];
                for (std::size_t i = split; i < g.size(); ++i) b.grad[i - split] += g[i];
                break;
            }
            case Op::mse_loss: {
                Entry& p = nodes_[e.lhs];
                const double scale = 2.0 * g[0] / static_cast<double>(p.value.size());
                for (std::size_t i = 0; i < p.value.size(); ++i) p.grad[i] += scale * (p.value[i] - e.aux[i]);
                break;
            }
            case Op::softmax_xent: {
                Entry& z = nodes_[e.lhs];
                for (std::size_t i = 0; i < z.value.size(); ++i) {
                    const double onehot = i == e.rhs ? 1.0 : 0.0;
                    z.grad[i] += g[0] * (e.aux[i] - onehot);
                }
                break;
            }
        }
    }
}

double grad_check(const GraphBuilder& builder, std::span<Param* const> params, double eps) {
    for (Param* p : params) p->zero_grad();
    {
        Graph g;
        const Node loss = builder(g);
        g.backward(loss);
    }
    auto loss_at = [&]() {
        Graph g;
        const Node loss = builder(g);
        return g.scalar(loss);
    };

    double worst = 0.0;
    for (Param* p : params) {
        if (p->frozen) continue;
        auto values = p->value.data();
        const auto analytic = p->grad.data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + eps;
            const double up = loss_at();
            values[i] = original - eps;
            const double down = loss_at();
            values[i] = original;
            const double numeric = (up - down) / (2.0 * eps);
            const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
            worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace maelstrom::ad
