#include "maelstrom/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "maelstrom/error.hpp"

namespace maelstrom {

const char* to_string(OptimizerKind k) noexcept {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::sgd_momentum: return "sgd-momentum";
        case OptimizerKind::adam: return "adam";
    }
    return "sgd";
}

void TrainerConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("trainer.learning_rate must be >= 0");
    }
    if (update_every < 1) throw ConfigError("trainer.update_every must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("trainer.momentum must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("trainer.beta1/beta2 must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("trainer.epsilon must be > 0");
    if (gradient_clip && !(*gradient_clip > 0.0)) throw ConfigError("trainer.gradient_clip must be > 0");
}

Optimizer::Optimizer(TrainerConfig config) : config_(config) { config_.validate(); }

void Optimizer::apply(std::span<ad::Param* const> params) {
    double scale = 1.0;
    if (config_.gradient_clip) {
        double sq = 0.0;
        for (const ad::Param* p : params) {
            if (p->frozen) continue;
            for (double g : p->grad.data()) sq += g * g;
        }
        const double total = std::sqrt(sq);
        if (total > *config_.gradient_clip) scale = *config_.gradient_clip / total;
    }

    const double lr = config_.learning_rate;
    for (ad::Param* p : params) {
        if (p->frozen) continue;
        auto w = p->value.data();
        auto grad = p->grad.data();
        switch (config_.optimizer) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (scale * grad[i]);
                break;
            case OptimizerKind::sgd_momentum: {
                Slot& s = slots_[p->name];
                if (s.first.empty()) s.first.assign(w.size(), 0.0);
                for (std::size_t i = 0; i < w.size(); ++i) {
                    s.first[i] = config_.momentum * s.first[i] + scale * grad[i];
                    w[i] -= lr * s.first[i];
                }
                break;
            }
            case OptimizerKind::adam: {
                Slot& s = slots_[p->name];
                if (s.first.empty()) {
                    s.first.assign(w.size(), 0.0);
                    s.second.assign(w.size(), 0.0);
                }
                ++s.count;
                const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(s.count));
                const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(s.count));
                for (std::size_t i = 0; i < w.size(); ++i) {
                    const double g = scale * grad[i];
                    s.first[i] = config_.beta1 * s.first[i] + (1.0 - config_.beta1) * g;
                    s.second[i] = config_.beta2 * s.second[i] + (1.0 - config_.beta2) * g * g;
                    const double m_hat = s.first[i] / c1;
                    const double v_hat = s.second[i] / c2;
                    w[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
                }
                break;
            }
        }
        p->zero_grad();
    }
    ++updates_;
}

OnlineTrainer::OnlineTrainer(TrainerConfig config) : config_(config), optimizer_(config) {}

std::optional<ad::Node> OnlineTrainer::attach_loss(ad::Graph& g, ad::Node prediction, const Record& record) {
    if (record.label) return g.softmax_xent_loss(prediction, *record.label);
    if (!record.target.empty()) return g.mse_loss(prediction, record.target);
    return std::nullopt;
}

bool OnlineTrainer::learn(ad::Graph& g, ad::Node loss, std::span<ad::Param* const> params, std::size_t t) {
    if (t < config_.washout) return false;
    g.backward(loss);
    if ((t + 1) % config_.update_every != 0) return false;
    optimizer_.apply(params);
    return true;
}

StepRecord OnlineTrainer::online_step(Assembly& assembly, MaelstromState& state, const Record& record,
                                      std::size_t t) {
    ad::Graph g;
    ForwardResult fwd = assembly.step_forward(g, state, record.stimulus);
    StepRecord out;
    out.t = t;
    out.phase = record.phase;
    out.prediction = g.value(fwd.prediction);
    out.target = record.target;
    out.label = record.label;

    if (const auto loss = attach_loss(g, fwd.prediction, record)) {
        const double value = g.scalar(*loss);
        if (!std::isfinite(value)) {
            throw DivergedError(t, "non-finite loss at step " + std::to_string(t));
        }
        out.loss = value;
        if (record.phase == Phase::train) {
            const auto params = assembly.trainable_params();
            out.updated = learn(g, *loss, params, t);
        }
    }
    state = std::move(fwd.state);
    return out;
}

double nmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ShapeError("nmse: length mismatch");
    if (targets.size() < 2) throw MetricError("nmse needs at least two samples");
    double mean = 0.0;
    for (double y : targets) mean += y;
    mean /= static_cast<double>(targets.size());
    double var = 0.0;
    double mse = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        var += (targets[i] - mean) * (targets[i] - mean);
        mse += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
    }
    if (var == 0.0) throw MetricError("nmse is undefined for zero target variance");
    return mse / var;
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels) {
    if (predicted.size() != labels.size()) throw ShapeError("accuracy: length mismatch");
    if (labels.empty()) throw MetricError("accuracy needs at least one sample");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

namespace {

std::optional<double> metric_over(TaskKind kind, std::span<const StepRecord* const> rows) {
    if (kind == TaskKind::classification) {
        std::vector<std::size_t> pred;
        std::vector<std::size_t> truth;
        for (const StepRecord* r : rows) {
            if (!r->label) continue;
            pred.push_back(argmax(r->prediction));
            truth.push_back(*r->label);
        }
        if (truth.empty()) return std::nullopt;
        return accuracy(pred, truth);
    }
    std::vector<double> pred;
    std::vector<double> truth;
    for (const StepRecord* r : rows) {
        if (r->target.empty()) continue;
        pred.insert(pred.end(), r->prediction.begin(), r->prediction.end());
        truth.insert(truth.end(), r->target.begin(), r->target.end());
    }
    if (truth.size() < 2) return std::nullopt;
    return nmse(pred, truth);
}

}  // namespace

RunSummary summarize(const TaskStream& stream, std::span<const StepRecord> records,
                     std::size_t washout, std::size_t eval_washout) {
    RunSummary s;
    s.task_id = stream.task_id;
    s.seed = stream.seed;
    s.kind = stream.kind;
    s.metric = stream.kind == TaskKind::classification ? "accuracy" : "nmse";
    std::vector<const StepRecord*> train;
    std::vector<const StepRecord*> eval;
    std::size_t eval_index = 0;
    for (const StepRecord& r : records) {
        if (r.phase == Phase::train) {
            ++s.train_steps;
            if (r.t >= washout) train.push_back(&r);
        } else {
            ++s.eval_steps;
            if (eval_index++ >= eval_washout) eval.push_back(&r);
        }
    }
    s.train_metric = metric_over(stream.kind, train);
    s.eval_metric = metric_over(stream.kind, eval);
    return s;
}

RunResult run_online(const TrainerConfig& config, Assembly& assembly, const TaskStream& stream) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t t = 1; t < stream.size(); ++t) {
        if (stream.records[t - 1].phase == Phase::eval && stream.records[t].phase == Phase::train) {
            throw InputError("stream phases must be train-then-eval");
        }
    }
    OnlineTrainer trainer(config);
    RunResult result;
    result.records.reserve(stream.size());
    MaelstromState state = assembly.initial_state();
    bool in_eval = false;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const Record& rec = stream.records[t];
        if (rec.phase == Phase::eval && !in_eval) {
            in_eval = true;
            if (config.reset_state_before_eval) state = assembly.initial_state();
        }
        result.records.push_back(trainer.online_step(assembly, state, rec, t));
    }
    result.summary = summarize(stream, result.records, config.washout,
                               config.reset_state_before_eval ? config.washout : 0);
    result.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RidgeResult ridge_oracle(const MaelstromCore& core, const TaskStream& stream, double lambda,
                         std::size_t washout) {
    if (stream.stimulus_dim != core.input_dim()) {
        throw ConfigError("ridge_oracle needs a core whose drive dimension equals the stimulus dimension");
    }
    const std::size_t n = core.units();
    const std::size_t out_dim = stream.output_dim;
    const bool classify = stream.kind == TaskKind::classification;

    // states after consuming each stimulus, augmented with a constant 1
    std::vector<Vector> states;
    states.reserve(stream.size());
    MaelstromState state = MaelstromState::zero(n);
    for (const Record& r : stream.records) {
        state = step(core, state, r.stimulus);
        Vector aug = state.x;
        aug.push_back(1.0);
        states.push_back(std::move(aug));
    }

    auto target_row = [&](const Record& r) {
        Vector y(out_dim, 0.0);
        if (classify) {
            y[*r.label] = 1.0;
        } else {
            y = r.target;
        }
        return y;
    };

    std::vector<std::size_t> rows;
    for (std::size_t t = washout; t < stream.size(); ++t) {
        const Record& r = stream.records[t];
        if (r.phase == Phase::train && r.scored()) rows.push_back(t);
    }
    if (rows.empty()) throw ConfigError("ridge_oracle: no scored train records after washout");

    Matrix x(rows.size(), n + 1);
    Matrix y(rows.size(), out_dim);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::copy(states[rows[k]].begin(), states[rows[k]].end(), x.row(k).begin());
        const Vector yt = target_row(stream.records[rows[k]]);
        std::copy(yt.begin(), yt.end(), y.row(k).begin());
    }
    const Matrix coef = ridge_regression(x, y, lambda);  // (n+1) x out
    RidgeResult result;
    result.readout = coef.transposed();

    std::vector<StepRecord> records;
    records.reserve(stream.size());
    double residual = 0.0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const Record& r = stream.records[t];
        StepRecord sr;
        sr.t = t;
        sr.phase = r.phase;
        sr.prediction = matvec(result.readout, states[t]);
        sr.target = r.target;
        sr.label = r.label;
        result.predictions.push_back(sr.prediction);
        records.push_back(std::move(sr));
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Vector yt = target_row(stream.records[rows[k]]);
        const Vector& p = records[rows[k]].prediction;
        for (std::size_t j = 0; j < out_dim; ++j) residual = std::max(residual, std::abs(p[j] - yt[j]));
    }
    result.train_residual = residual;
    result.summary = summarize(stream, records, washout, 0);
    return result;
}

RunSummary memoryless_baseline(AssemblySpec spec, const TaskStream& stream, const TrainerConfig& config) {
    spec.memoryless = true;
    Assembly assembly(std::move(spec));
    return run_online(config, assembly, stream).summary;
}

}  // namespace maelstrom
