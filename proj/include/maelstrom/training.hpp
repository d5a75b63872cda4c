#pragma once

// Strictly online training: one forward/backward per timestep, no unrolling,
// no access to future records. Plus the two reference baselines.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maelstrom/assembly.hpp"
#include "maelstrom/autodiff.hpp"
#include "maelstrom/tasks.hpp"

namespace maelstrom {

enum class OptimizerKind { sgd, sgd_momentum, adam };
const char* to_string(OptimizerKind k) noexcept;

struct TrainerConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    /// 0 is allowed and leaves every param untouched.
    double learning_rate = 3e-4;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t update_every = 1;
    std::size_t washout = 50;
    std::optional<double> gradient_clip = 5.0;
    bool reset_state_before_eval = false;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainerConfig&) const = default;
};

/// Applies accumulated gradients. Per-param state (velocity, Adam moments) is
/// keyed by param name, so params that are not passed in are never touched.
class Optimizer {
  public:
    explicit Optimizer(TrainerConfig config);

    /// Clips by global norm (if configured), updates every non-frozen param,
    /// then zeroes their gradients.
    void apply(std::span<ad::Param* const> params);

    std::size_t updates() const noexcept { return updates_; }

  private:
    struct Slot {
        Vector first;
        Vector second;
        std::uint64_t count = 0;
    };

    TrainerConfig config_;
    std::map<std::string, Slot> slots_;
    std::size_t updates_ = 0;
};

struct StepRecord {
    std::size_t t = 0;
    Phase phase = Phase::train;
    /// Absent on ignored steps.
    std::optional<double> loss;
    Vector prediction;
    Vector target;
    std::optional<std::size_t> label;
    bool updated = false;

    bool operator==(const StepRecord&) const = default;
};

struct RunSummary {
    std::string task_id;
    std::uint64_t seed = 0;
    TaskKind kind = TaskKind::regression;
    /// "nmse" or "accuracy".
    std::string metric;
    std::optional<double> train_metric;
    std::optional<double> eval_metric;
    std::size_t train_steps = 0;
    std::size_t eval_steps = 0;
    std::string config_digest;
    /// Not part of any serialized output.
    double wall_seconds = 0.0;
};

class OnlineTrainer {
  public:
    explicit OnlineTrainer(TrainerConfig config);

    const TrainerConfig& config() const noexcept { return config_; }

    /// Loss for one prediction: MSE against the regression target, softmax
    /// cross-entropy against the label. Returns nullopt for ignored steps.
    static std::optional<ad::Node> attach_loss(ad::Graph& g, ad::Node prediction, const Record& record);

    /// Backward into `params` when t >= washout; applies the optimizer once
    /// (t + 1) is a multiple of update_every. Returns whether an update ran.
    bool learn(ad::Graph& g, ad::Node loss, std::span<ad::Param* const> params, std::size_t t);

    /// One timestep on the assembly. `state` is advanced in place. Eval-phase
    /// records never trigger backward or updates.
    StepRecord online_step(Assembly& assembly, MaelstromState& state, const Record& record,
                           std::size_t t);

  private:
    TrainerConfig config_;
    Optimizer optimizer_;
};

struct RunResult {
    std::vector<StepRecord> records;
    RunSummary summary;
};

/// Single pass: train-phase records update the assembly, eval-phase records
/// run inference while the state keeps evolving (unless reset_state_before_eval).
RunResult run_online(const TrainerConfig& config, Assembly& assembly, const TaskStream& stream);

/// Summary metrics from a record list (post-washout train, all eval).
RunSummary summarize(const TaskStream& stream, std::span<const StepRecord> records,
                     std::size_t washout, std::size_t eval_washout);

/// Mean squared error over target variance (population variance over all entries).
double nmse(std::span<const double> predictions, std::span<const double> targets);
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels);
std::size_t argmax(std::span<const double> v);

struct RidgeResult {
    /// output_dim x (units + 1); last column multiplies the constant 1.
    Matrix readout;
    RunSummary summary;
    /// Predictions for every record (eval included), aligned with the stream.
    std::vector<Vector> predictions;
    double train_residual = 0.0;
};

/// Classic echo-state baseline: stimuli drive the bare core through W_drive,
/// post-washout train states (augmented with 1) are fit in closed form
/// W = Y X^T (X X^T + lambda I)^-1, and the fit is evaluated on the eval phase.
/// Classification streams regress one-hot labels and score the argmax.
RidgeResult ridge_oracle(const MaelstromCore& core, const TaskStream& stream, double lambda,
                         std::size_t washout);

/// Same nets and training with the maelstrom readout and feedback zeroed.
RunSummary memoryless_baseline(AssemblySpec spec, const TaskStream& stream, const TrainerConfig& config);

}  // namespace maelstrom
