#pragma once

// Synthetic temporal benchmarks. Every generator is a pure function of its
// parameters and seed; records are never shuffled.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maelstrom/numerics.hpp"

namespace maelstrom {

enum class Phase { train, eval };
enum class TaskKind { regression, classification };

const char* to_string(Phase p) noexcept;
const char* to_string(TaskKind k) noexcept;

struct Record {
    Vector stimulus;
    /// Regression target; empty for classification.
    Vector target;
    /// Classification label; nullopt marks an ignored step.
    std::optional<std::size_t> label;
    Phase phase = Phase::train;

    bool scored() const noexcept { return !target.empty() || label.has_value(); }
    bool operator==(const Record&) const = default;
};

struct TaskStream {
    std::string task_id;
    TaskKind kind = TaskKind::regression;
    std::size_t stimulus_dim = 1;
    /// Target length for regression, class count for classification.
    std::size_t output_dim = 1;
    std::uint64_t seed = 0;
    /// Generator parameters in a fixed order.
    std::vector<std::pair<std::string, double>> metadata;
    std::vector<Record> records;

    std::size_t size() const noexcept { return records.size(); }
    std::size_t train_count() const noexcept;
    std::size_t eval_count() const noexcept { return size() - train_count(); }
    bool operator==(const TaskStream&) const = default;
};

/// 10000 train / 2000 eval.
inline constexpr std::size_t kDefaultTaskLength = 12000;
inline constexpr double kDefaultTrainFraction = 10000.0 / 12000.0;

/// Re-tags a contiguous prefix of round(train_frac * length) records as train
/// and the rest as eval. Record order and values are untouched.
TaskStream split(TaskStream stream, double train_frac);

/// y(t+1) = 0.3 y(t) + 0.05 y(t) sum_{i=0..9} y(t-i) + 1.5 u(t-9) u(t) + 0.1
/// with zero history; element t of the result is y(t+1).
std::vector<double> narma10_targets(std::span<const double> u);

/// u(t) ~ U[0, 0.5]; stimulus u(t), target y(t+1). A divergent draw (|y| > 10)
/// is replaced by a draw from the next sub-stream.
TaskStream gen_narma10(std::size_t length, std::uint64_t seed,
                       double train_frac = kDefaultTrainFraction);

/// Label at t is the bit at t - delay; the first `delay` steps are ignored.
TaskStream delayed_recall_from_bits(std::span<const int> bits, std::size_t delay);
TaskStream gen_delayed_recall(std::size_t length, std::size_t delay, std::uint64_t seed,
                              double train_frac = kDefaultTrainFraction);

/// Label at t is the XOR of bits t-window+1 .. t; the first window-1 steps are ignored.
TaskStream temporal_parity_from_bits(std::span<const int> bits, std::size_t window);
TaskStream gen_temporal_parity(std::size_t length, std::size_t window, std::uint64_t seed,
                               double train_frac = kDefaultTrainFraction);

/// Raw Mackey-Glass samples: Euler with step 0.1 from the given history
/// (tau/0.1 + 1 values, oldest first), one sample every 10 steps, the first
/// `transient` samples dropped.
std::vector<double> mackey_glass_series(std::size_t samples, double tau,
                                        std::span<const double> history,
                                        std::size_t transient = 1000);

/// History is 1.2 + U[-0.1, 0.1] per point. Series normalized to zero mean and
/// unit variance using the train-phase stimuli; target is the next sample.
TaskStream gen_mackey_glass(std::size_t length, double tau, std::uint64_t seed,
                            double train_frac = kDefaultTrainFraction);

}  // namespace maelstrom
