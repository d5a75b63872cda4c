#pragma once

// Experiment configuration files (strict JSON; see docs/config.md).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maelstrom/analyze.hpp"
#include "maelstrom/assembly.hpp"
#include "maelstrom/spec_json.hpp"
#include "maelstrom/tasks.hpp"
#include "maelstrom/training.hpp"

namespace maelstrom {

enum class Mode { full, esn_ablation, memoryless };
const char* to_string(Mode m) noexcept;
Mode mode_from_string(const std::string& s);

struct TaskConfig {
    std::string id;
    std::size_t length = kDefaultTaskLength;
    double train_fraction = kDefaultTrainFraction;
    std::size_t delay = 3;
    std::size_t window = 3;
    double tau = 17.0;
};

/// Generates the configured task for one seed.
TaskStream make_task(const TaskConfig& task, std::uint64_t seed);

struct AnalysisConfig {
    std::size_t seq_len = 6000;
    std::size_t d_max = 0;
    double lambda = 1e-6;
    std::vector<double> spectral_radii = {0.5, 0.9, 1.2, 1.5};
    std::size_t divergence_steps = 1000;
    double perturbation = 1e-8;
    double drive_amplitude = 1.0;
    /// Ridge penalty for the closed-form baseline emitted by `compare`.
    double ridge_lambda = 1e-6;
};

struct ExperimentConfig {
    TaskConfig task;
    /// Template; input_dim is forced to assembly.interface_in_dim. Feedback
    /// is off by default: W_fb x has magnitude ~sqrt(N/3) and destabilizes the
    /// online fit; set feedback_dim to enable it.
    MaelstromConfig maelstrom;
    /// Template; stimulus_dim, head.output_dim, head.kind come from the task.
    AssemblySpec assembly;
    TrainerConfig trainer;
    AnalysisConfig analysis;
    std::vector<std::uint64_t> seeds;
    std::string output;
    Mode mode = Mode::full;

    /// Fully resolved assembly spec for one run.
    AssemblySpec assembly_for(std::uint64_t seed, Mode mode, const TaskStream& stream) const;
    /// Canonical JSON of every field; the digest covers this.
    Json to_json() const;
    std::string digest() const;
};

/// Builds the assembly for one seed and mode (esn-ablation freezes the trunk)
/// and runs it online over the stream.
RunResult run_mode(const ExperimentConfig& cfg, const TaskStream& stream, std::uint64_t seed, Mode mode);

/// Strict parse: unknown keys, wrong types and missing required fields
/// ("task.id") are ConfigErrors naming the dotted path.
ExperimentConfig parse_experiment(const Json& j);

/// Parses text, reporting JSON syntax errors with line and column.
Json parse_config_text(std::string_view text, const std::string& origin);

/// Applies "dotted.path=value"; value is parsed as JSON, falling back to a string.
void apply_override(Json& j, const std::string& assignment);

Json to_json(const TrainerConfig& c);
TrainerConfig trainer_config_from_json(const Json& j, const std::string& path = "trainer");

}  // namespace maelstrom
