#pragma once

// The maelstrom: a frozen leaky-integrator tanh reservoir.
//
//   x' = (1 - alpha) x + alpha tanh(W_rec x + W_drive d + bias)
//
// None of its tensors ever join an autodiff graph. The four tensors are held
// as frozen ad::Param so that the assembly can report them in its frozen
// partition; their gradient accumulators are never written.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maelstrom/autodiff.hpp"
#include "maelstrom/numerics.hpp"
#include "maelstrom/rng.hpp"

namespace maelstrom {

struct MaelstromConfig {
    std::size_t units = 200;
    double spectral_radius = 0.9;
    double leak_rate = 0.3;
    double density = 0.1;
    std::size_t input_dim = 1;
    std::size_t feedback_dim = 0;
    double weight_low = -1.0;
    double weight_high = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
    bool operator==(const MaelstromConfig&) const = default;
};

struct MaelstromState {
    Vector x;
    std::uint64_t t = 0;

    static MaelstromState zero(std::size_t units) { return {Vector(units, 0.0), 0}; }
    bool operator==(const MaelstromState&) const = default;
};

class MaelstromCore {
  public:
    /// Assembles a core from explicit tensors. Shapes are validated against
    /// the config; no rescaling is applied.
    MaelstromCore(MaelstromConfig config, Matrix w_rec, Matrix w_drive, Vector bias, Matrix w_fb);

    const MaelstromConfig& config() const noexcept { return config_; }
    std::size_t units() const noexcept { return config_.units; }
    std::size_t input_dim() const noexcept { return config_.input_dim; }
    std::size_t feedback_dim() const noexcept { return config_.feedback_dim; }
    double leak_rate() const noexcept { return config_.leak_rate; }

    const Matrix& w_rec() const noexcept { return w_rec_.value; }
    const Matrix& w_drive() const noexcept { return w_drive_.value; }
    /// units x 1
    const Matrix& bias() const noexcept { return bias_.value; }
    const Matrix& w_fb() const noexcept { return w_fb_.value; }

    /// {W_rec, W_drive, bias, W_fb}, in that order.
    std::array<const ad::Param*, 4> tensors() const noexcept {
        return {&w_rec_, &w_drive_, &bias_, &w_fb_};
    }

    bool operator==(const MaelstromCore& other) const;

  private:
    MaelstromConfig config_;
    ad::Param w_rec_;
    ad::Param w_drive_;
    ad::Param bias_;
    ad::Param w_fb_;
};

/// Generates a core: sparse-uniform W_rec rescaled to the target spectral
/// radius; dense-uniform W_drive, bias and W_fb in the weight range. A draw of
/// W_rec with zero spectral radius is replaced by a draw from the next stream,
/// up to 10 attempts, after which UnscalableError is thrown.
MaelstromCore build_core(const MaelstromConfig& config);

/// One state update. Pure: the input state is not modified.
MaelstromState step(const MaelstromCore& core, const MaelstromState& state,
                    std::span<const double> drive);

/// W_fb x. Non-differentiable by contract.
Vector feedback(const MaelstromCore& core, const MaelstromState& state);

/// Per-step distance ||x_a(t) - x_b(t)|| between two trajectories under the same drive.
std::vector<double> esp_probe(const MaelstromCore& core, std::span<const Vector> drives,
                              std::span<const double> x0_a, std::span<const double> x0_b);

/// Returned by divergence_rate when the perturbation collapses to exactly zero.
inline constexpr double kCollapsedRate = -1000.0;

struct DivergenceOptions {
    std::size_t steps = 1000;
    double perturbation = 1e-8;
    /// Steps run from the zero state before the perturbation is introduced.
    std::size_t washout = 100;
    /// Drive coordinates are i.i.d. U[-amplitude, amplitude]; 0 gives zero drive.
    double drive_amplitude = 1.0;
};

/// Finite-time divergence exponent: mean of ln(||dx(t+1)|| / ||dx(t)||) with
/// the perturbation renormalized to its initial length after every step.
/// Positive values indicate local divergence.
double divergence_rate(const MaelstromCore& core, const DivergenceOptions& opts, Rng& rng);

/// Binary dump: "MAELCORE", u32 version, config fields in declaration order,
/// then W_rec, W_drive, bias, W_fb as (u64 rows, u64 cols, f64 data...). All
/// integers and doubles little-endian.
std::string serialize(const MaelstromCore& core);
MaelstromCore deserialize_core(std::string_view bytes);

}  // namespace maelstrom
