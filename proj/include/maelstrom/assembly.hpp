#pragma once

// Full maelstrom network for one timestep:
//
//   stimulus ++ detach(W_fb x_{t-1}) -> input net -> interface-in = i
//   i (value only) -> maelstrom step -> x_t
//   interface-out(detach(x_t)) + skip(i) -> output net -> prediction
//
// The only gradient route to the input side is the skip path; with skip
// disabled the trunk receives exactly zero gradient.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maelstrom/autodiff.hpp"
#include "maelstrom/core.hpp"

namespace maelstrom {

enum class Activation { identity, tanh, relu };
enum class HeadKind { regression, classification };

const char* to_string(Activation a) noexcept;
const char* to_string(HeadKind k) noexcept;

struct LayerSpec {
    std::size_t width = 0;
    Activation activation = Activation::tanh;
    bool operator==(const LayerSpec&) const = default;
};

/// Readout side: interface-out (units -> combine_dim), hidden layers, and a
/// final identity layer to output_dim (regression values or raw logits).
struct HeadSpec {
    Activation interface_out_activation = Activation::identity;
    std::vector<LayerSpec> output_layers = {{64, Activation::tanh}};
    std::size_t output_dim = 1;
    HeadKind kind = HeadKind::regression;
    bool operator==(const HeadSpec&) const = default;
};

struct AssemblySpec {
    std::size_t stimulus_dim = 1;
    std::vector<LayerSpec> input_layers = {{32, Activation::tanh}};
    std::size_t interface_in_dim = 16;
    Activation interface_in_activation = Activation::tanh;
    bool skip_enabled = true;
    /// Replace the maelstrom readout and the feedback with zeros (memoryless baseline).
    bool memoryless = false;
    std::size_t combine_dim = 64;
    HeadSpec head;
    /// input_dim must equal interface_in_dim.
    MaelstromConfig maelstrom;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const AssemblySpec&) const = default;
};

struct Dense {
    ad::Param weight;
    ad::Param bias;
    Activation activation = Activation::identity;
};

ad::Node apply(ad::Graph& g, Dense& layer, ad::Node x);

struct Head {
    HeadSpec spec;
    Dense interface_out;
    std::vector<Dense> output_net;
};

struct ForwardResult {
    ad::Node prediction;
    MaelstromState state;
};

class Assembly {
  public:
    /// Builds the core from spec.maelstrom. Learnable weights are uniform in
    /// +-1/sqrt(fan_in), each drawn from a stream named after the param.
    explicit Assembly(AssemblySpec spec);
    /// Uses the given core; its config must match the AssemblySpec dimensions.
    Assembly(AssemblySpec spec, MaelstromCore core);

    const AssemblySpec& spec() const noexcept { return spec_; }
    const MaelstromCore& core() const noexcept { return core_; }

    std::size_t attach_head(const HeadSpec& head);
    void select_head(std::size_t id);
    std::size_t selected_head() const noexcept { return selected_; }
    std::size_t head_count() const noexcept { return heads_.size(); }
    const HeadSpec& head_spec(std::size_t id) const;

    /// Every learned tensor, trunk first then heads in id order. Stable across calls.
    std::vector<ad::Param*> learnable_params();
    std::vector<const ad::Param*> learnable_params() const;
    /// Exactly the core tensors {W_rec, W_drive, bias, W_fb}.
    std::vector<const ad::Param*> frozen_params() const;

    std::vector<ad::Param*> trunk_params();
    std::vector<ad::Param*> head_params(std::size_t id);
    /// Unfrozen params on the selected head's path (trunk + selected head).
    std::vector<ad::Param*> trainable_params();

    void set_trunk_frozen(bool frozen);
    void set_head_frozen(std::size_t id, bool frozen);
    bool trunk_frozen() const noexcept { return trunk_frozen_; }
    bool head_frozen(std::size_t id) const;

    std::size_t parameter_count() const;

    /// Records one timestep into g. The maelstrom is advanced on plain values;
    /// the returned state never joins the graph.
    ForwardResult step_forward(ad::Graph& g, const MaelstromState& state,
                               std::span<const double> stimulus);

    /// Inference only: prediction values and next state.
    std::pair<Vector, MaelstromState> predict(const MaelstromState& state,
                                              std::span<const double> stimulus);

    MaelstromState initial_state() const { return MaelstromState::zero(core_.units()); }

  private:
    Dense make_dense(const std::string& name, std::size_t in, std::size_t out, Activation act) const;
    Head make_head(std::size_t id, const HeadSpec& spec) const;

    AssemblySpec spec_;
    MaelstromCore core_;
    std::vector<Dense> input_net_;
    Dense interface_in_;
    bool has_skip_ = false;
    Dense skip_;
    std::vector<Head> heads_;
    std::size_t selected_ = 0;
    bool trunk_frozen_ = false;
};

/// Versioned binary snapshot: "MAELASM1", u32 version, spec JSON, head spec
/// JSON list, freeze flags, every learnable param (name, matrix), core bytes.
std::string serialize(const Assembly& assembly);
Assembly deserialize_assembly(std::string_view bytes);

}  // namespace maelstrom
