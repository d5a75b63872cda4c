#include "maelstrom/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maelstrom/bytes.hpp"
#include "maelstrom/error.hpp"
#include "maelstrom/spec_json.hpp"

namespace maelstrom {

namespace {

constexpr std::string_view kAssemblyMagic = "MAELASM1";
constexpr std::uint32_t kAssemblyVersion = 1;

void check_layers(const std::vector<LayerSpec>& layers, const char* what) {
    for (const auto& l : layers) {
        if (l.width == 0) throw ConfigError(std::string(what) + " layer widths must be positive");
    }
}

void validate_head(const HeadSpec& h) {
    check_layers(h.output_layers, "output_net");
    if (h.output_dim == 0) throw ConfigError("output_dim must be positive");
    if (h.kind == HeadKind::classification && h.output_dim < 2) {
        throw ConfigError("classification heads need output_dim >= 2");
    }
}

}  // namespace

const char* to_string(Activation a) noexcept {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
    }
    return "identity";
}

const char* to_string(HeadKind k) noexcept {
    return k == HeadKind::regression ? "regression" : "classification";
}

void AssemblySpec::validate() const {
    if (stimulus_dim == 0) throw ConfigError("stimulus_dim must be positive");
    check_layers(input_layers, "input_net");
    if (interface_in_dim == 0) throw ConfigError("interface_in_dim must be positive");
    if (combine_dim == 0) throw ConfigError("combine_dim must be positive");
    validate_head(head);
    maelstrom.validate();
    if (maelstrom.input_dim != interface_in_dim) {
        throw ConfigError("maelstrom.input_dim (" + std::to_string(maelstrom.input_dim) +
                          ") must equal interface_in_dim (" + std::to_string(interface_in_dim) + ")");
    }
}

ad::Node apply(ad::Graph& g, Dense& layer, ad::Node x) {
    const ad::Node z = g.affine(layer.weight, layer.bias, x);
    switch (layer.activation) {
        case Activation::identity: return z;
        case Activation::tanh: return g.tanh(z);
        case Activation::relu: return g.relu(z);
    }
    return z;
}

Assembly::Assembly(AssemblySpec spec) : Assembly(spec, build_core((spec.validate(), spec.maelstrom))) {}

Assembly::Assembly(AssemblySpec spec, MaelstromCore core) : spec_(std::move(spec)), core_(std::move(core)) {
    spec_.validate();
    if (core_.input_dim() != spec_.interface_in_dim) {
        throw ConfigError("core drive dimension does not match interface_in_dim");
    }
    if (core_.units() != spec_.maelstrom.units || core_.feedback_dim() != spec_.maelstrom.feedback_dim) {
        throw ConfigError("core dimensions do not match the assembly's maelstrom config");
    }

    std::size_t width = spec_.stimulus_dim + core_.feedback_dim();
    for (std::size_t i = 0; i < spec_.input_layers.size(); ++i) {
        const auto& l = spec_.input_layers[i];
        input_net_.push_back(make_dense("input." + std::to_string(i), width, l.width, l.activation));
        width = l.width;
    }
    interface_in_ = make_dense("interface_in", width, spec_.interface_in_dim, spec_.interface_in_activation);
    has_skip_ = spec_.skip_enabled;
    if (has_skip_) {
        skip_ = make_dense("skip", spec_.interface_in_dim, spec_.combine_dim, Activation::identity);
    }
    heads_.push_back(make_head(0, spec_.head));
}

Dense Assembly::make_dense(const std::string& name, std::size_t in, std::size_t out,
                           Activation act) const {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const Rng root(spec_.seed, 0xa55e3b1eull);
    auto draw = [&](const std::string& pname, std::size_t rows, std::size_t cols) {
        Rng rng = root.split(fnv1a(pname));
        return ad::Param(pname, random_uniform_matrix(rows, cols, -bound, bound, rng));
    };
    return Dense{draw(name + ".weight", out, in), draw(name + ".bias", out, 1), act};
}

Head Assembly::make_head(std::size_t id, const HeadSpec& spec) const {
    validate_head(spec);
    const std::string prefix = "head" + std::to_string(id) + ".";
    Head h;
    h.spec = spec;
    h.interface_out = make_dense(prefix + "interface_out", core_.units(), spec_.combine_dim,
                                 spec.interface_out_activation);
    std::size_t width = spec_.combine_dim;
    for (std::size_t i = 0; i < spec.output_layers.size(); ++i) {
        const auto& l = spec.output_layers[i];
        h.output_net.push_back(make_dense(prefix + "output." + std::to_string(i), width, l.width, l.activation));
        width = l.width;
    }
    h.output_net.push_back(make_dense(prefix + "output." + std::to_string(spec.output_layers.size()),
                                      width, spec.output_dim, Activation::identity));
    return h;
}

std::size_t Assembly::attach_head(const HeadSpec& head) {
    heads_.push_back(make_head(heads_.size(), head));
    return heads_.size() - 1;
}

void Assembly::select_head(std::size_t id) {
    if (id >= heads_.size()) throw UsageError("unknown head id " + std::to_string(id));
    selected_ = id;
}

const HeadSpec& Assembly::head_spec(std::size_t id) const {
    if (id >= heads_.size()) throw UsageError("unknown head id " + std::to_string(id));
    return heads_[id].spec;
}

std::vector<ad::Param*> Assembly::trunk_params() {
    std::vector<ad::Param*> out;
    for (Dense& d : input_net_) {
        out.push_back(&d.weight);
        out.push_back(&d.bias);
    }
    out.push_back(&interface_in_.weight);
    out.push_back(&interface_in_.bias);
    if (has_skip_) {
        out.push_back(&skip_.weight);
        out.push_back(&skip_.bias);
    }
    return out;
}

std::vector<ad::Param*> Assembly::head_params(std::size_t id) {
    if (id >= heads_.size()) throw UsageError("unknown head id " + std::to_string(id));
    Head& h = heads_[id];
    std::vector<ad::Param*> out{&h.interface_out.weight, &h.interface_out.bias};
    for (Dense& d : h.output_net) {
        out.push_back(&d.weight);
        out.push_back(&d.bias);
    }
    return out;
}

std::vector<ad::Param*> Assembly::learnable_params() {
    std::vector<ad::Param*> out = trunk_params();
    for (std::size_t id = 0; id < heads_.size(); ++id) {
        const auto h = head_params(id);
        out.insert(out.end(), h.begin(), h.end());
    }
    return out;
}

std::vector<const ad::Param*> Assembly::learnable_params() const {
    const auto mut = const_cast<Assembly*>(this)->learnable_params();
    return {mut.begin(), mut.end()};
}

std::vector<const ad::Param*> Assembly::frozen_params() const {
    const auto t = core_.tensors();
    return {t.begin(), t.end()};
}

std::vector<ad::Param*> Assembly::trainable_params() {
    std::vector<ad::Param*> out;
    auto keep = [&](const std::vector<ad::Param*>& ps) {
        for (ad::Param* p : ps)
            if (!p->frozen) out.push_back(p);
    };
    keep(trunk_params());
    keep(head_params(selected_));
    return out;
}

void Assembly::set_trunk_frozen(bool frozen) {
    trunk_frozen_ = frozen;
    for (ad::Param* p : trunk_params()) p->frozen = frozen;
}

void Assembly::set_head_frozen(std::size_t id, bool frozen) {
    for (ad::Param* p : head_params(id)) p->frozen = frozen;
}

bool Assembly::head_frozen(std::size_t id) const {
    const auto ps = const_cast<Assembly*>(this)->head_params(id);
    return std::all_of(ps.begin(), ps.end(), [](const ad::Param* p) { return p->frozen; });
}

std::size_t Assembly::parameter_count() const {
    std::size_t n = 0;
    for (const ad::Param* p : learnable_params()) n += p->size();
    return n;
}

ForwardResult Assembly::step_forward(ad::Graph& g, const MaelstromState& state,
                                     std::span<const double> stimulus) {
    if (stimulus.size() != spec_.stimulus_dim) {
        throw ShapeError("stimulus has " + std::to_string(stimulus.size()) + " entries, expected " +
                         std::to_string(spec_.stimulus_dim));
    }
    if (!all_finite(stimulus)) throw InputError("stimulus must be finite");

    Vector fb = spec_.memoryless ? Vector(core_.feedback_dim(), 0.0) : feedback(core_, state);
    ad::Node x = g.input(Vector(stimulus.begin(), stimulus.end()));
    if (!fb.empty()) x = g.concat(x, g.detach(g.input(std::move(fb))));
    for (Dense& d : input_net_) x = apply(g, d, x);
    const ad::Node i = apply(g, interface_in_, x);

    MaelstromState next = maelstrom::step(core_, state, g.value(i));

    Head& head = heads_[selected_];
    ad::Node r = spec_.memoryless ? g.input(Vector(spec_.combine_dim, 0.0))
                                  : apply(g, head.interface_out, g.detach(g.input(next.x)));
    const ad::Node s = has_skip_ ? apply(g, skip_, i) : g.input(Vector(spec_.combine_dim, 0.0));
    ad::Node c = g.add(r, s);
    for (Dense& d : head.output_net) c = apply(g, d, c);
    return {c, std::move(next)};
}

std::pair<Vector, MaelstromState> Assembly::predict(const MaelstromState& state,
                                                    std::span<const double> stimulus) {
    ad::Graph g;
    auto fwd = step_forward(g, state, stimulus);
    return {g.value(fwd.prediction), std::move(fwd.state)};
}

std::string serialize(const Assembly& assembly) {
    bytes::Writer w;
    w.raw(kAssemblyMagic);
    w.u32(kAssemblyVersion);
    w.str(to_json(assembly.spec()).dump());
    w.u64(assembly.head_count());
    for (std::size_t id = 0; id < assembly.head_count(); ++id) {
        w.str(to_json(assembly.head_spec(id)).dump());
    }
    w.u32(assembly.trunk_frozen() ? 1u : 0u);
    const auto params = assembly.learnable_params();
    w.u64(params.size());
    for (const ad::Param* p : params) {
        w.str(p->name);
        w.u32(p->frozen ? 1u : 0u);
        w.matrix(p->value);
    }
    w.str(serialize(assembly.core()));
    return w.take();
}

Assembly deserialize_assembly(std::string_view in) {
    bytes::Reader r(in);
    if (r.raw(kAssemblyMagic.size()) != kAssemblyMagic) throw InputError("not an assembly snapshot");
    if (const auto v = r.u32(); v != kAssemblyVersion) {
        throw InputError("unsupported assembly snapshot version " + std::to_string(v));
    }
    const AssemblySpec spec = assembly_spec_from_json(nlohmann::ordered_json::parse(r.str()));
    const std::uint64_t heads = r.u64();
    std::vector<HeadSpec> head_specs;
    for (std::uint64_t i = 0; i < heads; ++i) {
        head_specs.push_back(head_spec_from_json(nlohmann::ordered_json::parse(r.str())));
    }
    const bool trunk_frozen = r.u32() != 0;
    struct Stored {
        std::string name;
        bool frozen;
        Matrix value;
    };
    std::vector<Stored> stored(r.u64());
    for (Stored& s : stored) {
        s.name = r.str();
        s.frozen = r.u32() != 0;
        s.value = r.matrix();
    }
    MaelstromCore core = deserialize_core(r.str());
    if (!r.done()) throw InputError("trailing bytes after assembly snapshot");

    Assembly a(spec, std::move(core));
    for (std::size_t i = 1; i < head_specs.size(); ++i) a.attach_head(head_specs[i]);
    a.set_trunk_frozen(trunk_frozen);
    auto params = a.learnable_params();
    if (params.size() != stored.size()) throw InputError("snapshot parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->name != stored[i].name || params[i]->value.rows() != stored[i].value.rows() ||
            params[i]->value.cols() != stored[i].value.cols()) {
            throw InputError("snapshot parameter '" + stored[i].name + "' does not match the assembly layout");
        }
        params[i]->value = std::move(stored[i].value);
        params[i]->frozen = stored[i].frozen;
    }
    return a;
}

}  // namespace maelstrom
