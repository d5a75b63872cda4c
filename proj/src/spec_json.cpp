#include "maelstrom/spec_json.hpp"

#include <cstdio>

#include "maelstrom/error.hpp"

namespace maelstrom {

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest(const Json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

Activation activation_from_string(const std::string& s, const std::string& path) {
    if (s == "identity") return Activation::identity;
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw ConfigError(path + ": unknown activation '" + s + "' (expected identity, tanh or relu)");
}

Fields::Fields(const Json& object, std::string path) : obj_(object), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
}

const Json& Fields::require(const std::string& key) {
    const Json* v = optional(key);
    if (!v) throw ConfigError("missing required field '" + path(key) + "'");
    return *v;
}

const Json* Fields::optional(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
}

std::size_t Fields::as_count(const Json& v, const std::string& key) const {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(path(key) + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::uint64_t Fields::as_u64(const Json& v, const std::string& key) const {
    return static_cast<std::uint64_t>(as_count(v, key));
}

double Fields::as_real(const Json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    return v.get<double>();
}

std::size_t Fields::count(const std::string& key, std::size_t fallback) {
    const Json* v = optional(key);
    return v ? as_count(*v, key) : fallback;
}

std::uint64_t Fields::u64(const std::string& key, std::uint64_t fallback) {
    const Json* v = optional(key);
    return v ? as_u64(*v, key) : fallback;
}

double Fields::real(const std::string& key, double fallback) {
    const Json* v = optional(key);
    return v ? as_real(*v, key) : fallback;
}

bool Fields::flag(const std::string& key, bool fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    return v->get<bool>();
}

std::string Fields::text(const std::string& key, const std::string& fallback) {
    const Json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
    return v->get<std::string>();
}

void Fields::finish() const {
    for (const auto& [key, _] : obj_.items()) {
        if (!seen_.contains(key)) throw ConfigError("unknown key '" + path(key) + "'");
    }
}

Json to_json(const MaelstromConfig& c) {
    Json j;
    j["units"] = c.units;
    j["spectral_radius"] = c.spectral_radius;
    j["leak_rate"] = c.leak_rate;
    j["density"] = c.density;
    j["input_dim"] = c.input_dim;
    j["feedback_dim"] = c.feedback_dim;
    j["weight_low"] = c.weight_low;
    j["weight_high"] = c.weight_high;
    j["seed"] = c.seed;
    return j;
}

Json to_json(const LayerSpec& l) {
    Json j;
    j["width"] = l.width;
    j["activation"] = to_string(l.activation);
    return j;
}

namespace {

Json layers_json(const std::vector<LayerSpec>& layers) {
    Json arr = Json::array();
    for (const auto& l : layers) arr.push_back(to_json(l));
    return arr;
}

std::vector<LayerSpec> layers_from_json(const Json& arr, const std::string& path) {
    if (!arr.is_array()) throw ConfigError(path + ": expected a list of layers");
    std::vector<LayerSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        Fields f(arr[i], p);
        LayerSpec l;
        l.width = f.as_count(f.require("width"), "width");
        l.activation = activation_from_string(f.text("activation", "tanh"), f.path("activation"));
        f.finish();
        out.push_back(l);
    }
    return out;
}

}  // namespace

Json to_json(const HeadSpec& h) {
    Json j;
    j["interface_out_activation"] = to_string(h.interface_out_activation);
    j["output_layers"] = layers_json(h.output_layers);
    j["output_dim"] = h.output_dim;
    j["kind"] = to_string(h.kind);
    return j;
}

Json to_json(const AssemblySpec& a) {
    Json j;
    j["stimulus_dim"] = a.stimulus_dim;
    j["input_layers"] = layers_json(a.input_layers);
    j["interface_in_dim"] = a.interface_in_dim;
    j["interface_in_activation"] = to_string(a.interface_in_activation);
    j["skip_enabled"] = a.skip_enabled;
    j["memoryless"] = a.memoryless;
    j["combine_dim"] = a.combine_dim;
    j["head"] = to_json(a.head);
    j["maelstrom"] = to_json(a.maelstrom);
    j["seed"] = a.seed;
    return j;
}

MaelstromConfig maelstrom_config_from_json(const Json& j, const std::string& path) {
    Fields f(j, path);
    MaelstromConfig c;
    c.units = f.count("units", c.units);
    c.spectral_radius = f.real("spectral_radius", c.spectral_radius);
    c.leak_rate = f.real("leak_rate", c.leak_rate);
    c.density = f.real("density", c.density);
    c.input_dim = f.count("input_dim", c.input_dim);
    c.feedback_dim = f.count("feedback_dim", c.feedback_dim);
    c.weight_low = f.real("weight_low", c.weight_low);
    c.weight_high = f.real("weight_high", c.weight_high);
    c.seed = f.u64("seed", c.seed);
    f.finish();
    return c;
}

HeadSpec head_spec_from_json(const Json& j, const std::string& path) {
    Fields f(j, path);
    HeadSpec h;
    h.interface_out_activation = activation_from_string(
        f.text("interface_out_activation", to_string(h.interface_out_activation)), f.path("interface_out_activation"));
    if (const Json* v = f.optional("output_layers")) h.output_layers = layers_from_json(*v, f.path("output_layers"));
    h.output_dim = f.count("output_dim", h.output_dim);
    const std::string kind = f.text("kind", to_string(h.kind));
    if (kind == "regression") {
        h.kind = HeadKind::regression;
    } else if (kind == "classification") {
        h.kind = HeadKind::classification;
    } else {
        throw ConfigError(f.path("kind") + ": expected regression or classification");
    }
    f.finish();
    return h;
}

AssemblySpec assembly_spec_from_json(const Json& j, const std::string& path) {
    Fields f(j, path);
    AssemblySpec a;
    a.stimulus_dim = f.count("stimulus_dim", a.stimulus_dim);
    if (const Json* v = f.optional("input_layers")) a.input_layers = layers_from_json(*v, f.path("input_layers"));
    a.interface_in_dim = f.count("interface_in_dim", a.interface_in_dim);
    a.interface_in_activation = activation_from_string(
        f.text("interface_in_activation", to_string(a.interface_in_activation)), f.path("interface_in_activation"));
    a.skip_enabled = f.flag("skip_enabled", a.skip_enabled);
    a.memoryless = f.flag("memoryless", a.memoryless);
    a.combine_dim = f.count("combine_dim", a.combine_dim);
    if (const Json* v = f.optional("head")) a.head = head_spec_from_json(*v, f.path("head"));
    if (const Json* v = f.optional("maelstrom")) a.maelstrom = maelstrom_config_from_json(*v, f.path("maelstrom"));
    a.seed = f.u64("seed", a.seed);
    f.finish();
    return a;
}

}  // namespace maelstrom
