#include "maelstrom/config.hpp"

#include <algorithm>

#include "maelstrom/error.hpp"

namespace maelstrom {

const char* to_string(Mode m) noexcept {
    switch (m) {
        case Mode::full: return "full";
        case Mode::esn_ablation: return "esn-ablation";
        case Mode::memoryless: return "memoryless";
    }
    return "full";
}

Mode mode_from_string(const std::string& s) {
    if (s == "full") return Mode::full;
    if (s == "esn-ablation") return Mode::esn_ablation;
    if (s == "memoryless") return Mode::memoryless;
    throw ConfigError("mode: expected full, esn-ablation or memoryless, got '" + s + "'");
}

TaskStream make_task(const TaskConfig& task, std::uint64_t seed) {
    if (task.id == "narma10") return gen_narma10(task.length, seed, task.train_fraction);
    if (task.id == "delayed_recall") return gen_delayed_recall(task.length, task.delay, seed, task.train_fraction);
    if (task.id == "temporal_parity") return gen_temporal_parity(task.length, task.window, seed, task.train_fraction);
    if (task.id == "mackey_glass") return gen_mackey_glass(task.length, task.tau, seed, task.train_fraction);
    throw ConfigError("task.id: unknown task '" + task.id +
                      "' (expected narma10, delayed_recall, temporal_parity or mackey_glass)");
}

Json to_json(const TrainerConfig& c) {
    Json j;
    j["optimizer"] = to_string(c.optimizer);
    j["learning_rate"] = c.learning_rate;
    j["momentum"] = c.momentum;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["epsilon"] = c.epsilon;
    j["update_every"] = c.update_every;
    j["washout"] = c.washout;
    j["gradient_clip"] = c.gradient_clip ? Json(*c.gradient_clip) : Json(nullptr);
    j["reset_state_before_eval"] = c.reset_state_before_eval;
    return j;
}

TrainerConfig trainer_config_from_json(const Json& j, const std::string& path) {
    Fields f(j, path);
    TrainerConfig c;
    const std::string opt = f.text("optimizer", to_string(c.optimizer));
    if (opt == "sgd") {
        c.optimizer = OptimizerKind::sgd;
    } else if (opt == "sgd-momentum") {
        c.optimizer = OptimizerKind::sgd_momentum;
    } else if (opt == "adam") {
        c.optimizer = OptimizerKind::adam;
    } else {
        throw ConfigError(f.path("optimizer") + ": expected sgd, sgd-momentum or adam");
    }
    c.learning_rate = f.real("learning_rate", c.learning_rate);
    c.momentum = f.real("momentum", c.momentum);
    c.beta1 = f.real("beta1", c.beta1);
    c.beta2 = f.real("beta2", c.beta2);
    c.epsilon = f.real("epsilon", c.epsilon);
    c.update_every = f.count("update_every", c.update_every);
    c.washout = f.count("washout", c.washout);
    if (const Json* v = f.optional("gradient_clip")) {
        c.gradient_clip = v->is_null() ? std::nullopt : std::optional<double>(f.as_real(*v, "gradient_clip"));
    }
    c.reset_state_before_eval = f.flag("reset_state_before_eval", c.reset_state_before_eval);
    f.finish();
    c.validate();
    return c;
}

namespace {

std::vector<LayerSpec> parse_layers(const Json& arr, const std::string& path) {
    if (!arr.is_array()) throw ConfigError(path + ": expected a list of layers");
    std::vector<LayerSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Fields f(arr[i], path + "[" + std::to_string(i) + "]");
        LayerSpec l;
        l.width = f.as_count(f.require("width"), "width");
        l.activation = activation_from_string(f.text("activation", "tanh"), f.path("activation"));
        f.finish();
        out.push_back(l);
    }
    return out;
}

Json layers_to_json(const std::vector<LayerSpec>& layers) {
    Json arr = Json::array();
    for (const auto& l : layers) arr.push_back(maelstrom::to_json(l));
    return arr;
}

}  // namespace

ExperimentConfig parse_experiment(const Json& j) {
    Fields root(j, "");
    ExperimentConfig c;

    {
        Fields f(root.require("task"), "task");
        const Json& id = f.require("id");
        if (!id.is_string()) throw ConfigError("task.id: expected a string");
        c.task.id = id.get<std::string>();
        c.task.length = f.count("length", c.task.length);
        c.task.train_fraction = f.real("train_fraction", c.task.train_fraction);
        c.task.delay = f.count("delay", c.task.delay);
        c.task.window = f.count("window", c.task.window);
        c.task.tau = f.real("tau", c.task.tau);
        f.finish();
        if (!(c.task.train_fraction > 0.0 && c.task.train_fraction < 1.0)) {
            throw ConfigError("task.train_fraction must lie in (0, 1)");
        }
    }

    if (const Json* m = root.optional("maelstrom")) {
        Fields f(*m, "maelstrom");
        MaelstromConfig& mc = c.maelstrom;
        mc.units = f.count("units", mc.units);
        mc.spectral_radius = f.real("spectral_radius", mc.spectral_radius);
        mc.leak_rate = f.real("leak_rate", mc.leak_rate);
        mc.density = f.real("density", mc.density);
        mc.feedback_dim = f.count("feedback_dim", mc.feedback_dim);
        mc.weight_low = f.real("weight_low", mc.weight_low);
        mc.weight_high = f.real("weight_high", mc.weight_high);
        f.finish();
    }

    AssemblySpec& a = c.assembly;
    if (const Json* m = root.optional("assembly")) {
        Fields f(*m, "assembly");
        if (const Json* v = f.optional("input_layers")) a.input_layers = parse_layers(*v, f.path("input_layers"));
        a.interface_in_dim = f.count("interface_in_dim", a.interface_in_dim);
        a.interface_in_activation = activation_from_string(
            f.text("interface_in_activation", to_string(a.interface_in_activation)), f.path("interface_in_activation"));
        a.skip_enabled = f.flag("skip_enabled", a.skip_enabled);
        a.combine_dim = f.count("combine_dim", a.combine_dim);
        a.head.interface_out_activation = activation_from_string(
            f.text("interface_out_activation", to_string(a.head.interface_out_activation)),
            f.path("interface_out_activation"));
        if (const Json* v = f.optional("output_layers")) a.head.output_layers = parse_layers(*v, f.path("output_layers"));
        f.finish();
    }
    c.maelstrom.input_dim = a.interface_in_dim;

    if (const Json* t = root.optional("trainer")) c.trainer = trainer_config_from_json(*t, "trainer");

    if (const Json* an = root.optional("analysis")) {
        Fields f(*an, "analysis");
        AnalysisConfig& x = c.analysis;
        x.seq_len = f.count("seq_len", x.seq_len);
        x.d_max = f.count("d_max", x.d_max);
        x.lambda = f.real("lambda", x.lambda);
        if (const Json* v = f.optional("spectral_radii")) {
            if (!v->is_array() || v->empty()) throw ConfigError("analysis.spectral_radii: expected a non-empty list");
            x.spectral_radii.clear();
            for (const Json& r : *v) x.spectral_radii.push_back(f.as_real(r, "spectral_radii"));
        }
        x.divergence_steps = f.count("divergence_steps", x.divergence_steps);
        x.perturbation = f.real("perturbation", x.perturbation);
        x.drive_amplitude = f.real("drive_amplitude", x.drive_amplitude);
        x.ridge_lambda = f.real("ridge_lambda", x.ridge_lambda);
        f.finish();
    }

    if (const Json* s = root.optional("seeds")) {
        if (!s->is_array()) throw ConfigError("seeds: expected a list of non-negative integers");
        for (const Json& v : *s) c.seeds.push_back(root.as_u64(v, "seeds"));
    }
    c.output = root.text("output", "");
    c.mode = mode_from_string(root.text("mode", "full"));
    root.finish();

    c.maelstrom.validate();
    AssemblySpec probe = a;
    probe.maelstrom = c.maelstrom;
    probe.validate();
    return c;
}

AssemblySpec ExperimentConfig::assembly_for(std::uint64_t seed, Mode mode, const TaskStream& stream) const {
    AssemblySpec s = assembly;
    s.stimulus_dim = stream.stimulus_dim;
    s.head.output_dim = stream.output_dim;
    s.head.kind = stream.kind == TaskKind::classification ? HeadKind::classification : HeadKind::regression;
    s.maelstrom = maelstrom;
    s.maelstrom.input_dim = s.interface_in_dim;
    s.maelstrom.seed = seed;
    s.seed = seed;
    if (mode == Mode::esn_ablation) s.skip_enabled = false;
    if (mode == Mode::memoryless) s.memoryless = true;
    return s;
}

RunResult run_mode(const ExperimentConfig& cfg, const TaskStream& stream, std::uint64_t seed, Mode mode) {
    Assembly assembly(cfg.assembly_for(seed, mode, stream));
    if (mode == Mode::esn_ablation) assembly.set_trunk_frozen(true);
    return run_online(cfg.trainer, assembly, stream);
}

Json ExperimentConfig::to_json() const {
    Json j;
    Json t;
    t["id"] = task.id;
    t["length"] = task.length;
    t["train_fraction"] = task.train_fraction;
    t["delay"] = task.delay;
    t["window"] = task.window;
    t["tau"] = task.tau;
    j["task"] = t;
    Json m = maelstrom::to_json(maelstrom);
    m.erase("seed");
    m.erase("input_dim");
    j["maelstrom"] = m;
    Json a;
    a["input_layers"] = layers_to_json(assembly.input_layers);
    a["interface_in_dim"] = assembly.interface_in_dim;
    a["interface_in_activation"] = to_string(assembly.interface_in_activation);
    a["skip_enabled"] = assembly.skip_enabled;
    a["combine_dim"] = assembly.combine_dim;
    a["interface_out_activation"] = to_string(assembly.head.interface_out_activation);
    a["output_layers"] = layers_to_json(assembly.head.output_layers);
    j["assembly"] = a;
    j["trainer"] = maelstrom::to_json(trainer);
    Json an;
    an["seq_len"] = analysis.seq_len;
    an["d_max"] = analysis.d_max;
    an["lambda"] = analysis.lambda;
    an["spectral_radii"] = analysis.spectral_radii;
    an["divergence_steps"] = analysis.divergence_steps;
    an["perturbation"] = analysis.perturbation;
    an["drive_amplitude"] = analysis.drive_amplitude;
    an["ridge_lambda"] = analysis.ridge_lambda;
    j["analysis"] = an;
    j["seeds"] = seeds;
    j["output"] = output;
    j["mode"] = to_string(mode);
    return j;
}

std::string ExperimentConfig::digest() const {
    Json j = to_json();
    // the seed list and output path do not change any single run
    j.erase("seeds");
    j.erase("output");
    return maelstrom::digest(j);
}

Json parse_config_text(std::string_view text, const std::string& origin) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON (" + e.what() + ")");
    }
}

void apply_override(Json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(raw);
    } catch (const Json::parse_error&) {
        value = raw;
    }
    Json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("override '" + key + "': '" + part + "' is not inside an object");
            *node = Json::object();
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

}  // namespace maelstrom
