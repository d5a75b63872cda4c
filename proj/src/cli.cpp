#include "maelstrom/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "maelstrom/analyze.hpp"
#include "maelstrom/config.hpp"
#include "maelstrom/error.hpp"

namespace maelstrom::cli {

namespace {

struct Common {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string out;
    bool trace = false;
    std::vector<std::string> overrides;
    bool quiet = false;
    bool reset_state = false;
};

struct OutputLine {
    std::string mode;
    std::uint64_t seed = 0;
    std::string text;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json load_config_json(const Common& c) {
    Json j = c.config_path.empty() ? Json::object() : parse_config_text(read_file(c.config_path), c.config_path);
    for (const auto& o : c.overrides) apply_override(j, o);
    return j;
}

ExperimentConfig load_experiment(const Common& c) {
    if (c.config_path.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = parse_experiment(load_config_json(c));
    if (!c.seeds.empty()) cfg.seeds = c.seeds;
    if (!c.out.empty()) cfg.output = c.out;
    if (cfg.seeds.empty()) throw ConfigError("missing required field 'seeds' (or pass --seed)");
    if (c.reset_state) cfg.trainer.reset_state_before_eval = true;
    return cfg;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string csv_path_for(const std::string& out) {
    std::filesystem::path p(out);
    p.replace_extension(".csv");
    return p.string();
}

/// Sorts by (mode, seed) keeping per-job line order, then writes atomically-per-line.
void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write output file '" + path + "'");
    f << text;
}

void emit(std::vector<OutputLine> lines, const std::string& path, std::ostream& out) {
    std::stable_sort(lines.begin(), lines.end(), [](const OutputLine& a, const OutputLine& b) {
        return std::tie(a.mode, a.seed) < std::tie(b.mode, b.seed);
    });
    std::ostringstream buf;
    for (const auto& l : lines) buf << l.text << '\n';
    write_text(path, buf.str(), out);
}


Json summary_json(const RunSummary& s, const std::string& digest, Mode mode, const char* kind = "summary") {
    Json j;
    j["kind"] = kind;
    j["config_digest"] = digest;
    j["mode"] = to_string(mode);
    j["seed"] = s.seed;
    j["task"] = s.task_id;
    j["metric"] = s.metric;
    j["train"] = opt_json(s.train_metric);
    j["eval"] = opt_json(s.eval_metric);
    j["train_steps"] = s.train_steps;
    j["eval_steps"] = s.eval_steps;
    return j;
}

Json step_json(const StepRecord& r, const std::string& digest, Mode mode, std::uint64_t seed) {
    Json j;
    j["kind"] = "step";
    j["config_digest"] = digest;
    j["mode"] = to_string(mode);
    j["seed"] = seed;
    j["t"] = r.t;
    j["phase"] = to_string(r.phase);
    j["loss"] = opt_json(r.loss);
    j["prediction"] = r.prediction;
    if (r.target.empty()) {
        j["label"] = r.label ? Json(*r.label) : Json(nullptr);
    } else {
        j["target"] = r.target;
    }
    j["updated"] = r.updated;
    return j;
}

RunResult run_checked(const ExperimentConfig& cfg, const TaskStream& stream, std::uint64_t seed, Mode mode) {
    try {
        return maelstrom::run_mode(cfg, stream, seed, mode);
    } catch (const DivergedError& e) {
        throw DivergedError(e.step(), std::string(to_string(mode)) + " run with seed " + std::to_string(seed) +
                                          " diverged at step " + std::to_string(e.step()));
    }
}

int cmd_run(const Common& c, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_experiment(c);
    const std::string dg = cfg.digest();
    std::vector<OutputLine> lines;
    for (std::uint64_t seed : cfg.seeds) {
        const TaskStream stream = make_task(cfg.task, seed);
        RunResult r = run_checked(cfg, stream, seed, cfg.mode);
        r.summary.config_digest = dg;
        const std::string mode = to_string(cfg.mode);
        if (c.trace) {
            for (const StepRecord& rec : r.records) {
                lines.push_back({mode, seed, step_json(rec, dg, cfg.mode, seed).dump()});
            }
        }
        lines.push_back({mode, seed, summary_json(r.summary, dg, cfg.mode).dump()});
        if (!c.quiet) {
            err << "seed " << seed << ": " << r.summary.metric << " train="
                << (r.summary.train_metric ? fmt(*r.summary.train_metric) : "n/a")
                << " eval=" << (r.summary.eval_metric ? fmt(*r.summary.eval_metric) : "n/a") << '\n';
        }
    }
    emit(std::move(lines), cfg.output, out);
    return kExitOk;
}

int cmd_compare(const Common& c, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_experiment(c);
    const std::string dg = cfg.digest();
    const Mode modes[] = {Mode::full, Mode::esn_ablation, Mode::memoryless};

    struct Row {
        Mode mode;
        std::uint64_t seed;
        std::string metric;
        std::optional<double> eval;
    };
    std::vector<Row> rows;
    std::vector<OutputLine> lines;
    for (std::uint64_t seed : cfg.seeds) {
        const TaskStream stream = make_task(cfg.task, seed);
        for (Mode m : modes) {
            RunResult r = run_checked(cfg, stream, seed, m);
            lines.push_back({to_string(m), seed, summary_json(r.summary, dg, m).dump()});
            rows.push_back({m, seed, r.summary.metric, r.summary.eval_metric});
            if (!c.quiet) {
                err << "seed " << seed << " " << to_string(m) << ": " << r.summary.metric << " eval="
                    << (r.summary.eval_metric ? fmt(*r.summary.eval_metric) : "n/a") << '\n';
            }
        }
        // closed-form reservoir baseline on a sibling core driven by the raw stimulus
        MaelstromConfig rc = cfg.maelstrom;
        rc.seed = seed;
        rc.input_dim = stream.stimulus_dim;
        const RidgeResult ridge = ridge_oracle(build_core(rc), stream, cfg.analysis.ridge_lambda, cfg.trainer.washout);
        Json j = summary_json(ridge.summary, dg, Mode::full, "oracle");
        j["mode"] = "ridge-oracle";
        lines.push_back({"ridge-oracle", seed, j.dump()});
    }
    emit(std::move(lines), cfg.output, out);

    auto lookup = [&](Mode m, std::uint64_t seed) -> std::optional<double> {
        for (const Row& r : rows)
            if (r.mode == m && r.seed == seed) return r.eval;
        return std::nullopt;
    };
    std::vector<Row> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Row& a, const Row& b) {
        return std::tie(a.seed, a.mode) < std::tie(b.seed, b.mode);
    });
    std::ostringstream csv;
    csv << "config_digest,mode,seed,metric,eval,delta_vs_full,delta_vs_esn_ablation,delta_vs_memoryless\n";
    for (const Row& r : sorted) {
        csv << dg << ',' << to_string(r.mode) << ',' << r.seed << ',' << r.metric << ','
            << (r.eval ? fmt(*r.eval) : "");
        for (Mode other : modes) {
            const auto o = lookup(other, r.seed);
            csv << ',' << (r.eval && o ? fmt(*r.eval - *o) : "");
        }
        csv << '\n';
    }
    if (!cfg.output.empty()) write_text(csv_path_for(cfg.output), csv.str(), out);
    return kExitOk;
}

int cmd_analyze(const std::string& kind, const Common& c, std::ostream& out, std::ostream&) {
    const ExperimentConfig cfg = load_experiment(c);
    const std::string dg = cfg.digest();
    MaelstromConfig tmpl = cfg.maelstrom;
    tmpl.input_dim = 1;
    MemoryCapacityOptions mc;
    mc.seq_len = cfg.analysis.seq_len;
    mc.d_max = cfg.analysis.d_max;
    mc.lambda = cfg.analysis.lambda;

    std::vector<OutputLine> lines;
    std::ostringstream csv;
    if (kind == "memory-capacity") {
        csv << "config_digest,seed,delay,r2\n";
        for (std::uint64_t seed : cfg.seeds) {
            MaelstromConfig core_cfg = tmpl;
            core_cfg.seed = seed;
            mc.seed = seed;
            const MemoryCapacityReport rep = memory_capacity(build_core(core_cfg), mc);
            Json j;
            j["kind"] = "memory_capacity";
            j["config_digest"] = dg;
            j["seed"] = seed;
            j["units"] = rep.units;
            j["report_digest"] = rep.config_digest;
            j["total"] = rep.total;
            j["r2"] = rep.r2;
            lines.push_back({"", seed, j.dump()});
            for (std::size_t d = 0; d < rep.r2.size(); ++d) {
                csv << dg << ',' << seed << ',' << d + 1 << ',' << fmt(rep.r2[d]) << '\n';
            }
        }
    } else {
        RegimeSweepOptions opts;
        opts.capacity = mc;
        opts.divergence.steps = cfg.analysis.divergence_steps;
        opts.divergence.perturbation = cfg.analysis.perturbation;
        opts.divergence.drive_amplitude = cfg.analysis.drive_amplitude;
        const auto table = regime_sweep(tmpl, cfg.analysis.spectral_radii, cfg.seeds, opts);
        csv << "config_digest,spectral_radius,seed,spectral_norm,divergence_rate,memory_capacity\n";
        for (std::size_t i = 0; i < table.size(); ++i) {
            const RegimeRow& r = table[i];
            Json j;
            j["kind"] = "regime";
            j["config_digest"] = dg;
            j["seed"] = r.seed;
            j["spectral_radius"] = r.spectral_radius;
            j["spectral_norm"] = r.spectral_norm;
            j["divergence_rate"] = r.divergence_rate;
            j["memory_capacity"] = r.memory_capacity;
            lines.push_back({"", i, j.dump()});
            csv << dg << ',' << fmt(r.spectral_radius) << ',' << r.seed << ',' << fmt(r.spectral_norm) << ','
                << fmt(r.divergence_rate) << ',' << fmt(r.memory_capacity) << '\n';
        }
    }
    emit(std::move(lines), cfg.output, out);
    if (!cfg.output.empty()) write_text(csv_path_for(cfg.output), csv.str(), out);
    return kExitOk;
}

struct GenerateArgs {
    std::string task;
    std::optional<std::size_t> length;
    std::optional<std::size_t> delay;
    std::optional<std::size_t> window;
    std::optional<double> tau;
    std::optional<double> train_fraction;
};

int cmd_generate(const GenerateArgs& g, const Common& c, std::ostream& out, std::ostream&) {
    TaskConfig task;
    std::vector<std::uint64_t> seeds = c.seeds;
    std::string output = c.out;
    if (!c.config_path.empty()) {
        const ExperimentConfig cfg = parse_experiment(load_config_json(c));
        task = cfg.task;
        if (seeds.empty()) seeds = cfg.seeds;
        if (output.empty()) output = cfg.output;
    }
    if (!g.task.empty()) task.id = g.task;
    if (task.id.empty()) throw ConfigError("missing required field 'task.id' (or pass --task)");
    if (g.length) task.length = *g.length;
    if (g.delay) task.delay = *g.delay;
    if (g.window) task.window = *g.window;
    if (g.tau) task.tau = *g.tau;
    if (g.train_fraction) task.train_fraction = *g.train_fraction;
    if (seeds.size() != 1) throw ConfigError("generate needs exactly one seed");

    const TaskStream s = make_task(task, seeds.front());
    std::vector<OutputLine> lines;
    Json head;
    head["kind"] = "stream";
    head["task"] = s.task_id;
    head["type"] = to_string(s.kind);
    head["seed"] = s.seed;
    head["stimulus_dim"] = s.stimulus_dim;
    head["output_dim"] = s.output_dim;
    head["length"] = s.size();
    head["train"] = s.train_count();
    Json meta = Json::object();
    for (const auto& [k, v] : s.metadata) meta[k] = v;
    head["metadata"] = meta;
    lines.push_back({"", 0, head.dump()});
    for (std::size_t t = 0; t < s.size(); ++t) {
        const Record& r = s.records[t];
        Json j;
        j["t"] = t;
        j["phase"] = to_string(r.phase);
        j["stimulus"] = r.stimulus;
        if (s.kind == TaskKind::classification) {
            j["label"] = r.label ? Json(*r.label) : Json(nullptr);
        } else {
            j["target"] = r.target;
        }
        lines.push_back({"", 0, j.dump()});
    }
    emit(std::move(lines), output, out);
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_trace) {
    sub->add_option("--config", c.config_path, "Experiment config (JSON)");
    sub->add_option("--seed", c.seeds, "Seed; repeatable, replaces the config's seed list");
    sub->add_option("--out", c.out, "Output path for line-delimited records");
    sub->add_option("--override", c.overrides, "Dotted key=value applied to the config; repeatable");
    sub->add_flag("--quiet", c.quiet, "Suppress progress messages");
    if (with_trace) sub->add_flag("--trace", c.trace, "Also write per-step records");
}

void add_training_flags(CLI::App* sub, Common& c) {
    sub->add_flag("--reset-state-before-eval", c.reset_state, "Restart from the zero state at the first eval record");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maelstrom network experiment runner"};
    app.require_subcommand(1);
    Common common;

    auto* run_cmd = app.add_subcommand("run", "Train and evaluate one mode for each seed");
    add_common(run_cmd, common, true);
    add_training_flags(run_cmd, common);
    auto* cmp_cmd = app.add_subcommand("compare", "Run full, esn-ablation and memoryless side by side");
    add_common(cmp_cmd, common, false);
    add_training_flags(cmp_cmd, common);
    auto* an_cmd = app.add_subcommand("analyze", "Memory capacity or regime sweep of the bare maelstrom");
    std::string analyze_kind;
    an_cmd->add_option("kind", analyze_kind, "memory-capacity | regime-sweep")
        ->required()
        ->check(CLI::IsMember({"memory-capacity", "regime-sweep"}));
    add_common(an_cmd, common, false);
    auto* gen_cmd = app.add_subcommand("generate", "Write a task stream as line-delimited records");
    GenerateArgs gen;
    gen_cmd->add_option("--task", gen.task, "narma10 | delayed_recall | temporal_parity | mackey_glass");
    gen_cmd->add_option("--length", gen.length, "Stream length");
    gen_cmd->add_option("--delay", gen.delay, "Delayed-recall delay");
    gen_cmd->add_option("--window", gen.window, "Temporal-parity window");
    gen_cmd->add_option("--tau", gen.tau, "Mackey-Glass delay");
    gen_cmd->add_option("--train-fraction", gen.train_fraction, "Train prefix fraction");
    add_common(gen_cmd, common, false);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(common, out, err);
        if (*cmp_cmd) return cmd_compare(common, out, err);
        if (*an_cmd) return cmd_analyze(analyze_kind, common, out, err);
        if (*gen_cmd) return cmd_generate(gen, common, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergedError& e) {
        err << "diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace maelstrom::cli
