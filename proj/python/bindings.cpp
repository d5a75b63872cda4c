#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "maelstrom/analyze.hpp"
#include "maelstrom/cli.hpp"
#include "maelstrom/config.hpp"
#include "maelstrom/error.hpp"

namespace py = pybind11;
using namespace maelstrom;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows[0].size() : 0;
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw ShapeError("ragged matrix rows");
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

ExperimentConfig experiment(const std::string& text) {
    return parse_experiment(parse_config_text(text, "<python>"));
}

std::string summary_text(const RunSummary& s, const std::string& digest, Mode mode) {
    Json j;
    j["config_digest"] = digest;
    j["mode"] = to_string(mode);
    j["seed"] = s.seed;
    j["task"] = s.task_id;
    j["metric"] = s.metric;
    j["train"] = s.train_metric ? Json(*s.train_metric) : Json(nullptr);
    j["eval"] = s.eval_metric ? Json(*s.eval_metric) : Json(nullptr);
    j["train_steps"] = s.train_steps;
    j["eval_steps"] = s.eval_steps;
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_maelstrom, m) {
    m.doc() = "Maelstrom networks: frozen reservoir core with online-trained input and output nets";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergedError>(m, "DivergedError", PyExc_ArithmeticError);

    m.def("spectral_radius", [](const std::vector<std::vector<double>>& w) {
        return spectral_radius(to_matrix(w)).value;
    });
    m.def("spectral_norm", [](const std::vector<std::vector<double>>& w) {
        return spectral_norm(to_matrix(w)).value;
    });

    m.def(
        "run_summary",
        [](const std::string& config, std::uint64_t seed, const std::string& mode) {
            const ExperimentConfig cfg = experiment(config);
            const Mode md = mode.empty() ? cfg.mode : mode_from_string(mode);
            const TaskStream stream = make_task(cfg.task, seed);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_mode(cfg, stream, seed, md);
            }
            return summary_text(r.summary, cfg.digest(), md);
        },
        py::arg("config"), py::arg("seed"), py::arg("mode") = "");

    m.def(
        "memory_capacity",
        [](const std::string& config, std::uint64_t seed) {
            const ExperimentConfig cfg = experiment(config);
            MaelstromConfig c = cfg.maelstrom;
            c.seed = seed;
            c.input_dim = 1;
            MemoryCapacityOptions o;
            o.seq_len = cfg.analysis.seq_len;
            o.d_max = cfg.analysis.d_max;
            o.lambda = cfg.analysis.lambda;
            o.seed = seed;
            MemoryCapacityReport r;
            {
                py::gil_scoped_release release;
                r = memory_capacity(build_core(c), o);
            }
            return py::make_tuple(r.total, r.r2);
        },
        py::arg("config"), py::arg("seed"));

    m.def(
        "generate",
        [](const std::string& config, std::uint64_t seed) {
            const TaskStream s = make_task(experiment(config).task, seed);
            py::list records;
            for (const Record& r : s.records) {
                py::dict d;
                d["stimulus"] = r.stimulus;
                d["phase"] = to_string(r.phase);
                if (s.kind == TaskKind::regression) {
                    d["target"] = r.target;
                } else {
                    d["label"] = r.label ? py::cast(*r.label) : py::none();
                }
                records.append(d);
            }
            return records;
        },
        py::arg("config"), py::arg("seed"));

    m.def(
        "cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "maelstrom");
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
