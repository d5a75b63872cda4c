#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "maelstrom/cli.hpp"
#include "maelstrom/config.hpp"
#include "maelstrom/error.hpp"
#include "maelstrom/spec_json.hpp"

using namespace maelstrom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    args.insert(args.begin(), "maelstrom");
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "maelstrom_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<Json> lines(const std::string& text) {
    std::vector<Json> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(Json::parse(line));
    return out;
}

const std::string kNarma = R"({"task": {"id": "narma10", "length": 600}, "seeds": [1, 2]})";

}  // namespace

TEST_CASE("config errors exit 2 with diagnostics") {
    SUBCASE("unknown key") {
        const auto r = invoke({"run", "--config", write_file("unknown.json",
                                R"({"task": {"id": "narma10"}, "seeds": [1], "trainer": {"lr": 1}})")});
        CHECK(r.code == cli::kExitConfig);
        CHECK(r.err.find("trainer.lr") != std::string::npos);
    }
    SUBCASE("missing field") {
        const auto r = invoke({"run", "--config", write_file("missing.json", R"({"task": {}, "seeds": [1]})")});
        CHECK(r.code == cli::kExitConfig);
        CHECK(r.err.find("task.id") != std::string::npos);
    }
    SUBCASE("syntax error carries line and column") {
        const auto r = invoke({"run", "--config", write_file("syntax.json", "{\"task\": {\"id\": \"narma10\"},\n \"seeds\": [1,}")});
        CHECK(r.code == cli::kExitConfig);
        CHECK(r.err.find("syntax.json:2:14") != std::string::npos);
    }
    SUBCASE("wrong type") {
        const auto r = invoke({"run", "--config", write_file("type.json",
                                R"({"task": {"id": "narma10"}, "seeds": [1], "maelstrom": {"units": "many"}})")});
        CHECK(r.code == cli::kExitConfig);
        CHECK(r.err.find("maelstrom.units") != std::string::npos);
    }
    SUBCASE("no seeds") {
        const auto r = invoke({"run", "--config", write_file("noseed.json", R"({"task": {"id": "narma10"}})")});
        CHECK(r.code == cli::kExitConfig);
    }
    SUBCASE("unreadable file and bad flags") {
        CHECK(invoke({"run", "--config", (scratch() / "absent.json").string()}).code == cli::kExitConfig);
        CHECK(invoke({"run", "--frobnicate"}).code == cli::kExitConfig);
        CHECK(invoke({"run", "--config", write_file("n.json", kNarma), "--override", "nodots"}).code ==
              cli::kExitConfig);
    }
}

TEST_CASE("overrides") {
    Json j = parse_config_text(kNarma, "inline");
    apply_override(j, "trainer.learning_rate=0.5");
    apply_override(j, "maelstrom.units=30");
    apply_override(j, "mode=memoryless");
    apply_override(j, "task.id=delayed_recall");
    const ExperimentConfig c = parse_experiment(j);
    CHECK(c.trainer.learning_rate == 0.5);
    CHECK(c.maelstrom.units == 30);
    CHECK(c.mode == Mode::memoryless);
    CHECK(c.task.id == "delayed_recall");
    CHECK(c.digest() != parse_experiment(parse_config_text(kNarma, "inline")).digest());
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
}

TEST_CASE("run is byte-identical across invocations") {
    const std::string cfg = write_file("narma.json", kNarma);
    const std::string a = (scratch() / "a.jsonl").string();
    const std::string b = (scratch() / "b.jsonl").string();
    REQUIRE(invoke({"run", "--config", cfg, "--seed", "1", "--out", a, "--trace"}).code == 0);
    REQUIRE(invoke({"run", "--config", cfg, "--seed", "1", "--out", b, "--trace"}).code == 0);
    CHECK(slurp(a) == slurp(b));
    const auto rows = lines(slurp(a));
    REQUIRE(rows.size() == 601);
    std::size_t summaries = 0;
    for (const Json& row : rows) {
        CHECK(row.at("seed") == 1);
        CHECK(row.contains("config_digest"));
        summaries += row.at("kind") == "summary" ? 1 : 0;
    }
    CHECK(summaries == 1);
}

TEST_CASE("run writes one summary per seed in seed order") {
    const auto r = invoke({"run", "--config", write_file("narma.json", kNarma), "--seed", "2", "--seed", "1", "--quiet"});
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("seed") == 1);
    CHECK(rows[1].at("seed") == 2);
    const std::vector<std::string> keys = {"kind", "config_digest", "mode", "seed", "task", "metric",
                                           "train", "eval", "train_steps", "eval_steps"};
    std::vector<std::string> order;
    for (const auto& [k, v] : rows[0].items()) order.push_back(k);
    CHECK(order == keys);
}

TEST_CASE("zero learning rate equals an untrained evaluation") {
    const auto r = invoke({"run", "--config", write_file("narma.json", kNarma), "--seed", "1", "--quiet",
                           "--override", "trainer.learning_rate=0"});
    REQUIRE(r.code == 0);
    const double reported = lines(r.out).at(0).at("eval").get<double>();

    const ExperimentConfig cfg = parse_experiment(parse_config_text(kNarma, "inline"));
    const TaskStream stream = make_task(cfg.task, 1);
    TaskStream inference = stream;
    for (Record& rec : inference.records) rec.phase = Phase::eval;
    Assembly a(cfg.assembly_for(1, Mode::full, stream));
    const RunResult untrained = run_online(cfg.trainer, a, inference);
    Vector pred, target;
    for (std::size_t t = stream.train_count(); t < stream.size(); ++t) {
        pred.push_back(untrained.records[t].prediction[0]);
        target.push_back(stream.records[t].target[0]);
    }
    CHECK(reported == doctest::Approx(nmse(pred, target)).epsilon(1e-12));
}

TEST_CASE("diverged training exits 3 naming the step") {
    const auto r = invoke({"run", "--config", write_file("narma.json", kNarma), "--seed", "1",
                           "--override", "trainer.optimizer=sgd", "--override", "trainer.learning_rate=1e6",
                           "--override", "trainer.gradient_clip=null"});
    CHECK(r.code == cli::kExitDiverged);
    CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("compare") {
    const std::string cfg = write_file("recall.json",
                                       R"({"task": {"id": "delayed_recall", "delay": 3, "length": 3000},
                                           "seeds": [1, 2], "maelstrom": {"units": 50}})");
    const std::string out = (scratch() / "compare.jsonl").string();
    REQUIRE(invoke({"compare", "--config", cfg, "--out", out, "--quiet"}).code == 0);
    const auto rows = lines(slurp(out));
    std::size_t results = 0;
    for (const Json& row : rows) {
        if (row.at("kind") != "summary") continue;
        ++results;
        if (row.at("mode") == "memoryless") {
            CHECK(std::abs(row.at("eval").get<double>() - 0.5) <= 0.05);
        }
    }
    CHECK(results == 3 * 2);

    const std::string csv = slurp((scratch() / "compare.csv").string());
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "config_digest,mode,seed,metric,eval,delta_vs_full,delta_vs_esn_ablation,delta_vs_memoryless");
    std::size_t csv_rows = 0;
    for (std::string line; std::getline(in, line);) csv_rows += line.find(",ridge-oracle,") == std::string::npos ? 1 : 0;
    CHECK(csv_rows == 3 * 2);
}

TEST_CASE("generate writes the stream") {
    const auto a = invoke({"generate", "--task", "delayed_recall", "--length", "80", "--delay", "2", "--seed", "4"});
    REQUIRE(a.code == 0);
    const auto b = invoke({"generate", "--task", "delayed_recall", "--length", "80", "--delay", "2", "--seed", "4"});
    CHECK(a.out == b.out);
    const auto rows = lines(a.out);
    REQUIRE(rows.size() == 81);
    CHECK(rows[0].at("kind") == "stream");
    const TaskStream s = gen_delayed_recall(80, 2, 4);
    for (std::size_t t = 0; t < 80; ++t) {
        const Json& r = rows[t + 1];
        CHECK(r.at("t") == t);
        CHECK(r.at("stimulus").get<std::vector<double>>() == s.records[t].stimulus);
        if (s.records[t].label) CHECK(r.at("label") == *s.records[t].label);
    }
    CHECK(invoke({"generate", "--task", "nope", "--seed", "1"}).code == cli::kExitConfig);
}

TEST_CASE("analyze memory-capacity") {
    const std::string cfg = write_file("mc.json", R"({"task": {"id": "narma10"}, "seeds": [1, 2],
                                                    "maelstrom": {"units": 20}, "analysis": {"seq_len": 2000}})");
    const auto r = invoke({"analyze", "memory-capacity", "--config", cfg, "--quiet"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    for (const Json& row : rows) {
        CHECK(row.at("kind") == "memory_capacity");
        CHECK(row.at("r2").size() == default_d_max(20));
        CHECK(row.at("total").get<double>() <= 20.5);
    }
    CHECK(invoke({"analyze", "lyapunov", "--config", cfg}).code == cli::kExitConfig);
}
