#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "maelstrom/config.hpp"
#include "maelstrom/error.hpp"
#include "maelstrom/training.hpp"

using namespace maelstrom;

namespace {

TrainerConfig sgd(double lr) {
    TrainerConfig c;
    c.optimizer = OptimizerKind::sgd;
    c.learning_rate = lr;
    c.washout = 0;
    c.gradient_clip = std::nullopt;
    return c;
}

TaskStream regression_stream(std::size_t n, std::size_t train, std::uint64_t seed,
                             double (*f)(double) = nullptr) {
    Rng rng(seed);
    TaskStream s;
    s.task_id = "toy";
    s.seed = seed;
    for (std::size_t t = 0; t < n; ++t) {
        const double u = rng.uniform(-1, 1);
        Record r;
        r.stimulus = {u};
        r.target = {f ? f(u) : rng.uniform(-1, 1)};
        r.phase = t < train ? Phase::train : Phase::eval;
        s.records.push_back(r);
    }
    return s;
}

AssemblySpec default_spec(std::uint64_t seed, const TaskStream& stream) {
    ExperimentConfig cfg;
    return cfg.assembly_for(seed, Mode::full, stream);
}

AssemblySpec linear_spec() {
    AssemblySpec s;
    s.stimulus_dim = 1;
    s.input_layers = {};
    s.interface_in_dim = 1;
    s.interface_in_activation = Activation::identity;
    s.combine_dim = 1;
    s.head.output_layers = {};
    s.maelstrom.units = 3;
    s.maelstrom.input_dim = 1;
    s.maelstrom.seed = 2;
    s.seed = 2;
    return s;
}

}  // namespace

TEST_CASE("one sgd step on a scalar model") {
    ad::Param w("w", Matrix(1, 1, std::vector<double>{1.0}));
    ad::Param b("b", Matrix(1, 1), true);
    OnlineTrainer trainer(sgd(0.1));
    ad::Graph g;
    const ad::Node loss = g.mse_loss(g.affine(w, b, g.input({3.0})), Vector{0.0});
    CHECK(g.scalar(loss) == 9.0);
    ad::Param* params[] = {&w, &b};
    CHECK(trainer.learn(g, loss, params, 0));
    CHECK(w.value(0, 0) == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK(w.grad(0, 0) == 0.0);
    CHECK(b.value(0, 0) == 0.0);
}

TEST_CASE("optimizer recurrences on a three-step scalar trace") {
    const double grads[] = {1.0, -2.0, 0.5};
    auto run = [&](TrainerConfig cfg) {
        ad::Param w("w", Matrix(1, 1, std::vector<double>{1.0}));
        Optimizer opt(cfg);
        std::vector<double> trace;
        for (double g : grads) {
            w.grad(0, 0) = g;
            ad::Param* ps[] = {&w};
            opt.apply(ps);
            trace.push_back(w.value(0, 0));
        }
        return trace;
    };
    TrainerConfig momentum = sgd(0.1);
    momentum.optimizer = OptimizerKind::sgd_momentum;
    const auto m = run(momentum);
    CHECK(m[0] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(m[1] == doctest::Approx(1.01).epsilon(1e-14));
    CHECK(m[2] == doctest::Approx(1.059).epsilon(1e-14));

    TrainerConfig adam = sgd(0.1);
    adam.optimizer = OptimizerKind::adam;
    const auto a = run(adam);
    CHECK(a[0] == doctest::Approx(0.9000000009999999).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(0.9366103534720748).epsilon(1e-14));
    CHECK(a[2] == doctest::Approx(0.9502794196738215).epsilon(1e-14));
}

TEST_CASE("global norm clipping") {
    ad::Param a("a", Matrix(1, 1));
    ad::Param b("b", Matrix(1, 1));
    a.grad(0, 0) = 3.0;
    b.grad(0, 0) = 4.0;
    TrainerConfig cfg = sgd(1.0);
    cfg.gradient_clip = 1.0;
    Optimizer opt(cfg);
    ad::Param* ps[] = {&a, &b};
    opt.apply(ps);
    CHECK(a.value(0, 0) == doctest::Approx(-0.6));
    CHECK(b.value(0, 0) == doctest::Approx(-0.8));
}

TEST_CASE("trainer config validation") {
    TrainerConfig c;
    c.update_every = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.learning_rate = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.gradient_clip = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0.0;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("update cadence and washout") {
    const TaskStream stream = regression_stream(20, 20, 1);
    Assembly a(linear_spec());
    TrainerConfig cfg = sgd(0.01);
    cfg.washout = 4;
    cfg.update_every = 3;
    const RunResult r = run_online(cfg, a, stream);
    for (const StepRecord& rec : r.records) {
        const bool expected = rec.t >= 4 && (rec.t + 1) % 3 == 0;
        CHECK_MESSAGE(rec.updated == expected, "t=" << rec.t);
        CHECK(rec.loss.has_value());
    }
}

TEST_CASE("learning rate zero leaves params unchanged") {
    const TaskStream stream = regression_stream(60, 50, 2);
    Assembly a(default_spec(1, stream));
    const std::string before = serialize(a);
    TrainerConfig cfg;
    cfg.learning_rate = 0.0;
    const RunResult r = run_online(cfg, a, stream);
    CHECK(serialize(a) == before);
    for (const StepRecord& rec : r.records) CHECK(rec.loss.has_value());
}

TEST_CASE("online sgd matches a straight-line reimplementation") {
    const TaskStream stream = regression_stream(100, 100, 3);
    Assembly a(linear_spec());
    auto get = [&](const std::string& n) -> Matrix {
        for (const ad::Param* p : std::as_const(a).learnable_params())
            if (p->name == n) return p->value;
        FAIL(n);
        return {};
    };
    // every net is linear: y = Wo (Wr x + br + Ws i + bs) + bo, i = Wi s + bi
    double wi = get("interface_in.weight")(0, 0), bi = get("interface_in.bias")(0, 0);
    double ws = get("skip.weight")(0, 0), bs = get("skip.bias")(0, 0);
    Matrix wr = get("head0.interface_out.weight");
    double br = get("head0.interface_out.bias")(0, 0);
    double wo = get("head0.output.0.weight")(0, 0), bo = get("head0.output.0.bias")(0, 0);
    const MaelstromCore core = a.core();

    TrainerConfig cfg = sgd(0.05);
    cfg.washout = 5;
    run_online(cfg, a, stream);

    MaelstromState state = MaelstromState::zero(3);
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const double s = stream.records[t].stimulus[0];
        const double i = wi * s + bi;
        state = step(core, state, Vector{i});
        double r = br;
        for (std::size_t k = 0; k < 3; ++k) r += wr(0, k) * state.x[k];
        const double c = r + ws * i + bs;
        const double y = wo * c + bo;
        if (t < cfg.washout) continue;
        const double g = 2.0 * (y - stream.records[t].target[0]);
        const double gc = g * wo;
        const double gi = gc * ws;
        const double lr = cfg.learning_rate;
        wo -= lr * g * c;
        bo -= lr * g;
        for (std::size_t k = 0; k < 3; ++k) wr(0, k) -= lr * gc * state.x[k];
        br -= lr * gc;
        ws -= lr * gc * i;
        bs -= lr * gc;
        wi -= lr * gi * s;
        bi -= lr * gi;
    }
    CHECK(std::abs(get("interface_in.weight")(0, 0) - wi) <= 1e-12);
    CHECK(std::abs(get("interface_in.bias")(0, 0) - bi) <= 1e-12);
    CHECK(std::abs(get("skip.weight")(0, 0) - ws) <= 1e-12);
    CHECK(std::abs(get("skip.bias")(0, 0) - bs) <= 1e-12);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(get("head0.interface_out.weight")(0, k) - wr(0, k)) <= 1e-12);
    CHECK(std::abs(get("head0.interface_out.bias")(0, 0) - br) <= 1e-12);
    CHECK(std::abs(get("head0.output.0.weight")(0, 0) - wo) <= 1e-12);
    CHECK(std::abs(get("head0.output.0.bias")(0, 0) - bo) <= 1e-12);
}

TEST_CASE("non-finite loss reports the step") {
    TaskStream stream = regression_stream(30, 30, 4);
    stream.records[17].target = {INFINITY};
    Assembly a(linear_spec());
    try {
        run_online(sgd(0.01), a, stream);
        FAIL("expected divergence");
    } catch (const DivergedError& e) {
        CHECK(e.step() == 17);
    }
}

TEST_CASE("run_online") {
    SUBCASE("empty eval phase has no eval metric") {
        const TaskStream stream = regression_stream(40, 40, 5);
        Assembly a(linear_spec());
        const RunResult r = run_online(sgd(0.01), a, stream);
        CHECK(!r.summary.eval_metric.has_value());
        CHECK(r.summary.train_metric.has_value());
        CHECK(r.summary.eval_steps == 0);
    }
    SUBCASE("eval never updates") {
        const TaskStream stream = regression_stream(40, 20, 5);
        Assembly a(linear_spec());
        const RunResult r = run_online(sgd(0.01), a, stream);
        for (const StepRecord& rec : r.records)
            if (rec.phase == Phase::eval) CHECK(!rec.updated);
        CHECK(r.summary.eval_steps == 20);
    }
    SUBCASE("phases out of order") {
        TaskStream stream = regression_stream(10, 5, 5);
        stream.records[7].phase = Phase::train;
        Assembly a(linear_spec());
        CHECK_THROWS_AS(run_online(sgd(0.01), a, stream), InputError);
    }
    SUBCASE("tail truncation leaves the prefix bit-identical") {
        const TaskStream full = regression_stream(300, 250, 6);
        TaskStream cut = full;
        cut.records.resize(240);
        Assembly a(default_spec(2, full));
        Assembly b(default_spec(2, full));
        const RunResult ra = run_online(TrainerConfig{}, a, full);
        const RunResult rb = run_online(TrainerConfig{}, b, cut);
        REQUIRE(rb.records.size() == 240);
        for (std::size_t t = 0; t < 240; ++t) CHECK(ra.records[t] == rb.records[t]);
    }
    SUBCASE("repeatable") {
        const TaskStream stream = regression_stream(200, 150, 7);
        Assembly a(default_spec(3, stream));
        Assembly b(default_spec(3, stream));
        CHECK(run_online(TrainerConfig{}, a, stream).records == run_online(TrainerConfig{}, b, stream).records);
    }
    SUBCASE("state reset before eval") {
        const TaskStream stream = regression_stream(200, 150, 8);
        Assembly a(default_spec(4, stream));
        Assembly b(default_spec(4, stream));
        TrainerConfig reset;
        reset.reset_state_before_eval = true;
        const RunResult kept = run_online(TrainerConfig{}, a, stream);
        const RunResult fresh = run_online(reset, b, stream);
        CHECK(kept.records[149] == fresh.records[149]);
        CHECK(kept.records[150].prediction != fresh.records[150].prediction);
        CHECK(fresh.summary.eval_steps == 50);
    }
}

TEST_CASE("nmse and accuracy") {
    const Vector y = {1.0, 3.0, -2.0, 0.5};
    CHECK(nmse(y, y) == 0.0);
    const double mean = (1.0 + 3.0 - 2.0 + 0.5) / 4.0;
    CHECK(nmse(Vector(4, mean), y) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(nmse(Vector{1, 1}, Vector{2, 2}), MetricError);
    CHECK_THROWS_AS(nmse(Vector{1}, Vector{2}), MetricError);
    CHECK_THROWS_AS(nmse(Vector{1, 2}, Vector{2}), ShapeError);

    Rng rng(3);
    Vector p(50), t(50);
    for (std::size_t i = 0; i < 50; ++i) {
        p[i] = rng.uniform(-1, 1);
        t[i] = rng.uniform(-2, 2);
    }
    double tm = 0.0;
    for (double v : t) tm += v / 50.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        num += (p[i] - t[i]) * (p[i] - t[i]) / 50.0;
        den += (t[i] - tm) * (t[i] - tm) / 50.0;
    }
    CHECK(nmse(p, t) == doctest::Approx(num / den).epsilon(1e-13));

    const std::vector<std::size_t> pred = {0, 1, 1, 0};
    const std::vector<std::size_t> lab = {0, 1, 0, 0};
    CHECK(accuracy(pred, lab) == 0.75);
    CHECK(argmax(Vector{0.1, 0.7, 0.7}) == 1);
}

TEST_CASE("ridge_oracle") {
    MaelstromConfig mc;
    mc.units = 10;
    mc.seed = 5;
    const MaelstromCore core = build_core(mc);

    SUBCASE("interpolates a square system without regularization") {
        const std::size_t washout = 5;
        const TaskStream stream = regression_stream(washout + 11 + 10, washout + 11, 9);
        const RidgeResult r = ridge_oracle(core, stream, 0.0, washout);
        CHECK(r.train_residual < 1e-8);
    }
    SUBCASE("huge penalty shrinks the readout to zero") {
        TaskStream stream = regression_stream(400, 300, 10);
        double mean = 0.0;
        for (std::size_t t = 300; t < 400; ++t) mean += stream.records[t].target[0] / 100.0;
        for (std::size_t t = 300; t < 400; ++t) stream.records[t].target[0] -= mean;
        const RidgeResult r = ridge_oracle(core, stream, 1e9, 10);
        REQUIRE(r.summary.eval_metric.has_value());
        CHECK(std::abs(*r.summary.eval_metric - 1.0) < 0.05);
        for (double v : r.readout.data()) CHECK(std::abs(v) < 1e-5);
    }
    SUBCASE("matches an independent normal-equations solve") {
        const std::size_t washout = 0;
        const TaskStream stream = regression_stream(60, 50, 11);
        const double lambda = 1e-3;
        const RidgeResult r = ridge_oracle(core, stream, lambda, washout);
        Eigen::MatrixXd x(50, 11);
        Eigen::VectorXd y(50);
        MaelstromState s = MaelstromState::zero(10);
        for (std::size_t t = 0; t < 50; ++t) {
            s = step(core, s, stream.records[t].stimulus);
            for (std::size_t k = 0; k < 10; ++k) x(t, k) = s.x[k];
            x(t, 10) = 1.0;
            y(t) = stream.records[t].target[0];
        }
        const Eigen::MatrixXd gram = x.transpose() * x + lambda * Eigen::MatrixXd::Identity(11, 11);
        const Eigen::VectorXd w = gram.fullPivLu().solve(x.transpose() * y);
        REQUIRE(r.readout.rows() == 1);
        REQUIRE(r.readout.cols() == 11);
        for (std::size_t k = 0; k < 11; ++k) CHECK(std::abs(r.readout(0, k) - w(k)) < 1e-8);
    }
    SUBCASE("dimension mismatch and singular systems") {
        MaelstromConfig wide = mc;
        wide.input_dim = 2;
        CHECK_THROWS_AS(ridge_oracle(build_core(wide), regression_stream(50, 40, 1), 1e-6, 5), ConfigError);
        const TaskStream tiny = regression_stream(14, 8, 1);
        CHECK_THROWS_AS(ridge_oracle(core, tiny, 0.0, 2), SolverError);
    }
    SUBCASE("classification regresses one-hot labels") {
        const TaskStream stream = gen_delayed_recall(3000, 1, 4);
        MaelstromConfig big = mc;
        big.units = 50;
        const RidgeResult r = ridge_oracle(build_core(big), stream, 1e-6, 50);
        CHECK(r.summary.metric == "accuracy");
        CHECK(*r.summary.eval_metric > 0.95);
        CHECK(r.readout.rows() == 2);
    }
}

TEST_CASE("memoryless baseline") {
    SUBCASE("matches the full assembly on a memory-free target") {
        auto f = [](double u) { return std::sin(3.0 * u); };
        std::size_t close = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const TaskStream stream = regression_stream(6000, 5000, seed, f);
            const AssemblySpec spec = default_spec(seed, stream);
            Assembly full(spec);
            const double full_nmse = *run_online(TrainerConfig{}, full, stream).summary.eval_metric;
            const double mem_nmse = *memoryless_baseline(spec, stream, TrainerConfig{}).eval_metric;
            close += std::abs(full_nmse - mem_nmse) < 0.05 ? 1 : 0;
        }
        CHECK(close >= 4);
    }
    SUBCASE("deterministic") {
        const TaskStream stream = regression_stream(300, 200, 3);
        const AssemblySpec spec = default_spec(1, stream);
        const RunSummary a = memoryless_baseline(spec, stream, TrainerConfig{});
        const RunSummary b = memoryless_baseline(spec, stream, TrainerConfig{});
        CHECK(a.eval_metric == b.eval_metric);
        CHECK(a.train_metric == b.train_metric);
    }
}

TEST_CASE("shipped tasks train without divergence under default settings") {
    for (const char* id : {"narma10", "delayed_recall", "temporal_parity", "mackey_glass"}) {
        TaskConfig task;
        task.id = id;
        const TaskStream stream = make_task(task, 1);
        ExperimentConfig cfg;
        Assembly a(cfg.assembly_for(1, Mode::full, stream));
        CHECK_NOTHROW(run_online(cfg.trainer, a, stream));
    }
}
