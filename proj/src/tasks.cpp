#include "maelstrom/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maelstrom/error.hpp"
#include "maelstrom/rng.hpp"

namespace maelstrom {

namespace {

constexpr std::uint64_t kNarmaStream = 10;
constexpr std::uint64_t kBitsStream = 20;
constexpr std::uint64_t kMackeyGlassStream = 30;
constexpr int kMaxNarmaRedraws = 100;
constexpr double kNarmaDivergence = 10.0;
constexpr std::size_t kMinTrainWashout = 50;

std::vector<int> random_bits(std::size_t length, std::uint64_t seed) {
    Rng rng(seed, kBitsStream);
    std::vector<int> bits(length);
    for (int& b : bits) b = rng.bit();
    return bits;
}

}  // namespace

const char* to_string(Phase p) noexcept { return p == Phase::train ? "train" : "eval"; }

const char* to_string(TaskKind k) noexcept {
    return k == TaskKind::regression ? "regression" : "classification";
}

std::size_t TaskStream::train_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [](const Record& r) { return r.phase == Phase::train; }));
}

TaskStream split(TaskStream stream, double train_frac) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    const auto n = stream.records.size();
    const auto n_train = static_cast<std::size_t>(std::lround(train_frac * static_cast<double>(n)));
    for (std::size_t t = 0; t < n; ++t) stream.records[t].phase = t < n_train ? Phase::train : Phase::eval;
    return stream;
}

std::vector<double> narma10_targets(std::span<const double> u) {
    const std::size_t n = u.size();
    // y[k] holds y(k); y(0) = 0
    std::vector<double> y(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double window = 0.0;
        for (std::size_t i = 0; i < 10 && i <= t; ++i) window += y[t - i];
        const double u_lag = t >= 9 ? u[t - 9] : 0.0;
        y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * u_lag * u[t] + 0.1;
    }
    return {y.begin() + 1, y.end()};
}

TaskStream gen_narma10(std::size_t length, std::uint64_t seed, double train_frac) {
    if (length <= 20) throw ConfigError("narma10 needs length > 20");
    const Rng root(seed, kNarmaStream);
    for (int attempt = 0; attempt < kMaxNarmaRedraws; ++attempt) {
        Rng rng = root.split(static_cast<std::uint64_t>(attempt));
        std::vector<double> u(length);
        for (double& x : u) x = rng.uniform(0.0, 0.5);
        const std::vector<double> y = narma10_targets(u);
        const bool diverged = std::any_of(y.begin(), y.end(), [](double v) {
            return !std::isfinite(v) || std::abs(v) > kNarmaDivergence;
        });
        if (diverged) continue;

        TaskStream s;
        s.task_id = "narma10";
        s.kind = TaskKind::regression;
        s.seed = seed;
        s.metadata = {{"length", static_cast<double>(length)}, {"order", 10.0}};
        s.records.reserve(length);
        for (std::size_t t = 0; t < length; ++t) s.records.push_back({{u[t]}, {y[t]}, std::nullopt});
        return split(std::move(s), train_frac);
    }
    throw ConfigError("narma10 diverged on every redraw");
}

TaskStream delayed_recall_from_bits(std::span<const int> bits, std::size_t delay) {
    if (delay < 1) throw ConfigError("delayed_recall needs delay >= 1");
    TaskStream s;
    s.task_id = "delayed_recall";
    s.kind = TaskKind::classification;
    s.output_dim = 2;
    s.metadata = {{"delay", static_cast<double>(delay)}};
    for (std::size_t t = 0; t < bits.size(); ++t) {
        Record r{{static_cast<double>(bits[t])}, {}, std::nullopt};
        if (t >= delay) r.label = static_cast<std::size_t>(bits[t - delay]);
        s.records.push_back(std::move(r));
    }
    return s;
}

TaskStream gen_delayed_recall(std::size_t length, std::size_t delay, std::uint64_t seed, double train_frac) {
    if (delay < 1) throw ConfigError("delayed_recall needs delay >= 1");
    if (length <= delay + kMinTrainWashout) {
        throw ConfigError("delayed_recall needs length > delay + " + std::to_string(kMinTrainWashout));
    }
    TaskStream s = delayed_recall_from_bits(random_bits(length, seed), delay);
    s.seed = seed;
    s.metadata.insert(s.metadata.begin(), {"length", static_cast<double>(length)});
    return split(std::move(s), train_frac);
}

TaskStream temporal_parity_from_bits(std::span<const int> bits, std::size_t window) {
    if (window < 2) throw ConfigError("temporal_parity needs window >= 2");
    TaskStream s;
    s.task_id = "temporal_parity";
    s.kind = TaskKind::classification;
    s.output_dim = 2;
    s.metadata = {{"window", static_cast<double>(window)}};
    for (std::size_t t = 0; t < bits.size(); ++t) {
        Record r{{static_cast<double>(bits[t])}, {}, std::nullopt};
        if (t + 1 >= window) {
            int parity = 0;
            for (std::size_t k = t + 1 - window; k <= t; ++k) parity ^= bits[k];
            r.label = static_cast<std::size_t>(parity);
        }
        s.records.push_back(std::move(r));
    }
    return s;
}

TaskStream gen_temporal_parity(std::size_t length, std::size_t window, std::uint64_t seed,
                               double train_frac) {
    if (window < 2) throw ConfigError("temporal_parity needs window >= 2");
    if (length <= window) throw ConfigError("temporal_parity needs length > window");
    TaskStream s = temporal_parity_from_bits(random_bits(length, seed), window);
    s.seed = seed;
    s.metadata.insert(s.metadata.begin(), {"length", static_cast<double>(length)});
    return split(std::move(s), train_frac);
}

std::vector<double> mackey_glass_series(std::size_t samples, double tau, std::span<const double> history,
                                        std::size_t transient) {
    constexpr double dt = 0.1;
    constexpr std::size_t subsample = 10;
    const auto lag = static_cast<std::size_t>(std::lround(tau / dt));
    if (!(tau > 0.0) || lag == 0) throw ConfigError("mackey_glass needs tau > 0");
    if (history.size() != lag + 1) {
        throw ConfigError("mackey_glass history needs tau/0.1 + 1 = " + std::to_string(lag + 1) + " values");
    }
    const std::size_t total_steps = (samples + transient) * subsample;
    std::vector<double> x(history.begin(), history.end());
    x.reserve(x.size() + total_steps);
    std::vector<double> out;
    out.reserve(samples);
    for (std::size_t k = 1; k <= total_steps; ++k) {
        const double now = x.back();
        const double delayed = x[x.size() - 1 - lag];
        x.push_back(now + dt * (0.2 * delayed / (1.0 + std::pow(delayed, 10)) - 0.1 * now));
        if (k % subsample == 0 && k / subsample > transient) out.push_back(x.back());
    }
    return out;
}

TaskStream gen_mackey_glass(std::size_t length, double tau, std::uint64_t seed, double train_frac) {
    if (length < 2) throw ConfigError("mackey_glass needs length >= 2");
    Rng rng(seed, kMackeyGlassStream);
    const auto lag = static_cast<std::size_t>(std::lround(tau / 0.1));
    std::vector<double> history(lag + 1);
    for (double& h : history) h = 1.2 + rng.uniform(-0.1, 0.1);
    std::vector<double> series = mackey_glass_series(length + 1, tau, history);

    TaskStream s;
    s.task_id = "mackey_glass";
    s.kind = TaskKind::regression;
    s.seed = seed;
    s.metadata = {{"length", static_cast<double>(length)}, {"tau", tau}};
    for (std::size_t t = 0; t < length; ++t) s.records.push_back({{series[t]}, {series[t + 1]}, std::nullopt});
    s = split(std::move(s), train_frac);

    const std::size_t n_train = s.train_count();
    if (n_train < 2) throw ConfigError("mackey_glass train phase too short to normalize");
    double mean = 0.0;
    for (std::size_t t = 0; t < n_train; ++t) mean += series[t];
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t t = 0; t < n_train; ++t) var += (series[t] - mean) * (series[t] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n_train));
    for (Record& r : s.records) {
        r.stimulus[0] = (r.stimulus[0] - mean) / sd;
        r.target[0] = (r.target[0] - mean) / sd;
    }
    return s;
}

}  // namespace maelstrom
