#include "maelstrom/core.hpp"

#include <cmath>
#include <string>

#include "maelstrom/bytes.hpp"
#include "maelstrom/error.hpp"

namespace maelstrom {

namespace {

constexpr std::string_view kCoreMagic = "MAELCORE";
constexpr std::uint32_t kCoreVersion = 1;

// sub-streams of Rng(seed) used by build_core
constexpr std::uint64_t kRecurrentStream = 1;  // + attempt
constexpr std::uint64_t kDriveStream = 100;
constexpr std::uint64_t kBiasStream = 101;
constexpr std::uint64_t kFeedbackStream = 102;
constexpr int kMaxRecurrentAttempts = 10;

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(std::string(what) + " must be " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
    }
}

Matrix uniform_or_empty(std::size_t rows, std::size_t cols, const MaelstromConfig& c, Rng rng) {
    if (rows == 0 || cols == 0) return Matrix(rows, cols);
    return random_uniform_matrix(rows, cols, c.weight_low, c.weight_high, rng);
}

}  // namespace

void MaelstromConfig::validate() const {
    if (units < 1) throw ConfigError("maelstrom.units must be >= 1");
    if (!(spectral_radius > 0.0) || !std::isfinite(spectral_radius)) {
        throw ConfigError("maelstrom.spectral_radius must be > 0");
    }
    if (!(leak_rate > 0.0 && leak_rate <= 1.0)) throw ConfigError("maelstrom.leak_rate must lie in (0, 1]");
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("maelstrom.density must lie in (0, 1]");
    if (!(weight_low < weight_high) || !std::isfinite(weight_low) || !std::isfinite(weight_high)) {
        throw ConfigError("maelstrom weight range needs low < high");
    }
}

MaelstromCore::MaelstromCore(MaelstromConfig config, Matrix w_rec, Matrix w_drive, Vector bias,
                             Matrix w_fb)
    : config_(config) {
    config_.validate();
    const std::size_t n = config_.units;
    expect_shape(w_rec, n, n, "W_rec");
    expect_shape(w_drive, n, config_.input_dim, "W_drive");
    if (bias.size() != n) throw ShapeError("bias must have one entry per unit");
    expect_shape(w_fb, config_.feedback_dim, n, "W_fb");
    w_rec_ = ad::Param("maelstrom.w_rec", std::move(w_rec), true);
    w_drive_ = ad::Param("maelstrom.w_drive", std::move(w_drive), true);
    bias_ = ad::Param("maelstrom.bias", Matrix::column(bias), true);
    w_fb_ = ad::Param("maelstrom.w_fb", std::move(w_fb), true);
}

bool MaelstromCore::operator==(const MaelstromCore& other) const {
    return config_ == other.config_ && w_rec() == other.w_rec() && w_drive() == other.w_drive() &&
           bias() == other.bias() && w_fb() == other.w_fb();
}

MaelstromCore build_core(const MaelstromConfig& config) {
    config.validate();
    const Rng root(config.seed);
    const std::size_t n = config.units;

    Matrix w_rec;
    bool scaled = false;
    for (int attempt = 0; attempt < kMaxRecurrentAttempts && !scaled; ++attempt) {
        Rng rng = root.split(kRecurrentStream + static_cast<std::uint64_t>(attempt));
        const Matrix raw = random_sparse_matrix(n, n, config.density, config.weight_low,
                                                config.weight_high, rng);
        try {
            w_rec = scale_to_spectral_radius(raw, config.spectral_radius);
            scaled = true;
        } catch (const UnscalableError&) {
        }
    }
    if (!scaled) {
        throw UnscalableError("W_rec had zero spectral radius in " +
                              std::to_string(kMaxRecurrentAttempts) +
                              " draws; increase maelstrom.density");
    }

    Matrix w_drive = uniform_or_empty(n, config.input_dim, config, root.split(kDriveStream));
    Matrix bias = uniform_or_empty(n, 1, config, root.split(kBiasStream));
    Matrix w_fb = uniform_or_empty(config.feedback_dim, n, config, root.split(kFeedbackStream));
    return MaelstromCore(config, std::move(w_rec), std::move(w_drive),
                         Vector(bias.data().begin(), bias.data().end()), std::move(w_fb));
}

MaelstromState step(const MaelstromCore& core, const MaelstromState& state,
                    std::span<const double> drive) {
    if (drive.size() != core.input_dim()) {
        throw ShapeError("drive has " + std::to_string(drive.size()) + " entries, core expects " +
                         std::to_string(core.input_dim()));
    }
    if (state.x.size() != core.units()) throw ShapeError("state size does not match core units");
    if (!all_finite(drive)) throw InputError("drive must be finite");

    const auto b = core.bias().data();
    Vector pre(b.begin(), b.end());
    matvec_accumulate(core.w_rec(), state.x, pre);
    matvec_accumulate(core.w_drive(), drive, pre);

    const double alpha = core.leak_rate();
    MaelstromState next{Vector(core.units()), state.t + 1};
    for (std::size_t i = 0; i < pre.size(); ++i) {
        next.x[i] = (1.0 - alpha) * state.x[i] + alpha * std::tanh(pre[i]);
    }
    return next;
}

Vector feedback(const MaelstromCore& core, const MaelstromState& state) {
    return matvec(core.w_fb(), state.x);
}

std::vector<double> esp_probe(const MaelstromCore& core, std::span<const Vector> drives,
                              std::span<const double> x0_a, std::span<const double> x0_b) {
    if (!all_finite(x0_a) || !all_finite(x0_b)) throw InputError("esp_probe initial states must be finite");
    MaelstromState a{Vector(x0_a.begin(), x0_a.end()), 0};
    MaelstromState b{Vector(x0_b.begin(), x0_b.end()), 0};
    std::vector<double> curve;
    curve.reserve(drives.size());
    for (const Vector& d : drives) {
        a = step(core, a, d);
        b = step(core, b, d);
        curve.push_back(norm(difference(a.x, b.x)));
    }
    return curve;
}

double divergence_rate(const MaelstromCore& core, const DivergenceOptions& opts, Rng& rng) {
    if (!(opts.perturbation > 0.0)) throw ConfigError("perturbation must be positive");
    if (opts.steps == 0) throw ConfigError("divergence_rate needs at least one step");

    Vector drive(core.input_dim(), 0.0);
    auto next_drive = [&]() -> const Vector& {
        for (double& d : drive) d = opts.drive_amplitude == 0.0 ? 0.0 : rng.uniform(-opts.drive_amplitude, opts.drive_amplitude);
        return drive;
    };

    MaelstromState ref = MaelstromState::zero(core.units());
    for (std::size_t k = 0; k < opts.washout; ++k) ref = step(core, ref, next_drive());

    Vector dir(core.units());
    for (double& v : dir) v = rng.uniform(-1.0, 1.0);
    const double dir_norm = norm(dir);
    MaelstromState probe = ref;
    for (std::size_t i = 0; i < dir.size(); ++i) probe.x[i] += opts.perturbation * dir[i] / dir_norm;

    double total = 0.0;
    for (std::size_t k = 0; k < opts.steps; ++k) {
        const Vector& d = next_drive();
        ref = step(core, ref, d);
        probe = step(core, probe, d);
        const Vector delta = difference(probe.x, ref.x);
        const double dist = norm(delta);
        if (dist == 0.0) return kCollapsedRate;
        total += std::log(dist / opts.perturbation);
        for (std::size_t i = 0; i < delta.size(); ++i) {
            probe.x[i] = ref.x[i] + delta[i] * (opts.perturbation / dist);
        }
    }
    return total / static_cast<double>(opts.steps);
}

std::string serialize(const MaelstromCore& core) {
    const MaelstromConfig& c = core.config();
    bytes::Writer w;
    w.raw(kCoreMagic);
    w.u32(kCoreVersion);
    w.u64(c.units);
    w.f64(c.spectral_radius);
    w.f64(c.leak_rate);
    w.f64(c.density);
    w.u64(c.input_dim);
    w.u64(c.feedback_dim);
    w.f64(c.weight_low);
    w.f64(c.weight_high);
    w.u64(c.seed);
    w.matrix(core.w_rec());
    w.matrix(core.w_drive());
    w.matrix(core.bias());
    w.matrix(core.w_fb());
    return w.take();
}

MaelstromCore deserialize_core(std::string_view in) {
    bytes::Reader r(in);
    if (r.raw(kCoreMagic.size()) != kCoreMagic) throw InputError("not a maelstrom core snapshot");
    if (const auto v = r.u32(); v != kCoreVersion) {
        throw InputError("unsupported core snapshot version " + std::to_string(v));
    }
    MaelstromConfig c;
    c.units = r.u64();
    c.spectral_radius = r.f64();
    c.leak_rate = r.f64();
    c.density = r.f64();
    c.input_dim = r.u64();
    c.feedback_dim = r.u64();
    c.weight_low = r.f64();
    c.weight_high = r.f64();
    c.seed = r.u64();
    Matrix w_rec = r.matrix();
    Matrix w_drive = r.matrix();
    const Matrix bias = r.matrix();
    Matrix w_fb = r.matrix();
    if (!r.done()) throw InputError("trailing bytes after core snapshot");
    return MaelstromCore(c, std::move(w_rec), std::move(w_drive),
                         Vector(bias.data().begin(), bias.data().end()), std::move(w_fb));
}

}  // namespace maelstrom
