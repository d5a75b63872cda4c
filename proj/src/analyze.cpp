#include "maelstrom/analyze.hpp"

#include <algorithm>
#include <cmath>

#include "maelstrom/error.hpp"
#include "maelstrom/spec_json.hpp"

namespace maelstrom {

namespace {

constexpr std::uint64_t kProbeStream = 40;
constexpr std::uint64_t kDivergenceStream = 41;

double squared_correlation(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab * sab / (saa * sbb), 0.0, 1.0);
}

}  // namespace

std::size_t default_d_max(std::size_t units) noexcept { return std::min<std::size_t>(2 * units, 200); }

MemoryCapacityReport memory_capacity(const MaelstromCore& core, const MemoryCapacityOptions& opts) {
    if (!(opts.lambda > 0.0)) throw ConfigError("memory capacity needs lambda > 0");
    const std::size_t d_max = opts.d_max == 0 ? default_d_max(core.units()) : opts.d_max;
    const std::size_t start = std::max(opts.washout, d_max);
    if (opts.seq_len < start + 4 * (d_max + core.units())) {
        throw ConfigError("memory capacity needs seq_len much larger than d_max and units");
    }
    if (!(opts.fit_fraction > 0.0 && opts.fit_fraction < 1.0)) {
        throw ConfigError("fit_fraction must lie in (0, 1)");
    }

    Rng rng(opts.seed, kProbeStream);
    std::vector<double> u(opts.seq_len);
    for (double& v : u) v = rng.uniform(-1.0, 1.0);

    const std::size_t n = core.units();
    const std::size_t samples = opts.seq_len - start;
    const auto n_fit = static_cast<std::size_t>(opts.fit_fraction * static_cast<double>(samples));
    Matrix x_fit(n_fit, n + 1);
    Matrix y_fit(n_fit, d_max);
    Matrix x_test(samples - n_fit, n + 1);

    MaelstromState state = MaelstromState::zero(n);
    Vector drive(core.input_dim());
    for (std::size_t t = 0; t < opts.seq_len; ++t) {
        std::fill(drive.begin(), drive.end(), u[t]);
        state = step(core, state, drive);
        if (t < start) continue;
        const std::size_t k = t - start;
        auto row = k < n_fit ? x_fit.row(k) : x_test.row(k - n_fit);
        std::copy(state.x.begin(), state.x.end(), row.begin());
        row[n] = 1.0;
        if (k < n_fit)
            for (std::size_t d = 1; d <= d_max; ++d) y_fit(k, d - 1) = u[t - d];
    }

    const Matrix coef = ridge_regression(x_fit, y_fit, opts.lambda);
    MemoryCapacityReport report;
    report.units = n;
    report.r2.resize(d_max);
    std::vector<double> recon(x_test.rows());
    std::vector<double> truth(x_test.rows());
    for (std::size_t d = 1; d <= d_max; ++d) {
        for (std::size_t k = 0; k < x_test.rows(); ++k) {
            const auto row = x_test.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j <= n; ++j) s += row[j] * coef(j, d - 1);
            recon[k] = s;
            truth[k] = u[start + n_fit + k - d];
        }
        report.r2[d - 1] = squared_correlation(recon, truth);
        report.total += report.r2[d - 1];
    }

    Json digest_src = to_json(core.config());
    digest_src["seq_len"] = opts.seq_len;
    digest_src["d_max"] = d_max;
    digest_src["lambda"] = opts.lambda;
    digest_src["probe_seed"] = opts.seed;
    digest_src["washout"] = opts.washout;
    digest_src["fit_fraction"] = opts.fit_fraction;
    report.config_digest = digest(digest_src);
    return report;
}

std::vector<RegimeRow> regime_sweep(const MaelstromConfig& tmpl, std::span<const double> radii,
                                    std::span<const std::uint64_t> seeds, const RegimeSweepOptions& opts) {
    std::vector<RegimeRow> rows;
    rows.reserve(radii.size() * seeds.size());
    for (double rho : radii) {
        if (!(rho > 0.0)) throw ConfigError("regime_sweep radii must be positive");
        for (std::uint64_t seed : seeds) {
            MaelstromConfig c = tmpl;
            c.spectral_radius = rho;
            c.seed = seed;
            const MaelstromCore core = build_core(c);
            Rng rng(seed, kDivergenceStream);
            MemoryCapacityOptions mc = opts.capacity;
            mc.seed = seed;
            rows.push_back({rho, seed, spectral_norm(core.w_rec()).value,
                            divergence_rate(core, opts.divergence, rng), memory_capacity(core, mc).total});
        }
    }
    return rows;
}

}  // namespace maelstrom
