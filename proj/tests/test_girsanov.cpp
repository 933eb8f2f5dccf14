#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/cutoff.hpp"
#include "wfl/drift.hpp"
#include "wfl/fourier.hpp"
#include "wfl/girsanov.hpp"
#include "wfl/state.hpp"
#include "wfl/stats.hpp"

using Catch::Approx;

TEST_CASE("inversion guards the division floor", "[girsanov]") {
    CHECK_THROWS_AS(wfl::require_invertible(wfl::SpectralDecay::none()), wfl::inversion_error);
    // (1 + 40^2)^{-4} ~ 1.5e-13 sits below the 1e-12 floor
    CHECK_THROWS_AS(wfl::require_invertible(wfl::SpectralDecay(8.0, 40.0, 0.5)),
                    wfl::inversion_error);
    CHECK_NOTHROW(wfl::require_invertible(wfl::SpectralDecay(2.0, 25.6, 0.1)));
}

TEST_CASE("zero target inverts to the zero perturbation", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 12.8, 0.1);
    const auto grid = wfl::make_conjugate_grid(decay, 0.0);
    const auto r = wfl::invert_constant_mass([](double) { return 0.0; }, grid, decay, -2.0, 2.0);
    for (double v : r.h_re) CHECK(v == 0.0);
    for (double v : r.h_im) CHECK(v == 0.0);
    CHECK(r.l2_norm_sq == 0.0);
    CHECK(r.residual_sup == 0.0);

    CHECK_THROWS_AS(wfl::invert_constant_mass(nullptr, grid, decay, -2.0, 2.0),
                    wfl::config_error);
    CHECK_THROWS_AS(
        wfl::invert_constant_mass([](double) { return 0.0; }, grid, decay, 2.0, 2.0),
        wfl::config_error);
}

TEST_CASE("drift built from a known perturbation is recovered exactly", "[girsanov]") {
    // plant h, realize its drift, invert the drift, compare
    const wfl::SpectralDecay decay(2.0, 12.8, 0.1);
    const auto grid = wfl::make_conjugate_grid(decay, 0.0);
    std::vector<double> h_re(decay.node_count(), 0.0), h_im(decay.node_count(), 0.0);
    for (std::size_t j = 0; j < decay.node_count(); ++j) {
        const double k = decay.k_nodes()[j];
        h_re[j] = std::exp(-0.5 * k * k);          // smooth even profile
        h_im[j] = k * std::exp(-0.7 * k * k);      // smooth odd profile
    }
    const auto target = [&](double x) { return wfl::reconstruct_drift_at(decay, h_re, h_im, x); };

    const auto r = wfl::invert_constant_mass(target, grid, decay, -3.0, 3.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < decay.node_count(); ++j) {
        worst = std::max(worst, std::abs(r.h_re[j] - h_re[j]));
        worst = std::max(worst, std::abs(r.h_im[j] - h_im[j]));
    }
    CHECK(worst < 1e-8);
    CHECK(r.residual_sup < 1e-6);

    // planted norm: sum (h_re^2 + h_im^2) dk
    double norm = 0.0;
    for (std::size_t j = 0; j < decay.node_count(); ++j)
        norm += wfl::sqr(h_re[j]) + wfl::sqr(h_im[j]);
    norm *= decay.dk();
    CHECK(r.l2_norm_sq == Approx(norm).epsilon(1e-8));
}

TEST_CASE("window-compact smooth target inverts with tiny residual", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 12.8, 0.1);
    const auto grid = wfl::make_conjugate_grid(decay, 0.0);
    const auto bump = [](double x) { return 0.8 * std::exp(-0.5 * x * x); };
    const auto r = wfl::invert_constant_mass(bump, grid, decay, -4.0, 4.0);
    CHECK(r.residual_sup < 1e-8);
    // even target: the sine part of the spectrum vanishes
    for (double v : r.h_im) CHECK(std::abs(v) < 1e-10);
    CHECK(r.l2_norm_sq > 0.0);
}

TEST_CASE("inversion residual decreases under grid refinement", "[girsanov]") {
    // raised cosine, compact on [-1, 1]: off-grid residual shrinks as the
    // window widens and dk refines jointly
    const auto target = [](double x) {
        return std::abs(x) >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(wfl::pi * x));
    };
    std::vector<double> residuals;
    for (const auto& [K, dk] : std::vector<std::pair<double, double>>{
             {6.4, 0.2}, {12.8, 0.1}, {25.6, 0.05}}) {
        const wfl::SpectralDecay decay(2.0, K, dk);
        const auto grid = wfl::make_conjugate_grid(decay, 0.0);
        residuals.push_back(
            wfl::invert_constant_mass(target, grid, decay, -1.5, 1.5).residual_sup);
    }
    CHECK(residuals[1] < residuals[0]);
    CHECK(residuals[2] < residuals[1]);
}

TEST_CASE("general-mass inversion reduces to constant-mass for flat kernels", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 12.8, 0.1);
    const auto y = wfl::make_uniform_state(32, -1.0, 1.0);
    const auto drift = wfl::DriftSpec::b2([](double m) { return std::cos(2.0 * m); }, 1.0);
    const wfl::CutoffProfile profile(-1.0, 1.0);

    const auto general =
        wfl::invert_general(drift, y, wfl::MassKernel::constant(), profile, decay);

    // same drift value everywhere (b2 is x-independent), mass identically 1:
    // the general path must match the constant-mass inversion of b * cutoff
    const auto grid = wfl::make_conjugate_grid(decay, 0.0);
    const double bval = drift.bind(y)(0.0);
    const auto direct = wfl::invert_constant_mass(
        [&](double x) { return bval * wfl::eval_cutoff(profile, x); }, grid, decay, -1.0, 1.0);
    REQUIRE(general.h_re.size() == direct.h_re.size());
    for (std::size_t j = 0; j < general.h_re.size(); ++j) {
        CHECK(general.h_re[j] == Approx(direct.h_re[j]).margin(1e-12));
        CHECK(general.h_im[j] == Approx(direct.h_im[j]).margin(1e-12));
    }

    // the residual is band-limit truncation of the C^2 cutoff, identical in
    // both paths up to probe placement (the direct probe set is denser)
    CHECK(general.residual_sup < 2e-2);
    CHECK(general.residual_sup <= direct.residual_sup * 1.5 + 1e-12);
}

TEST_CASE("general-mass inversion with a genuine interaction kernel", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 25.6, 0.1);
    const auto y = wfl::make_gaussian_state(64, 0.0, 0.5);
    const auto kernel = wfl::MassKernel::gaussian(1.0);
    const auto drift = wfl::DriftSpec::b2([](double m) { return 0.5 + 0.3 * std::sin(m); }, 0.8);
    const wfl::CutoffProfile profile(y.values.front(), y.values.back());

    const auto r = wfl::invert_general(drift, y, kernel, profile, decay);
    CHECK(r.residual_sup < 5e-3);
    CHECK(r.l2_norm_sq > 0.0);
    CHECK(std::isfinite(r.l2_norm_sq));
}

TEST_CASE("general-mass inversion input validation", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 12.8, 0.1);
    const auto y = wfl::make_uniform_state(16, -1.0, 1.0);
    const auto kernel = wfl::MassKernel::constant();
    const wfl::CutoffProfile profile(-1.0, 1.0);

    // non-increasing state
    wfl::QuantileState flat;
    flat.values.assign(16, 0.3);
    const auto ok_drift = wfl::DriftSpec::b2([](double) { return 1.0; }, 1.0);
    CHECK_THROWS_AS(wfl::invert_general(ok_drift, flat, kernel, profile, decay),
                    wfl::domain_error);

    // drift smoothness metadata below the kernel decay order
    const auto rough = wfl::DriftSpec::b1([](double, double y_) { return std::tanh(y_); },
                                          {1.0}, 1.0, true);  // order 0 < alpha 2
    CHECK_THROWS_AS(wfl::invert_general(rough, y, kernel, profile, decay), wfl::config_error);

    // cutoff band reaching past the transform window
    const wfl::CutoffProfile wide(-40.0, 40.0);
    CHECK_THROWS_AS(wfl::invert_general(ok_drift, y, kernel, wide, decay), wfl::grid_error);
}

TEST_CASE("split inversion carries only the smoothing difference", "[girsanov]") {
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    const auto base = wfl::make_uniform_histogram(lay);

    wfl::SpectralDriftSpec spec;
    spec.eta = 5.0 / 3.0;
    spec.delta = 2.0 / 3.0;
    spec.alpha = 2.0;
    spec.decay = wfl::SpectralDecay(2.0, 12.8, 0.1);
    spec.lambda_env.assign(spec.decay.node_count(), 1.0);
    spec.layout = lay;
    spec.u_re = wfl::make_bin_mass_functional({0, 1}, 0.0, 1.0, spec.delta);
    spec.family = wfl::make_mixture_family(base, {0.2, 0.5, 0.8}, {16});
    const auto reg = wfl::regularize_lambda(spec);

    wfl::HistogramMeasure mu(lay);
    mu.probs[0] = 0.4;
    mu.probs[16] = 0.6;
    const auto r = wfl::invert_interpolation_split(reg, mu);
    REQUIRE(r.h_re.size() == spec.decay.node_count());

    // h_j = <k>^{-eta} (lambda_j - lambda~_j) / f_j, verified per node
    auto raw = reg;
    raw.regularized = false;
    const auto lr = wfl::lambda_re_values(raw, mu);
    const auto lrs = wfl::lambda_re_values(reg, mu);
    double norm = 0.0;
    for (std::size_t j = 0; j < r.h_re.size(); ++j) {
        const double k = spec.decay.k_nodes()[j];
        const double w = std::pow(1.0 + k * k, -0.5 * spec.eta);
        const double expect = w * (lr[j] - lrs[j]) / spec.decay.f_values()[j];
        CHECK(r.h_re[j] == Approx(expect).margin(1e-14));
        CHECK(r.h_im[j] == 0.0);  // no u_im
        norm += wfl::sqr(r.h_re[j]);
    }
    CHECK(r.l2_norm_sq == Approx(norm * spec.decay.dk()).epsilon(1e-12));

    // smoothing a measure-independent functional leaves nothing to carry
    auto flat = reg;
    flat.u_re = [](const wfl::HistogramMeasure&) { return 0.3; };
    const auto none = wfl::invert_interpolation_split(flat, mu);
    for (double v : none.h_re) CHECK(v == Approx(0.0).margin(1e-15));
    CHECK(none.l2_norm_sq == Approx(0.0).margin(1e-15));
}

TEST_CASE("ledger accumulation arithmetic", "[girsanov]") {
    const wfl::SpectralDecay decay(2.0, 3.2, 0.2);
    wfl::InversionResult h;
    h.h_re.assign(decay.node_count(), 0.0);
    h.h_im.assign(decay.node_count(), 0.0);
    h.l2_norm_sq = 0.0;

    wfl::NoiseStream s{9, wfl::noise_tag::common, 0, 0, false};
    const auto inc = wfl::sample_increment(s, decay, 0.1);

    // zero perturbation: weight stays exactly 1
    wfl::GirsanovLedger ledger;
    ledger.novikov_bound = 10.0;
    ledger = wfl::accumulate(ledger, h, inc);
    CHECK(ledger.log_weight == 0.0);
    CHECK(ledger.int_h_sq == 0.0);
    CHECK_FALSE(ledger.exceeded);
    CHECK(ledger.weight() == 1.0);

    // constant perturbation: int |h|^2 grows by l2 * dt each step
    wfl::InversionResult hc = h;
    hc.h_re.assign(decay.node_count(), 0.5);
    hc.l2_norm_sq = 0.25 * static_cast<double>(decay.node_count()) * decay.dk();
    wfl::GirsanovLedger lc;
    lc.novikov_bound = 1e9;
    for (int step = 0; step < 7; ++step) lc = wfl::accumulate(lc, hc, inc);
    CHECK(lc.int_h_sq == Approx(7.0 * hc.l2_norm_sq * 0.1).epsilon(1e-12));

    // breaching the declared bound sets the flag without throwing
    wfl::GirsanovLedger tight;
    tight.novikov_bound = 1e-6;
    tight = wfl::accumulate(tight, hc, inc);
    CHECK(tight.exceeded);

    wfl::InversionResult bad;
    bad.h_re.assign(2, 0.0);
    bad.h_im.assign(2, 0.0);
    CHECK_THROWS_AS(wfl::accumulate(wfl::GirsanovLedger{}, bad, inc), wfl::grid_error);
}

TEST_CASE("exponential weights are unbiased over the driftless ensemble", "[girsanov]") {
    // E[G] = 1 exactly per Gaussian step; Monte Carlo over paths checks the
    // full product within standard error
    const wfl::SpectralDecay decay(2.0, 6.4, 0.2);
    wfl::InversionResult h;
    h.h_re.assign(decay.node_count(), 0.0);
    h.h_im.assign(decay.node_count(), 0.0);
    for (std::size_t j = 0; j < decay.node_count(); ++j) {
        const double k = decay.k_nodes()[j];
        h.h_re[j] = 0.3 * std::exp(-k * k);
    }
    for (double v : h.h_re) h.l2_norm_sq += v * v;
    h.l2_norm_sq *= decay.dk();

    const double dt = 0.05;
    const int steps = 20;  // int |h|^2 dt stays ~0.1: light-tailed weights
    wfl::RunningStats weights;
    for (std::uint64_t path = 0; path < 2000; ++path) {
        wfl::NoiseStream s{31, wfl::noise_tag::common, path, 0, false};
        wfl::GirsanovLedger ledger;
        ledger.novikov_bound = 1e9;
        for (int t = 0; t < steps; ++t)
            ledger = wfl::accumulate(ledger, h, wfl::sample_increment(s, decay, dt));
        weights.add(ledger.weight());
    }
    CHECK(std::abs(weights.mean() - 1.0) <= 4.0 * weights.standard_error());
}

TEST_CASE("square-summability of the inverted drift depends on the decay order", "[girsanov]") {
    // target synthesized in the eta = 2 class (window-compact in x); dividing
    // by a faster-decaying kernel (alpha > eta) blows the l2 norm up under
    // refinement, a slower one (alpha < eta) keeps it bounded
    const double eta = 2.0;
    const auto make_target = [eta](const wfl::SpectralDecay& synth) {
        return [&synth, eta](double x) {
            const std::vector<double> ones(synth.node_count(), 1.0);
            const std::vector<double> zeros(synth.node_count(), 0.0);
            return wfl::synthesize_from_lambda(synth, eta, ones, zeros, x);
        };
    };

    const std::vector<std::pair<double, double>> grids = {{6.4, 0.1}, {12.8, 0.1}, {25.6, 0.1}};
    const auto norms_for = [&](double alpha) {
        std::vector<double> norms;
        for (const auto& [K, dk] : grids) {
            const wfl::SpectralDecay decay(alpha, K, dk);
            const wfl::SpectralDecay synth(2.0, K, dk);  // fixed synthesis class
            const auto grid = wfl::make_conjugate_grid(decay, 0.0);
            const auto target = make_target(synth);
            norms.push_back(
                wfl::invert_constant_mass(target, grid, decay, -1.0, 1.0).l2_norm_sq);
        }
        return norms;
    };

    // alpha > eta: |h(k)| ~ <k>^{alpha - eta} = <k>^{0.4}, so the norm grows
    // like K^{1.8}, a factor 2^{1.8} ~ 3.5 per doubling of the window
    const auto divergent = norms_for(2.4);
    CHECK(divergent[1] / divergent[0] > 2.5);
    CHECK(divergent[2] / divergent[1] > 2.5);
    CHECK(divergent[2] / divergent[0] > 8.0);

    const auto convergent = norms_for(1.2);  // alpha < eta - 1/2: h decays, norm settles
    CHECK(convergent[1] / convergent[0] < 1.3);
    CHECK(convergent[2] / convergent[1] < 1.3);
}

TEST_CASE("reweighted driftless runs couple to drifted runs", "[girsanov]") {
    wfl::SimConfig cfg;
    cfg.T = 0.2;
    cfg.dt = 0.02;
    cfg.n = 16;
    cfg.decay = wfl::SpectralDecay(2.0, 6.4, 0.2);
    cfg.kernel = wfl::MassKernel::constant();
    cfg.seed = 77;
    const auto y0 = wfl::make_uniform_state(cfg.n, -1.0, 1.0);
    const auto drift = wfl::DriftSpec::b2([](double m) { return 0.4 * std::cos(m); }, 0.4);

    const auto traj = wfl::run_reweighted(cfg, y0, drift, 1e9, 3);
    REQUIRE(traj.girsanov.has_value());
    CHECK(std::isfinite(traj.girsanov->log_weight));
    CHECK(traj.girsanov->int_h_sq > 0.0);
    CHECK_FALSE(traj.girsanov->exceeded);

    // the driftless state path matches a plain driftless run step by step
    const auto plain = wfl::run(cfg, y0, nullptr, 3);
    REQUIRE(traj.states.size() == plain.states.size());
    for (std::size_t t = 0; t < plain.states.size(); ++t)
        for (std::size_t i = 0; i < cfg.n; ++i)
            CHECK(traj.states[t][i] == plain.states[t][i]);

    // frozen variant: same bookkeeping with a fixed precomputed perturbation
    const auto grid = wfl::make_conjugate_grid(cfg.decay, 0.0);
    const auto h = wfl::invert_constant_mass([](double x) { return 0.4 * std::cos(x); }, grid,
                                             cfg.decay, -1.0, 1.0);
    const auto frozen = wfl::run_reweighted_frozen(cfg, y0, h, 1e9, 3);
    REQUIRE(frozen.girsanov.has_value());
    CHECK(frozen.girsanov->int_h_sq == Approx(h.l2_norm_sq * cfg.T).epsilon(1e-12));
    for (std::size_t t = 0; t < plain.states.size(); ++t)
        for (std::size_t i = 0; i < cfg.n; ++i)
            CHECK(frozen.states[t][i] == plain.states[t][i]);
}
