#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "wfl/common.hpp"
#include "wfl/drift.hpp"
#include "wfl/state.hpp"
#include "wfl/stats.hpp"

using Catch::Approx;

namespace {

wfl::HistogramMeasure random_measure(const wfl::HistogramLayout& lay, std::mt19937& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    wfl::HistogramMeasure m(lay);
    double total = 0.0;
    for (auto& p : m.probs) total += (p = ud(rng));
    for (auto& p : m.probs) p /= total;
    return m;
}

wfl::SpectralDriftSpec base_spectral_spec() {
    wfl::SpectralDriftSpec spec;
    spec.eta = 5.0 / 3.0;
    spec.delta = 2.0 / 3.0;
    spec.alpha = 2.0;
    spec.decay = wfl::SpectralDecay(2.0, 6.4, 0.2);
    spec.lambda_env.assign(spec.decay.node_count(), 1.0);
    spec.u_re = [](const wfl::HistogramMeasure&) { return 1.0; };
    return spec;
}

}  // namespace

TEST_CASE("measure and state moments", "[drift]") {
    const wfl::HistogramLayout lay(-0.5, 2.5, 3);  // midpoints 0, 1, 2
    wfl::HistogramMeasure mu(lay);
    mu.probs = {0.25, 0.5, 0.25};
    CHECK(wfl::measure_mean(mu) == Approx(1.0));
    CHECK(wfl::measure_variance(mu) == Approx(0.5));  // 0.25*1 + 0.25*1

    wfl::QuantileState s{{-1.0, 1.0, 3.0}};
    CHECK(wfl::state_mean(s) == Approx(1.0));
    CHECK(wfl::state_variance(s) == Approx((4.0 + 0.0 + 4.0) / 3.0));
}

TEST_CASE("square-root mean drift", "[drift]") {
    const auto d = wfl::DriftSpec::peano();
    CHECK(wfl::DriftSpec::peano_value(0.0) == 0.0);
    CHECK(wfl::DriftSpec::peano_value(1.0) == Approx(2.0));
    CHECK(wfl::DriftSpec::peano_value(-0.25) == Approx(-1.0));
    CHECK(wfl::DriftSpec::peano_value(4.0) == Approx(4.0));

    wfl::QuantileState centered{{-1.0, 0.0, 1.0}};
    CHECK(d.eval(3.7, centered) == 0.0);                 // mean zero: flat
    wfl::QuantileState shifted{{0.0, 1.0, 2.0}};
    CHECK(d.eval(0.0, shifted) == Approx(2.0));          // mean 1
    CHECK(d.eval(100.0, shifted) == Approx(2.0));        // x-independent

    // no uniform derivative bound exists for the square-root nonlinearity
    CHECK_THROWS_AS(d.derivative_bound(0, 1.0), wfl::config_error);
    CHECK_FALSE(d.is_zero());
    CHECK(wfl::DriftSpec::none().is_zero());
}

TEST_CASE("mean-read drift evaluates a at the measure mean", "[drift]") {
    const auto d = wfl::DriftSpec::b2([](double m) { return m * m; }, 4.0);
    const wfl::HistogramLayout lay(-0.5, 2.5, 3);
    wfl::HistogramMeasure mu(lay);
    mu.probs = {0.0, 0.0, 1.0};  // point mass at midpoint 2
    CHECK(d.eval(0.0, mu) == Approx(4.0));
    CHECK(d.eval(9.0, mu) == Approx(4.0));

    CHECK(d.order() == std::numeric_limits<int>::max());
    CHECK(d.derivative_bound(0, 10.0) == Approx(4.0));
    CHECK(d.derivative_bound(3, 10.0) == 0.0);  // constant in x
}

TEST_CASE("pair-interaction drift integrates a against the measure", "[drift]") {
    const auto d = wfl::DriftSpec::b1([](double, double y) { return std::tanh(y); }, {1.0},
                                      1.0, true);

    // quantile state: (1/n) sum tanh(y_j)
    wfl::QuantileState s{{-0.3, 0.1, 0.9}};
    const double expect = (std::tanh(-0.3) + std::tanh(0.1) + std::tanh(0.9)) / 3.0;
    CHECK(d.eval(0.0, s) == Approx(expect).epsilon(1e-14));
    CHECK(d.eval(42.0, s) == Approx(expect).epsilon(1e-14));

    // histogram: sum p_b tanh(midpoint_b)
    const wfl::HistogramLayout lay(-2.0, 2.0, 4);
    wfl::HistogramMeasure mu(lay);
    mu.probs = {0.1, 0.2, 0.3, 0.4};
    double hexpect = 0.0;
    for (std::size_t b = 0; b < 4; ++b) hexpect += mu.probs[b] * std::tanh(lay.midpoint(b));
    CHECK(d.eval(0.0, mu) == Approx(hexpect).epsilon(1e-14));

    // hoisted closures agree with direct evaluation
    const auto bound_s = d.bind(s);
    const auto bound_m = d.bind(mu);
    for (double x : {-1.0, 0.0, 2.5}) {
        CHECK(bound_s(x) == Approx(d.eval(x, s)).epsilon(1e-14));
        CHECK(bound_m(x) == Approx(d.eval(x, mu)).epsilon(1e-14));
    }

    CHECK(d.tv_lipschitz() == 1.0);
    CHECK(d.order() == 0);
    CHECK(d.derivative_bound(0, 5.0) == 1.0);
    CHECK_THROWS_AS(d.derivative_bound(1, 5.0), wfl::config_error);  // beyond the table
    CHECK_THROWS_AS(wfl::DriftSpec::b1([](double, double) { return 0.0; }, {}, 0.0),
                    wfl::config_error);  // empty bound table

    // an x-dependent interaction is averaged pointwise
    const auto dx = wfl::DriftSpec::b1([](double x, double y) { return x * y; }, {10.0, 10.0},
                                       0.0, false);
    CHECK(dx.eval(2.0, s) == Approx(2.0 * (-0.3 + 0.1 + 0.9) / 3.0).epsilon(1e-14));
    CHECK(dx.order() == 1);
}

TEST_CASE("statistic-read drift composes a with E[psi]", "[drift]") {
    const auto d = wfl::DriftSpec::b3([](double x, double m) { return x * m; },
                                      [](double y) { return std::tanh(y); }, {5.0, 1.0});
    wfl::QuantileState s{{-0.3, 0.1, 0.9}};
    const double m = (std::tanh(-0.3) + std::tanh(0.1) + std::tanh(0.9)) / 3.0;
    CHECK(d.eval(2.0, s) == Approx(2.0 * m).epsilon(1e-14));
    const auto bound = d.bind(s);
    CHECK(bound(-1.5) == Approx(-1.5 * m).epsilon(1e-14));
    CHECK(d.derivative_bound(1, 3.0) == 1.0);
}

TEST_CASE("variance-powered drift and its support-size bound", "[drift]") {
    const double eta_hat = 0.25;
    const auto d = wfl::DriftSpec::b4([](double x) { return std::sin(x); }, eta_hat, {1.0, 1.0});

    wfl::QuantileState s{{-1.0, 1.0}};  // variance 1
    CHECK(d.eval(wfl::pi / 2.0, s) == Approx(1.0).epsilon(1e-12));

    wfl::QuantileState wide{{-2.0, 2.0}};  // variance 4
    CHECK(d.eval(wfl::pi / 2.0, wide) == Approx(std::pow(4.0, eta_hat)).epsilon(1e-12));

    // C_0(M) = sup|a| M^{2 eta_hat}: measures in a window of size M obey it
    const double M = 4.0;
    CHECK(d.derivative_bound(0, M) == Approx(std::pow(M, 0.5)).epsilon(1e-12));
    CHECK(std::abs(d.eval(wfl::pi / 2.0, wide)) <= d.derivative_bound(0, M) + 1e-12);

    CHECK_THROWS_AS(wfl::DriftSpec::b4([](double) { return 0.0; }, 0.5, {1.0}),
                    wfl::config_error);
    CHECK_THROWS_AS(wfl::DriftSpec::b4([](double) { return 0.0; }, 0.0, {1.0}),
                    wfl::config_error);
}

TEST_CASE("spectral drift spec validation", "[drift]") {
    CHECK_NOTHROW(wfl::validate(base_spectral_spec()));

    auto bad = base_spectral_spec();
    bad.delta = 0.0;
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.delta = 1.5;
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.eta = 0.4;  // needs eta > 1.5 (1 - delta) = 0.5
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.alpha = 1.2;  // needs alpha > 1.5
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.alpha = 6.0;  // exceeds eta / (1 - delta) = 5
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.delta = 1.0;
    bad.alpha = 50.0;  // no ceiling at delta = 1
    CHECK_NOTHROW(wfl::validate(bad));
    bad = base_spectral_spec();
    bad.lambda_env.pop_back();
    CHECK_THROWS_AS(wfl::validate(bad), wfl::grid_error);
    bad = base_spectral_spec();
    bad.lambda_env[0] = -1.0;
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
    bad = base_spectral_spec();
    bad.u_re = nullptr;
    CHECK_THROWS_AS(wfl::validate(bad), wfl::config_error);
}

TEST_CASE("synthesized drift: flat functional and derivative envelope", "[drift]") {
    const auto spec = base_spectral_spec();  // u_re == 1, no u_im
    const auto d = wfl::DriftSpec::spectral(spec);
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    const auto mu = wfl::make_uniform_histogram(lay);

    // at x = 0 every cosine is 1: B(0) = sum <k>^{-eta} Lambda dk exactly
    const double direct = wfl::spectral_derivative_bound(spec, 0);
    CHECK(d.eval(0.0, mu) == Approx(direct).epsilon(1e-12));

    // the envelope bound dominates |B| everywhere
    for (double x = -3.0; x <= 3.0; x += 0.37)
        CHECK(std::abs(d.eval(x, mu)) <= direct + 1e-12);

    // higher-order envelopes weight by |k|^i
    CHECK(wfl::spectral_derivative_bound(spec, 1) > 0.0);
    CHECK(d.order() == std::numeric_limits<int>::max());
    CHECK(d.derivative_bound(2, 1.0) == Approx(wfl::spectral_derivative_bound(spec, 2)));

    // u_re that ignores the measure: value is measure-independent
    std::mt19937 rng(5);
    const auto nu = random_measure(lay, rng);
    CHECK(d.eval(0.3, mu) == Approx(d.eval(0.3, nu)).epsilon(1e-14));

    // zero functional synthesizes the zero drift
    auto zspec = spec;
    zspec.u_re = [](const wfl::HistogramMeasure&) { return 0.0; };
    const auto zd = wfl::DriftSpec::spectral(zspec);
    CHECK(zd.eval(0.7, mu) == 0.0);
}

TEST_CASE("synthesized drift is Hoelder in total variation", "[drift]") {
    // |B(x,mu) - B(x,nu)| <= (sum <k>^{-eta} Lambda dk) * C_u * d_TV^delta
    const double delta = 2.0 / 3.0;
    auto spec = base_spectral_spec();
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    spec.layout = lay;
    spec.u_re = wfl::make_bin_mass_functional({3, 4, 5}, 0.2, 1.0, delta);
    const auto d = wfl::DriftSpec::spectral(spec);

    const double envelope = wfl::spectral_derivative_bound(spec, 0);
    const double c_u = std::pow(2.0, -delta);  // Hoelder constant of the functional
    std::mt19937 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        const auto mu = random_measure(lay, rng);
        const auto nu = random_measure(lay, rng);
        const double dtv = wfl::tv_distance(mu, nu);
        const double gap = std::abs(d.eval(0.3, mu) - d.eval(0.3, nu));
        CHECK(gap <= envelope * c_u * std::pow(dtv, delta) + 1e-12);
    }
}

TEST_CASE("inf-convolution smoothing of measure functionals", "[drift]") {
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    const auto base = wfl::make_uniform_histogram(lay);
    const auto u = wfl::make_bin_mass_functional({0, 1}, 0.0, 1.0, 2.0 / 3.0);
    const auto family = wfl::make_mixture_family(
        base, {0.1, 0.3, 0.5, 0.7, 0.9}, {16, 17});

    std::mt19937 rng(23);
    const auto mu = random_measure(lay, rng);

    // never exceeds the unsmoothed value; nonincreasing as eps grows
    double prev = u(mu);
    for (double eps : {1e-4, 1e-2, 1.0, 1e2, 1e9}) {
        const double v = wfl::holder_infconv(u, family, mu, eps, 2.0 / 3.0);
        CHECK(v <= u(mu) + 1e-15);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }

    // at huge eps the penalty vanishes: the smoothed value is the family min
    double family_min = u(mu);
    for (const auto& nu : family) family_min = std::min(family_min, u(nu));
    CHECK(wfl::holder_infconv(u, family, mu, 1e12, 2.0 / 3.0) ==
          Approx(family_min).margin(1e-9));

    // constant functional is a fixed point of the smoothing
    const auto constant = [](const wfl::HistogramMeasure&) { return 0.42; };
    CHECK(wfl::holder_infconv(constant, family, mu, 0.5, 1.0) == Approx(0.42));

    CHECK_THROWS_AS(wfl::holder_infconv(u, {}, mu, 0.5, 1.0), wfl::config_error);
    CHECK_THROWS_AS(wfl::holder_infconv(u, family, mu, 0.0, 1.0), wfl::config_error);
    CHECK_THROWS_AS(wfl::holder_infconv(nullptr, family, mu, 0.5, 1.0), wfl::config_error);
}

TEST_CASE("smoothing gap scales like the predicted power of eps", "[drift]") {
    // for a delta-Hoelder functional the approximation gap behaves like
    // eps^{delta/(2-delta)}; delta = 2/3 gives exponent 1/2
    const double delta = 2.0 / 3.0;
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    const auto base = wfl::make_uniform_histogram(lay);
    const auto u = wfl::make_bin_mass_functional({1}, 1.0 / 32.0, -0.25, delta);

    std::vector<double> weights;
    for (int p = -48; p <= 0; ++p) weights.push_back(std::pow(2.0, 0.25 * p));
    const auto family = wfl::make_mixture_family(base, weights, {1});

    std::vector<double> log_eps, log_gap;
    for (int q = 2; q <= 12; q += 2) {
        const double eps = std::pow(2.0, -q);
        const double gap = u(base) - wfl::holder_infconv(u, family, base, eps, delta);
        REQUIRE(gap > 0.0);
        log_eps.push_back(std::log(eps));
        log_gap.push_back(std::log(gap));
    }
    CHECK(wfl::ls_slope(log_eps, log_gap) == Approx(0.5).margin(0.15));
}

TEST_CASE("per-wavenumber regularization parameters", "[drift]") {
    auto spec = base_spectral_spec();  // alpha 2, eta 5/3, delta 2/3
    const auto p = wfl::make_regularization(spec);
    CHECK(p.theta == Approx((2.0 - 5.0 / 3.0) / (2.0 / 3.0)).epsilon(1e-14));  // 0.5
    REQUIRE(p.epsilon.size() == spec.decay.node_count());
    for (std::size_t j = 0; j < p.epsilon.size(); ++j) {
        const double k = spec.decay.k_nodes()[j];
        // eps(k) = <k>^{-theta (2 - delta)} = (1 + k^2)^{-theta(2-delta)/2}
        CHECK(p.epsilon[j] ==
              Approx(std::pow(1.0 + k * k, -0.5 * p.theta * (2.0 - spec.delta))).epsilon(1e-12));
        CHECK(p.epsilon[j] > 0.0);
        CHECK(p.epsilon[j] <= 1.0);
    }

    // smoothing is only defined when the kernel decays at least as fast as
    // the drift regularity class
    auto below = spec;
    below.alpha = 1.6;
    below.eta = 1.9;
    CHECK_THROWS_AS(wfl::make_regularization(below), wfl::config_error);
}

TEST_CASE("regularized lambda tables", "[drift]") {
    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    const auto base = wfl::make_uniform_histogram(lay);

    auto spec = base_spectral_spec();
    spec.layout = lay;
    spec.u_re = wfl::make_bin_mass_functional({0, 1}, 0.0, 1.0, spec.delta);
    spec.family = wfl::make_mixture_family(base, {0.2, 0.5, 0.8}, {16});

    const auto reg = wfl::regularize_lambda(spec);
    CHECK(reg.regularized);
    CHECK(reg.theta == Approx(0.5));
    REQUIRE(reg.epsilon.size() == spec.decay.node_count());

    std::mt19937 rng(3);
    const auto mu = random_measure(lay, rng);
    const auto raw = wfl::lambda_re_values(spec, mu);
    const auto smoothed = wfl::lambda_re_values(reg, mu);
    for (std::size_t j = 0; j < raw.size(); ++j) {
        CHECK(smoothed[j] <= raw[j] + 1e-15);     // smoothing only lowers u >= 0
        CHECK(std::abs(smoothed[j]) <= spec.lambda_env[j] + 1e-15);  // |u| <= 1
    }

    // a measure-independent functional passes through the smoothing unchanged
    auto flat = spec;
    flat.u_re = [](const wfl::HistogramMeasure&) { return 0.6; };
    const auto flat_reg = wfl::regularize_lambda(flat);
    const auto a = wfl::lambda_re_values(flat, mu);
    const auto b = wfl::lambda_re_values(flat_reg, mu);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(b[j] == Approx(a[j]).margin(1e-15));

    // missing candidate family is rejected; missing u_im yields zero tables
    auto nofam = spec;
    nofam.family.clear();
    CHECK_THROWS_AS(wfl::regularize_lambda(nofam), wfl::config_error);
    for (double v : wfl::lambda_im_values(spec, mu)) CHECK(v == 0.0);
}

TEST_CASE("measure functional builders", "[drift]") {
    const wfl::HistogramLayout lay(-4.0, 4.0, 16);
    std::mt19937 rng(91);

    // bin-mass: value, reach, and the 2^{-delta} Hoelder constant
    const double delta = 2.0 / 3.0;
    const auto u = wfl::make_bin_mass_functional({2, 3}, 0.25, 0.5, delta);
    wfl::HistogramMeasure point(lay);
    point.probs[2] = 1.0;
    CHECK(u(point) == Approx(0.5 * std::pow(0.75, delta)).epsilon(1e-14));
    for (int rep = 0; rep < 100; ++rep) {
        const auto mu = random_measure(lay, rng);
        const auto nu = random_measure(lay, rng);
        CHECK(std::abs(u(mu) - u(nu)) <=
              0.5 * std::pow(2.0, -delta) * std::pow(wfl::tv_distance(mu, nu), delta) + 1e-12);
        CHECK(std::abs(u(mu)) <= 0.5 + 1e-15);
    }
    const auto out_of_range = wfl::make_bin_mass_functional({40}, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(out_of_range(point), wfl::grid_error);
    CHECK_THROWS_AS(wfl::make_bin_mass_functional({0}, 0.0, 1.0, 0.0), wfl::config_error);

    // mean-wave: TV-Lipschitz with constant |scale| freq W / 2
    const double freq = 1.3, scale = 0.5, W = 8.0;
    const auto w = wfl::make_mean_wave_functional(freq, scale);
    for (int rep = 0; rep < 100; ++rep) {
        const auto mu = random_measure(lay, rng);
        const auto nu = random_measure(lay, rng);
        CHECK(std::abs(w(mu) - w(nu)) <=
              scale * freq * 0.5 * W * wfl::tv_distance(mu, nu) + 1e-12);
    }
    wfl::HistogramMeasure mid(lay);
    mid.probs[7] = 0.5;
    mid.probs[8] = 0.5;  // mean 0 by symmetry of the two central midpoints
    CHECK(w(mid) == Approx(0.0).margin(1e-14));

    // mixtures: base first, unit mass, reweighted tail plus spike
    const auto base = wfl::make_uniform_histogram(lay);
    const auto fam = wfl::make_mixture_family(base, {0.25, 0.75}, {4, 9});
    REQUIRE(fam.size() == 1 + 2 * 2);
    for (const auto& m : fam) {
        double total = 0.0;
        for (double p : m.probs) total += p;
        CHECK(total == Approx(1.0).epsilon(1e-12));
    }
    CHECK(fam[1].probs[4] == Approx(0.75 * (1.0 / 16.0) + 0.25).epsilon(1e-12));
    CHECK_THROWS_AS(wfl::make_mixture_family(base, {1.5}, {0}), wfl::config_error);
    CHECK_THROWS_AS(wfl::make_mixture_family(base, {0.5}, {99}), wfl::grid_error);
}

TEST_CASE("spectral drift on quantile states requires a layout", "[drift]") {
    auto spec = base_spectral_spec();
    const auto bare = wfl::DriftSpec::spectral(spec);
    const auto s = wfl::make_uniform_state(64, -1.0, 1.0);
    CHECK_THROWS_AS(bare.bind(s), wfl::config_error);
    CHECK_THROWS_AS(bare.eval(0.0, s), wfl::config_error);

    const wfl::HistogramLayout lay(-4.0, 4.0, 32);
    auto with_layout = spec;
    with_layout.layout = lay;
    with_layout.u_re = wfl::make_bin_mass_functional({10, 11}, 0.0, 1.0, 1.0);
    const auto d = wfl::DriftSpec::spectral(with_layout);

    // binding a state is the same as evaluating on its histogram image
    const auto mu = wfl::histogram_from_state(s, lay);
    const auto bound = d.bind(s);
    for (double x : {-0.9, 0.0, 1.4})
        CHECK(bound(x) == Approx(d.eval(x, mu)).epsilon(1e-13));
}
