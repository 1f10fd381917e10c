#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "evlf/ref.hpp"
#include "evlf/synth.hpp"
#include "evlf/turbsim.hpp"
#include "oracles.hpp"

using namespace evlf;

namespace {

SensorFields uniform_fields(int w, int h, double tx, double ty, double sigma, double gain) {
    SensorFields f;
    f.width = w;
    f.height = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    f.tilt_x.assign(n, tx);
    f.tilt_y.assign(n, ty);
    f.blur_sigma.assign(n, sigma);
    f.gain.assign(n, gain);
    return f;
}

TurbulenceParams no_blur_params() {
    TurbulenceParams p;
    p.blur_sigma_min = 0.0;
    p.blur_sigma_max = 0.0;
    p.scint_log_std = 0.0;
    return p;
}

Frame random_frame(int w, int h, std::uint64_t seed) {
    Frame f(w, h);
    Rng rng(seed);
    for (double& v : f.pixels) v = rng.uniform();
    return f;
}

}  // namespace

TEST_CASE("advance_state with alpha 0 is fresh noise independent of the input") {
    Rng rng_a(7);
    const LatentGrid a = LatentGrid::draw(3, rng_a);
    LatentGrid zero;
    zero.res = 3;
    zero.values.assign(a.values.size(), 0.0);
    Rng rng_d(99);
    Rng rng_e(99);
    const LatentGrid from_a = advance_state(a, 0.0, rng_d);
    const LatentGrid from_zero = advance_state(zero, 0.0, rng_e);
    CHECK(from_a.values == from_zero.values);
    CHECK_FALSE(from_a.values == a.values);
}

TEST_CASE("advance_state near alpha 1 approaches the identity") {
    Rng rng(11);
    const LatentGrid state = LatentGrid::draw(4, rng);
    Rng noise(12);
    const LatentGrid next = advance_state(state, 1.0 - 1e-10, noise);
    double max_diff = 0;
    for (std::size_t i = 0; i < state.values.size(); ++i)
        max_diff = std::max(max_diff, std::abs(next.values[i] - state.values[i]));
    CHECK(max_diff < 1e-4);
}

TEST_CASE("advance_state rejects alpha outside [0,1)") {
    Rng rng(1);
    const LatentGrid state = LatentGrid::draw(2, rng);
    Rng noise(2);
    CHECK_THROWS_AS(advance_state(state, 1.0, noise), ConfigError);
    CHECK_THROWS_AS(advance_state(state, -0.1, noise), ConfigError);
}

TEST_CASE("latent chain empirical autocorrelation matches alpha^k") {
    const double alpha = 0.8;
    const int steps = 100000;
    Rng init(21);
    LatentGrid state = LatentGrid::draw(2, init);
    std::vector<double> chain(steps);
    Rng noise(22);
    for (int t = 0; t < steps; ++t) {
        chain[t] = state.values[0];
        state = advance_state(state, alpha, noise);
    }
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / steps;
    for (double& v : chain) v -= mean;
    const double var =
        std::inner_product(chain.begin(), chain.end(), chain.begin(), 0.0) / steps;
    for (int k = 1; k <= 5; ++k) {
        double acc = 0;
        for (int t = 0; t + k < steps; ++t) acc += chain[t] * chain[t + k];
        const double rho = acc / (steps - k) / var;
        CHECK(std::abs(rho - std::pow(alpha, k)) < 0.02);
    }
}

TEST_CASE("latent chain keeps unit marginal variance") {
    for (double alpha : {0.0, 0.5, 0.99}) {
        Rng init(31);
        LatentGrid state = LatentGrid::draw(2, init);
        Rng noise(32);
        double acc = 0;
        const int steps = 10000;
        for (int t = 0; t < steps; ++t) {
            for (double v : state.values) acc += v * v;
            state = advance_state(state, alpha, noise);
        }
        const double var = acc / (steps * static_cast<double>(state.values.size()));
        CHECK(var > 0.9);
        CHECK(var < 1.1);
    }
}

TEST_CASE("realize_fields fixed transforms") {
    TurbulenceParams params;
    params.tilt_std = 1.5;
    params.blur_sigma_min = 0.4;
    params.blur_sigma_max = 2.0;

    SUBCASE("zero latent gives zero tilt and midpoint blur") {
        LatentGrid zero;
        zero.res = 3;
        zero.values.assign(3 * 3 * 4, 0.0);
        const FieldFrame f = realize_fields(params, zero);
        for (double v : f.tilt_x) CHECK(v == 0.0);
        for (double v : f.tilt_y) CHECK(v == 0.0);
        // Phi(0) = 0.5: sigma = sigma_min + 0.5 (sigma_max - sigma_min).
        for (double v : f.blur_sigma) CHECK(v == doctest::Approx(1.2));
    }
    SUBCASE("scintillation disabled gives unit gain") {
        params.scint_log_std = 0.0;
        Rng rng(5);
        const LatentGrid state = LatentGrid::draw(4, rng);
        const FieldFrame f = realize_fields(params, state);
        for (double v : f.log_gain) CHECK(v == 0.0);
        const SensorFields sensor = upsample_fields(f, 16, 16);
        for (double v : sensor.gain) CHECK(v == 1.0);
    }
    SUBCASE("gain field has unit mean under the log-normal transform") {
        params.scint_log_std = 0.3;
        Rng rng(6);
        const LatentGrid state = LatentGrid::draw(500, rng);  // 10^6 latent draws / 4 channels
        const FieldFrame f = realize_fields(params, state);
        double acc = 0;
        for (double v : f.log_gain) acc += std::exp(v);
        const double mean = acc / static_cast<double>(f.log_gain.size());
        CHECK(std::abs(mean - 1.0) < 0.01);
    }
}

TEST_CASE("effective grid resolution follows coherence length") {
    TurbulenceParams p;
    p.grid_res = 6;
    CHECK(p.effective_grid_res(256) == 6);  // no coherence set
    p.coherence_length = 256.0 / 3.0;
    // node spacing (W-1)/(res-1) ~ coherence: 4 nodes at 256 px
    CHECK(p.effective_grid_res(256) == 4);
    p.coherence_length = 0.0;
    CHECK(p.effective_grid_res(64) == 6);
}

TEST_CASE("upsample hits coarse nodes at the image corners") {
    FieldFrame f;
    f.res = 2;
    f.tilt_x = {1.0, 2.0, 3.0, 4.0};
    f.tilt_y.assign(4, 0.0);
    f.blur_sigma.assign(4, 0.5);
    f.log_gain.assign(4, 0.0);
    const SensorFields s = upsample_fields(f, 9, 9);
    CHECK(s.tilt_x[0] == 1.0);
    CHECK(s.tilt_x[8] == 2.0);
    CHECK(s.tilt_x[8 * 9] == 3.0);
    CHECK(s.tilt_x[8 * 9 + 8] == 4.0);
    CHECK(s.tilt_x[4 * 9 + 4] == doctest::Approx(2.5));  // center: mean of the nodes
}

TEST_CASE("apply_turbulence is the identity when all effects are off") {
    const Frame f = random_frame(24, 18, 3);
    const SensorFields fields = uniform_fields(24, 18, 0, 0, 0, 1);
    const Frame out = apply_turbulence(f, fields, no_blur_params());
    CHECK(out == f);
}

TEST_CASE("constant unit tilt matches the integer shift oracle") {
    const Frame f = random_frame(20, 16, 4);
    const SensorFields fields = uniform_fields(20, 16, 1.0, 0.0, 0, 1);
    const Frame out = apply_turbulence(f, fields, no_blur_params());
    const Frame shifted = oracles::shift_frame(f, 1, 0);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            CHECK(out.at(x, y) == doctest::Approx(shifted.at(x, y)).epsilon(1e-14));
}

TEST_CASE("uniform frame with a gain field returns clamp(v * gain)") {
    TurbulenceParams params;
    params.blur_sigma_min = 0.3;
    params.blur_sigma_max = 1.2;
    const double v = 0.4;
    const Frame f(16, 16, v);
    SensorFields fields = uniform_fields(16, 16, 0.7, -0.3, 0.8, 1.0);
    Rng rng(9);
    for (double& g : fields.gain) g = 0.5 + 2.0 * rng.uniform();  // some exceed 1/v
    const Frame out = apply_turbulence(f, fields, params);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double expected = std::min(1.0, v * fields.gain[y * 16 + x]);
            CHECK(out.at(x, y) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("simulate_lightfield determinism and view independence") {
    const FrameSequence clip = make_clip(SceneKind::bouncing_blobs, 32, 32, 6, 120.0, 5);
    TurbulenceParams params = turbulence_preset(TurbulenceStrength::medium, 77);
    params.grid_res = 3;

    SUBCASE("N=1 reduces to a single degraded sequence") {
        const auto views = simulate_lightfield(clip, params, 1);
        REQUIRE(views.size() == 1);
        CHECK(views[0].frames.size() == clip.frames.size());
    }
    SUBCASE("identical seeds give bit-identical outputs") {
        const auto a = simulate_lightfield(clip, params, 3);
        const auto b = simulate_lightfield(clip, params, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t v = 0; v < a.size(); ++v)
            for (std::size_t k = 0; k < a[v].frames.size(); ++k)
                CHECK(a[v].frames[k] == b[v].frames[k]);
    }
    SUBCASE("views use independent substreams") {
        const auto views = simulate_lightfield(clip, params, 2);
        CHECK_FALSE(views[0].frames[0] == views[1].frames[0]);
        CHECK(views[0].frames[0] == simulate_view(clip, params, 0).frames[0]);
        CHECK(views[1].frames[0] == simulate_view(clip, params, 1).frames[0]);
    }
    SUBCASE("rejects empty light fields") {
        CHECK_THROWS_AS(simulate_lightfield(clip, params, 0), ConfigError);
    }
}

TEST_CASE("energy is approximately conserved without gain") {
    // Interior-dominated image: a wide blob well away from the borders. The
    // tilt field gradient (divergence) is what perturbs the mean, so the
    // field scale matches the image scale here.
    const int size = 128;
    Frame blob(size, size, 0.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double d2 = (x - 63.5) * (x - 63.5) + (y - 63.5) * (y - 63.5);
            blob.at(x, y) = 0.8 * std::exp(-d2 / (2.0 * 24.0 * 24.0));
        }
    FrameSequence clip;
    clip.frames.assign(6, blob);
    clip.timestamps = {0, 8333, 16667, 25000, 33333, 41667};

    TurbulenceParams params;
    params.tilt_std = 0.5;
    params.blur_sigma_min = 0.3;
    params.blur_sigma_max = 1.2;
    params.scint_log_std = 0.0;
    params.grid_res = 3;
    params.seed = 13;
    const auto views = simulate_lightfield(clip, params, 1);

    const auto mean_of = [](const Frame& f) {
        double acc = 0;
        for (double v : f.pixels) acc += v;
        return acc / static_cast<double>(f.pixels.size());
    };
    const double clean_mean = mean_of(blob);
    for (const Frame& f : views[0].frames)
        CHECK(std::abs(mean_of(f) - clean_mean) / clean_mean < 0.02);
}

TEST_CASE("strength presets validate and are ordered") {
    for (auto s :
         {TurbulenceStrength::weak, TurbulenceStrength::medium, TurbulenceStrength::strong}) {
        const TurbulenceParams p = turbulence_preset(s, 1);
        p.validate();
    }
    CHECK(turbulence_preset(TurbulenceStrength::weak, 1).tilt_std <
          turbulence_preset(TurbulenceStrength::strong, 1).tilt_std);
}

TEST_CASE("strength mix approximates 10/30/60") {
    int counts[3] = {0, 0, 0};
    const int n = 3000;
    for (int c = 0; c < n; ++c) counts[static_cast<int>(sample_strength(42, c))]++;
    CHECK(std::abs(counts[0] / double(n) - 0.1) < 0.03);
    CHECK(std::abs(counts[1] / double(n) - 0.3) < 0.03);
    CHECK(std::abs(counts[2] / double(n) - 0.6) < 0.03);
}

TEST_CASE("optics scaling arithmetic") {
    OpticsGeometry g;
    g.focal_length_m = 0.8;
    g.scene_width_m = 1.0;
    g.distance_m = 10.0;
    g.sensor_width_px = 256;
    CHECK(pixel_pitch_m(g) == doctest::Approx(3.125e-4));
    CHECK(angle_to_pixels(1e-5, g) == doctest::Approx(0.0256));
    TurbulenceParams base;
    const TurbulenceParams p = scaled_params(g, 1e-5, 2e-6, 8e-6, base);
    CHECK(p.tilt_std == doctest::Approx(0.0256));
    CHECK(p.blur_sigma_min == doctest::Approx(0.00512));
    CHECK(p.blur_sigma_max == doctest::Approx(0.02048));
}

TEST_CASE("parallel kernels match the serial reference bitwise") {
    const Frame f = random_frame(97, 61, 8);
    TurbulenceParams params = turbulence_preset(TurbulenceStrength::strong, 3);
    Rng rng(derive_seed(3, kStreamTurbulence, 0, 0));
    const LatentGrid latent = LatentGrid::draw(params.effective_grid_res(97), rng);
    const SensorFields fields = upsample_fields(realize_fields(params, latent), 97, 61);

    const Frame a = apply_turbulence(f, fields, params);
    const Frame b = ref::apply_turbulence(f, fields, params);
    CHECK(a == b);

    const Frame ba = gaussian_blur(f, 1.7);
    const Frame bb = ref::gaussian_blur(f, 1.7);
    CHECK(ba == bb);
}

TEST_CASE("field dumps land on disk") {
    oracles::TempDir tmp("fields");
    TurbulenceParams params;
    Rng rng(4);
    const LatentGrid latent = LatentGrid::draw(3, rng);
    dump_fields(realize_fields(params, latent), tmp.path(), 0);
    CHECK(std::filesystem::exists(tmp.path() / "tilt_x_000000.f64"));
    CHECK(std::filesystem::file_size(tmp.path() / "tilt_x_000000.f64") == 9 * 8);
    CHECK(std::filesystem::exists(tmp.path() / "fields_meta.txt"));
}
