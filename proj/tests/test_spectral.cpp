#include <catch_amalgamated.hpp>

#include <complex>
#include <numbers>
#include <vector>

#include "nlsel/metrics.hpp"
#include "nlsel/prng.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/spectral.hpp"

using namespace nlsel;

namespace {

// independent O(N^2) DFT oracle
std::vector<cdouble> naive_dft(const std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cdouble acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(i) *
                               static_cast<double>(k) / static_cast<double>(n);
            acc += x[i] * cdouble(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<cdouble> random_complex(std::size_t n, uint64_t seed) {
    Xoshiro256 rng(seed);
    std::vector<cdouble> x(n);
    for (auto& v : x) v = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return x;
}

} // namespace

TEST_CASE("fft: impulse transforms to a flat spectrum") {
    std::vector<cdouble> x(8, 0.0);
    x[0] = 1.0;
    const auto spec = fft(x);
    for (const auto& b : spec.bins) {
        CHECK(b.real() == Catch::Approx(1.0).margin(1e-14));
        CHECK(b.imag() == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("fft: pure tone concentrates in one bin") {
    const std::size_t n = 8;
    std::vector<cdouble> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2.0 * std::numbers::pi * 3.0 * static_cast<double>(i) / 8.0;
        x[i] = cdouble(std::cos(ang), std::sin(ang));
    }
    const auto spec = fft(x);
    for (std::size_t k = 0; k < n; ++k) {
        const double expected = (k == 3) ? 8.0 : 0.0;
        CHECK(std::abs(spec.bins[k] - cdouble(expected, 0.0)) < 1e-12);
    }
}

TEST_CASE("fft matches the naive DFT oracle") {
    for (const std::size_t n : {8u, 64u, 256u}) {
        const auto x = random_complex(n, 42 + n);
        const auto fast = fft(x);
        const auto slow = naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(fast.bins[k] - slow[k]) < 1e-9);
    }
}

TEST_CASE("fft round trip is the identity for all power-of-two lengths 8..4096") {
    for (std::size_t n = 8; n <= 4096; n *= 2) {
        const auto x = random_complex(n, n);
        const auto back = ifft(fft(x));
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("fft rejects non-power-of-two lengths") {
    CHECK_THROWS_AS(fft(std::vector<cdouble>(12)), DataError);
    CHECK_THROWS_AS(fft(std::vector<cdouble>(0)), DataError);
}

TEST_CASE("amplitude: Pythagorean moduli") {
    ComplexSpectrum spec;
    spec.bins = {cdouble(3, 4), cdouble(0, 0), cdouble(-5, 0)};
    const auto amp = amplitude(spec);
    CHECK(amp[0] == Catch::Approx(5.0));
    CHECK(amp[1] == Catch::Approx(0.0));
    CHECK(amp[2] == Catch::Approx(5.0));
}

TEST_CASE("amplitude of a real signal is symmetric about N/2") {
    Xoshiro256 rng(7);
    std::vector<double> x(64);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const auto amp = amplitude(fft_real(x));
    for (std::size_t k = 1; k < x.size(); ++k)
        CHECK(amp[k] == Catch::Approx(amp[x.size() - k]).margin(1e-10));
}

TEST_CASE("Parseval holds to relative 1e-10") {
    Xoshiro256 rng(9);
    std::vector<double> x(512);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = rng.uniform(-1, 1);
        time_energy += v * v;
    }
    const auto amp = amplitude(fft_real(x));
    double spec_energy = 0.0;
    for (double a : amp) spec_energy += a * a;
    CHECK(spec_energy == Catch::Approx(512.0 * time_energy).epsilon(1e-10));
}

TEST_CASE("compensation_exponent: identity, unit modulus, group property") {
    Grid grid;
    grid.n_samples = 256;
    const auto e0 = compensation_exponent(grid, 2, 0.0);
    for (const auto& e : e0) CHECK(std::abs(e - cdouble(1, 0)) < 1e-15);

    const auto a = compensation_exponent(grid, 3, 17.5);
    for (const auto& e : a) CHECK(std::abs(e) == Catch::Approx(1.0).margin(1e-14));

    const auto b = compensation_exponent(grid, 3, -5.25);
    const auto ab = compensation_exponent(grid, 3, 12.25);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] * b[i] - ab[i]) < 1e-12);

    CHECK_THROWS_AS(compensation_exponent(grid, 4, 1.0), DataError);
    CHECK_THROWS_AS(compensation_exponent(grid, 2, std::nan("")), DataError);
}

TEST_CASE("matched order-2 compensation restores the transform limit") {
    Grid grid; // 1024
    const double tl = transform_limit_fwhm(grid);
    ObjectSpec obj;
    obj.interfaces.push_back({100.0, 1.0, 37.0, 0.0, 0.0});
    const auto sig = synthesize_signal(obj, grid);
    auto z = analytic_signal(sig.samples);
    const auto comp = compensation_exponent(grid, 2, 37.0);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= comp[i];
    const auto amp = amplitude(fft(std::move(z)));
    const auto pk = positive_peak_bin(amp);
    CHECK(fwhm(amp, pk) == Catch::Approx(tl).margin(0.2));
}

TEST_CASE("order-3 exponent on an undistorted tone grows a one-sided tail") {
    Grid grid;
    ObjectSpec obj;
    obj.interfaces.push_back({100.0, 1.0, 0.0, 0.0, 0.0});
    const auto sig = synthesize_signal(obj, grid);
    auto z = analytic_signal(sig.samples);
    const auto comp = compensation_exponent(grid, 3, 30.0);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= comp[i];
    const auto amp = amplitude(fft(std::move(z)));
    CHECK(std::abs(peak_asymmetry(amp, positive_peak_bin(amp))) > 0.2);
}

TEST_CASE("phase-only multiplication preserves spectral energy") {
    Grid grid;
    grid.n_samples = 512;
    Xoshiro256 rng(11);
    std::vector<cdouble> x(512);
    for (auto& v : x) v = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto e = compensation_exponent(grid, 2, 23.0);
    auto xe = x;
    for (std::size_t i = 0; i < x.size(); ++i) xe[i] *= e[i];
    double e1 = 0.0, e2 = 0.0;
    for (double a : amplitude(fft(x))) e1 += a * a;
    for (double a : amplitude(fft(xe))) e2 += a * a;
    CHECK(e2 == Catch::Approx(e1).epsilon(1e-10));
}

TEST_CASE("analytic_signal: Hilbert pair of a cosine") {
    Grid grid;
    const std::size_t n = grid.n_samples;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * std::numbers::pi * 50.0 * grid.u(i));
    const auto z = analytic_signal(x);
    for (std::size_t i = 32; i + 32 < n; ++i) {
        const cdouble expected(std::cos(2.0 * std::numbers::pi * 50.0 * grid.u(i)),
                               std::sin(2.0 * std::numbers::pi * 50.0 * grid.u(i)));
        CHECK(std::abs(z[i] - expected) < 1e-6);
    }
}

TEST_CASE("analytic_signal: real part reconstructs the input") {
    Xoshiro256 rng(5);
    std::vector<double> x(256);
    for (auto& v : x) v = rng.uniform(-2, 2);
    const auto z = analytic_signal(x);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(z[i].real() == Catch::Approx(x[i]).margin(1e-10));
}

TEST_CASE("analytic_signal: DC passthrough") {
    std::vector<double> x(64, 0.75);
    const auto z = analytic_signal(x);
    for (const auto& v : z) CHECK(std::abs(v - cdouble(0.75, 0.0)) < 1e-12);
}

TEST_CASE("unwrap_phase: single wrap example") {
    PhaseProfile p;
    p.phase = {0.0, 3.0, -3.0};
    const auto q = unwrap_phase(p);
    CHECK(q.phase[0] == Catch::Approx(0.0));
    CHECK(q.phase[1] == Catch::Approx(3.0));
    CHECK(q.phase[2] == Catch::Approx(-3.0 + 2.0 * std::numbers::pi)); // 3.2832
    CHECK(q.unwrapped);
}

TEST_CASE("unwrap_phase: smooth input unchanged, idempotent") {
    PhaseProfile p;
    for (int i = 0; i < 100; ++i) p.phase.push_back(0.02 * i);
    const auto q = unwrap_phase(p);
    for (std::size_t i = 0; i < p.phase.size(); ++i)
        CHECK(q.phase[i] == Catch::Approx(p.phase[i]).margin(1e-12));
    const auto qq = unwrap_phase(q);
    for (std::size_t i = 0; i < p.phase.size(); ++i)
        CHECK(qq.phase[i] == Catch::Approx(q.phase[i]).margin(1e-12));
}

TEST_CASE("unwrapped phase of an analytic cosine has slope 2*pi*f") {
    Grid grid;
    const double f = 60.0;
    std::vector<double> x(grid.n_samples);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = grid.envelope(i) * std::cos(2.0 * std::numbers::pi * f * grid.u(i));
    }
    const auto phase = unwrapped_phase_of(analytic_signal(x));
    // least-squares slope vs u over the interior
    double su = 0, sp = 0, suu = 0, sup = 0, cnt = 0;
    for (std::size_t i = 32; i + 32 < x.size(); ++i) {
        su += grid.u(i);
        sp += phase.phase[i];
        suu += grid.u(i) * grid.u(i);
        sup += grid.u(i) * phase.phase[i];
        cnt += 1;
    }
    const double slope = (cnt * sup - su * sp) / (cnt * suu - su * su);
    CHECK(slope == Catch::Approx(2.0 * std::numbers::pi * f).epsilon(0.001));
}
