#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "nlsel/metrics.hpp"
#include "nlsel/prng.hpp"
#include "nlsel/sigmodel.hpp"

using namespace nlsel;

namespace {

Interface itf(double f, double r, double a2, double a3) { return {f, r, a2, a3, 0.0}; }

// counts strict local maxima above a fraction of the global max
std::size_t count_peaks(const std::vector<double>& amp, double rel_floor) {
    double mx = 0.0;
    for (double a : amp) mx = std::max(mx, a);
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < amp.size(); ++i)
        if (amp[i] > amp[i - 1] && amp[i] > amp[i + 1] && amp[i] > rel_floor * mx) ++count;
    return count;
}

} // namespace

TEST_CASE("synthesize: center sample equals the reflectivity sum") {
    Grid grid;
    ObjectSpec single{{itf(100, 1.0, 0, 0)}};
    const auto sig = synthesize_signal(single, grid);
    CHECK(sig.samples[512] == 1.0); // all phase terms vanish at u = 0 and G(0) = 1

    ObjectSpec multi{{itf(40, 0.3, 25, -10), itf(100, 0.8, -50, 4), itf(222, 0.55, 5, 29)}};
    const auto m = synthesize_signal(multi, grid);
    CHECK(m.samples[512] == Catch::Approx(0.3 + 0.8 + 0.55).margin(1e-12));
}

TEST_CASE("synthesize: envelope bounds the signal") {
    Grid grid;
    ObjectSpec obj{{itf(60, 0.5, 30, 10), itf(180, 0.9, -12, -25)}};
    const auto sig = synthesize_signal(obj, grid);
    for (double s : sig.samples) CHECK(std::abs(s) <= 0.5 + 0.9 + 1e-12);
}

TEST_CASE("synthesize is linear in interfaces") {
    Grid grid;
    ObjectSpec a{{itf(80, 0.6, 12, -4)}};
    ObjectSpec b{{itf(200, 0.4, -33, 18)}};
    ObjectSpec both{{a.interfaces[0], b.interfaces[0]}};
    const auto sa = synthesize_signal(a, grid);
    const auto sb = synthesize_signal(b, grid);
    const auto sboth = synthesize_signal(both, grid);
    for (std::size_t i = 0; i < sa.samples.size(); ++i)
        CHECK(sboth.samples[i] == Catch::Approx(sa.samples[i] + sb.samples[i]).margin(1e-12));
}

TEST_CASE("five interfaces give five positive peaks plus five mirrors") {
    Grid grid;
    ObjectSpec obj{{itf(50, 1.0, 0, 0), itf(120, 0.8, 0, 0), itf(200, 0.9, 0, 0),
                    itf(300, 0.7, 0, 0), itf(410, 0.85, 0, 0)}};
    const auto amp = amplitude(fft_real(synthesize_signal(obj, grid).samples));
    CHECK(count_peaks(amp, 0.2) == 10);
}

TEST_CASE("a2 = 60 broadens the peak far beyond the transform limit") {
    Grid grid;
    ObjectSpec obj{{itf(100, 1.0, 60, 0)}};
    const auto amp = amplitude(fft_real(synthesize_signal(obj, grid).samples));
    CHECK(fwhm(amp, positive_peak_bin(amp)) > 10.0);
}

TEST_CASE("mirror symmetry of the real signal's spectrum") {
    Grid grid;
    grid.n_samples = 512;
    ObjectSpec obj{{itf(45, 0.7, 21, -9), itf(130, 1.0, -44, 16)}};
    const auto amp = amplitude(fft_real(synthesize_signal(obj, grid).samples));
    for (std::size_t k = 1; k < amp.size(); ++k)
        CHECK(amp[k] == Catch::Approx(amp[amp.size() - k]).margin(1e-10));
}

TEST_CASE("ground_truth: nothing to remove when coefficients are zero") {
    Grid grid;
    grid.n_samples = 256;
    ObjectSpec obj{{itf(30, 0.5, 0, 0), itf(77, 1.0, 0, 0)}};
    const auto gt = ground_truth(obj, grid, 2);
    const auto raw = amplitude(fft_real(synthesize_signal(obj, grid).samples));
    for (std::size_t i = 0; i < gt.size(); ++i)
        CHECK(gt[i] == Catch::Approx(raw[i]).margin(1e-12));
}

TEST_CASE("ground_truth order 2 restores the transform limit") {
    Grid grid;
    ObjectSpec obj{{itf(100, 1.0, 40, 0)}};
    const auto gt = ground_truth(obj, grid, 2);
    const double tl = transform_limit_fwhm(grid);
    CHECK(fwhm(gt, positive_peak_bin(gt)) == Catch::Approx(tl).margin(0.05));
}

TEST_CASE("ground_truth order 2 keeps the cubic distortion") {
    Grid grid;
    ObjectSpec obj{{itf(100, 1.0, 40, 15)}};
    ObjectSpec only_cubic{{itf(100, 1.0, 0, 15)}};
    const auto gt = ground_truth(obj, grid, 2);
    const auto expected = amplitude(fft_real(synthesize_signal(only_cubic, grid).samples));
    for (std::size_t i = 0; i < gt.size(); ++i)
        CHECK(gt[i] == Catch::Approx(expected[i]).margin(1e-12));
}

TEST_CASE("ground_truth rejects bad order") {
    Grid grid;
    ObjectSpec obj{{itf(100, 1.0, 1, 1)}};
    CHECK_THROWS_AS(ground_truth(obj, grid, 1), DataError);
    CHECK_THROWS_AS(ground_truth(obj, grid, 4), DataError);
}

TEST_CASE("validation rejects out-of-contract objects") {
    Grid grid;
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{}, grid), DataError); // empty
    ObjectSpec thirteen;
    for (int i = 0; i < 13; ++i) thirteen.interfaces.push_back(itf(20 + 8 * i, 0.5, 0, 0));
    CHECK_THROWS_AS(synthesize_signal(thirteen, grid), DataError);
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{{itf(2, 1, 0, 0)}}, grid), DataError); // < f_min
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{{itf(500, 1, 0, 0)}}, grid), DataError);
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{{itf(100, 1, std::nan(""), 0)}}, grid),
                    DataError);
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{{itf(100, 0.0, 0, 0)}}, grid), DataError);
    CHECK_THROWS_AS(synthesize_signal(ObjectSpec{{itf(100, 1, 0, 0), itf(102, 1, 0, 0)}}, grid),
                    DataError); // closer than 4 bins
    // single-interface mirrors are valid synthesis targets
    CHECK_NOTHROW(synthesize_signal(ObjectSpec{{itf(100, 1, 0, 0)}}, grid));
}

TEST_CASE("noise hook is off by default and seeded when on") {
    Grid grid;
    grid.n_samples = 256;
    ObjectSpec obj{{itf(50, 1.0, 10, 5)}};
    const auto clean1 = synthesize_signal(obj, grid);
    const auto clean2 = synthesize_signal(obj, grid);
    CHECK(clean1.samples == clean2.samples);
    SynthesisOptions noisy;
    noisy.noise_sigma = 0.01;
    noisy.noise_seed = 3;
    const auto n1 = synthesize_signal(obj, grid, noisy);
    const auto n2 = synthesize_signal(obj, grid, noisy);
    CHECK(n1.samples == n2.samples);
    CHECK(n1.samples != clean1.samples);
}

TEST_CASE("object JSON round trip") {
    ObjectSpec obj{{itf(123.25, 0.875, -41.5, 12.125), itf(301.5, 0.5, 3.25, -0.75)}};
    const auto j = to_json(obj);
    const auto back = object_from_json(j);
    REQUIRE(back.interfaces.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.interfaces[i].freq == obj.interfaces[i].freq);
        CHECK(back.interfaces[i].reflectivity == obj.interfaces[i].reflectivity);
        CHECK(back.interfaces[i].a2 == obj.interfaces[i].a2);
        CHECK(back.interfaces[i].a3 == obj.interfaces[i].a3);
    }
    CHECK_THROWS_AS(object_from_json(nlohmann::json{{"foo", 1}}), DataError);
}

TEST_CASE("signal CSV round trip keeps full precision") {
    Grid grid;
    grid.n_samples = 128;
    ObjectSpec obj{{itf(20, 0.3333333333333333, 7.7, -2.2)}};
    const auto sig = synthesize_signal(obj, grid);
    const auto path = std::filesystem::temp_directory_path() / "nlsel_sig_test.csv";
    sig.write_csv(path.string());
    const auto back = read_signal_csv(path.string(), grid);
    CHECK(back.samples == sig.samples);
    std::filesystem::remove(path);
}
