#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <vector>

#include "btts/rng.hpp"
#include "btts/signal.hpp"

using namespace btts;
using namespace btts::signal;

namespace {

SignalConfig small_cfg() {
    SignalConfig cfg;
    cfg.fft_size = 512;
    cfg.win_length = 512;
    cfg.hop_length = 128;
    cfg.mel_bands = 80;
    cfg.sample_rate = 16000;
    cfg.griffin_lim_iters = 60;
    return cfg;
}

AudioBuffer sine(double freq, double seconds, int sr, double amp = 1.0) {
    AudioBuffer a;
    a.sample_rate = sr;
    const std::size_t n = static_cast<std::size_t>(seconds * sr);
    a.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        a.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / sr);
    return a;
}

// Brute-force oracle: rebuild one windowed/padded frame straight from the
// framing rules and run a direct DFT over it.
std::vector<std::complex<double>> dft_oracle_frame(const AudioBuffer& audio,
                                                   const SignalConfig& cfg, std::size_t frame) {
    const std::size_t win = cfg.win_length, pad = win / 2, n = audio.size();
    auto reflect = [&](std::ptrdiff_t i) -> double {
        const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n) - 2;
        std::ptrdiff_t m = i % period;
        if (m < 0) m += period;
        if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
        return audio.samples[static_cast<std::size_t>(m)];
    };
    std::vector<double> buf(cfg.fft_size, 0.0);
    const std::size_t off = (cfg.fft_size - win) / 2;
    for (std::size_t i = 0; i < win; ++i) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / win);
        buf[off + i] =
            w * reflect(static_cast<std::ptrdiff_t>(frame * cfg.hop_length + i) -
                        static_cast<std::ptrdiff_t>(pad));
    }
    std::vector<std::complex<double>> out(cfg.fft_size / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < cfg.fft_size; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                               static_cast<double>(cfg.fft_size);
            acc += buf[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

double snr_db(const std::vector<double>& ref, const std::vector<double>& got) {
    REQUIRE(ref.size() == got.size());
    double sig = 0.0, err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        sig += ref[i] * ref[i];
        const double d = ref[i] - got[i];
        err += d * d;
    }
    return 10.0 * std::log10(sig / std::max(err, 1e-300));
}

}  // namespace

TEST_CASE("stft of silence is an all-zero spectrogram with the documented frame count") {
    auto cfg = small_cfg();
    AudioBuffer a;
    a.sample_rate = cfg.sample_rate;
    a.samples.assign(16000, 0.0);
    const auto spec = stft(a, cfg);
    CHECK(spec.frames == 1 + 16000 / cfg.hop_length);
    CHECK(spec.bins == cfg.fft_size / 2 + 1);
    for (const auto& v : spec.values) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("440 Hz sine at 48 kHz peaks in the expected bin") {
    SignalConfig cfg;  // 48 kHz defaults: fft 2048, hop 512
    const auto a = sine(440.0, 0.3, cfg.sample_rate);
    const auto mag = magnitude(stft(a, cfg));
    // 440 * 2048 / 48000 = 18.77 -> bin 19. Check every frame whose window
    // lies fully inside the signal (edge frames see the reflected padding).
    const std::size_t pad = cfg.win_length / 2;
    std::size_t checked = 0;
    for (std::size_t f = 0; f < mag.frames; ++f) {
        const std::size_t start = f * cfg.hop_length;
        if (start < pad || start + cfg.win_length > pad + a.samples.size()) continue;
        std::size_t argmax = 0;
        for (std::size_t b = 1; b < mag.bins; ++b)
            if (mag.at(f, b) > mag.at(f, argmax)) argmax = b;
        CHECK(argmax == 19);
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("stft row equals a direct DFT of the independently framed signal") {
    auto cfg = small_cfg();
    auto g = rng::stream(99, "dft-oracle");
    AudioBuffer a;
    a.sample_rate = cfg.sample_rate;
    a.samples.resize(4000);
    for (auto& s : a.samples) s = rng::uniform(g, -0.5, 0.5);

    const auto spec = stft(a, cfg);
    for (std::size_t frame : {std::size_t{0}, std::size_t{3}, spec.frames - 1}) {
        const auto oracle = dft_oracle_frame(a, cfg, frame);
        for (std::size_t b = 0; b < spec.bins; ++b) {
            CHECK(spec.at(frame, b).real() == doctest::Approx(oracle[b].real()).epsilon(1e-9));
            CHECK(spec.at(frame, b).imag() == doctest::Approx(oracle[b].imag()).epsilon(1e-9));
        }
    }
}

TEST_CASE("frame count formula matches a brute-force framing loop") {
    auto g = rng::stream(7, "framing");
    const std::size_t wins[] = {64, 128, 256, 512};
    for (int trial = 0; trial < 50; ++trial) {
        SignalConfig cfg = small_cfg();
        cfg.win_length = cfg.fft_size = wins[g() % 4];
        cfg.hop_length = cfg.win_length >> (1 + g() % 3);
        cfg.mel_bands = 20;
        const std::size_t len = 1 + g() % 8000;

        AudioBuffer a;
        a.sample_rate = cfg.sample_rate;
        a.samples.assign(len, 0.25);

        std::size_t brute = 0;
        const std::size_t padded = len + 2 * (cfg.win_length / 2);
        for (std::size_t start = 0; start + cfg.win_length <= padded; start += cfg.hop_length)
            ++brute;
        CHECK(stft(a, cfg).frames == brute);
    }
}

TEST_CASE("istft(stft(x)) reconstructs with SNR >= 40 dB") {
    auto cfg = small_cfg();
    auto a = sine(440.0, 1.0, cfg.sample_rate);
    const auto back = istft(stft(a, cfg));
    REQUIRE(back.samples.size() == a.samples.size());
    CHECK(snr_db(a.samples, back.samples) >= 40.0);
}

TEST_CASE("istft of an all-zero spectrogram is silence") {
    auto cfg = small_cfg();
    AudioBuffer a;
    a.sample_rate = cfg.sample_rate;
    a.samples.assign(5000, 0.0);
    auto spec = stft(a, cfg);
    const auto back = istft(spec);
    for (double s : back.samples) CHECK(s == 0.0);
}

TEST_CASE("round-trip length bookkeeping for random lengths") {
    auto cfg = small_cfg();
    auto g = rng::stream(11, "lengths");
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t len = 600 + g() % 9000;
        AudioBuffer a;
        a.sample_rate = cfg.sample_rate;
        a.samples.resize(len);
        for (auto& s : a.samples) s = rng::uniform(g, -0.9, 0.9);
        const auto back = istft(stft(a, cfg));
        CHECK(back.samples.size() == len);
        CHECK(snr_db(a.samples, back.samples) >= 40.0);
    }
}

TEST_CASE("istft reports a zero window-sum region for a non-overlapping config") {
    auto cfg = small_cfg();
    cfg.hop_length = cfg.win_length;  // passes divisibility, breaks overlap-add
    const auto a = sine(300.0, 0.25, cfg.sample_rate);
    auto spec = stft(a, cfg);
    spec.source_samples = 0;  // default length; Hann endpoints then hit wsum == 0
    CHECK_THROWS_AS((void)istft(spec), NonColaError);
}

TEST_CASE("magnitude is the elementwise modulus") {
    auto cfg = small_cfg();
    ComplexSpectrogram spec;
    spec.frames = 4;
    spec.bins = cfg.bins();
    spec.config = cfg;
    spec.values.assign(spec.frames * spec.bins, {0.0, 0.0});
    auto mag = magnitude(spec);
    for (double v : mag.values) CHECK(v == 0.0);

    spec.at(1, 2) = {-3.0, 0.0};  // purely real
    auto g = rng::stream(13, "mag");
    for (auto& v : spec.values)
        if (rng::uniform01(g) < 0.3) v = {rng::uniform(g, -2, 2), rng::uniform(g, -2, 2)};
    mag = magnitude(spec);
    CHECK(magnitude(spec).at(1, 2) ==
          doctest::Approx(std::abs(spec.at(1, 2))).epsilon(1e-15));
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        const double re = spec.values[i].real(), im = spec.values[i].imag();
        CHECK(mag.values[i] == doctest::Approx(std::sqrt(re * re + im * im)).epsilon(1e-12));
    }
}

TEST_CASE("mel filterbank rows are nonnegative, unimodal, and have nonzero support") {
    auto cfg = small_cfg();
    const Tensor fb = mel_filterbank(cfg);
    REQUIRE(fb.rows() == cfg.mel_bands);
    REQUIRE(fb.cols() == cfg.bins());
    for (std::size_t i = 0; i < fb.rows(); ++i) {
        double row_sum = 0.0;
        int direction_changes = 0;
        double prev = 0.0;
        bool going_up = true;
        for (std::size_t b = 0; b < fb.cols(); ++b) {
            CHECK(fb(i, b) >= 0.0);
            row_sum += fb(i, b);
            if (fb(i, b) < prev && going_up) {
                going_up = false;
                ++direction_changes;
            }
            if (fb(i, b) > prev && !going_up) {
                going_up = true;
                ++direction_changes;
            }
            prev = fb(i, b);
        }
        CHECK(row_sum > 0.0);
        CHECK(direction_changes <= 1);  // rises then falls
    }
}

TEST_CASE("mel filterbank columns carry total weight <= 1") {
    auto cfg = small_cfg();
    const Tensor fb = mel_filterbank(cfg);
    for (std::size_t b = 0; b < fb.cols(); ++b) {
        double col = 0.0;
        for (std::size_t i = 0; i < fb.rows(); ++i) col += fb(i, b);
        CHECK(col <= 1.0 + 1e-6);
    }
}

TEST_CASE("mel projection of a constant-1 spectrogram yields the filter row sums") {
    auto cfg = small_cfg();
    MagnitudeSpectrogram mag;
    mag.frames = 3;
    mag.bins = cfg.bins();
    mag.scale = Scale::Linear;
    mag.config = cfg;
    mag.values.assign(mag.frames * mag.bins, 1.0);

    const Tensor fb = mel_filterbank(cfg);
    const auto mel = linear_to_mel(mag);
    REQUIRE(mel.scale == Scale::Mel);
    REQUIRE(mel.bins == cfg.mel_bands);
    for (std::size_t f = 0; f < mel.frames; ++f)
        for (std::size_t i = 0; i < mel.bins; ++i) {
            double row_sum = 0.0;
            for (std::size_t b = 0; b < fb.cols(); ++b) row_sum += fb(i, b);
            CHECK(mel.at(f, i) == doctest::Approx(row_sum).epsilon(1e-10));
        }

    mag.values.assign(mag.frames * mag.bins, 0.0);
    for (double v : linear_to_mel(mag).values) CHECK(v == 0.0);

    auto mel_in = linear_to_mel(mag);
    CHECK_THROWS_AS((void)linear_to_mel(mel_in), ScaleError);
}

TEST_CASE("preemphasis basics and exact IIR inversion") {
    AudioBuffer impulse;
    impulse.sample_rate = 16000;
    impulse.samples = {1.0, 0.0, 0.0, 0.0};
    const auto emph = preemphasis(impulse, 0.97);
    CHECK(emph.samples[0] == doctest::Approx(1.0));
    CHECK(emph.samples[1] == doctest::Approx(-0.97));
    CHECK(emph.samples[2] == doctest::Approx(0.0));

    auto g = rng::stream(21, "preemph");
    AudioBuffer x;
    x.sample_rate = 16000;
    x.samples.resize(4096);
    for (auto& s : x.samples) s = rng::uniform(g, -1.0, 1.0);

    const auto same = preemphasis(x, 0.0);
    CHECK(same.samples == x.samples);

    const auto round = inverse_preemphasis(preemphasis(x, 0.97), 0.97);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        CHECK(std::abs(round.samples[i] - x.samples[i]) < 1e-6);

    CHECK_THROWS_AS((void)preemphasis(x, 1.0), ConfigError);
    CHECK_THROWS_AS((void)preemphasis(x, -0.1), ConfigError);
}

TEST_CASE("trim_silence slices exactly the voiced region") {
    const int sr = 16000;
    const double frame_ms = 10.0;
    const std::size_t frame_len = 160;

    auto tone = sine(440.0, 1.0, sr, 0.5);
    AudioBuffer padded;
    padded.sample_rate = sr;
    padded.samples.assign(8000, 0.0);
    padded.samples.insert(padded.samples.end(), tone.samples.begin(), tone.samples.end());
    padded.samples.insert(padded.samples.end(), 8000, 0.0);

    const auto trimmed = trim_silence(padded, -40.0, frame_ms);
    CHECK(trimmed.samples.size() >= tone.samples.size());
    CHECK(trimmed.samples.size() <= tone.samples.size() + 2 * frame_len);

    // output must be a contiguous slice: find it at the expected offset
    bool is_slice = false;
    for (std::size_t off = 8000 - frame_len; off <= 8000; ++off) {
        if (off + trimmed.samples.size() > padded.samples.size()) break;
        if (std::equal(trimmed.samples.begin(), trimmed.samples.end(),
                       padded.samples.begin() + static_cast<std::ptrdiff_t>(off))) {
            is_slice = true;
            break;
        }
    }
    CHECK(is_slice);

    const auto untouched = trim_silence(tone, -40.0, frame_ms);
    CHECK(untouched.samples == tone.samples);

    AudioBuffer silent;
    silent.sample_rate = sr;
    silent.samples.assign(3200, 0.0);
    CHECK(trim_silence(silent, -40.0, frame_ms).empty());
}

TEST_CASE("griffin_lim of a zero magnitude is silence") {
    auto cfg = small_cfg();
    MagnitudeSpectrogram mag;
    mag.frames = 20;
    mag.bins = cfg.bins();
    mag.scale = Scale::Linear;
    mag.config = cfg;
    mag.values.assign(mag.frames * mag.bins, 0.0);
    const auto res = griffin_lim(mag, cfg);
    CHECK(res.audio.samples.size() == (mag.frames - 1) * cfg.hop_length);
    for (double s : res.audio.samples) CHECK(s == 0.0);
}

TEST_CASE("griffin_lim converges monotonically on a true two-harmonic magnitude") {
    auto cfg = small_cfg();
    // Two harmonics of 330 Hz gated into Hann bursts; the silences give the
    // phase recovery temporal anchors, like the pauses in real speech.
    AudioBuffer a;
    a.sample_rate = cfg.sample_rate;
    a.samples.resize(12800);
    const std::size_t burst = 120 * 16, gap = 60 * 16, period = burst + gap;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const std::size_t ph = i % period;
        if (ph >= burst) continue;
        const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * ph / burst);
        const double t = static_cast<double>(i) / cfg.sample_rate;
        a.samples[i] = env * (0.55 * std::sin(2.0 * std::numbers::pi * 330.0 * t) +
                              0.28 * std::sin(2.0 * std::numbers::pi * 660.0 * t));
    }

    const auto mag = magnitude(stft(a, cfg));
    const auto res = griffin_lim(mag, cfg);
    REQUIRE(res.convergence.size() == cfg.griffin_lim_iters);

    for (std::size_t k = 1; k < res.convergence.size(); ++k)
        CHECK(res.convergence[k] <= res.convergence[k - 1] + 1e-6);
    CHECK(res.convergence.back() < 0.1);

    // independent oracle: recompute the final distance from the returned audio
    const auto rebuilt = magnitude(stft(res.audio, cfg));
    CHECK(spectral_convergence(rebuilt, mag) ==
          doctest::Approx(res.convergence.back()).epsilon(1e-9));

    auto cfg1 = cfg;
    cfg1.griffin_lim_iters = 1;
    const auto res1 = griffin_lim(mag, cfg1);
    CHECK(res1.convergence.front() >= res.convergence.back());
}

TEST_CASE("spectral_convergence definition and guards") {
    auto cfg = small_cfg();
    MagnitudeSpectrogram a, b;
    a.frames = b.frames = 5;
    a.bins = b.bins = 7;
    a.config = b.config = cfg;
    auto g = rng::stream(31, "sc");
    a.values.resize(35);
    b.values.resize(35);
    for (auto& v : b.values) v = rng::uniform(g, 0.1, 2.0);
    a.values = b.values;
    CHECK(spectral_convergence(a, b) == 0.0);

    for (auto& v : a.values) v += rng::uniform(g, -0.05, 0.05);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < 35; ++i) {
        num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
        den += b.values[i] * b.values[i];
    }
    CHECK(spectral_convergence(a, b) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));

    b.values.assign(35, 0.0);
    CHECK_THROWS_AS((void)spectral_convergence(a, b), SignalError);
}

TEST_CASE("normalized dB compression round-trips above the floor") {
    auto cfg = small_cfg();
    MagnitudeSpectrogram mag;
    mag.frames = 2;
    mag.bins = 4;
    mag.config = cfg;
    mag.values = {0.5, 0.1, 0.01, 1.0, 0.25, 0.75, 0.33, 0.9};
    const Tensor norm = to_normalized_db(mag);
    for (std::size_t i = 0; i < norm.size(); ++i) {
        CHECK(norm(i) >= 0.0);
        CHECK(norm(i) <= 1.0);
    }
    const auto back = from_normalized_db(norm, Scale::Linear, cfg);
    for (std::size_t i = 0; i < mag.values.size(); ++i)
        CHECK(back.values[i] == doctest::Approx(mag.values[i]).epsilon(1e-9));
}

TEST_CASE("wav round trip and format rejection") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "btts_wav_test";
    fs::create_directories(dir);

    auto a = sine(440.0, 0.1, 16000, 0.8);
    const auto path = (dir / "tone.wav").string();
    write_wav(path, a);
    const auto back = read_wav(path);
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.samples.size() == a.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - a.samples[i]) <= 1.0 / 32768.0);

    // stereo file must be rejected
    const auto bad = (dir / "stereo.wav").string();
    std::FILE* f = std::fopen(bad.c_str(), "wb");
    REQUIRE(f);
    const unsigned char hdr[] = {
        'R', 'I', 'F', 'F', 40, 0, 0, 0, 'W', 'A', 'V', 'E', 'f', 'm', 't', ' ',
        16,  0,   0,   0,   1,  0, 2, 0, 0x80, 0x3e, 0, 0,  0,   0,   0,   0,
        4,   0,   16,  0,   'd', 'a', 't', 'a', 4, 0, 0, 0, 0, 0, 0, 0};
    std::fwrite(hdr, 1, sizeof(hdr), f);
    std::fclose(f);
    CHECK_THROWS_AS((void)read_wav(bad), WavFormatError);

    fs::remove_all(dir);
}
