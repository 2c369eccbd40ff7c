#include "btts/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "btts/kernels.hpp"
#include "btts/rng.hpp"

namespace btts::signal {

namespace {

constexpr double kAmpFloor = 1e-5;   // amp_to_db floor
constexpr double kWsumTiny = 1e-10;  // overlap-add window-sum threshold

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Mirror an out-of-range index back into [0, n) without repeating the
// edge sample (reflect padding).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n) - 2;
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
    return static_cast<std::size_t>(m);
}

void check_audio(const AudioBuffer& audio) {
    if (audio.empty()) throw SignalError("audio is empty");
    if (audio.sample_rate <= 0) throw SignalError("audio sample rate must be positive");
    for (double s : audio.samples)
        if (!std::isfinite(s)) throw SignalError("audio contains non-finite samples");
}

}  // namespace

void SignalConfig::validate() const {
    if (!is_pow2(fft_size)) throw ConfigError("fft_size must be a power of two");
    if (win_length == 0 || win_length > fft_size)
        throw ConfigError("win_length must be in (0, fft_size]");
    if (hop_length == 0 || hop_length > win_length)
        throw ConfigError("hop_length must be in (0, win_length]");
    if (win_length % hop_length != 0)
        throw ConfigError("hop_length must divide win_length (overlap-add constraint)");
    if (mel_bands == 0 || mel_bands >= bins())
        throw ConfigError("mel_bands must be in [1, fft_size/2]");
    if (preemphasis_coeff < 0.0 || preemphasis_coeff >= 1.0)
        throw ConfigError("preemphasis_coeff must be in [0, 1)");
    if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (griffin_lim_iters < 1) throw ConfigError("griffin_lim_iters must be >= 1");
    if (min_level_db >= 0.0) throw ConfigError("min_level_db must be negative");
}

std::uint64_t SignalConfig::fingerprint() const {
    std::uint64_t h = rng::fnv1a_str("SignalConfig");
    auto mix_u = [&h](std::uint64_t v) { h = rng::fnv1a_u64(v, h); };
    auto mix_d = [&h](double v) { h = rng::fnv1a(&v, sizeof(v), h); };
    mix_u(fft_size);
    mix_u(win_length);
    mix_u(hop_length);
    mix_u(mel_bands);
    mix_d(preemphasis_coeff);
    mix_u(static_cast<std::uint64_t>(sample_rate));
    mix_u(griffin_lim_iters);
    mix_d(ref_level_db);
    mix_d(min_level_db);
    return h;
}

namespace detail {

void fft(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) throw SignalError("fft size must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = x[i + j];
                const std::complex<double> v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= inv;
    }
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

}  // namespace detail

ComplexSpectrogram stft(const AudioBuffer& audio, const SignalConfig& cfg) {
    cfg.validate();
    check_audio(audio);
    if (audio.sample_rate != cfg.sample_rate)
        throw SignalError("audio sample rate does not match SignalConfig");

    const std::size_t len = audio.size();
    const std::size_t win = cfg.win_length;
    const std::size_t hop = cfg.hop_length;
    const std::size_t pad = win / 2;
    const std::size_t padded_len = len + 2 * pad;
    const std::size_t frames = 1 + (padded_len - win) / hop;

    std::vector<double> padded(padded_len);
    for (std::size_t i = 0; i < padded_len; ++i)
        padded[i] = audio.samples[reflect_index(
            static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad), len)];

    const std::vector<double> window = detail::hann_window(win);
    const std::size_t fft_off = (cfg.fft_size - win) / 2;

    ComplexSpectrogram spec;
    spec.frames = frames;
    spec.bins = cfg.bins();
    spec.values.assign(frames * spec.bins, {0.0, 0.0});
    spec.config = cfg;
    spec.source_samples = len;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(frames); ++f) {
        std::vector<std::complex<double>> buf(cfg.fft_size, {0.0, 0.0});
        const std::size_t start = static_cast<std::size_t>(f) * hop;
        for (std::size_t i = 0; i < win; ++i)
            buf[fft_off + i] = padded[start + i] * window[i];
        detail::fft(buf, false);
        for (std::size_t b = 0; b < spec.bins; ++b)
            spec.values[static_cast<std::size_t>(f) * spec.bins + b] = buf[b];
    }
    return spec;
}

AudioBuffer istft(const ComplexSpectrogram& spec, std::size_t length) {
    const SignalConfig& cfg = spec.config;
    if (spec.frames == 0 || spec.bins != cfg.bins())
        throw SignalError("spectrogram bins inconsistent with config");

    const std::size_t win = cfg.win_length;
    const std::size_t hop = cfg.hop_length;
    const std::size_t pad = win / 2;
    const std::size_t covered = (spec.frames - 1) * hop + win;
    const std::size_t out_len =
        length > 0 ? length
                   : (spec.source_samples > 0 ? spec.source_samples : (spec.frames - 1) * hop);
    if (out_len + pad > covered)
        throw SignalError("requested istft length exceeds frame coverage");

    const std::vector<double> window = detail::hann_window(win);
    const std::size_t fft_off = (cfg.fft_size - win) / 2;

    // Per-frame inverse FFTs in parallel, then a serial overlap-add so the
    // accumulation order stays fixed.
    std::vector<double> frames_time(spec.frames * win);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(spec.frames); ++f) {
        std::vector<std::complex<double>> buf(cfg.fft_size);
        const std::complex<double>* row = spec.values.data() + static_cast<std::size_t>(f) * spec.bins;
        for (std::size_t b = 0; b < spec.bins; ++b) buf[b] = row[b];
        for (std::size_t b = 1; b + 1 < spec.bins; ++b)
            buf[cfg.fft_size - b] = std::conj(row[b]);
        detail::fft(buf, true);
        for (std::size_t i = 0; i < win; ++i)
            frames_time[static_cast<std::size_t>(f) * win + i] =
                buf[fft_off + i].real() * window[i];
    }

    std::vector<double> acc(covered, 0.0);
    std::vector<double> wsum(covered, 0.0);
    for (std::size_t f = 0; f < spec.frames; ++f) {
        const std::size_t start = f * hop;
        for (std::size_t i = 0; i < win; ++i) {
            acc[start + i] += frames_time[f * win + i];
            wsum[start + i] += window[i] * window[i];
        }
    }

    AudioBuffer out;
    out.sample_rate = cfg.sample_rate;
    out.samples.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::size_t p = i + pad;
        if (wsum[p] < kWsumTiny)
            throw NonColaError("zero window-sum region; config does not satisfy overlap-add");
        out.samples[i] = acc[p] / wsum[p];
    }
    return out;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec) {
    MagnitudeSpectrogram mag;
    mag.frames = spec.frames;
    mag.bins = spec.bins;
    mag.scale = Scale::Linear;
    mag.config = spec.config;
    mag.source_samples = spec.source_samples;
    mag.values.resize(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) mag.values[i] = std::abs(spec.values[i]);
    return mag;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(const SignalConfig& cfg) {
    cfg.validate();
    const std::size_t bins = cfg.bins();
    const std::size_t m = cfg.mel_bands;
    const double mel_hi = hz_to_mel(cfg.sample_rate / 2.0);

    std::vector<double> pts(m + 2);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = mel_hi * static_cast<double>(i) / static_cast<double>(m + 1);

    Tensor fb({m, bins});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t b = 0; b < bins; ++b) {
            const double f = static_cast<double>(b) * cfg.sample_rate /
                             static_cast<double>(cfg.fft_size);
            const double mel = hz_to_mel(f);
            const double up = (mel - pts[i]) / (pts[i + 1] - pts[i]);
            const double down = (pts[i + 2] - mel) / (pts[i + 2] - pts[i + 1]);
            fb(i, b) = std::max(0.0, std::min(up, down));
        }
    }
    return fb;
}

MagnitudeSpectrogram linear_to_mel(const MagnitudeSpectrogram& mag) {
    if (mag.scale != Scale::Linear) throw ScaleError("linear_to_mel expects a linear spectrogram");
    if (mag.bins != mag.config.bins())
        throw SignalError("spectrogram bins inconsistent with config");

    const Tensor fb = mel_filterbank(mag.config);
    MagnitudeSpectrogram mel;
    mel.frames = mag.frames;
    mel.bins = mag.config.mel_bands;
    mel.scale = Scale::Mel;
    mel.config = mag.config;
    mel.source_samples = mag.source_samples;
    mel.values.assign(mel.frames * mel.bins, 0.0);
    // (frames x bins) * (mel x bins)^T
    kernels::matmul_nt(mag.values.data(), fb.data(), mel.values.data(),
                       mag.frames, mag.bins, mel.bins);
    return mel;
}

AudioBuffer preemphasis(const AudioBuffer& audio, double coeff) {
    if (coeff < 0.0 || coeff >= 1.0) throw ConfigError("preemphasis coeff must be in [0, 1)");
    AudioBuffer out;
    out.sample_rate = audio.sample_rate;
    out.samples.resize(audio.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < audio.size(); ++i) {
        out.samples[i] = audio.samples[i] - coeff * prev;
        prev = audio.samples[i];
    }
    return out;
}

AudioBuffer inverse_preemphasis(const AudioBuffer& audio, double coeff) {
    if (coeff < 0.0 || coeff >= 1.0) throw ConfigError("preemphasis coeff must be in [0, 1)");
    AudioBuffer out;
    out.sample_rate = audio.sample_rate;
    out.samples.resize(audio.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < audio.size(); ++i) {
        prev = audio.samples[i] + coeff * prev;
        out.samples[i] = prev;
    }
    return out;
}

AudioBuffer trim_silence(const AudioBuffer& audio, double threshold_db, double frame_ms) {
    check_audio(audio);
    if (frame_ms <= 0.0) throw ConfigError("frame_ms must be positive");
    const std::size_t frame_len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(frame_ms * audio.sample_rate / 1000.0)));
    const std::size_t n_frames = (audio.size() + frame_len - 1) / frame_len;

    auto frame_active = [&](std::size_t f) {
        const std::size_t begin = f * frame_len;
        const std::size_t end = std::min(audio.size(), begin + frame_len);
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += audio.samples[i] * audio.samples[i];
        const double rms = std::sqrt(acc / static_cast<double>(end - begin));
        return 20.0 * std::log10(rms + 1e-12) > threshold_db;
    };

    std::size_t first = n_frames;
    for (std::size_t f = 0; f < n_frames; ++f)
        if (frame_active(f)) {
            first = f;
            break;
        }
    AudioBuffer out;
    out.sample_rate = audio.sample_rate;
    if (first == n_frames) return out;  // all silent
    std::size_t last = first;
    for (std::size_t f = n_frames; f-- > first;)
        if (frame_active(f)) {
            last = f;
            break;
        }
    const std::size_t begin = first * frame_len;
    const std::size_t end = std::min(audio.size(), (last + 1) * frame_len);
    out.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

GriffinLimResult griffin_lim(const MagnitudeSpectrogram& mag, const SignalConfig& cfg) {
    cfg.validate();
    if (mag.scale != Scale::Linear) throw ScaleError("griffin_lim expects a linear spectrogram");
    if (mag.bins != cfg.bins()) throw SignalError("spectrogram bins inconsistent with config");

    const std::size_t n = mag.values.size();
    double target_norm = 0.0;
    for (double v : mag.values) target_norm += v * v;
    target_norm = std::sqrt(target_norm);

    const std::size_t out_len =
        mag.source_samples > 0 ? mag.source_samples : (mag.frames - 1) * cfg.hop_length;

    GriffinLimResult result;
    result.convergence.assign(cfg.griffin_lim_iters, 0.0);
    if (target_norm == 0.0) {
        result.audio.sample_rate = cfg.sample_rate;
        result.audio.samples.assign(out_len, 0.0);
        return result;
    }

    ComplexSpectrogram est;
    est.frames = mag.frames;
    est.bins = mag.bins;
    est.config = cfg;
    est.source_samples = out_len;
    est.values.resize(n);

    // deterministic zero-phase start
    std::vector<std::complex<double>> phase(n, {1.0, 0.0});

    for (std::size_t it = 0; it < cfg.griffin_lim_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) est.values[i] = mag.values[i] * phase[i];
        result.audio = istft(est, out_len);
        const ComplexSpectrogram rebuilt = stft(result.audio, cfg);

        double dist = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(rebuilt.values[i]) - mag.values[i];
            dist += d * d;
        }
        result.convergence[it] = std::sqrt(dist) / target_norm;

        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(rebuilt.values[i]);
            phase[i] = a > 0.0 ? rebuilt.values[i] / a : std::complex<double>(1.0, 0.0);
        }
    }
    return result;
}

double spectral_convergence(const MagnitudeSpectrogram& estimate,
                            const MagnitudeSpectrogram& target) {
    if (estimate.frames != target.frames || estimate.bins != target.bins)
        throw SignalError("spectral_convergence dimension mismatch");
    if (estimate.scale != target.scale)
        throw ScaleError("spectral_convergence scale mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < target.values.size(); ++i) {
        const double d = estimate.values[i] - target.values[i];
        num += d * d;
        den += target.values[i] * target.values[i];
    }
    if (den == 0.0) throw SignalError("spectral_convergence target is all-zero");
    return std::sqrt(num) / std::sqrt(den);
}

double amp_to_db(double amplitude) { return 20.0 * std::log10(std::max(amplitude, kAmpFloor)); }
double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }

double normalize_db(double db, const SignalConfig& cfg) {
    const double v = (db - cfg.ref_level_db - cfg.min_level_db) / (-cfg.min_level_db);
    return std::clamp(v, 0.0, 1.0);
}

double denormalize_db(double normalized, const SignalConfig& cfg) {
    return std::clamp(normalized, 0.0, 1.0) * (-cfg.min_level_db) + cfg.min_level_db +
           cfg.ref_level_db;
}

Tensor to_normalized_db(const MagnitudeSpectrogram& mag) {
    Tensor out({mag.frames, mag.bins});
    for (std::size_t i = 0; i < mag.values.size(); ++i)
        out(i) = normalize_db(amp_to_db(mag.values[i]), mag.config);
    return out;
}

MagnitudeSpectrogram from_normalized_db(const Tensor& normalized, Scale scale,
                                        const SignalConfig& cfg) {
    if (normalized.rank() != 2) throw SignalError("normalized spectrogram must be rank 2");
    MagnitudeSpectrogram mag;
    mag.frames = normalized.rows();
    mag.bins = normalized.cols();
    mag.scale = scale;
    mag.config = cfg;
    mag.values.resize(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i)
        mag.values[i] = db_to_amp(denormalize_db(normalized(i), cfg));
    return mag;
}

void write_csv(const MagnitudeSpectrogram& mag, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw SignalError("cannot open " + path + " for writing");
    for (std::size_t r = 0; r < mag.frames; ++r) {
        for (std::size_t c = 0; c < mag.bins; ++c)
            std::fprintf(f, c + 1 < mag.bins ? "%.9g," : "%.9g\n", mag.at(r, c));
    }
    std::fclose(f);
}

}  // namespace btts::signal
