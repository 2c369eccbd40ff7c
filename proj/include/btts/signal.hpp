#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "btts/errors.hpp"
#include "btts/tensor.hpp"

namespace btts::signal {

struct SignalError : Error {
    using Error::Error;
};
// WAV container exists but is not PCM-16/mono, or is structurally broken.
struct WavFormatError : SignalError {
    using SignalError::SignalError;
};
// Overlap-add window sum vanished somewhere we need a sample.
struct NonColaError : SignalError {
    using SignalError::SignalError;
};
// Operation applied to a spectrogram of the wrong scale.
struct ScaleError : SignalError {
    using SignalError::SignalError;
};

struct AudioBuffer {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int sample_rate = 0;          // Hz

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

struct SignalConfig {
    std::size_t fft_size = 2048;  // power of two
    std::size_t win_length = 2048;
    std::size_t hop_length = 512;
    std::size_t mel_bands = 80;
    double preemphasis_coeff = 0.97;
    int sample_rate = 48000;
    std::size_t griffin_lim_iters = 60;
    double ref_level_db = 20.0;
    double min_level_db = -100.0;

    void validate() const;  // throws ConfigError
    std::size_t bins() const { return fft_size / 2 + 1; }
    std::uint64_t fingerprint() const;

    bool operator==(const SignalConfig&) const = default;
};

enum class Scale { Linear, Mel };

struct ComplexSpectrogram {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<std::complex<double>> values;  // frames x bins, row-major
    SignalConfig config;
    std::size_t source_samples = 0;  // 0 when unknown

    std::complex<double>& at(std::size_t f, std::size_t b) { return values[f * bins + b]; }
    const std::complex<double>& at(std::size_t f, std::size_t b) const {
        return values[f * bins + b];
    }
};

struct MagnitudeSpectrogram {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<double> values;  // frames x bins, row-major
    Scale scale = Scale::Linear;
    SignalConfig config;
    std::size_t source_samples = 0;

    double& at(std::size_t f, std::size_t b) { return values[f * bins + b]; }
    double at(std::size_t f, std::size_t b) const { return values[f * bins + b]; }
};

// -------- core transforms --------

// Centered STFT: reflect padding of win_length/2 on both ends, periodic
// Hann window, frames = 1 + floor(len/hop).
ComplexSpectrogram stft(const AudioBuffer& audio, const SignalConfig& cfg);

// Window-sum-normalized overlap-add inverse. `length` 0 means "use
// spec.source_samples, else (frames-1)*hop".
AudioBuffer istft(const ComplexSpectrogram& spec, std::size_t length = 0);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec);

// Triangular filterbank on the HTK mel scale (m = 2595 log10(1 + f/700)),
// peak height 1, mel_bands rows x (fft_size/2+1) columns.
Tensor mel_filterbank(const SignalConfig& cfg);

MagnitudeSpectrogram linear_to_mel(const MagnitudeSpectrogram& mag);

AudioBuffer preemphasis(const AudioBuffer& audio, double coeff);
AudioBuffer inverse_preemphasis(const AudioBuffer& audio, double coeff);

// Strips leading/trailing frames whose RMS level is below threshold_db
// (relative to full scale). Output is always a contiguous slice of the
// input; all-silent input yields an empty buffer.
AudioBuffer trim_silence(const AudioBuffer& audio, double threshold_db, double frame_ms);

struct GriffinLimResult {
    AudioBuffer audio;
    std::vector<double> convergence;  // C_k per iteration
};

// Classic alternating-projection phase reconstruction with deterministic
// zero-phase initialization. convergence[k] is the relative Frobenius
// distance between |STFT(x_k)| and the target magnitude.
GriffinLimResult griffin_lim(const MagnitudeSpectrogram& mag, const SignalConfig& cfg);

// ||estimate - target||_F / ||target||_F; rejects an all-zero target.
double spectral_convergence(const MagnitudeSpectrogram& estimate,
                            const MagnitudeSpectrogram& target);

// -------- dB compression used for model targets --------

double amp_to_db(double amplitude);
double db_to_amp(double db);
double normalize_db(double db, const SignalConfig& cfg);
double denormalize_db(double normalized, const SignalConfig& cfg);

// magnitude -> normalized-dB matrix in [0,1] (frames x bins)
Tensor to_normalized_db(const MagnitudeSpectrogram& mag);
// inverse of to_normalized_db
MagnitudeSpectrogram from_normalized_db(const Tensor& normalized, Scale scale,
                                        const SignalConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// -------- I/O --------

// RIFF/WAVE, PCM, 16-bit little-endian, mono. Anything else throws
// WavFormatError.
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);

void write_csv(const MagnitudeSpectrogram& mag, const std::string& path);

namespace detail {
// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse);
std::vector<double> hann_window(std::size_t n);
}  // namespace detail

}  // namespace btts::signal
