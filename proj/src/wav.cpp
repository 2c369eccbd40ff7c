#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "btts/signal.hpp"

namespace btts::signal {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t read_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw WavFormatError("unexpected end of WAV file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::FILE* f) {
    unsigned char b[2];
    if (std::fread(b, 1, 2, f) != 2) throw WavFormatError("unexpected end of WAV file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

void write_u16(std::FILE* f, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    std::fwrite(b, 1, 2, f);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw WavFormatError("cannot open " + path);

    char tag[4];
    if (std::fread(tag, 1, 4, f.get()) != 4 || std::memcmp(tag, "RIFF", 4) != 0)
        throw WavFormatError(path + ": missing RIFF header");
    read_u32(f.get());  // riff size
    if (std::fread(tag, 1, 4, f.get()) != 4 || std::memcmp(tag, "WAVE", 4) != 0)
        throw WavFormatError(path + ": not a WAVE file");

    bool have_fmt = false;
    std::uint32_t sample_rate = 0;
    AudioBuffer out;

    while (std::fread(tag, 1, 4, f.get()) == 4) {
        const std::uint32_t chunk_size = read_u32(f.get());
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw WavFormatError(path + ": truncated fmt chunk");
            const std::uint16_t format = read_u16(f.get());
            const std::uint16_t channels = read_u16(f.get());
            sample_rate = read_u32(f.get());
            read_u32(f.get());  // byte rate
            read_u16(f.get());  // block align
            const std::uint16_t bits = read_u16(f.get());
            if (format != 1) throw WavFormatError(path + ": only PCM encoding is supported");
            if (channels != 1) throw WavFormatError(path + ": only mono audio is supported");
            if (bits != 16) throw WavFormatError(path + ": only 16-bit samples are supported");
            if (chunk_size > 16)
                std::fseek(f.get(), static_cast<long>(chunk_size - 16 + (chunk_size & 1)),
                           SEEK_CUR);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw WavFormatError(path + ": data chunk before fmt chunk");
            const std::size_t n = chunk_size / 2;
            std::vector<unsigned char> raw(chunk_size);
            if (std::fread(raw.data(), 1, chunk_size, f.get()) != chunk_size)
                throw WavFormatError(path + ": truncated data chunk");
            out.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::int16_t s =
                    static_cast<std::int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
                out.samples[i] = static_cast<double>(s) / 32768.0;
            }
            out.sample_rate = static_cast<int>(sample_rate);
            return out;
        } else {
            std::fseek(f.get(), static_cast<long>(chunk_size + (chunk_size & 1)), SEEK_CUR);
        }
    }
    throw WavFormatError(path + ": no data chunk found");
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
    if (audio.sample_rate <= 0) throw WavFormatError("refusing to write WAV with no sample rate");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw WavFormatError("cannot open " + path + " for writing");

    const std::uint32_t n = static_cast<std::uint32_t>(audio.samples.size());
    const std::uint32_t data_bytes = n * 2;
    std::fwrite("RIFF", 1, 4, f.get());
    write_u32(f.get(), 36 + data_bytes);
    std::fwrite("WAVE", 1, 4, f.get());
    std::fwrite("fmt ", 1, 4, f.get());
    write_u32(f.get(), 16);
    write_u16(f.get(), 1);  // PCM
    write_u16(f.get(), 1);  // mono
    write_u32(f.get(), static_cast<std::uint32_t>(audio.sample_rate));
    write_u32(f.get(), static_cast<std::uint32_t>(audio.sample_rate) * 2);
    write_u16(f.get(), 2);   // block align
    write_u16(f.get(), 16);  // bits per sample
    std::fwrite("data", 1, 4, f.get());
    write_u32(f.get(), data_bytes);

    for (std::size_t i = 0; i < n; ++i) {
        const long raw = std::lrint(std::clamp(audio.samples[i], -1.0, 1.0) * 32768.0);
        const auto s = static_cast<std::int16_t>(std::clamp<long>(raw, -32768, 32767));
        write_u16(f.get(), static_cast<std::uint16_t>(s));
    }
}

}  // namespace btts::signal
