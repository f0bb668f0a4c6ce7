// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "augment.hpp"
#include "errors.hpp"

namespace sapaug::io {

namespace detail {

inline void put_u16(std::string& buf, std::uint16_t v)
{
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& buf, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

inline std::uint32_t get_u32(std::string_view buf, std::size_t pos)
{
    if (pos + 4 > buf.size()) {
        throw InputError("unexpected end of file");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    }
    return v;
}

inline std::uint16_t get_u16(std::string_view buf, std::size_t pos)
{
    if (pos + 2 > buf.size()) {
        throw InputError("unexpected end of file");
    }
    return static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos]) |
                                      (static_cast<unsigned char>(buf[pos + 1]) << 8));
}

} // namespace detail

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Write to a sibling temporary file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw InputError("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

// --- WAV (RIFF, PCM 16-bit, mono) ---------------------------------------------

inline Waveform decode_wav(std::string_view bytes)
{
    if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
        throw InputError("wav: not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    bool have_fmt = false;
    int sample_rate = 0;
    while (pos + 8 <= bytes.size()) {
        const auto id = bytes.substr(pos, 4);
        const std::uint32_t size = detail::get_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            if (size < 16) {
                throw InputError("wav: fmt chunk too short");
            }
            const auto format = detail::get_u16(bytes, body);
            const auto channels = detail::get_u16(bytes, body + 2);
            sample_rate = static_cast<int>(detail::get_u32(bytes, body + 4));
            const auto bits = detail::get_u16(bytes, body + 14);
            if (format != 1 || channels != 1 || bits != 16) {
                throw InputError("wav: only 16-bit PCM mono is supported");
            }
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) {
                throw InputError("wav: data chunk before fmt chunk");
            }
            const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
            Waveform w;
            w.sample_rate = sample_rate;
            w.samples.resize(avail / 2);
            for (std::size_t n = 0; n < w.samples.size(); ++n) {
                const auto raw = static_cast<std::int16_t>(detail::get_u16(bytes, body + 2 * n));
                w.samples[n] = static_cast<float>(raw) / 32768.0f;
            }
            w.validate();
            return w;
        }
        pos = body + size + (size & 1);
    }
    throw InputError("wav: no data chunk");
}

inline std::string encode_wav(const Waveform& w)
{
    const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
    std::string buf;
    buf.reserve(44 + data_bytes);
    buf += "RIFF";
    detail::put_u32(buf, 36 + data_bytes);
    buf += "WAVEfmt ";
    detail::put_u32(buf, 16);
    detail::put_u16(buf, 1);
    detail::put_u16(buf, 1);
    detail::put_u32(buf, static_cast<std::uint32_t>(w.sample_rate));
    detail::put_u32(buf, static_cast<std::uint32_t>(w.sample_rate) * 2);
    detail::put_u16(buf, 2);
    detail::put_u16(buf, 16);
    buf += "data";
    detail::put_u32(buf, data_bytes);
    for (float s : w.samples) {
        const double scaled = std::round(static_cast<double>(s) * 32768.0);
        const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        detail::put_u16(buf, static_cast<std::uint16_t>(q));
    }
    return buf;
}

inline Waveform read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

inline void write_wav(const std::filesystem::path& path, const Waveform& w) { write_file_atomic(path, encode_wav(w)); }

// --- feature matrices ----------------------------------------------------------

/// "T,F" line followed by T rows of F values, 9 significant digits.
inline std::string encode_features_csv(const FeatureMatrix& m)
{
    std::string out = std::to_string(m.frames()) + "," + std::to_string(m.bins()) + "\n";
    char cell[32];
    for (std::size_t t = 0; t < m.frames(); ++t) {
        for (std::size_t f = 0; f < m.bins(); ++f) {
            std::snprintf(cell, sizeof(cell), "%.9g", static_cast<double>(m(t, f)));
            if (f > 0) {
                out.push_back(',');
            }
            out += cell;
        }
        out.push_back('\n');
    }
    return out;
}

inline FeatureMatrix decode_features_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("feature csv: missing header");
    }
    std::size_t frames = 0;
    std::size_t bins = 0;
    char comma = 0;
    std::istringstream head(line);
    if (!(head >> frames >> comma >> bins) || comma != ',') {
        throw InputError("feature csv: header must be 'T,F'");
    }
    std::vector<float> data;
    data.reserve(frames * bins);
    for (std::size_t t = 0; t < frames; ++t) {
        if (!std::getline(in, line)) {
            throw InputError("feature csv: expected " + std::to_string(frames) + " rows");
        }
        std::istringstream row(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(row, cell, ',')) {
            try {
                data.push_back(std::stof(cell));
            } catch (const std::exception&) {
                throw InputError("feature csv: bad value '" + cell + "'");
            }
            ++count;
        }
        if (count != bins) {
            throw InputError("feature csv: row " + std::to_string(t) + " has wrong width");
        }
    }
    FeatureMatrix m(frames, bins, std::move(data));
    m.validate();
    return m;
}

/// "SAPF", u32 T, u32 F, then T*F little-endian float32, row-major.
inline std::string encode_features_binary(const FeatureMatrix& m)
{
    std::string buf = "SAPF";
    detail::put_u32(buf, static_cast<std::uint32_t>(m.frames()));
    detail::put_u32(buf, static_cast<std::uint32_t>(m.bins()));
    for (float v : m.data()) {
        detail::put_u32(buf, std::bit_cast<std::uint32_t>(v));
    }
    return buf;
}

inline FeatureMatrix decode_features_binary(std::string_view bytes)
{
    if (bytes.size() < 12 || bytes.substr(0, 4) != "SAPF") {
        throw InputError("feature file: bad magic");
    }
    const std::size_t frames = detail::get_u32(bytes, 4);
    const std::size_t bins = detail::get_u32(bytes, 8);
    if (bytes.size() != 12 + 4 * frames * bins) {
        throw InputError("feature file: size does not match header");
    }
    std::vector<float> data(frames * bins);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(detail::get_u32(bytes, 12 + 4 * i));
    }
    FeatureMatrix m(frames, bins, std::move(data));
    m.validate();
    return m;
}

/// Format chosen by extension: ".csv" is text, anything else binary.
inline void write_features(const std::filesystem::path& path, const FeatureMatrix& m)
{
    if (path.extension() == ".csv") {
        write_file_atomic(path, encode_features_csv(m));
    } else {
        write_file_atomic(path, encode_features_binary(m));
    }
}

inline FeatureMatrix read_features(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == "SAPF") {
        return decode_features_binary(bytes);
    }
    return decode_features_csv(bytes);
}

} // namespace sapaug::io
