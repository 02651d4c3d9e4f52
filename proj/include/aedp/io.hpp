#pragma once

// File formats:
//  csv         one sample per line, or "time,value" pairs with uniform spacing;
//              a single non-numeric header line is skipped.
//  raw_f32_le  headerless little-endian IEEE-754 float32 samples.
//  raw_i16_le  headerless little-endian int16 codes, scaled by volts_per_lsb.
//  hit file    one line of compact JSON (sample_rate, record_length, pretrigger,
//              channel, optional trigger_times) terminated by '\n', followed by
//              the records as concatenated raw_f32_le samples.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aedp/windowing.hpp"

namespace aedp {

enum class SampleFormat { csv, raw_f32_le, raw_i16_le };

SampleFormat parse_sample_format(std::string_view name);  // throws std::invalid_argument
const char* to_string(SampleFormat format);

struct ReadOptions {
    std::optional<double> sample_rate;  // required unless the CSV carries timestamps
    double volts_per_lsb = 1.0 / 32768.0;
};

Waveform read_waveform(const std::filesystem::path& path, SampleFormat format, const ReadOptions& options);
void write_waveform(const std::filesystem::path& path, const Waveform& w, SampleFormat format,
                    double volts_per_lsb = 1.0 / 32768.0);

struct HitRecord {
    double trigger_time = 0.0;  // seconds
    std::vector<double> samples;
    std::size_t pretrigger = 0;
    int channel = 0;
};

struct HitFileHeader {
    double sample_rate = 2e6;
    std::size_t record_length = 2048;
    std::size_t pretrigger = 500;
    int channel = 0;

    void validate() const;
};

struct HitFile {
    HitFileHeader header;
    std::vector<HitRecord> records;
};

// Records without stored trigger times get their ordinal as trigger_time.
HitFile read_hits(const std::filesystem::path& path);
void write_hits(const std::filesystem::path& path, const HitFileHeader& header, std::span<const HitRecord> records);

}  // namespace aedp
