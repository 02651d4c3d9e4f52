#include "aedp/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "aedp/errors.hpp"
#include "json.hpp"

namespace aedp {

namespace {

std::vector<char> read_bytes(std::ifstream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

float load_f32(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    return std::bit_cast<float>(bits);
}

void store_f32(float v, char* p) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<char>(bits & 0xFFu);
        bits >>= 8;
    }
}

std::vector<double> decode_f32(const char* data, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = load_f32(data + 4 * i);
    return out;
}

void append_f32(std::string& buffer, std::span<const double> samples) {
    const std::size_t offset = buffer.size();
    buffer.resize(offset + 4 * samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) store_f32(static_cast<float>(samples[i]), &buffer[offset + 4 * i]);
}

bool parse_double(const std::string& text, double& out) {
    std::size_t used = 0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    return used == text.size();
}

Waveform read_csv(const std::filesystem::path& path, const ReadOptions& options) {
    std::ifstream in = open_input(path);
    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    int columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        const int here = comma == std::string::npos ? 1 : 2;
        double first = 0.0;
        double second = 0.0;
        const bool ok = here == 1 ? parse_double(line, first)
                                  : parse_double(line.substr(0, comma), first) &&
                                        parse_double(line.substr(comma + 1), second);
        if (!ok) {
            if (values.empty() && times.empty() && line_no == 1) continue;  // header row
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
        if (columns == 0) columns = here;
        if (here != columns) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": column count changed");
        if (here == 1) {
            values.push_back(first);
        } else {
            times.push_back(first);
            values.push_back(second);
        }
    }
    if (values.empty()) throw FormatError(path.string() + ": no samples");

    double rate = 0.0;
    if (columns == 2 && times.size() >= 2) {
        const double mean_dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (!(mean_dt > 0.0)) throw FormatError(path.string() + ": timestamps are not increasing");
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double dt = times[i] - times[i - 1];
            if (std::abs(dt - mean_dt) > 1e-6 * mean_dt) throw FormatError(path.string() + ": non-uniform timestamps");
        }
        rate = 1.0 / mean_dt;
    } else if (options.sample_rate) {
        rate = *options.sample_rate;
    } else {
        throw FormatError(path.string() + ": sample rate must be supplied for single-column CSV");
    }
    return Waveform(std::move(values), rate);
}

}  // namespace

SampleFormat parse_sample_format(std::string_view name) {
    if (name == "csv") return SampleFormat::csv;
    if (name == "raw_f32_le" || name == "f32") return SampleFormat::raw_f32_le;
    if (name == "raw_i16_le" || name == "i16") return SampleFormat::raw_i16_le;
    throw std::invalid_argument("unknown sample format: " + std::string(name));
}

const char* to_string(SampleFormat format) {
    switch (format) {
        case SampleFormat::csv: return "csv";
        case SampleFormat::raw_f32_le: return "raw_f32_le";
        case SampleFormat::raw_i16_le: return "raw_i16_le";
    }
    return "?";
}

Waveform read_waveform(const std::filesystem::path& path, SampleFormat format, const ReadOptions& options) {
    if (format == SampleFormat::csv) return read_csv(path, options);
    if (!options.sample_rate) throw FormatError("raw formats need an explicit sample rate");
    std::ifstream in = open_input(path);
    const std::vector<char> bytes = read_bytes(in);
    const std::size_t width = format == SampleFormat::raw_f32_le ? 4 : 2;
    if (bytes.size() % width != 0) {
        throw SizeError(path.string() + ": truncated file (" + std::to_string(bytes.size()) + " bytes)");
    }
    const std::size_t count = bytes.size() / width;
    if (count == 0) throw SizeError(path.string() + ": no samples");
    std::vector<double> samples;
    if (format == SampleFormat::raw_f32_le) {
        samples = decode_f32(bytes.data(), count);
    } else {
        samples.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto lo = static_cast<unsigned char>(bytes[2 * i]);
            const auto hi = static_cast<unsigned char>(bytes[2 * i + 1]);
            const auto code = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
            samples[i] = code * options.volts_per_lsb;
        }
    }
    return Waveform(std::move(samples), *options.sample_rate);
}

void write_waveform(const std::filesystem::path& path, const Waveform& w, SampleFormat format, double volts_per_lsb) {
    std::ofstream out = open_output(path);
    std::string buffer;
    switch (format) {
        case SampleFormat::csv: {
            std::ostringstream text;
            text.precision(17);
            for (double v : w.samples) text << v << '\n';
            buffer = text.str();
            break;
        }
        case SampleFormat::raw_f32_le:
            append_f32(buffer, w.samples);
            break;
        case SampleFormat::raw_i16_le: {
            buffer.resize(2 * w.samples.size());
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                const double scaled = std::clamp(std::round(w.samples[i] / volts_per_lsb), -32768.0, 32767.0);
                const auto code = static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled));
                buffer[2 * i] = static_cast<char>(code & 0xFFu);
                buffer[2 * i + 1] = static_cast<char>(code >> 8);
            }
            break;
        }
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

void HitFileHeader::validate() const {
    if (!(sample_rate > 0.0)) throw FormatError("hit header: sample_rate must be positive");
    if (record_length == 0) throw FormatError("hit header: record_length must be positive");
    if (pretrigger >= record_length) throw FormatError("hit header: pretrigger must be below record_length");
}

HitFile read_hits(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw FormatError(path.string() + ": missing header");
    nlohmann::json header_json;
    try {
        header_json = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad header: " + e.what());
    }
    HitFile file;
    try {
        file.header.sample_rate = header_json.at("sample_rate").get<double>();
        file.header.record_length = header_json.at("record_length").get<std::size_t>();
        file.header.pretrigger = header_json.at("pretrigger").get<std::size_t>();
        file.header.channel = header_json.value("channel", 0);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad header: " + e.what());
    }
    file.header.validate();

    const std::vector<char> payload = read_bytes(in);
    const std::size_t record_bytes = 4 * file.header.record_length;
    if (payload.size() % record_bytes != 0) {
        throw SizeError(path.string() + ": payload of " + std::to_string(payload.size()) +
                        " bytes is not a whole number of records");
    }
    const std::size_t count = payload.size() / record_bytes;
    std::vector<double> times;
    if (header_json.contains("trigger_times")) {
        times = header_json.at("trigger_times").get<std::vector<double>>();
        if (times.size() != count) throw SizeError(path.string() + ": trigger_times does not match record count");
    }
    file.records.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        HitRecord rec;
        rec.trigger_time = times.empty() ? static_cast<double>(r) : times[r];
        rec.samples = decode_f32(payload.data() + r * record_bytes, file.header.record_length);
        rec.pretrigger = file.header.pretrigger;
        rec.channel = file.header.channel;
        file.records.push_back(std::move(rec));
    }
    return file;
}

void write_hits(const std::filesystem::path& path, const HitFileHeader& header, std::span<const HitRecord> records) {
    header.validate();
    nlohmann::json h;
    h["format"] = "aedp-hits";
    h["version"] = 1;
    h["sample_rate"] = header.sample_rate;
    h["record_length"] = header.record_length;
    h["pretrigger"] = header.pretrigger;
    h["channel"] = header.channel;
    std::vector<double> times;
    for (const auto& r : records) {
        if (r.samples.size() != header.record_length) throw SizeError("hit record length differs from header");
        times.push_back(r.trigger_time);
    }
    h["trigger_times"] = times;
    std::string buffer = h.dump() + '\n';
    for (const auto& r : records) append_f32(buffer, r.samples);
    std::ofstream out = open_output(path);
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace aedp
