#include "lrlab/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lrlab/errors.hpp"

namespace lrlab::io {

namespace {

constexpr std::string_view kModule = "io";

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw Error(ErrorKind::io, kModule, "failed to format double");
    }
    return std::string(buf.data(), end);
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::io, kModule, "cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorKind::io, kModule, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::io, kModule, "rename to " + path.string() + " failed: " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::not_found, kModule, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ByteWriter::put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void ByteWriter::put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_f64s(std::span<const double> values) {
    for (double v : values) {
        put_f64(v);
    }
}

std::string_view ByteReader::get_bytes(std::size_t n) {
    if (data_.size() - pos_ < n) {
        throw Error(ErrorKind::invalid_input, kModule, "unexpected end of binary data");
    }
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::get_u8() { return static_cast<std::uint8_t>(get_bytes(1)[0]); }

std::uint32_t ByteReader::get_u32() {
    auto b = get_bytes(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
    }
    return v;
}

std::uint64_t ByteReader::get_u64() {
    auto b = get_bytes(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
    }
    return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

void ByteReader::get_f64s(std::span<double> out) {
    for (double& v : out) {
        v = get_f64();
    }
}

CsvWriter::CsvWriter(std::initializer_list<std::string_view> header) : columns_(header.size()) {
    bool first = true;
    for (auto h : header) {
        if (!first) {
            out_.push_back(',');
        }
        out_.append(h);
        first = false;
    }
    out_.push_back('\n');
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    if (in_row_ > 0) {
        out_.push_back(',');
    }
    out_.append(text);
    ++in_row_;
    return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(std::int64_t value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw Error(ErrorKind::invalid_argument, kModule,
                    "csv row has " + std::to_string(in_row_) + " cells, expected " + std::to_string(columns_));
    }
    out_.push_back('\n');
    in_row_ = 0;
}

}  // namespace lrlab::io
