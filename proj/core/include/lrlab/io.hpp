#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrlab::io {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// Writes content to path via a sibling temporary file and a rename, so readers
// never observe a partially written file. Creates parent directories.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Little-endian byte buffer writer/reader used by the binary snapshot formats.
class ByteWriter {
public:
    void put_bytes(std::string_view raw) { buf_.append(raw); }
    void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_i32(std::int32_t v) { put_u32(static_cast<std::uint32_t>(v)); }
    void put_f64(double v);
    void put_f64s(std::span<const double> values);

    const std::string& str() const noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::string_view get_bytes(std::size_t n);
    std::uint8_t get_u8();
    std::uint32_t get_u32();
    std::uint64_t get_u64();
    std::int32_t get_i32() { return static_cast<std::int32_t>(get_u32()); }
    double get_f64();
    void get_f64s(std::span<double> out);

    bool at_end() const noexcept { return pos_ == data_.size(); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

// Minimal CSV builder: header row, then rows of already-formatted cells.
class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<std::string_view> header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double value);
    CsvWriter& cell(std::int64_t value);
    CsvWriter& cell(std::size_t value) { return cell(static_cast<std::int64_t>(value)); }
    CsvWriter& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
    void end_row();

    const std::string& str() const noexcept { return out_; }

private:
    std::string out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

}  // namespace lrlab::io
