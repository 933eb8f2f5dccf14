#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "wfl/common.hpp"

namespace wfl {

// FNV-1a 64-bit hash, used to stamp output files with a short config digest.
inline std::uint64_t fnv1a_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
    return std::string(buf);
}

// Round-trip-safe decimal formatting for doubles.
inline std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

// CSV file with a leading provenance comment and a header row.  All runs that
// produce the same effective configuration produce byte-identical files.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
              std::uint64_t config_hash, std::uint64_t seed)
        : out_(path) {
        if (!out_) throw error("csv: cannot open '" + path.string() + "' for writing");
        out_ << "# wfl " << version_string << " config_hash=" << hex16(config_hash)
             << " seed=" << seed << "\n";
        write_cells(columns);
    }

    void row(std::initializer_list<double> values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        write_cells(cells);
    }

    void row(const std::vector<std::string>& cells) { write_cells(cells); }

    void flush() { out_.flush(); }

  private:
    void write_cells(const std::vector<std::string>& cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
        if (!out_) throw error("csv: write failed");
    }

    std::ofstream out_;
};

}  // namespace wfl
