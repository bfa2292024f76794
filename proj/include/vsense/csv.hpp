#pragma once

#include "vsense/signals.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vsense::csv {

// RFC-4180 field splitting/quoting.
std::vector<std::string> split_record(const std::string& line);
std::string quote_field(const std::string& field);

// Header `t,<label1>,...`, one row per sample. Values use shortest
// round-trip decimals so a write/read cycle is exact.
class RowWriter {
public:
    RowWriter(std::ostream& out, const std::vector<std::string>& channels, bool flush_each_row = false);
    void write(double t, const Vector& row);

private:
    std::ostream& out_;
    Index width_;
    bool flush_;
};

// Incremental reader used by the streaming identification loop.
class RowReader {
public:
    explicit RowReader(std::istream& in);

    const std::vector<std::string>& channels() const { return channels_; }
    // False at end of input. Throws ParseError on malformed rows.
    bool next(double& t, Vector& row);
    std::size_t rows_read() const { return rows_; }

private:
    std::istream& in_;
    std::vector<std::string> channels_;
    std::size_t rows_ = 0;
};

void write_series(std::ostream& out, const SignalSeries& s);
void write_series(const std::filesystem::path& path, const SignalSeries& s);

// Sample interval is derived from the time column; it must be uniform to
// 1e-6 relative. Series with fewer than two rows need `dt_hint`.
SignalSeries read_series(std::istream& in, SignalKind kind, std::optional<double> dt_hint = std::nullopt);
SignalSeries read_series(const std::filesystem::path& path, SignalKind kind,
                         std::optional<double> dt_hint = std::nullopt);

}  // namespace vsense::csv
