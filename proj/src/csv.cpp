#include "vsense/csv.hpp"

#include "vsense/error.hpp"
#include "vsense/format.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace vsense::csv {

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty()) throw Error(Errc::ParseError, "quote inside unquoted field");
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch == '\r' && i + 1 == line.size()) {
            break;
        } else {
            if (was_quoted) throw Error(Errc::ParseError, "text after closing quote");
            cur += ch;
        }
    }
    if (quoted) throw Error(Errc::ParseError, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

RowWriter::RowWriter(std::ostream& out, const std::vector<std::string>& channels, bool flush_each_row)
    : out_(out), width_(static_cast<Index>(channels.size())), flush_(flush_each_row) {
    out_ << 't';
    for (const auto& c : channels) out_ << ',' << quote_field(c);
    out_ << '\n';
    if (flush_) out_.flush();
}

void RowWriter::write(double t, const Vector& row) {
    if (row.size() != width_) throw Error(Errc::DimensionMismatch, "row width does not match header");
    out_ << format_double(t);
    for (Index j = 0; j < row.size(); ++j) out_ << ',' << format_double(row(j));
    out_ << '\n';
    if (flush_) out_.flush();
}

RowReader::RowReader(std::istream& in) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) throw Error(Errc::ParseError, "CSV input is empty");
    auto fields = split_record(header);
    if (fields.empty() || trim(fields.front()) != "t") {
        throw Error(Errc::ParseError, "CSV header must start with 't'");
    }
    channels_.assign(fields.begin() + 1, fields.end());
}

bool RowReader::next(double& t, Vector& row) {
    std::string line;
    while (std::getline(in_, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_record(line);
        if (fields.size() != channels_.size() + 1) {
            throw Error(Errc::ParseError, "row " + std::to_string(rows_ + 1) + " has " +
                                              std::to_string(fields.size()) + " fields, expected " +
                                              std::to_string(channels_.size() + 1));
        }
        t = parse_double(fields[0]);
        row.resize(static_cast<Index>(channels_.size()));
        for (std::size_t j = 0; j < channels_.size(); ++j) row(static_cast<Index>(j)) = parse_double(fields[j + 1]);
        ++rows_;
        return true;
    }
    return false;
}

void write_series(std::ostream& out, const SignalSeries& s) {
    RowWriter w(out, s.channels);
    for (Index i = 0; i < s.n_samples(); ++i) w.write(s.time(i), s.samples.row(i).transpose());
}

void write_series(const std::filesystem::path& path, const SignalSeries& s) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_series(out, s);
}

SignalSeries read_series(std::istream& in, SignalKind kind, std::optional<double> dt_hint) {
    RowReader reader(in);
    std::vector<double> times;
    std::vector<Vector> rows;
    double t = 0.0;
    Vector row;
    while (reader.next(t, row)) {
        times.push_back(t);
        rows.push_back(row);
    }
    const Index n = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(reader.channels().size());
    Matrix samples(n, c);
    for (Index i = 0; i < n; ++i) samples.row(i) = rows[i].transpose();

    double dt = dt_hint.value_or(0.0);
    if (n >= 2) {
        dt = (times.back() - times.front()) / static_cast<double>(n - 1);
        for (Index i = 1; i < n; ++i) {
            const double step = times[i] - times[i - 1];
            if (std::abs(step - dt) > 1e-6 * std::abs(dt)) {
                throw Error(Errc::ParseError, "time column is not uniformly sampled");
            }
        }
    }
    if (!(dt > 0)) throw Error(Errc::ParseError, "cannot determine sample interval");
    return SignalSeries(dt, n > 0 ? times.front() : 0.0, reader.channels(), std::move(samples), kind);
}

SignalSeries read_series(const std::filesystem::path& path, SignalKind kind, std::optional<double> dt_hint) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return read_series(in, kind, dt_hint);
}

}  // namespace vsense::csv
