#include "vsense/matrix_market.hpp"

#include "vsense/error.hpp"
#include "vsense/format.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace vsense::mm {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

}  // namespace

ReadResult read(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw Error(Errc::ParseError, "empty Matrix Market stream");
    }
    std::istringstream hs(lower(header));
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix") {
        throw Error(Errc::ParseError, "missing %%MatrixMarket matrix banner");
    }
    if (field != "real" && field != "double" && field != "integer") {
        throw Error(Errc::ParseError, "unsupported field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw Error(Errc::ParseError, "unsupported symmetry '" + symmetry + "'");
    }
    const bool symmetric = symmetry == "symmetric";

    std::string line;
    if (!next_data_line(in, line)) {
        throw Error(Errc::ParseError, "missing size line");
    }
    std::istringstream ss(line);
    long rows = -1, cols = -1, nnz = -1;
    if (format == "coordinate") {
        ss >> rows >> cols >> nnz;
        if (!ss || nnz < 0) throw Error(Errc::ParseError, "bad coordinate size line: " + line);
    } else if (format == "array") {
        ss >> rows >> cols;
        if (!ss) throw Error(Errc::ParseError, "bad array size line: " + line);
    } else {
        throw Error(Errc::ParseError, "unsupported format '" + format + "'");
    }
    if (rows <= 0 || cols <= 0) {
        throw Error(Errc::ParseError, "matrix dimensions must be positive");
    }
    if (symmetric && rows != cols) {
        throw Error(Errc::ParseError, "symmetric matrix must be square");
    }

    ReadResult out;
    out.symmetric = symmetric;
    out.matrix = Matrix::Zero(rows, cols);

    if (format == "coordinate") {
        for (long e = 0; e < nnz; ++e) {
            if (!next_data_line(in, line)) {
                throw Error(Errc::ParseError, "unexpected end of entries");
            }
            std::istringstream es(line);
            long i = 0, j = 0;
            std::string value;
            es >> i >> j >> value;
            if (!es || i < 1 || j < 1 || i > rows || j > cols) {
                throw Error(Errc::ParseError, "bad entry line: " + line);
            }
            const double v = parse_double(value);
            out.matrix(i - 1, j - 1) += v;
            if (symmetric && i != j) out.matrix(j - 1, i - 1) += v;
        }
    } else {
        for (long j = 0; j < cols; ++j) {
            const long i0 = symmetric ? j : 0;
            for (long i = i0; i < rows; ++i) {
                if (!next_data_line(in, line)) {
                    throw Error(Errc::ParseError, "unexpected end of array values");
                }
                std::istringstream es(line);
                std::string value;
                es >> value;
                const double v = parse_double(value);
                out.matrix(i, j) = v;
                if (symmetric) out.matrix(j, i) = v;
            }
        }
    }
    return out;
}

ReadResult read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return read(in);
}

void write_symmetric(std::ostream& out, const SymMatrix& a) {
    const Matrix& d = a.dense();
    const Index n = d.rows();
    long nnz = 0;
    for (Index j = 0; j < n; ++j)
        for (Index i = j; i < n; ++i)
            if (d(i, j) != 0.0) ++nnz;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << n << ' ' << n << ' ' << nnz << '\n';
    for (Index j = 0; j < n; ++j)
        for (Index i = j; i < n; ++i)
            if (d(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(d(i, j)) << '\n';
}

void write_symmetric(const std::filesystem::path& path, const SymMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_symmetric(out, a);
}

void write_general(std::ostream& out, const Matrix& a) {
    out << "%%MatrixMarket matrix array real general\n";
    out << a.rows() << ' ' << a.cols() << '\n';
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i) out << format_double(a(i, j)) << '\n';
}

void write_general(const std::filesystem::path& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_general(out, a);
}

}  // namespace vsense::mm
