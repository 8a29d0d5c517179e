#include "spgemm1d/matrix_market.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace spgemm1d {

namespace {

struct Header {
    enum class Field { Real, Integer, Pattern } field;
    enum class Symmetry { General, Symmetric } symmetry;
};

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Header parse_header(const std::string& line, long lineno) {
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
    if (lower(object) != "matrix") throw ParseError("unsupported object '" + object + "'", lineno);
    if (lower(format) != "coordinate") throw ParseError("unsupported format '" + format + "'", lineno);
    Header h{};
    const std::string f = lower(field);
    if (f == "real")
        h.field = Header::Field::Real;
    else if (f == "integer")
        h.field = Header::Field::Integer;
    else if (f == "pattern")
        h.field = Header::Field::Pattern;
    else
        throw ParseError("unsupported field '" + field + "'", lineno);
    const std::string s = lower(symmetry);
    if (s == "general")
        h.symmetry = Header::Symmetry::General;
    else if (s == "symmetric")
        h.symmetry = Header::Symmetry::Symmetric;
    else
        throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
    return h;
}

bool blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

Index parse_index(const char*& p, long lineno) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(p, &end, 10);
    if (end == p || errno == ERANGE) throw ParseError("expected integer", lineno);
    p = end;
    return static_cast<Index>(v);
}

double parse_value(const char*& p, long lineno) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(p, &end);
    if (end == p || errno == ERANGE) throw ParseError("expected numeric value", lineno);
    p = end;
    return v;
}

void expect_line_end(const char* p, long lineno) {
    while (*p) {
        if (!std::isspace(static_cast<unsigned char>(*p))) throw ParseError("trailing garbage", lineno);
        ++p;
    }
}

}  // namespace

SparseMatrix<double> read_matrix_market(const std::string& path, Storage mode) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++lineno;
    const Header h = parse_header(line, lineno);

    // skip comments and blank lines up to the size line
    Index m = -1, n = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (blank(line)) continue;
        const char* p = line.c_str();
        m = parse_index(p, lineno);
        n = parse_index(p, lineno);
        nnz = parse_index(p, lineno);
        expect_line_end(p, lineno);
        break;
    }
    if (m < 0) throw ParseError("missing size line", lineno);
    if (nnz < 0) throw ParseError("negative entry count", lineno);

    std::vector<Triplet<double>> ts;
    ts.reserve(static_cast<std::size_t>(nnz));
    Index seen = 0;
    while (seen < nnz) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of file; expected more entries", lineno);
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (blank(line)) continue;
        const char* p = line.c_str();
        const Index i = parse_index(p, lineno);
        const Index j = parse_index(p, lineno);
        double v = 1.0;
        if (h.field != Header::Field::Pattern) v = parse_value(p, lineno);
        expect_line_end(p, lineno);
        if (i < 1 || i > m || j < 1 || j > n) throw ParseError("entry index out of bounds", lineno);
        ts.push_back({i - 1, j - 1, v});
        if (h.symmetry == Header::Symmetry::Symmetric && i != j) ts.push_back({j - 1, i - 1, v});
        ++seen;
    }
    return from_triplets<double>(m, n, std::move(ts), mode);
}

namespace {

template <class T, class Fmt>
void write_mm(const SparseMatrix<T>& a, const std::string& path, const char* field, Fmt fmt) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "%%MatrixMarket matrix coordinate " << field << " general\n";
    out << a.nrows() << ' ' << a.ncols() << ' ' << a.nnz() << '\n';
    char buf[64];
    for (Index s = 0; s < a.stored_column_count(); ++s) {
        const Index j = a.stored_column_id(s);
        auto rows = a.stored_column_rows(s);
        auto vals = a.stored_column_vals(s);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            out << rows[p] + 1 << ' ' << j + 1;
            fmt(buf, vals[p]);
            if (buf[0]) out << ' ' << buf;
            out << '\n';
        }
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

void write_matrix_market(const SparseMatrix<double>& a, const std::string& path) {
    write_mm(a, path, "real", [](char* buf, double v) { std::snprintf(buf, 64, "%.17g", v); });
}

void write_matrix_market(const SparseMatrix<std::int64_t>& a, const std::string& path) {
    write_mm(a, path, "integer", [](char* buf, std::int64_t v) { std::snprintf(buf, 64, "%lld", static_cast<long long>(v)); });
}

void write_matrix_market(const SparseMatrix<std::uint8_t>& a, const std::string& path) {
    write_mm(a, path, "pattern", [](char* buf, std::uint8_t) { buf[0] = '\0'; });
}

}  // namespace spgemm1d
