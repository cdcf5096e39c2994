#include "polsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "polsim/errors.hpp"

namespace polsim {

std::string format_double(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    return out;
}

std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::size_t CsvTable::col(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParseError("missing CSV column: " + std::string(name));
}

void for_each_csv_row(const std::string& path,
                      const std::function<void(const std::vector<std::string>&)>& fn,
                      std::vector<std::string>* header_out) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        auto fields = csv_split(line);
        if (first) {
            if (header_out) *header_out = std::move(fields);
            first = false;
            continue;
        }
        fn(fields);
    }
    if (first) throw ParseError("empty CSV file: " + path);
}

CsvTable read_csv_file(const std::string& path) {
    CsvTable t;
    for_each_csv_row(path, [&](const std::vector<std::string>& row) { t.rows.push_back(row); },
                     &t.header);
    return t;
}

double parse_double_field(const std::string& s) {
    if (s.empty()) throw ParseError("empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("bad numeric field: " + s);
    return v;
}

long long parse_int_field(const std::string& s) {
    if (s.empty()) throw ParseError("empty integer field");
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) throw ParseError("bad integer field: " + s);
    return v;
}

} // namespace polsim
