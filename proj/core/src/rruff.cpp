#include "raman/rruff.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "raman/error.hpp"

namespace raman {
namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool parse_real(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

std::optional<std::string> RruffRecord::species() const {
    for (const char* key : {"NAMES", "MINERAL"}) {
        const auto it = metadata.find(key);
        if (it != metadata.end() && !it->second.empty()) return it->second;
    }
    return std::nullopt;
}

RruffRecord parse_rruff(std::string_view text) {
    RruffRecord rec;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;

        line = trim(line);
        if (line.empty()) continue;
        if (line.starts_with("##")) {
            const auto body = line.substr(2);
            const auto eq = body.find('=');
            std::string key(trim(body.substr(0, eq)));
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            if (key.empty()) throw ParseError("header line without a key", line_no);
            if (key == "END") continue;
            const auto value =
                eq == std::string_view::npos ? std::string_view{} : trim(body.substr(eq + 1));
            rec.metadata[key] = std::string(value);
            continue;
        }
        const auto comma = line.find(',');
        double x = 0.0;
        double y = 0.0;
        if (comma == std::string_view::npos || !parse_real(line.substr(0, comma), x) ||
            !parse_real(line.substr(comma + 1), y))
            throw ParseError("expected 'wavenumber, intensity', got '" + std::string(line) + "'",
                             line_no);
        rec.points.emplace_back(x, y);
    }
    if (rec.points.empty()) throw ParseError("no data points", 0);
    std::stable_sort(rec.points.begin(), rec.points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return rec;
}

RruffRecord read_rruff_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_rruff(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::string serialize_rruff(const RruffRecord& record) {
    std::string out;
    for (const auto& [key, value] : record.metadata) {
        out += "##";
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    for (const auto& [x, y] : record.points) {
        out += format_real(x);
        out += ", ";
        out += format_real(y);
        out += '\n';
    }
    out += "##END=\n";
    return out;
}

void write_rruff_file(const std::filesystem::path& path, const RruffRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << serialize_rruff(record);
}

Spectrum to_spectrum(const RruffRecord& record) {
    Spectrum s;
    s.wavenumbers.reserve(record.points.size());
    s.intensities.reserve(record.points.size());
    for (const auto& [x, y] : record.points) {
        s.wavenumbers.push_back(x);
        s.intensities.push_back(y);
    }
    s.label = record.species();
    s.validate();
    return s;
}

RruffRecord to_record(const Spectrum& s) {
    s.validate();
    RruffRecord rec;
    if (s.label) rec.metadata["NAMES"] = *s.label;
    rec.points.reserve(s.wavenumbers.size());
    for (std::size_t i = 0; i < s.wavenumbers.size(); ++i)
        rec.points.emplace_back(s.wavenumbers[i], s.intensities[i]);
    return rec;
}

}  // namespace raman
