#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "raman/spectrum.hpp"

namespace raman {

/// One RRUFF-style text file: `##KEY=VALUE` headers followed by `x, y` rows.
struct RruffRecord {
    std::map<std::string, std::string> metadata;
    std::vector<std::pair<double, double>> points;

    /// Species label: NAMES, falling back to MINERAL.
    std::optional<std::string> species() const;

    friend bool operator==(const RruffRecord&, const RruffRecord&) = default;
};

/// Parses the text of one file. Keys are uppercased and trimmed, values trimmed,
/// `##END=` lines dropped and points sorted by wavenumber.
/// Throws ParseError on an unparseable line or when no data points are present.
RruffRecord parse_rruff(std::string_view text);

RruffRecord read_rruff_file(const std::filesystem::path& path);

/// Writes headers, data rows using shortest round-trip number formatting, then `##END=`.
std::string serialize_rruff(const RruffRecord& record);

void write_rruff_file(const std::filesystem::path& path, const RruffRecord& record);

/// Throws InvalidArgument if the points do not form a valid Spectrum
/// (duplicate wavenumbers, non-finite values, fewer than two points).
Spectrum to_spectrum(const RruffRecord& record);

RruffRecord to_record(const Spectrum& s);

}  // namespace raman
