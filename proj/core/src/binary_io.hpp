#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "raman/error.hpp"

namespace raman::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> b;
        std::memcpy(b.data(), &v, sizeof(T));
        std::reverse(b.begin(), b.end());
        std::memcpy(&v, b.data(), sizeof(T));
    }
    return v;
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void magic(const char (&m)[5]) { out_.write(m, 4); }
    void u32(std::uint32_t v) { raw(to_little(v)); }
    void u64(std::uint64_t v) { raw(to_little(v)); }
    void f64(double v) { raw(to_little(v)); }
    void str(const std::string& s) {
        u64(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void f64s(std::span<const double> v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    void check() {
        if (!out_) throw Error("write failed");
    }

private:
    template <typename T>
    void raw(T v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void expect_magic(const char (&m)[5], const char* what) {
        char got[4] = {};
        in_.read(got, 4);
        if (!in_ || std::memcmp(got, m, 4) != 0)
            throw FormatError(std::string(what) + ": bad magic");
    }
    std::uint32_t u32() { return to_little(raw<std::uint32_t>()); }
    std::uint64_t u64() { return to_little(raw<std::uint64_t>()); }
    double f64() { return to_little(raw<double>()); }
    std::string str() {
        const auto n = bounded(u64());
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        if (!in_) throw FormatError("truncated string");
        return s;
    }
    std::vector<double> f64s() {
        const auto n = bounded(u64());
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }
    void f64s_into(std::vector<double>& v, const char* what) {
        auto got = f64s();
        if (got.size() != v.size())
            throw FormatError(std::string("tensor size mismatch for ") + what);
        v = std::move(got);
    }
    /// Sizes above this are treated as corruption rather than allocated.
    static std::uint64_t bounded(std::uint64_t n) {
        if (n > (std::uint64_t{1} << 32)) throw FormatError("implausible length field");
        return n;
    }

private:
    template <typename T>
    T raw() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw FormatError("unexpected end of file");
        return v;
    }
    std::istream& in_;
};

}  // namespace raman::detail
