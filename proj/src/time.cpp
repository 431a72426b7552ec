#include "ctbench/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "ctbench/error.hpp"

namespace ctbench {
namespace {

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
    int value = 0;
    if (pos + len > s.size()) throw Error(ErrorCode::ParseError, "truncated timestamp");
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    if (ec != std::errc{} || ptr != s.data() + pos + len) {
        throw Error(ErrorCode::ParseError, "bad timestamp field in '" + std::string(s) + "'");
    }
    return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw Error(ErrorCode::ParseError, "empty timestamp");

    bool all_digits = true;
    for (char c : text) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(c));
    if (all_digits) {
        long long ms = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
        if (ec != std::errc{}) throw Error(ErrorCode::ParseError, "bad epoch timestamp");
        if (ms % 1000 != 0) {
            throw Error(ErrorCode::IrregularTimestamps, "epoch timestamp is not on a whole second");
        }
        return Timestamp{std::chrono::seconds{ms / 1000}};
    }

    // YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+00:00]
    if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':') {
        throw Error(ErrorCode::ParseError, "unrecognised timestamp '" + std::string(text) + "'");
    }
    const int year = parse_fixed(text, 0, 4);
    const int month = parse_fixed(text, 5, 2);
    const int day = parse_fixed(text, 8, 2);
    const int hour = parse_fixed(text, 11, 2);
    const int minute = parse_fixed(text, 14, 2);
    int second = 0;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        second = parse_fixed(text, pos + 1, 2);
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                if (text[pos] != '0') {
                    throw Error(ErrorCode::IrregularTimestamps, "fractional seconds are not supported");
                }
                ++pos;
            }
        }
    }
    std::string_view zone = text.substr(pos);
    if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000")) {
        throw Error(ErrorCode::ParseError, "timestamp must be UTC: '" + std::string(text) + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                          std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
        throw Error(ErrorCode::ParseError, "invalid calendar timestamp '" + std::string(text) + "'");
    }
    return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
           std::chrono::seconds{second};
}

std::string format_timestamp(Timestamp ts) {
    const auto day = std::chrono::floor<std::chrono::days>(ts);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{ts - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

int utc_year(Timestamp ts) {
    const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(ts)};
    return static_cast<int>(ymd.year());
}

int utc_hour(Timestamp ts) {
    const auto day = std::chrono::floor<std::chrono::days>(ts);
    return static_cast<int>(std::chrono::duration_cast<std::chrono::hours>(ts - day).count());
}

}  // namespace ctbench
