#pragma once

// Price CSV ingestion and small CSV/number formatting helpers.
//
// Input format: header naming the columns timestamp, ticker, close (any order,
// case-insensitive). Timestamps are epoch seconds or YYYY-MM-DD, optionally
// followed by 'T' or ' ' and HH:MM[:SS], all UTC.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

struct IngestResult {
  std::vector<PriceSeries> series;  // ordered by ticker
  std::size_t skipped_price_rows = 0;
  std::size_t malformed_rows = 0;
  std::size_t duplicate_rows = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

}  // namespace detail

inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    const auto y = detail::parse_number<int>(s.substr(0, 4));
    const auto m = detail::parse_number<unsigned>(s.substr(5, 2));
    const auto d = detail::parse_number<unsigned>(s.substr(8, 2));
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > 31) return std::nullopt;
    std::int64_t secs = detail::days_from_civil(*y, *m, *d) * 86400;
    if (s.size() > 10) {
      if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
      const auto time = s.substr(11);
      if (time.size() != 5 && time.size() != 8) return std::nullopt;
      const auto hh = detail::parse_number<int>(time.substr(0, 2));
      const auto mm = detail::parse_number<int>(time.substr(3, 2));
      std::optional<int> ss = 0;
      if (time.size() == 8) ss = detail::parse_number<int>(time.substr(6, 2));
      if (!hh || !mm || !ss || time[2] != ':' || (time.size() == 8 && time[5] != ':')) return std::nullopt;
      if (*hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
      secs += *hh * 3600 + *mm * 60 + *ss;
    }
    return secs;
  }
  return detail::parse_number<std::int64_t>(s);
}

/// Median spacing under half a day marks a series as intraday.
inline Sampling infer_sampling(const std::vector<PricePoint>& points) {
  if (points.size() < 2) return Sampling::daily;
  std::vector<std::int64_t> gaps;
  for (std::size_t i = 1; i < points.size(); ++i) {
    gaps.push_back(points[i].timestamp - points[i - 1].timestamp);
  }
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  return gaps[gaps.size() / 2] < 43200 ? Sampling::intraday : Sampling::daily;
}

inline IngestResult ingest_csv_stream(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::io, "'" + source_name + "' is empty");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_commas(line);
  std::optional<std::size_t> col_ts, col_ticker, col_close;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = detail::lower(header[i]);
    if (name == "timestamp") col_ts = i;
    if (name == "ticker") col_ticker = i;
    if (name == "close") col_close = i;
  }
  if (!col_ts || !col_ticker || !col_close) {
    throw Error(ErrorKind::io, "'" + source_name + "' header must name timestamp, ticker and close");
  }

  IngestResult out;
  // ticker -> timestamp -> price; later rows overwrite earlier ones.
  std::map<std::string, std::map<std::int64_t, double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != header.size()) {
      ++out.malformed_rows;
      continue;
    }
    const auto ts = parse_timestamp(fields[*col_ts]);
    const std::string ticker(fields[*col_ticker]);
    if (!ts || ticker.empty()) {
      ++out.malformed_rows;
      continue;
    }
    const auto price = detail::parse_number<double>(fields[*col_close]);
    if (!price || !(*price > 0.0) || !std::isfinite(*price)) {
      ++out.skipped_price_rows;
      continue;
    }
    auto [it, inserted] = rows[ticker].insert_or_assign(*ts, *price);
    if (!inserted) ++out.duplicate_rows;
  }

  for (auto& [ticker, by_time] : rows) {
    PriceSeries s;
    s.ticker = ticker;
    for (const auto& [ts, price] : by_time) s.points.push_back({ts, price});
    s.sampling = infer_sampling(s.points);
    out.series.push_back(std::move(s));
  }
  return out;
}

inline IngestResult ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return ingest_csv_stream(in, path.string());
}

/// Optional ticker -> sector map from a `ticker,sector` CSV.
inline std::map<std::string, std::string> read_sectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::io, "'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_commas(line);
  if (header.size() < 2 || detail::lower(header[0]) != "ticker" || detail::lower(header[1]) != "sector") {
    throw Error(ErrorKind::io, "'" + path.string() + "' header must be ticker,sector");
  }
  std::map<std::string, std::string> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_commas(line);
    if (fields.size() >= 2 && !fields[0].empty()) out[std::string(fields[0])] = std::string(fields[1]);
  }
  return out;
}

/// 12 significant digits; reports compare byte-for-byte across runs.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string{};
}

/// Quotes a CSV cell when it contains a delimiter, quote or newline.
inline std::string csv_cell(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace predictability
