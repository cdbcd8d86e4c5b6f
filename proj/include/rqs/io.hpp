#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rqs/errors.hpp"
#include "rqs/stats.hpp"
#include "rqs/xeb.hpp"

namespace rqs {

// Sample files come in two formats.
//
// Text: one bit-string per line, characters '0' and '1' only, leftmost
// character = qubit 0 = most significant bit. The first bit-string fixes n;
// every later one must have the same length. Surrounding whitespace and a
// trailing '\r' are ignored, as are blank lines and lines starting with '#'.
//
// Counts document (JSON):
//   {"n": 2, "counts": {"01": 2, "11": 5},
//    "meta": {"seed": 7, "lambda_claim": 0.3, "a_bits": [0]}}
// "meta" and each of its fields are optional.

/// Index of a bit-string written with qubit 0 leftmost.
inline std::uint64_t parse_bitstring(std::string_view bits) {
  if (bits.empty() || bits.size() > 63)
    throw FormatError("bit-string length must lie in [1, 63]");
  std::uint64_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw FormatError("bit-string contains '" + std::string(1, c) + "'");
    v = (v << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline std::string format_bitstring(std::uint64_t index, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q)
    if ((index >> (n - 1 - q)) & 1u)
      s[static_cast<std::size_t>(q)] = '1';
  return s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SampleSet parse_text_samples(const std::string &text) {
  SampleSet s;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    if (line.size() > 63)
      throw ParseError("bit-string longer than 63 characters", line_no);
    for (char c : line)
      if (c != '0' && c != '1')
        throw ParseError("unexpected character '" + std::string(1, c) +
                             "' in bit-string",
                         line_no);
    if (s.n == 0) {
      s.n = static_cast<int>(line.size());
    } else if (static_cast<int>(line.size()) != s.n) {
      throw FormatError("line " + std::to_string(line_no) + ": bit-string of length " +
                        std::to_string(line.size()) + ", expected " +
                        std::to_string(s.n));
    }
    s.add(parse_bitstring(line));
  }
  if (s.total == 0)
    throw ParseError("no bit-strings found", line_no);
  return s;
}

inline SampleSet parse_counts_document(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(e.what(), 0);
  }
  if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer())
    throw FormatError("counts document needs an integer field \"n\"");
  if (!doc.contains("counts") || !doc["counts"].is_object())
    throw FormatError("counts document needs an object field \"counts\"");
  SampleSet s;
  const auto n = doc["n"].get<std::int64_t>();
  if (n < 1 || n > 63)
    throw FormatError("\"n\" must lie in [1, 63]");
  s.n = static_cast<int>(n);
  for (const auto &[key, value] : doc["counts"].items()) {
    if (static_cast<int>(key.size()) != s.n)
      throw FormatError("bit-string '" + key + "' does not have length " +
                        std::to_string(s.n));
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
      throw FormatError("count for '" + key + "' must be a nonnegative integer");
    s.add(parse_bitstring(key), value.get<std::uint64_t>());
  }
  if (doc.contains("meta")) {
    const auto &meta = doc["meta"];
    if (meta.contains("seed"))
      s.meta.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("lambda_claim"))
      s.meta.lambda_claim = meta["lambda_claim"].get<double>();
    if (meta.contains("a_bits"))
      s.meta.partition = Partition(s.n, meta["a_bits"].get<std::vector<int>>());
  }
  return s;
}

} // namespace detail

/// Parses either sample format from memory; a leading '{' selects the
/// counts document.
inline SampleSet parse_samples(const std::string &text) {
  const auto body = detail::trim(text);
  if (!body.empty() && body.front() == '{')
    return detail::parse_counts_document(text);
  return detail::parse_text_samples(text);
}

inline SampleSet read_samples(const std::filesystem::path &path) {
  return parse_samples(detail::slurp(path));
}

inline nlohmann::json to_json(const SampleSet &s) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto &[j, c] : s.counts)
    counts[format_bitstring(j, s.n)] = c;
  nlohmann::json doc{{"n", s.n}, {"counts", counts}};
  nlohmann::json meta = nlohmann::json::object();
  if (s.meta.seed)
    meta["seed"] = *s.meta.seed;
  if (s.meta.lambda_claim)
    meta["lambda_claim"] = *s.meta.lambda_claim;
  if (s.meta.partition)
    meta["a_bits"] = s.meta.partition->a_bits();
  if (!meta.empty())
    doc["meta"] = meta;
  return doc;
}

namespace detail {

inline void write_text(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out)
    throw IoError("write to '" + path.string() + "' failed");
}

} // namespace detail

inline void write_samples_counts(const SampleSet &s, const std::filesystem::path &path) {
  detail::write_text(path, to_json(s).dump(2) + "\n");
}

/// One line per shot, in ascending index order.
inline void write_samples_text(const SampleSet &s, const std::filesystem::path &path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(s.total) * (static_cast<std::size_t>(s.n) + 1));
  for (const auto &[j, c] : s.counts) {
    const auto line = format_bitstring(j, s.n);
    for (std::uint64_t i = 0; i < c; ++i) {
      out += line;
      out += '\n';
    }
  }
  detail::write_text(path, out);
}

/// CSV "x_lo,x_hi,density" with 12 significant digits, closed by a
/// "# count=<total> overflow=<o>" comment line.
inline std::string histogram_csv(const Histogram &h) {
  std::string out = "x_lo,x_hi,density\n";
  char buf[128];
  for (std::size_t i = 0; i < h.bins(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", h.edges[i], h.edges[i + 1],
                  h.densities[i]);
    out += buf;
  }
  out += "# count=" + std::to_string(h.count) + " overflow=" + std::to_string(h.overflow) +
         "\n";
  return out;
}

inline void write_histogram_csv(const Histogram &h, const std::filesystem::path &path) {
  detail::write_text(path, histogram_csv(h));
}

inline Histogram read_histogram_csv(const std::filesystem::path &path) {
  std::istringstream in(detail::slurp(path));
  std::string line;
  std::size_t line_no = 0;
  Histogram h;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty())
      continue;
    if (!header) {
      if (t != "x_lo,x_hi,density")
        throw ParseError("missing histogram header", line_no);
      header = true;
      continue;
    }
    if (t.front() == '#') {
      unsigned long long count = 0, overflow = 0;
      if (std::sscanf(std::string(t).c_str(), "# count=%llu overflow=%llu", &count,
                      &overflow) != 2)
        throw ParseError("malformed histogram trailer", line_no);
      h.count = count;
      h.overflow = overflow;
      continue;
    }
    double lo = 0, hi = 0, d = 0;
    if (std::sscanf(std::string(t).c_str(), "%lf,%lf,%lf", &lo, &hi, &d) != 3)
      throw ParseError("malformed histogram row", line_no);
    if (h.edges.empty())
      h.edges.push_back(lo);
    h.edges.push_back(hi);
    h.densities.push_back(d);
  }
  if (!header)
    throw ParseError("empty histogram file", line_no);
  return h;
}

} // namespace rqs
