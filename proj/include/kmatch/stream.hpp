#ifndef KMATCH_STREAM_HPP
#define KMATCH_STREAM_HPP

// Text stream format, one record per line:
//
//   H <n> <k> <precision>   header, first record
//   I <u> <v> <w>           insert edge
//   D <u> <v> <w>           delete edge (dynamic streams only)
//   Q                       query
//   # ...                   comment
//
// Weights are non-negative decimals with at most <precision> fraction digits
// and are stored as integers in units of 10^-precision.

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace kmatch {

enum class StreamModel { Dynamic, InsertOnly };

enum class RecordKind { Insert, Delete, Query };

struct StreamRecord {
  RecordKind kind = RecordKind::Query;
  Edge edge{};
  std::size_t line = 0;  ///< source line, 0 when built in memory; ignored by ==

  friend bool operator==(const StreamRecord& a, const StreamRecord& b) {
    return a.kind == b.kind && (a.kind == RecordKind::Query || a.edge == b.edge);
  }
};

struct StreamFile {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  unsigned precision = 0;
  std::vector<StreamRecord> records;

  friend bool operator==(const StreamFile&, const StreamFile&) = default;
};

inline constexpr unsigned kMaxPrecision = 18;

inline std::int64_t weight_scale(unsigned precision) {
  if (precision > kMaxPrecision) throw ParameterError("weight precision above 18 digits");
  std::int64_t s = 1;
  for (unsigned i = 0; i < precision; ++i) s *= 10;
  return s;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::uint64_t parse_count(std::string_view tok, std::size_t line, const char* what) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return x;
}

}  // namespace detail

/// Parses a decimal weight into units of 10^-precision.
inline std::int64_t parse_weight(std::string_view tok, unsigned precision, std::size_t line = 0) {
  const auto dot = tok.find('.');
  const std::string_view whole = tok.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : tok.substr(dot + 1);
  const auto digits = [](std::string_view s) {
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  };
  if (whole.empty() || !digits(whole) || !digits(frac) || (dot != std::string_view::npos && frac.empty())) {
    throw ParseError(line, "bad weight '" + std::string(tok) + "'");
  }
  if (frac.size() > precision) {
    throw ParseError(line, "weight '" + std::string(tok) + "' has more fraction digits than the header precision");
  }
  const std::int64_t scale = weight_scale(precision);
  std::int64_t w = 0;
  for (char c : whole) {
    if (__builtin_mul_overflow(w, 10, &w) || __builtin_add_overflow(w, c - '0', &w)) {
      throw ParseError(line, "weight overflow");
    }
  }
  if (__builtin_mul_overflow(w, scale, &w)) throw ParseError(line, "weight overflow");
  std::int64_t f = 0;
  for (char c : frac) f = f * 10 + (c - '0');
  for (std::size_t i = frac.size(); i < precision; ++i) f *= 10;
  if (__builtin_add_overflow(w, f, &w)) throw ParseError(line, "weight overflow");
  return w;
}

inline std::string format_weight(std::int64_t w, unsigned precision) {
  const std::int64_t scale = weight_scale(precision);
  std::string s = std::to_string(w / scale);
  if (precision > 0) {
    std::string frac = std::to_string(w % scale);
    s += '.' + std::string(precision - frac.size(), '0') + frac;
  }
  return s;
}

inline StreamFile parse_stream(std::string_view text, StreamModel model = StreamModel::Dynamic) {
  StreamFile file;
  bool have_header = false;
  bool have_query = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string_view tag = tok[0];

    if (tag == "H") {
      if (have_header) throw ParseError(line_no, "second header");
      if (!file.records.empty()) throw ParseError(line_no, "header after records");
      if (tok.size() != 4) throw ParseError(line_no, "header needs 'H n k precision'");
      file.n = detail::parse_count(tok[1], line_no, "vertex count");
      file.k = detail::parse_count(tok[2], line_no, "k");
      const auto prec = detail::parse_count(tok[3], line_no, "precision");
      if (prec > kMaxPrecision) throw ParseError(line_no, "precision above 18");
      if (file.n < 2) throw ParseError(line_no, "need at least two vertices");
      if (file.k < 1) throw ParseError(line_no, "k must be >= 1");
      file.precision = static_cast<unsigned>(prec);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(line_no, "record before header");

    if (tag == "Q") {
      if (tok.size() != 1) throw ParseError(line_no, "Q takes no arguments");
      file.records.push_back({RecordKind::Query, {}, line_no});
      have_query = true;
      continue;
    }
    if (tag != "I" && tag != "D") throw ParseError(line_no, "unknown record '" + std::string(tag) + "'");
    if (tag == "D" && model == StreamModel::InsertOnly) throw ParseError(line_no, "deletion in an insert-only stream");
    if (tok.size() != 4) throw ParseError(line_no, std::string(tag) + " needs 'u v w'");
    const auto a = detail::parse_count(tok[1], line_no, "vertex");
    const auto b = detail::parse_count(tok[2], line_no, "vertex");
    if (a >= file.n || b >= file.n) throw ParseError(line_no, "vertex id out of range");
    if (a == b) throw ParseError(line_no, "self-loop");
    const std::int64_t w = parse_weight(tok[3], file.precision, line_no);
    const Edge e = make_edge(static_cast<Vertex>(a), static_cast<Vertex>(b), w);
    file.records.push_back({tag == "I" ? RecordKind::Insert : RecordKind::Delete, e, line_no});
  }
  if (!have_header) throw ParseError(line_no, "missing header");
  if (!have_query) throw ParseError(line_no, "stream has no Q record");
  return file;
}

inline std::string render(const StreamFile& file) {
  std::ostringstream out;
  out << "H " << file.n << ' ' << file.k << ' ' << file.precision << '\n';
  for (const auto& r : file.records) {
    switch (r.kind) {
      case RecordKind::Query:
        out << "Q\n";
        break;
      case RecordKind::Insert:
      case RecordKind::Delete:
        out << (r.kind == RecordKind::Insert ? "I " : "D ") << r.edge.u << ' ' << r.edge.v << ' '
            << format_weight(r.edge.w, file.precision) << '\n';
        break;
    }
  }
  return out.str();
}

struct StreamIssue {
  std::size_t record = 0;  ///< index into records
  std::string what;
};

/// Stream-model violations: a pair inserted while live, deleted while absent,
/// or seen with two different weights.
inline std::vector<StreamIssue> check_well_formed(const StreamFile& file) {
  std::vector<StreamIssue> issues;
  std::map<std::pair<Vertex, Vertex>, std::pair<std::int64_t, int>> state;  // weight, live count
  for (std::size_t t = 0; t < file.records.size(); ++t) {
    const auto& r = file.records[t];
    if (r.kind == RecordKind::Query) continue;
    const auto key = std::make_pair(r.edge.u, r.edge.v);
    auto [it, fresh] = state.try_emplace(key, r.edge.w, 0);
    if (!fresh && it->second.first != r.edge.w) {
      issues.push_back({t, "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                               ") changes weight"});
    }
    if (r.kind == RecordKind::Insert) {
      if (it->second.second > 0) issues.push_back({t, "insertion of a live edge"});
      ++it->second.second;
    } else {
      if (it->second.second <= 0) issues.push_back({t, "deletion of an absent edge"});
      --it->second.second;
    }
  }
  return issues;
}

}  // namespace kmatch

#endif  // KMATCH_STREAM_HPP
