#pragma once

// CSV emission and parsing. Floats are written with 17 significant digits so
// that parsing a file back reproduces every value bit for bit.

#include <cctype>
#include <cstddef>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "poolsim/ledger.hpp"

namespace poolsim {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Parses a full field as a double. Subnormals are accepted.
inline double parse_double(const std::string& field) {
  if (field.empty() || std::isspace(static_cast<unsigned char>(field.front())))
    throw std::invalid_argument("not a number: '" + field + "'");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw std::invalid_argument("not a number: '" + field + "'");
  return v;
}

/// Quotes a field when it contains a comma, quote or line break.
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Row-at-a-time CSV builder.
class CsvWriter {
 public:
  explicit CsvWriter(std::span<const std::string> header) { row(header); }

  CsvWriter& field(const std::string& s) {
    if (!first_) out_ << ',';
    first_ = false;
    out_ << csv_escape(s);
    return *this;
  }
  CsvWriter& field(double v) { return field(format_double(v)); }
  CsvWriter& field(long long v) { return field(std::to_string(v)); }
  CsvWriter& field(unsigned long long v) { return field(std::to_string(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }
  CsvWriter& field(std::size_t v) { return field(static_cast<unsigned long long>(v)); }

  CsvWriter& end_row() {
    out_ << '\n';
    first_ = true;
    return *this;
  }

  void row(std::span<const std::string> cells) {
    for (const auto& c : cells) field(c);
    end_row();
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

/// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
/// breaks.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool pending = false;  // a row has started
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    pending = true;
    if (quoted) {
      if (c != '"') {
        field += c;
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      pending = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
  if (pending) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::system_error(errno, std::generic_category(), "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// ledger.csv: round, M, then per miner a_i, D_i, reward_i, subsidy_flag_i,
// then delta, budget_ratio. Miners are indexed from 0.

inline std::vector<std::string> ledger_header(std::size_t miners) {
  std::vector<std::string> h{"round", "M"};
  for (std::size_t i = 0; i < miners; ++i) {
    const std::string s = std::to_string(i);
    h.insert(h.end(), {"a_" + s, "D_" + s, "reward_" + s, "subsidy_flag_" + s});
  }
  h.insert(h.end(), {"delta", "budget_ratio"});
  return h;
}

inline std::string ledger_to_csv(const SimulationLedger& ledger) {
  const std::size_t n = ledger.miners();
  const auto header = ledger_header(n);
  CsvWriter w(header);
  for (const auto& r : ledger.rounds) {
    w.field(static_cast<unsigned long long>(r.round)).field(r.demand_M);
    for (std::size_t i = 0; i < n; ++i)
      w.field(r.allocations[i]).field(r.difficulties[i]).field(r.rewards[i]).field(r.subsidy_flags[i]);
    w.field(r.delta).field(r.budget_ratio).end_row();
  }
  return w.str();
}

/// Inverse of ledger_to_csv for the columns the schema carries. Intake is not
/// part of the schema and is left at zero; outflow is recomputed.
inline SimulationLedger ledger_from_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw std::invalid_argument("ledger.csv: missing header");
  const auto& header = rows.front();
  if (header.size() < 4 || (header.size() - 4) % 4 != 0)
    throw std::invalid_argument("ledger.csv: unexpected column count");
  const std::size_t n = (header.size() - 4) / 4;
  if (header != ledger_header(n)) throw std::invalid_argument("ledger.csv: header mismatch");
  SimulationLedger ledger;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& row = rows[k];
    if (row.size() != header.size()) throw std::invalid_argument("ledger.csv: ragged row");
    RoundRecord r;
    r.round = static_cast<std::uint32_t>(std::stoul(row[0]));
    r.demand_M = parse_double(row[1]);
    for (std::size_t i = 0; i < n; ++i) {
      r.allocations.push_back(parse_double(row[2 + 4 * i]));
      r.difficulties.push_back(parse_double(row[3 + 4 * i]));
      r.rewards.push_back(parse_double(row[4 + 4 * i]));
      r.subsidy_flags.push_back(std::stoi(row[5 + 4 * i]));
    }
    r.delta = parse_double(row[2 + 4 * n]);
    r.budget_ratio = parse_double(row[3 + 4 * n]);
    for (double v : r.rewards) r.outflow += v;
    ledger.append(std::move(r));
  }
  return ledger;
}

}  // namespace poolsim
