#pragma once

// Config plumbing and deterministic file output for the experiment drivers.
//
// Configs are JSON: a driver publishes a complete default document and user
// files are merged over it key by key, so every key a user writes must
// already exist in the defaults (typos die loudly) and must keep the default
// value's JSON type.  Data tables are tab-separated text with a '#' header
// block carrying the artifact version, experiment name, config hash and seed;
// doubles are printed with %.17g so reruns are byte-identical and readers
// recover the exact binary values.

#include "adqc/common.hpp"
#include "adqc/schedule.hpp"
#include "adqc/version.hpp"

#include "json.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <utility>

namespace adqc {

using Json = nlohmann::json;

// Bad config content or schema (maps to the CLI's config-error exit code,
// alongside the std::invalid_argument family thrown by the library).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_config(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

// ---------------------------------------------------------------------------
// JSON documents

inline Json parse_json(const std::string& text, const std::string& origin) {
  Json parsed = Json::parse(text, nullptr, false);
  require_config(!parsed.is_discarded(), origin + ": not valid JSON");
  return parsed;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require_config(in.good(), "config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_json(text.str(), path.string());
}

inline void write_json_file(const std::filesystem::path& path,
                            const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_json_file: cannot open " + path.string());
  out << doc.dump(2) << '\n';
  require(out.good(), "write_json_file: write failed for " + path.string());
}

namespace detail {

inline bool same_json_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;  // int vs float is fine
  return a.type() == b.type();
}

}  // namespace detail

// Defaults overlaid with a user document.  Objects merge recursively; every
// other value is replaced wholesale.  Keys absent from the defaults and type
// changes are rejected, so the resolved config always has the default
// document's shape.
inline Json merge_config(const Json& defaults, const Json& user,
                         const std::string& scope = "config") {
  require_config(defaults.is_object(), scope + ": defaults must be an object");
  require_config(user.is_object(), scope + ": expected a JSON object");
  Json merged = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string where = scope + "." + key;
    require_config(merged.contains(key), where + ": unknown key");
    const Json& base = merged.at(key);
    if (base.is_object()) {
      merged[key] = merge_config(base, value, where);
      continue;
    }
    require_config(detail::same_json_kind(base, value),
                   where + ": expected type " + std::string(base.type_name()));
    merged[key] = value;
  }
  return merged;
}

// Typed getters for resolved configs.  Presence is guaranteed by the merge;
// these re-check type and basic shape so drivers can read without ceremony.
inline double get_number(const Json& cfg, const std::string& key) {
  require_config(cfg.contains(key) && cfg.at(key).is_number(),
                 "config." + key + ": expected a number");
  return cfg.at(key).get<double>();
}

inline Index get_count(const Json& cfg, const std::string& key) {
  require_config(cfg.contains(key) && cfg.at(key).is_number_integer(),
                 "config." + key + ": expected an integer");
  return cfg.at(key).get<Index>();
}

inline std::uint64_t get_seed(const Json& cfg, const std::string& key) {
  const bool ok =
      cfg.contains(key) &&
      (cfg.at(key).is_number_unsigned() ||
       (cfg.at(key).is_number_integer() && cfg.at(key).get<std::int64_t>() >= 0));
  require_config(ok, "config." + key + ": expected a non-negative integer");
  return cfg.at(key).get<std::uint64_t>();
}

inline bool get_flag(const Json& cfg, const std::string& key) {
  require_config(cfg.contains(key) && cfg.at(key).is_boolean(),
                 "config." + key + ": expected a boolean");
  return cfg.at(key).get<bool>();
}

inline std::string get_string(const Json& cfg, const std::string& key) {
  require_config(cfg.contains(key) && cfg.at(key).is_string(),
                 "config." + key + ": expected a string");
  return cfg.at(key).get<std::string>();
}

inline std::vector<double> get_number_list(const Json& cfg,
                                           const std::string& key) {
  require_config(cfg.contains(key) && cfg.at(key).is_array(),
                 "config." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const Json& v : cfg.at(key)) {
    require_config(v.is_number(),
                   "config." + key + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config hash

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// FNV-1a over the canonical dump (object keys are stored sorted, so two
// documents with equal content hash equally regardless of insertion order).
inline std::string config_hash(const Json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Tables

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_integer(long long v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

// Provenance header written at the top of every output file.
struct RunStamp {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  // Extra "# key: value" lines (engine, basis, ...), in the given order.
  std::vector<std::pair<std::string, std::string>> notes;
};

// Tab-separated writer: '#' header block, one column-name line, then rows.
// Files are opened in binary mode so the bytes are platform-independent.
class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, const RunStamp& stamp,
              const std::vector<std::string>& columns)
      : path_(path), out_(path, std::ios::binary), n_columns_(columns.size()) {
    require(out_.good(), "table: cannot open " + path.string());
    require(!columns.empty(), "table: need at least one column");
    out_ << "# adqc-sim " << version << '\n';
    out_ << "# experiment: " << stamp.experiment << '\n';
    out_ << "# config-hash: " << stamp.config_hash << '\n';
    out_ << "# seed: " << stamp.seed << '\n';
    for (const auto& [key, value] : stamp.notes)
      out_ << "# " << key << ": " << value << '\n';
    for (size_t c = 0; c < columns.size(); ++c) {
      require(columns[c].find_first_of("\t\n#") == std::string::npos &&
                  !columns[c].empty(),
              "table: malformed column name");
      out_ << (c ? "\t" : "") << columns[c];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells(values.size());
    for (size_t c = 0; c < values.size(); ++c)
      cells[c] = format_number(values[c]);
    row(cells);
  }

  void row(const std::vector<std::string>& cells) {
    require(cells.size() == n_columns_, "table: row width mismatch");
    for (size_t c = 0; c < cells.size(); ++c)
      out_ << (c ? "\t" : "") << cells[c];
    out_ << '\n';
    require(out_.good(), "table: write failed for " + path_.string());
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  size_t n_columns_;
};

// Parsed table: header comments, column names, numeric cells.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  Index column(const std::string& name) const {
    for (size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == name) return static_cast<Index>(c);
    throw std::invalid_argument("table: no column named " + name);
  }
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream row(line);
  std::string tok;
  while (row >> tok) fields.push_back(tok);
  return fields;
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

inline Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  require_config(in.good(), "table: cannot open " + path.string());
  Table table;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      require_config(table.columns.empty(),
                     path.string() + ": comment after the column line");
      table.comments.push_back(line);
      continue;
    }
    std::vector<std::string> fields = detail::split_fields(line);
    if (table.columns.empty()) {
      table.columns = std::move(fields);
      continue;
    }
    require_config(fields.size() == table.columns.size(),
                   path.string() + ": ragged row");
    std::vector<double> row(fields.size());
    for (size_t c = 0; c < fields.size(); ++c)
      require_config(detail::parse_double(fields[c], row[c]),
                     path.string() + ": non-numeric cell '" + fields[c] + "'");
    rows.push_back(std::move(row));
  }
  require_config(!table.columns.empty(), path.string() + ": no column line");
  table.values.resize(static_cast<Index>(rows.size()),
                      static_cast<Index>(table.columns.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return table;
}

// ---------------------------------------------------------------------------
// Schedule files

// Delimited text, '#' comments allowed, one header line required, then either
// three columns (s, A_GHz, B_GHz) or two (A_GHz, B_GHz on a uniform s grid
// over [0, 1]).  Monotonicity and range checks come from the AnnealSchedule
// constructor; their violations are reported as config errors with the file
// name attached.
inline AnnealSchedule load_schedule_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require_config(in.good(), "schedule: cannot open " + path.string());
  std::string line;
  bool header_seen = false;
  std::vector<std::array<double, 3>> rows;
  size_t width = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields = detail::split_fields(line);
    if (!header_seen) {
      double ignored;
      require_config(!detail::parse_double(fields.front(), ignored),
                     path.string() + ": header line required");
      require_config(fields.size() == 2 || fields.size() == 3,
                     path.string() + ": expected 2 or 3 columns");
      width = fields.size();
      header_seen = true;
      continue;
    }
    require_config(fields.size() == width, path.string() + ": ragged row");
    std::array<double, 3> row{0.0, 0.0, 0.0};
    for (size_t c = 0; c < width; ++c)
      require_config(detail::parse_double(fields[c], row[c]),
                     path.string() + ": non-numeric cell '" + fields[c] + "'");
    rows.push_back(row);
  }
  require_config(header_seen, path.string() + ": header line required");
  const Index n = static_cast<Index>(rows.size());
  require_config(n >= 4, path.string() + ": need at least four rows");
  Eigen::VectorXd s(n), a(n), b(n);
  for (Index i = 0; i < n; ++i) {
    if (width == 3) {
      s[i] = rows[static_cast<size_t>(i)][0];
      a[i] = rows[static_cast<size_t>(i)][1];
      b[i] = rows[static_cast<size_t>(i)][2];
    } else {
      s[i] = static_cast<double>(i) / static_cast<double>(n - 1);
      a[i] = rows[static_cast<size_t>(i)][0];
      b[i] = rows[static_cast<size_t>(i)][1];
    }
  }
  try {
    return AnnealSchedule(std::move(s), std::move(a), std::move(b),
                          path.filename().string());
  } catch (const std::invalid_argument& err) {
    throw config_error(path.string() + ": " + err.what());
  }
}

}  // namespace adqc
