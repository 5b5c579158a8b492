#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "asb/error.h"
#include "asb/lexembed.h"

namespace asb {

namespace {

constexpr std::string_view kMagic = "#emb v1";

bool valid_token(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n=") == std::string_view::npos;
}

double parse_double(std::string_view s, size_t line_no) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw DataError("embedding table line " + std::to_string(line_no) +
                    ": invalid number \"" + std::string(s) + "\"");
  }
  if (!std::isfinite(v)) {
    throw DataError("embedding table line " + std::to_string(line_no) +
                    ": non-finite value");
  }
  return v;
}

}  // namespace

const std::vector<double>& EmbeddingTable::row(const std::string& message_id) const {
  auto it = rows.find(message_id);
  if (it == rows.end()) {
    throw DataError("embedding table \"" + model_name + "\" has no row for \"" +
                    message_id + "\"");
  }
  return it->second;
}

int default_lexical_dim(const std::string& model_name) {
  return model_name == "gemini004" ? 1024 : 768;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DataError("cannot format floating-point value");
  return std::string(buf, ptr);
}

void write_table(const EmbeddingTable& table, std::ostream& out) {
  if (!valid_token(table.model_name)) {
    throw DataError("embedding table model name must be a non-empty token");
  }
  out << kMagic << " model=" << table.model_name << " dim=" << table.dim;
  if (!table.pooling.empty()) out << " pooling=" << table.pooling;
  for (const auto& [k, v] : table.metadata) {
    if (!valid_token(k) || !valid_token(v)) {
      throw DataError("embedding table metadata must be key=value tokens");
    }
    out << ' ' << k << '=' << v;
  }
  out << '\n';
  for (const auto& [id, values] : table.rows) {
    if (id.find_first_of("\t\r\n") != std::string::npos) {
      throw DataError("message id contains a tab or newline: " + id);
    }
    if (static_cast<int>(values.size()) != table.dim) {
      throw DataError("row \"" + id + "\" has " + std::to_string(values.size()) +
                      " values, table dim is " + std::to_string(table.dim));
    }
    out << id << '\t';
    for (size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw DataError("row \"" + id + "\" holds a non-finite value");
      }
      if (i) out << ',';
      out << format_double(values[i]);
    }
    out << '\n';
  }
}

void write_table_file(const EmbeddingTable& table,
                      const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ostringstream buf;
  write_table(table, buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embedding table: " + path.string());
  out << buf.str();
}

EmbeddingTable parse_table(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) {
    throw DataError("embedding table line 1: missing '#emb v1' header");
  }
  bool have_model = false, have_dim = false;
  std::istringstream header(line.substr(kMagic.size()));
  std::string tok;
  while (header >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DataError("embedding table line 1: bad header field \"" + tok + "\"");
    }
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "model") {
      table.model_name = value;
      have_model = true;
    } else if (key == "dim") {
      int d = -1;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
      if (ec != std::errc() || ptr != value.data() + value.size() || d < 0) {
        throw DataError("embedding table line 1: bad dim \"" + value + "\"");
      }
      table.dim = d;
      have_dim = true;
    } else if (key == "pooling") {
      if (value != "mean" && value != "cls") {
        throw DataError("embedding table line 1: pooling must be mean or cls");
      }
      table.pooling = value;
    } else {
      table.metadata[key] = value;
    }
  }
  if (!have_model || !have_dim) {
    throw DataError("embedding table line 1: header needs model= and dim=");
  }

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("embedding table line " + std::to_string(line_no) +
                      ": expected <message_id> TAB <values>");
    }
    std::string id = line.substr(0, tab);
    std::vector<double> values;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    if (!rest.empty()) {
      size_t start = 0;
      while (true) {
        const size_t comma = rest.find(',', start);
        const auto piece = rest.substr(start, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - start);
        values.push_back(parse_double(piece, line_no));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    if (static_cast<int>(values.size()) != table.dim) {
      throw DataError("embedding table line " + std::to_string(line_no) +
                      ": expected " + std::to_string(table.dim) +
                      " values, found " + std::to_string(values.size()));
    }
    if (!table.rows.emplace(std::move(id), std::move(values)).second) {
      throw DataError("embedding table line " + std::to_string(line_no) +
                      ": duplicate message_id");
    }
  }
  if (table.dim == 0 && !table.rows.empty()) {
    throw DataError("embedding table: dim must be positive");
  }
  return table;
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open embedding table: " + path.string());
  return parse_table(in);
}

double CoverageReport::ratio() const {
  const size_t total = covered + missing.size();
  return total == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(total);
}

CoverageReport validate_coverage(const EmbeddingTable& table,
                                 const std::vector<TaskInstance>& instances) {
  CoverageReport report;
  std::set<std::string> wanted;
  for (const auto& inst : instances) {
    if (!wanted.insert(inst.message_id).second) continue;
    if (table.rows.count(inst.message_id)) {
      ++report.covered;
    } else {
      report.missing.push_back(inst.message_id);
    }
  }
  for (const auto& [id, _] : table.rows) {
    if (!wanted.count(id)) ++report.extra;
  }
  return report;
}

void require_full_coverage(const EmbeddingTable& table,
                           const std::vector<TaskInstance>& instances) {
  const CoverageReport r = validate_coverage(table, instances);
  if (r.complete()) return;
  std::string names;
  for (size_t i = 0; i < r.missing.size() && i < 5; ++i) {
    names += (i ? ", " : "") + r.missing[i];
  }
  throw DataError("embedding table \"" + table.model_name + "\" misses " +
                  std::to_string(r.missing.size()) + " instance(s): " + names);
}

}  // namespace asb
