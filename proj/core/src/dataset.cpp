#include "pdsel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "pdsel/errors.hpp"

namespace pdsel {

namespace {

// One CSV record; quoted fields may contain commas, escaped quotes, and
// newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line_no) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;
  ++line_no;
  while (true) {
    if (c == EOF) {
      fields.push_back(std::move(field));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        const int next = in.get();
        if (next == '"') {
          field.push_back('"');
        } else {
          quoted = false;
          c = next;
          continue;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      const int next = in.get();
      if (next == '\n' || next == EOF) break;
      field.push_back('\r');
      c = next;
      continue;
    } else {
      field.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  fields.push_back(std::move(field));
  return true;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

enum class cell_kind { value, missing, bad };

cell_kind parse_cell(const std::string& raw, double& out) {
  const std::string s = trimmed(raw);
  if (s.empty()) return cell_kind::missing;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  const auto result = std::from_chars(first, last, out);
  if (result.ec != std::errc{} || result.ptr != last) return cell_kind::bad;
  if (!std::isfinite(out)) return cell_kind::missing;
  return cell_kind::value;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quoted_field(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::vector<Index> Dataset::amelioration_indices() const {
  std::vector<Index> idx;
  for (const std::string& name : amelioration_columns) {
    const auto it =
        std::find(control_columns.begin(), control_columns.end(), name);
    idx.push_back(static_cast<Index>(it - control_columns.begin()));
  }
  return idx;
}

namespace {

struct loaded_csv {
  std::vector<std::string> header;
  RealMatrix values;  // used columns, caller's order
  std::size_t dropped = 0;
};

// Shared reader: `choose` inspects the header and returns the positions of
// the columns to keep (validating names as it goes).
loaded_csv load_csv(
    const std::string& path,
    const std::function<std::vector<std::size_t>(
        const std::vector<std::string>&)>& choose) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path + "'");

  // Consume a UTF-8 byte order mark before tokenizing, so it cannot glue
  // itself to a (possibly quoted) first header name.
  static constexpr char kBom[] = "\xEF\xBB\xBF";
  char lead[3];
  in.read(lead, 3);
  if (in.gcount() != 3 || std::char_traits<char>::compare(lead, kBom, 3) != 0) {
    in.clear();
    in.seekg(0);
  }

  loaded_csv out;
  std::size_t line_no = 0;
  if (!read_record(in, out.header, line_no))
    throw data_error("'" + path + "' is empty");

  const std::vector<std::size_t> used = choose(out.header);

  std::vector<double> kept;  // row-major staging
  std::vector<std::string> record;
  std::vector<double> row(used.size());
  while (read_record(in, record, line_no)) {
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    if (record.size() != out.header.size()) {
      std::ostringstream msg;
      msg << path << " line " << line_no << ": expected " << out.header.size()
          << " fields, found " << record.size();
      throw data_error(msg.str());
    }
    bool missing = false;
    for (std::size_t k = 0; k < used.size() && !missing; ++k) {
      const std::string& cell = record[used[k]];
      switch (parse_cell(cell, row[k])) {
        case cell_kind::value:
          break;
        case cell_kind::missing:
          missing = true;
          break;
        case cell_kind::bad: {
          std::ostringstream msg;
          msg << path << " line " << line_no << ", column '"
              << out.header[used[k]] << "': cannot parse '" << cell << "'";
          throw data_error(msg.str());
        }
      }
    }
    if (missing) {
      ++out.dropped;
      continue;
    }
    kept.insert(kept.end(), row.begin(), row.end());
  }

  const Index rows = static_cast<Index>(kept.size() / used.size());
  if (rows < 3)
    throw data_error("'" + path + "' has fewer than 3 complete rows");
  out.values.resize(rows, static_cast<Index>(used.size()));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < out.values.cols(); ++j)
      out.values(i, j) = kept[static_cast<std::size_t>(i) * used.size() +
                              static_cast<std::size_t>(j)];
  return out;
}

std::unordered_map<std::string, std::size_t> header_positions(
    const std::vector<std::string>& header) {
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (position.count(header[j]))
      throw data_error("duplicate column name '" + header[j] + "'");
    position[header[j]] = j;
  }
  return position;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const RoleMapping& roles) {
  if (roles.outcome.empty() || roles.treatment.empty())
    throw argument_error("outcome and treatment columns are required");
  if (roles.outcome == roles.treatment)
    throw argument_error("outcome and treatment must be distinct columns");

  Dataset ds;
  ds.outcome_column = roles.outcome;
  ds.treatment_column = roles.treatment;

  const auto choose = [&](const std::vector<std::string>& header) {
    const auto position = header_positions(header);
    const auto locate = [&](const std::string& name) {
      const auto it = position.find(name);
      if (it == position.end())
        throw argument_error("column '" + name + "' not found in '" + path + "'");
      return it->second;
    };
    std::vector<std::size_t> used = {locate(roles.outcome),
                                     locate(roles.treatment)};
    if (roles.controls_all_others) {
      for (std::size_t j = 0; j < header.size(); ++j)
        if (j != used[0] && j != used[1]) {
          ds.control_columns.push_back(header[j]);
          used.push_back(j);
        }
    } else {
      for (const std::string& name : roles.controls) {
        if (name == roles.outcome || name == roles.treatment)
          throw argument_error("column '" + name + "' used in two roles");
        const std::size_t j = locate(name);
        if (std::count(used.begin(), used.end(), j))
          throw argument_error("column '" + name + "' listed twice");
        ds.control_columns.push_back(name);
        used.push_back(j);
      }
    }
    if (ds.control_columns.empty())
      throw argument_error("at least one control column is required");
    for (const std::string& name : roles.amelioration) {
      if (!std::count(ds.control_columns.begin(), ds.control_columns.end(),
                      name))
        throw argument_error("amelioration column '" + name +
                             "' is not among the controls");
      if (!std::count(ds.amelioration_columns.begin(),
                      ds.amelioration_columns.end(), name))
        ds.amelioration_columns.push_back(name);
    }
    return used;
  };

  loaded_csv loaded = load_csv(path, choose);
  ds.column_names = std::move(loaded.header);
  ds.values = std::move(loaded.values);
  ds.rows = ds.values.rows();
  ds.rows_dropped = loaded.dropped;
  return ds;
}

RealMatrix read_csv_columns(const std::string& path,
                            const std::vector<std::string>& names,
                            std::size_t* rows_dropped) {
  if (names.empty()) throw argument_error("no columns requested");
  const auto choose = [&](const std::vector<std::string>& header) {
    const auto position = header_positions(header);
    std::vector<std::size_t> used;
    for (const std::string& name : names) {
      const auto it = position.find(name);
      if (it == position.end())
        throw argument_error("column '" + name + "' not found in '" + path + "'");
      used.push_back(it->second);
    }
    return used;
  };
  loaded_csv loaded = load_csv(path, choose);
  if (rows_dropped) *rows_dropped = loaded.dropped;
  return std::move(loaded.values);
}

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const RealMatrix& values) {
  if (static_cast<Index>(header.size()) != values.cols())
    throw argument_error("header width does not match matrix columns");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path + "'");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << quoted_field(header[j]);
  }
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw data_error("write to '" + path + "' failed");
}

}  // namespace pdsel
