#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dopo::cli {

enum class Format { Csv, Jsonl };

Format parse_format(const std::string& s);

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

/// Fixed-column result table. Rows are filled by column name; unset cells
/// are written empty (CSV) or null (JSONL).
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  void add_row();
  void set(const std::string& column, Cell value);
  const Cell& at(std::size_t row, const std::string& column) const;

  void write(std::ostream& os, Format format) const;

 private:
  std::size_t index_of(const std::string& column) const;

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// %.17g, with nan/inf spelled out.
std::string format_double(double v);

/// RFC 4180 quoting: fields with comma, quote or newline are quoted and
/// embedded quotes doubled.
std::string csv_escape(const std::string& s);

}  // namespace dopo::cli
