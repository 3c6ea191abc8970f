#include "malalab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "malalab/errors.hpp"
#include "malalab/version.hpp"

namespace malalab {

CsvReport::CsvReport(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvReport::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw precondition_error("CsvReport: row width mismatch for schema '" + schema_ + "'");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

void CsvReport::add_footer(const std::string& line) { footers_.push_back(line); }

void CsvReport::count_pass(bool pass) {
  if (pass) ++pass_total_;
  else ++fail_total_;
}

std::string CsvReport::render(double wallclock_s) const {
  std::ostringstream os;
  os << "# mala-lab " << kVersion << "\n";
  os << "# schema: " << schema_ << "\n";
  if (!command_.empty()) os << "# command: " << command_ << "\n";
  os << "# seed: " << seed_ << "\n";
  for (const auto& line : config_lines_) os << "# config " << line << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", wallclock_s);
  os << "# wallclock_s: " << buf << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) os << row << "\n";
  for (const auto& line : footers_) os << "# " << line << "\n";
  os << "# pass_total: " << pass_total_ << "\n";
  os << "# fail_total: " << fail_total_ << "\n";
  return os.str();
}

void CsvReport::write_file(const std::string& path, double wallclock_s) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numeric_error("cannot open output file '" + path + "'");
  out << render(wallclock_s);
}

std::string CsvReport::fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string CsvReport::fmt(std::uint64_t v) { return std::to_string(v); }
std::string CsvReport::fmt(std::int64_t v) { return std::to_string(v); }
std::string CsvReport::fmt(int v) { return std::to_string(v); }
std::string CsvReport::fmt(bool v) { return v ? "1" : "0"; }

std::string stable_content(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw precondition_error("stable_content: cannot open '" + path + "'");
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# wallclock_s:", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string summarize_reports(const std::vector<std::string>& csv_paths) {
  std::ostringstream md;
  md << "# mala-lab run summary\n";
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw config_error("report: cannot open '" + path + "'");
    std::string first;
    std::getline(in, first);
    if (first.rfind("# mala-lab", 0) != 0)
      throw config_error("report: '" + path + "' is not a mala-lab CSV (missing magic header)");
    std::string schema, command, seed;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footers;
    std::string line;
    bool in_rows = false;
    while (std::getline(in, line)) {
      if (line.rfind("# schema: ", 0) == 0) {
        schema = line.substr(10);
      } else if (line.rfind("# command: ", 0) == 0) {
        command = line.substr(11);
      } else if (line.rfind("# seed: ", 0) == 0) {
        seed = line.substr(8);
      } else if (!line.empty() && line[0] == '#') {
        if (in_rows) footers.push_back(line.substr(1));
      } else if (!line.empty()) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!in_rows) {
          columns = std::move(cells);
          in_rows = true;
        } else {
          rows.push_back(std::move(cells));
        }
      }
    }
    if (schema.empty() || columns.empty())
      throw config_error("report: '" + path + "' has no schema/column header");

    md << "\n## " << schema << " (" << path << ")\n\n";
    if (!command.empty()) md << "- command: `" << command << "`\n";
    if (!seed.empty()) md << "- seed: " << seed << "\n";
    md << "- rows: " << rows.size() << "\n";
    for (const auto& f : footers) md << "-" << f << "\n";
    md << "\n|";
    for (const auto& c : columns) md << " " << c << " |";
    md << "\n|";
    for (std::size_t i = 0; i < columns.size(); ++i) md << " --- |";
    md << "\n";
    // cap very long tables; the CSV remains the full record
    const std::size_t max_rows = 64;
    for (std::size_t r = 0; r < rows.size() && r < max_rows; ++r) {
      md << "|";
      for (const auto& c : rows[r]) md << " " << c << " |";
      md << "\n";
    }
    if (rows.size() > max_rows)
      md << "\n(" << (rows.size() - max_rows) << " more rows in the CSV)\n";
  }
  return md.str();
}

}
