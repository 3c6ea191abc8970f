#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace malalab {

// CSV with a provenance comment header and a pass/fail footer. Everything in
// the file is a pure function of (config, seed) except the single
// "# wallclock_s:" line, which determinism comparisons must strip (see
// stable_content).
class CsvReport {
 public:
  CsvReport(std::string schema, std::vector<std::string> columns);

  void set_command(std::string cmd) { command_ = std::move(cmd); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_config_lines(std::vector<std::string> lines) { config_lines_ = std::move(lines); }

  void add_row(const std::vector<std::string>& cells);
  void add_footer(const std::string& line);  // extra "# ..." line after the rows
  void count_pass(bool pass);

  int pass_total() const { return pass_total_; }
  int fail_total() const { return fail_total_; }

  std::string render(double wallclock_s) const;
  void write_file(const std::string& path, double wallclock_s) const;

  static std::string fmt(double v);        // %.17g
  static std::string fmt(std::uint64_t v);
  static std::string fmt(std::int64_t v);
  static std::string fmt(int v);
  static std::string fmt(bool v);          // "1" / "0"

 private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::string command_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> config_lines_;
  std::vector<std::string> rows_;
  std::vector<std::string> footers_;
  int pass_total_ = 0;
  int fail_total_ = 0;
};

// File content with the wallclock line removed; two runs of the same
// experiment under the same seed must agree byte-for-byte on this.
std::string stable_content(const std::string& path);

// Markdown summary of one or more CsvReport files; rejects files that do not
// carry the expected magic/schema header (config_error).
std::string summarize_reports(const std::vector<std::string>& csv_paths);

}
