#pragma once

#include <string>
#include <vector>

namespace abohm::report {

// Shortest decimal that round-trips to the same double, so CSV bodies are
// byte-stable across runs and platforms with the same arithmetic.
std::string format_double(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC-4180-ish: fields containing comma, quote or newline get quoted.
std::string to_csv(const Table& t);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained line chart, fixed 860x480 canvas, optional log10 x axis.
// Pure text emission, deterministic for identical input.
std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           bool log_x);

// Writes via a temp file in the same directory plus rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// FNV-1a over the bytes, hex-encoded; used for the config hash in manifests.
std::string content_hash(const std::string& bytes);

}  // namespace abohm::report
