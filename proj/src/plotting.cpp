#include "clap/plotting.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include "clap/csv.hpp"
#include "clap/trainer.hpp"

namespace clap {

namespace {

// Trailing moving average over the last `window` values.
std::vector<double> smooth(const std::vector<double>& values, int window) {
  std::vector<double> out(values.size());
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i];
    if (i >= static_cast<std::size_t>(window)) running -= values[i - static_cast<std::size_t>(window)];
    const std::size_t denom = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = running / static_cast<double>(denom);
  }
  return out;
}

}  // namespace

void emit_learning_curve(const std::filesystem::path& metrics_csv, const std::filesystem::path& out_csv,
                         int target_rows, int smooth_window) {
  if (target_rows < 2) throw CsvError("plot downsample target must be at least 2");
  if (smooth_window < 1) throw CsvError("smoothing window must be at least 1");
  const CsvFile csv = read_csv(metrics_csv);
  if (csv.rows.empty()) throw CsvError("metrics file has no data rows: " + metrics_csv.string());

  const int step_col = csv.column("step");
  const int r1_col = csv.column("episode_return_obj1");
  const int r2_col = csv.column("episode_return_obj2");
  const int len_col = csv.column("episode_len");

  const std::size_t rows = csv.rows.size();
  std::vector<double> steps(rows), r1(rows), r2(rows), len(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    steps[i] = csv_to_double(csv.rows[i][static_cast<std::size_t>(step_col)]);
    r1[i] = csv_to_double(csv.rows[i][static_cast<std::size_t>(r1_col)]);
    r2[i] = csv_to_double(csv.rows[i][static_cast<std::size_t>(r2_col)]);
    len[i] = csv_to_double(csv.rows[i][static_cast<std::size_t>(len_col)]);
  }
  const std::vector<double> r1s = smooth(r1, smooth_window);
  const std::vector<double> r2s = smooth(r2, smooth_window);
  const std::vector<double> lens = smooth(len, smooth_window);

  // Evenly spaced row picks that always include the first and last row.
  std::vector<std::size_t> picks;
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(target_rows), rows);
  for (std::size_t k = 0; k < want; ++k) {
    const std::size_t idx =
        want == 1 ? 0 : (k * (rows - 1) + (want - 1) / 2) / (want - 1);
    if (picks.empty() || picks.back() != idx) picks.push_back(idx);
  }

  std::ofstream f(out_csv, std::ios::trunc);
  if (!f) throw CsvError("cannot open plot file for writing: " + out_csv.string());
  for (const auto& comment : csv.comments) f << comment << "\n";
  f << "step,return_obj1,return_obj2,episode_len\n";
  for (std::size_t idx : picks) {
    f << format_csv_value(steps[idx]) << ',' << format_csv_value(r1s[idx]) << ','
      << format_csv_value(r2s[idx]) << ',' << format_csv_value(lens[idx]) << "\n";
  }
  if (!f) throw CsvError("plot write failed: " + out_csv.string());
}

void emit_front_scatter(const std::filesystem::path& front_csv, const std::filesystem::path& out_csv) {
  const CsvFile csv = read_csv(front_csv);
  const int mode_col = csv.column("mode");
  const int w1_col = csv.column("w1");
  const int w2_col = csv.column("w2");
  const int x_col = csv.column("obj1");
  const int y_col = csv.column("obj2");
  int dom_col = -1;
  for (std::size_t i = 0; i < csv.header.size(); ++i) {
    if (csv.header[i] == "dominated") dom_col = static_cast<int>(i);
  }

  std::ofstream f(out_csv, std::ios::trunc);
  if (!f) throw CsvError("cannot open scatter file for writing: " + out_csv.string());
  f << "mode,w1,w2,x,y,dominated\n";
  for (const auto& row : csv.rows) {
    f << row[static_cast<std::size_t>(mode_col)] << ',' << row[static_cast<std::size_t>(w1_col)] << ','
      << row[static_cast<std::size_t>(w2_col)] << ',' << row[static_cast<std::size_t>(x_col)] << ','
      << row[static_cast<std::size_t>(y_col)] << ','
      << (dom_col >= 0 ? row[static_cast<std::size_t>(dom_col)] : std::string("0")) << "\n";
  }
  if (!f) throw CsvError("scatter write failed: " + out_csv.string());
}

}  // namespace clap
