#pragma once

#include <filesystem>

namespace clap {

// Downsampled, moving-average-smoothed learning-curve series from a training
// metrics CSV: columns step, return_obj1, return_obj2, episode_len. Keeps the
// first and last row; window 1 leaves values untouched.
void emit_learning_curve(const std::filesystem::path& metrics_csv, const std::filesystem::path& out_csv,
                         int target_rows, int smooth_window);

// Scatter series from a front CSV; one row per point, dominance flag kept.
void emit_front_scatter(const std::filesystem::path& front_csv, const std::filesystem::path& out_csv);

}  // namespace clap
