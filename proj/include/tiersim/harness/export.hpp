#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiersim/harness/experiment.hpp"

namespace tiersim {

/// Rows are page buckets, columns epochs. Header: "bucket,0,1,...".
void write_heatmap_csv(const RunResult& result, const std::filesystem::path& path);
/// Matrix indexed [bucket][epoch].
std::vector<std::vector<std::uint64_t>> read_heatmap_csv(const std::filesystem::path& path);
/// [bucket][epoch] view of result.heatmap.
std::vector<std::vector<std::uint64_t>> transpose_heatmap(const RunResult& result);

/// epoch, end time, fast occupancy, cumulative migrations, accesses.
void write_series_csv(const RunResult& result, const std::filesystem::path& path);
/// tick_time_ns, page, dest.
void write_events_csv(const RunResult& result, const std::filesystem::path& path);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

/// Full simulate output: result.json, heatmap.csv, series.csv and, when
/// events were recorded, migrations.csv.
void export_run(const ExperimentSpec& spec, const RunResult& result, const std::filesystem::path& dir);

}  // namespace tiersim
