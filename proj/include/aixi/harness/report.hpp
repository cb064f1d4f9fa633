// Copyright 2026 The aixi-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "aixi/errors.hpp"
#include "aixi/harness/config.hpp"

#ifndef AIXI_LAB_VERSION
#define AIXI_LAB_VERSION "0.1.0"
#endif

namespace aixi::harness {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }

// A rectangular table of already formatted cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw ShapeError("row width differs from header");
    rows.push_back(std::move(row));
  }
};

// Provenance line written above every table body. It is the only line that
// varies between identical runs.
inline std::string provenance_line(const ExperimentConfig& cfg) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return "# aixi-lab " AIXI_LAB_VERSION " kind=" + kind_name(cfg.kind) +
         " config_hash=" + cfg.hash() + " generated=" + stamp;
}

inline std::filesystem::path table_path(const std::filesystem::path& dir,
                                        const std::string& stem, OutputFormat format) {
  return dir / (stem + (format == OutputFormat::csv ? ".csv" : ".dat"));
}

// CSV: comma separated with a header row. gnuplot: whitespace separated with
// the column names on a '#' comment line.
inline std::filesystem::path write_table(const std::filesystem::path& dir,
                                         const std::string& stem, const Table& table,
                                         OutputFormat format, const std::string& provenance) {
  std::filesystem::create_directories(dir);
  const auto path = table_path(dir, stem, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  const char sep = format == OutputFormat::csv ? ',' : ' ';
  out << provenance << '\n';
  if (format == OutputFormat::gnuplot) out << "# ";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << sep;
    out << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << sep;
      out << row[i];
    }
    out << '\n';
  }
  return path;
}

// File contents without the provenance line.
inline std::string read_body(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string first;
  std::getline(in, first);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::convergence;
  std::string config_hash;
  std::vector<std::filesystem::path> files;
  Table summary;
  std::vector<Verdict> verdicts;
  // Set when the truth is not in the model class; no verdicts are issued.
  bool out_of_assumption = false;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.passed; });
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  Accumulator<double> acc;
  for (double x : v) acc.add(x);
  return acc.value() / static_cast<double>(v.size());
}

// Runs `fn(seed)` for every seed, a few at a time, and returns the results in
// seed order regardless of scheduling.
template <class Fn>
auto map_seeds(const std::vector<std::uint64_t>& seeds, Fn fn) {
  using Result = decltype(fn(seeds.front()));
  std::vector<Result> results;
  results.reserve(seeds.size());
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < seeds.size(); start += width) {
    const std::size_t stop = std::min(seeds.size(), start + width);
    if (width == 1) {
      results.push_back(fn(seeds[start]));
      continue;
    }
    std::vector<std::future<Result>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, fn, seeds[i]));
    }
    for (auto& f : batch) results.push_back(f.get());
  }
  return results;
}

}  // namespace aixi::harness
