// Copyright 2026 The bagdyn Authors
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
#include "bagdyn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "bagdyn/parallel.hpp"

namespace bagdyn {
namespace {

using json = nlohmann::json;

const TrajectoryRecord& record_at(const TaskEvaluation& te, std::size_t i, Split split) {
  return *te.dataset->select(split)[i];
}

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

double mean_position_error(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size())
    throw Error(ErrorCode::kDimensionMismatch, "vertex counts differ: " + std::to_string(pred.size()) +
                                                   " vs " + std::to_string(gt.size()));
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "no vertices");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - gt[i]).norm();
  return sum / static_cast<double>(pred.size());
}

double mean_position_error(const PredictedFrame& pred, const Frame& gt,
                           const KeypointMap& keypoints) {
  return mean_position_error(pred.positions, graph_positions(gt, keypoints));
}

ErrorReport summarize(std::string group, std::string model, int horizon,
                      std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no samples for " + group + "/" + model);
  ErrorReport r{std::move(group), std::move(model), horizon, 0.0, 0.0, samples.size()};
  for (double s : samples) r.mean += s;
  r.mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - r.mean) * (s - r.mean);
  r.std = std::sqrt(var / static_cast<double>(samples.size()));
  return r;
}

std::vector<ErrorReport> eval_single_step(std::span<const TaskEvaluation> tasks, Split split,
                                          unsigned threads) {
  struct Job {
    std::size_t task, record;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& te = tasks[k];
    const std::string id = te.task.id();
    if (!te.dataset) throw Error(ErrorCode::kEmptyInput, "no dataset for task " + id);
    if (!te.m1 || !te.m1->ppm || !te.m1->apm)
      throw Error(ErrorCode::kMissingModel, "missing horizon-1 models for task " + id);
    if (te.m1->horizon != 1) throw Error(ErrorCode::kMissingModel, "task " + id + ": m1 has horizon " + std::to_string(te.m1->horizon));
    const std::size_t n = te.dataset->select(split).size();
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({k, i});
  }
  // [job][variant] -> samples
  std::vector<std::array<std::vector<double>, 3>> errors(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t j) {
        const auto& te = tasks[jobs[j].task];
        const TrajectoryRecord& rec = record_at(te, jobs[j].record, split);
        for (std::size_t t = 0; t + 1 < rec.frames.size(); ++t) {
          const GraphState state = graph_state(rec, t, te.keypoints);
          const auto gt = graph_positions(rec.frames[t + 1], te.keypoints);
          const auto one = predict_one_stage(state, *te.m1, rec.action, t, te.keypoints);
          const auto two = predict_two_stage(state, *te.m1, rec.action, t, te.keypoints);
          errors[j][0].push_back(mean_position_error(one.positions, gt));
          errors[j][1].push_back(mean_position_error(two.positions, gt));
          errors[j][2].push_back(mean_position_error(state.positions, gt));
        }
      },
      threads);

  const char* names[3] = {kOneStage, kTwoStage, kPersistence};
  std::map<std::string, std::array<std::vector<double>, 3>> groups;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const TaskConfig& task = tasks[jobs[j].task].task;
    for (const std::string& g : {task.id(), std::string(to_string(task.stiffness))})
      for (int v = 0; v < 3; ++v)
        groups[g][v].insert(groups[g][v].end(), errors[j][v].begin(), errors[j][v].end());
  }
  std::vector<ErrorReport> out;
  for (const auto& [g, samples] : groups)
    for (int v = 0; v < 3; ++v)
      if (!samples[v].empty()) out.push_back(summarize(g, names[v], 1, samples[v]));
  sort_reports(out);
  return out;
}

std::vector<ErrorReport> eval_long_horizon(std::span<const TaskEvaluation> tasks, Split split,
                                           std::size_t max_t, unsigned threads,
                                           std::vector<std::string>* warnings) {
  const std::size_t limit = kFramesPerTrajectory - 1;
  if (max_t > limit) {
    if (warnings)
      warnings->push_back("horizon " + std::to_string(max_t) + " exceeds the trajectory; clamped to " +
                          std::to_string(limit));
    max_t = limit;
  }
  struct Job {
    std::size_t task, record;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& te = tasks[k];
    const std::string id = te.task.id();
    if (!te.dataset) throw Error(ErrorCode::kEmptyInput, "no dataset for task " + id);
    if (!te.m1 || !te.m1->ppm || !te.m1->apm || te.m1->horizon != 1)
      throw Error(ErrorCode::kMissingModel, "missing horizon-1 models for task " + id);
    if (!te.m5 || !te.m5->ppm || !te.m5->apm || te.m5->horizon != 5)
      throw Error(ErrorCode::kMissingModel, "missing horizon-5 models for task " + id);
    const std::size_t n = te.dataset->select(split).size();
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({k, i});
  }
  // [job][variant][horizon]; NaN marks horizons past the trajectory end.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::array<std::vector<double>, 3>> errors(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t j) {
        const auto& te = tasks[jobs[j].task];
        const TrajectoryRecord& rec = record_at(te, jobs[j].record, split);
        const std::size_t T = std::min(max_t, rec.frames.size() - 1);
        std::vector<std::vector<Vec3>> gt(T + 1);
        for (std::size_t t = 0; t <= T; ++t) gt[t] = graph_positions(rec.frames[t], te.keypoints);
        const GraphState g0 = graph_state(rec, 0, te.keypoints);
        for (auto& v : errors[j]) v.assign(max_t + 1, nan);
        for (int v = 0; v < 2; ++v) {
          const auto mode = v == 0 ? PredictMode::kOneStage : PredictMode::kTwoStage;
          const auto frames = rollout_fixed(g0, T, *te.m1, mode, rec.action, te.keypoints);
          for (std::size_t t = 0; t <= T; ++t)
            errors[j][v][t] = mean_position_error(frames[t].positions, gt[t]);
        }
        // Prefix of M5 steps; each prefix then extends with up to 4 M1 steps.
        GraphState base = g0;
        for (std::size_t k = 0; 5 * k <= T; ++k) {
          errors[j][2][5 * k] = mean_position_error(base.positions, gt[5 * k]);
          GraphState s = base;
          for (std::size_t r = 1; r < 5 && 5 * k + r <= T; ++r) {
            const auto f = predict_two_stage(s, *te.m1, rec.action, 5 * k + r - 1, te.keypoints);
            s.positions = f.positions;
            errors[j][2][5 * k + r] = mean_position_error(s.positions, gt[5 * k + r]);
          }
          if (5 * (k + 1) <= T) {
            const auto f = predict_two_stage(base, *te.m5, rec.action, 5 * k, te.keypoints);
            base.positions = f.positions;
          }
        }
      },
      threads);

  const char* names[3] = {kOneStage, kTwoStage, kMixedHorizon};
  std::map<std::string, std::array<std::vector<std::vector<double>>, 3>> groups;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto& g = groups[to_string(tasks[jobs[j].task].task.action)];
    for (int v = 0; v < 3; ++v) {
      g[v].resize(max_t + 1);
      for (std::size_t t = 0; t <= max_t; ++t)
        if (!std::isnan(errors[j][v][t])) g[v][t].push_back(errors[j][v][t]);
    }
  }
  std::vector<ErrorReport> out;
  for (const auto& [name, g] : groups)
    for (int v = 0; v < 3; ++v)
      for (std::size_t t = 0; t < g[v].size(); ++t)
        if (!g[v][t].empty()) out.push_back(summarize(name, names[v], static_cast<int>(t), g[v][t]));
  sort_reports(out);
  return out;
}

void sort_reports(std::vector<ErrorReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const ErrorReport& a, const ErrorReport& b) {
    return std::tie(a.group, a.model, a.horizon) < std::tie(b.group, b.model, b.horizon);
  });
}

std::string format_csv(std::vector<ErrorReport> reports) {
  sort_reports(reports);
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : reports) {
    if (r.group.find_first_of(",\"\n") != std::string::npos ||
        r.model.find_first_of(",\"\n") != std::string::npos)
      throw Error(ErrorCode::kInvalidParameter, "report names must not contain separators");
    out += r.group + "," + r.model + "," + std::to_string(r.horizon) + "," + fmt9(r.mean) + "," +
           fmt9(r.std) + "," + std::to_string(r.n) + "\n";
  }
  return out;
}

void export_csv(const std::vector<ErrorReport>& reports, const std::filesystem::path& path) {
  const std::string text = format_csv(reports);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<ErrorReport> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw Error(ErrorCode::kCorrupt, "csv: missing or unexpected header");
  std::vector<ErrorReport> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 6) throw Error(ErrorCode::kCorrupt, "csv line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      std::size_t used = 0;
      ErrorReport r;
      r.group = cols[0];
      r.model = cols[1];
      r.horizon = std::stoi(cols[2], &used);
      r.mean = std::stod(cols[3]);
      r.std = std::stod(cols[4]);
      r.n = static_cast<std::size_t>(std::stoull(cols[5]));
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kCorrupt, "csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

std::string reports_to_json(const std::vector<ErrorReport>& reports,
                            const std::map<std::string, std::string>& metadata) {
  json j;
  j["metadata"] = json::object();
  for (const auto& [k, v] : metadata) j["metadata"][k] = v;
  j["reports"] = json::array();
  for (const auto& r : reports)
    j["reports"].push_back({{"group", r.group}, {"model", r.model}, {"horizon", r.horizon},
                            {"mean", r.mean}, {"std", r.std}, {"n", r.n}});
  return j.dump(2) + "\n";
}

std::vector<ErrorReport> reports_from_json(const std::string& text,
                                           std::map<std::string, std::string>* metadata) {
  try {
    const json j = json::parse(text);
    if (metadata) {
      metadata->clear();
      if (j.contains("metadata"))
        for (const auto& [k, v] : j.at("metadata").items()) (*metadata)[k] = v.get<std::string>();
    }
    std::vector<ErrorReport> out;
    for (const auto& r : j.at("reports")) {
      out.push_back({r.at("group").get<std::string>(), r.at("model").get<std::string>(),
                     r.at("horizon").get<int>(), r.at("mean").get<double>(),
                     r.at("std").get<double>(), r.at("n").get<std::size_t>()});
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorrupt, std::string("reports: ") + e.what());
  }
}

}  // namespace bagdyn
