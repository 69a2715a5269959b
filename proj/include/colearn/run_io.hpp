#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "colearn/errors.hpp"
#include "colearn/experiment_config.hpp"
#include "colearn/orchestrator.hpp"

namespace colearn {

namespace detail {

// 9 significant digits for trajectory-scale files
inline void append_g9(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

}  // namespace detail

// trajectory.csv: one row per recorded iteration with the consensus, the
// per-agent estimates/scores/weights, and the step mixture loss.
inline void write_trajectory(const std::string& path, const TrajectoryRecord& record, int param_dim,
                             int agent_count) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::string line = "n,tau";
  for (int j = 1; j <= param_dim; ++j) line += ",theta_bar_" + std::to_string(j);
  for (int k = 1; k <= agent_count; ++k) {
    const std::string tag = "agent" + std::to_string(k);
    for (int j = 1; j <= param_dim; ++j) line += "," + tag + "_theta_" + std::to_string(j);
    line += "," + tag + "_rho," + tag + "_pi";
  }
  line += ",loss\n";
  out << line;

  for (const TrajectoryStep& row : record.steps) {
    line = std::to_string(row.n);
    line += ',';
    detail::append_g9(line, row.tau);
    for (double v : row.theta_bar) {
      line += ',';
      detail::append_g9(line, v);
    }
    for (int k = 0; k < agent_count; ++k) {
      for (double v : row.theta[static_cast<std::size_t>(k)]) {
        line += ',';
        detail::append_g9(line, v);
      }
      line += ',';
      detail::append_g9(line, row.rho[static_cast<std::size_t>(k)]);
      line += ',';
      detail::append_g9(line, row.pi[static_cast<std::size_t>(k)]);
    }
    line += ',';
    detail::append_g9(line, row.step_loss);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// summary.json: final estimate, loss accounting, termination, and the full
// config echo needed to reproduce the run.
inline void write_summary(const std::string& path, const TrajectoryRecord& record,
                          const ExperimentConfig& config) {
  nlohmann::json j;
  j["theta_star"] = record.final_theta_bar;
  j["cumulative_loss"] = record.cumulative_loss;
  j["bound"] = record.bound;
  j["terminated_by"] = to_string(record.terminated_by);
  j["steps_executed"] = record.steps_executed;
  j["seed"] = config.run.seed;
  j["final_alpha"] = record.final_alpha;
  j["final_log_scale"] = record.final_log_scale;
  j["config"] = serialize_experiment_config(config);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

// fit_curve.csv: data points next to the model curve at the final estimate.
inline void write_fit_curve(const std::string& path, const ModelSpec& model,
                            const std::vector<double>& theta_star, const Dataset& source) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "t,model,observed\n";
  std::string line;
  for (const DataPoint& pt : source.points) {
    line.clear();
    detail::append_g9(line, pt.x);
    line += ',';
    detail::append_g9(line, model.predict(theta_star, pt.x));
    line += ',';
    detail::append_g9(line, pt.y);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// estimates.csv: evolution of the consensus estimate over recorded steps.
inline void write_estimates(const std::string& path, const TrajectoryRecord& record, int param_dim) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::string line = "n";
  for (int j = 1; j <= param_dim; ++j) line += ",theta_bar_" + std::to_string(j);
  line += '\n';
  out << line;
  for (const TrajectoryStep& row : record.steps) {
    line = std::to_string(row.n);
    for (double v : row.theta_bar) {
      line += ',';
      detail::append_g9(line, v);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct SummaryFile {
  std::vector<double> theta_star;
  double cumulative_loss = 0.0;
  double bound = 0.0;
  std::string terminated_by;
  long steps_executed = 0;
  std::uint64_t seed = 0;
  std::string config_text;
};

inline SummaryFile read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open summary: " + path);
  nlohmann::json j;
  try {
    in >> j;
    SummaryFile s;
    s.theta_star = j.at("theta_star").get<std::vector<double>>();
    s.cumulative_loss = j.at("cumulative_loss").get<double>();
    s.bound = j.at("bound").get<double>();
    s.terminated_by = j.at("terminated_by").get<std::string>();
    s.steps_executed = j.at("steps_executed").get<long>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config_text = j.at("config").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Reads the loss column back out of trajectory.csv.
inline std::vector<double> read_trajectory_losses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trajectory: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty trajectory", 1);
  std::size_t loss_column = 0;
  {
    std::istringstream header(line);
    std::string cell;
    std::size_t index = 0;
    bool found = false;
    while (std::getline(header, cell, ',')) {
      if (detail::trim(cell) == "loss") {
        loss_column = index;
        found = true;
      }
      ++index;
    }
    if (!found) throw ParseError(path + ": no loss column", 1);
  }
  std::vector<double> losses;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::size_t index = 0;
    bool found = false;
    while (std::getline(cells, cell, ',')) {
      if (index == loss_column) {
        double v;
        if (!detail::parse_double(cell, v)) {
          throw ParseError(path + ": row " + std::to_string(row) + ": bad loss value", row);
        }
        losses.push_back(v);
        found = true;
      }
      ++index;
    }
    if (!found) throw ParseError(path + ": row " + std::to_string(row) + ": short row", row);
  }
  return losses;
}

}  // namespace colearn
