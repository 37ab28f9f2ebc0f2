#include "stlplan/lfd/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stlplan/error.hpp"
#include "stlplan/io/csv.hpp"

namespace stlplan::lfd {

using nlohmann::json;

Demonstration read_demonstration_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  const auto t = table.column("t");
  const auto x = table.column("x");
  const auto y = table.column("y");
  const auto a = table.column("alpha");
  if (t.size() < 2) throw IoError(path.string() + ": a demonstration needs at least 2 rows");
  Demonstration demo;
  demo.dt = t[1] - t[0];
  if (!(demo.dt > 0.0)) throw IoError(path.string() + ": t column must be increasing");
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double step = t[i] - t[i - 1];
    if (std::fabs(step - demo.dt) > 1e-6 * std::max(1.0, demo.dt)) {
      throw IoError(path.string() + ":" + std::to_string(i + 2) + ": non-uniform t spacing");
    }
  }
  demo.states.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) demo.states.push_back({x[i], y[i], wrap_angle(a[i])});
  return demo;
}

void write_demonstration_csv(const std::filesystem::path& path, const Demonstration& demo) {
  io::CsvWriter w(path, {"t", "x", "y", "alpha"});
  for (std::size_t i = 0; i < demo.states.size(); ++i) {
    const auto& s = demo.states[i];
    w.row({static_cast<double>(i) * demo.dt, s.x, s.y, s.alpha});
  }
}

std::vector<Demonstration> read_demonstration_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError(dir.string() + ": no demonstration CSV files");
  std::vector<Demonstration> demos;
  for (const auto& f : files) demos.push_back(read_demonstration_csv(f));
  return demos;
}

std::string model_to_json(const HsmmModel& model) {
  json j;
  j["K"] = model.K;
  j["dt"] = model.dt;
  json trans = json::array();
  for (int r = 0; r < model.K; ++r) {
    json row = json::array();
    for (int c = 0; c < model.K; ++c) row.push_back(model.trans(r, c));
    trans.push_back(row);
  }
  j["trans"] = trans;
  json means = json::array();
  json covs = json::array();
  for (int k = 0; k < model.K; ++k) {
    means.push_back({model.means[k](0), model.means[k](1), model.means[k](2)});
    json cov = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cov.push_back(model.covs[k](r, c));
    }
    covs.push_back(cov);
  }
  j["means"] = means;
  j["covs"] = covs;
  j["dur_mean"] = model.dur_mean;
  j["dur_var"] = model.dur_var;
  json times = json::array();
  for (double t : model.component_times) times.push_back(std::isfinite(t) ? json(t) : json(nullptr));
  j["component_times"] = times;
  return j.dump(2) + "\n";
}

HsmmModel model_from_json(const std::string& text) {
  HsmmModel m;
  try {
    const json j = json::parse(text);
    m.K = j.at("K").get<int>();
    m.dt = j.at("dt").get<double>();
    if (m.K < 1) throw IoError("model K must be positive");
    const auto k = static_cast<std::size_t>(m.K);
    const auto& trans = j.at("trans");
    if (trans.size() != k) throw IoError("model trans has wrong number of rows");
    m.trans.resize(m.K, m.K);
    for (int r = 0; r < m.K; ++r) {
      if (trans[r].size() != k) throw IoError("model trans row has wrong length");
      for (int c = 0; c < m.K; ++c) m.trans(r, c) = trans[r][c].get<double>();
    }
    const auto& means = j.at("means");
    const auto& covs = j.at("covs");
    if (means.size() != k || covs.size() != k) throw IoError("model means/covs disagree with K");
    for (std::size_t i = 0; i < k; ++i) {
      if (means[i].size() != 3 || covs[i].size() != 9) throw IoError("model mean/cov has wrong size");
      m.means.emplace_back(means[i][0].get<double>(), means[i][1].get<double>(), means[i][2].get<double>());
      Eigen::Matrix3d c;
      for (int r = 0; r < 3; ++r) {
        for (int q = 0; q < 3; ++q) c(r, q) = covs[i][3 * r + q].get<double>();
      }
      m.covs.push_back(c);
    }
    m.dur_mean = j.at("dur_mean").get<std::vector<double>>();
    m.dur_var = j.at("dur_var").get<std::vector<double>>();
    if (j.contains("component_times")) {
      for (const auto& t : j.at("component_times")) {
        m.component_times.push_back(t.is_null() ? std::numeric_limits<double>::quiet_NaN() : t.get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

void write_model(const std::filesystem::path& path, const HsmmModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << model_to_json(model);
}

HsmmModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace stlplan::lfd
