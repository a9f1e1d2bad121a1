#include "gaitattn/trial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace fs = std::filesystem;

namespace gaitattn {

namespace {

std::string expected_header() {
  std::string h = "t";
  for (const char* s : kSensorNames)
    for (const char* c : kChannelNames) {
      h += ',';
      h += s;
      h += '_';
      h += c;
    }
  return h;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& path) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(path + ": non-numeric cell at row " + std::to_string(row) +
                     ", column " + std::to_string(col) + ": '" + cell + "'");
  if (!std::isfinite(v))
    throw ParseError(path + ": non-finite value at row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  return v;
}

}  // namespace

void SensorTrial::validate() const {
  if (!signal.defined() || signal.ndim() != 3 || signal.dim(0) != kNumSensors ||
      signal.dim(1) != kNumChannels)
    throw ShapeError("trial '" + trial_id + "': signal must be [4, 9, T]");
  if (signal.dim(2) < kMinTrialLen)
    throw InputTooShortError("trial '" + trial_id + "': length " +
                             std::to_string(signal.dim(2)) + " below minimum " +
                             std::to_string(kMinTrialLen));
  if (label != 0 && label != 1)
    throw ConfigError("trial '" + trial_id + "': label must be 0 or 1");
  if (!signal.all_finite())
    throw ParseError("trial '" + trial_id + "': non-finite sample");
}

void save_trial_csv(const SensorTrial& trial, const std::string& path) {
  trial.validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open trial file for writing: " + path);
  os << expected_header() << '\n';
  const int t_len = trial.length();
  const double* sig = trial.signal.data();
  const std::size_t plane = static_cast<std::size_t>(kNumChannels) * t_len;
  char buf[40];
  for (int t = 0; t < t_len; ++t) {
    os << t;
    for (int s = 0; s < kNumSensors; ++s)
      for (int c = 0; c < kNumChannels; ++c) {
        std::snprintf(buf, sizeof(buf), ",%.17g",
                      sig[s * plane + static_cast<std::size_t>(c) * t_len + t]);
        os << buf;
      }
    os << '\n';
  }
  if (!os) throw IoError("write failure on trial file: " + path);
}

SensorTrial load_trial(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open trial file: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header())
    throw ParseError(path + ": malformed header; expected '" + expected_header() + "'");

  constexpr int kCols = kNumSensors * kNumChannels;
  std::vector<std::array<double, kCols>> rows;
  std::size_t row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, kCols> row;
    std::size_t pos = 0, col = 0;
    int data_col = -1;  // first field is the sample index
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - pos);
      if (data_col >= kCols)
        throw ParseError(path + ": row " + std::to_string(row_no) + " has extra columns; expected " +
                         std::to_string(kCols) + " data columns");
      const double v = parse_cell(cell, row_no, col, path);
      if (data_col >= 0) row[static_cast<std::size_t>(data_col)] = v;
      ++data_col;
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (data_col != kCols)
      throw ParseError(path + ": row " + std::to_string(row_no) + " has " +
                       std::to_string(data_col) + " data columns; expected " +
                       std::to_string(kCols) + " data columns");
    rows.push_back(row);
  }
  const int t_len = static_cast<int>(rows.size());
  if (t_len < kMinTrialLen)
    throw InputTooShortError(path + ": " + std::to_string(t_len) +
                             " samples; trials need at least " +
                             std::to_string(kMinTrialLen));

  std::vector<double> sig(static_cast<std::size_t>(kNumSensors) * kNumChannels * t_len);
  const std::size_t plane = static_cast<std::size_t>(kNumChannels) * t_len;
  for (int t = 0; t < t_len; ++t)
    for (int s = 0; s < kNumSensors; ++s)
      for (int c = 0; c < kNumChannels; ++c)
        sig[s * plane + static_cast<std::size_t>(c) * t_len + t] =
            rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(s * kNumChannels + c)];

  SensorTrial trial;
  trial.trial_id = fs::path(path).stem().string();
  trial.signal = Tensor::from_data({kNumSensors, kNumChannels, t_len}, std::move(sig));
  return trial;
}

void Manifest::validate() const {
  std::set<std::string> ids;
  for (const auto& e : trials) {
    if (!ids.insert(e.trial_id).second)
      throw ParseError("manifest: duplicate trial_id '" + e.trial_id + "'");
    if (e.label != 0 && e.label != 1)
      throw ParseError("manifest: trial '" + e.trial_id + "' has label " +
                       std::to_string(e.label));
  }
}

void save_manifest(const Manifest& m, const std::string& path) {
  nlohmann::json j;
  j["task"] = m.task;
  j["sensors"] = m.sensors;
  j["channels"] = m.channels;
  auto arr = nlohmann::json::array();
  for (const auto& e : m.trials)
    arr.push_back(nlohmann::json{{"trial_id", e.trial_id},
                                 {"patient_id", e.patient_id},
                                 {"label", e.label},
                                 {"cohort", e.cohort},
                                 {"path", e.path}});
  j["trials"] = arr;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open manifest for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failure on manifest: " + path);
}

Manifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ParseError("manifest " + path + ": " + e.what());
  }
  Manifest m;
  try {
    m.task = j.at("task").get<std::string>();
    m.sensors = j.at("sensors").get<std::vector<std::string>>();
    m.channels = j.at("channels").get<std::vector<std::string>>();
    for (const auto& e : j.at("trials")) {
      ManifestEntry me;
      me.trial_id = e.at("trial_id").get<std::string>();
      me.patient_id = e.at("patient_id").get<std::string>();
      me.label = e.at("label").get<int>();
      me.cohort = e.at("cohort").get<std::string>();
      me.path = e.at("path").get<std::string>();
      m.trials.push_back(std::move(me));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path + ": " + e.what());
  }
  m.base_dir = fs::path(path).parent_path().string();
  m.validate();
  return m;
}

std::vector<SensorTrial> load_all_trials(const Manifest& m) {
  std::vector<SensorTrial> out;
  out.reserve(m.trials.size());
  for (const auto& e : m.trials) {
    const fs::path p = m.base_dir.empty() ? fs::path(e.path)
                                          : fs::path(m.base_dir) / e.path;
    SensorTrial t = load_trial(p.string());
    t.trial_id = e.trial_id;
    t.patient_id = e.patient_id;
    t.label = e.label;
    t.cohort = e.cohort;
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace gaitattn
