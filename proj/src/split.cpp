#include "gaitattn/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace gaitattn {

const std::vector<std::string>& SplitManifest::split(int i) const {
  switch (i) {
    case 0: return train;
    case 1: return val;
    default: return test;
  }
}

bool SplitManifest::contains(const std::string& split_name,
                             const std::string& patient_id) const {
  const std::vector<std::string>* v = nullptr;
  if (split_name == "train") v = &train;
  else if (split_name == "val") v = &val;
  else if (split_name == "test") v = &test;
  else throw ConfigError("unknown split name: '" + split_name + "'");
  return std::find(v->begin(), v->end(), patient_id) != v->end();
}

std::vector<ManifestEntry> SplitManifest::trials_of(const Manifest& m,
                                                    const std::string& split_name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : m.trials)
    if (contains(split_name, e.patient_id)) out.push_back(e);
  return out;
}

namespace {

// Largest-remainder apportionment of n into three parts. Ties in the
// remainder go to the split with the largest global deficit (its overall
// quota minus what it has been assigned across earlier classes), then to
// the earlier split.
std::array<int, 3> apportion(int n, const std::array<double, 3>& ratios,
                             const std::array<double, 3>& global_quota,
                             const std::array<int, 3>& assigned_so_far) {
  std::array<int, 3> base;
  std::array<double, 3> rem;
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    const double q = n * ratios[static_cast<std::size_t>(i)];
    base[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(q));
    rem[static_cast<std::size_t>(i)] = q - base[static_cast<std::size_t>(i)];
    used += base[static_cast<std::size_t>(i)];
  }
  int left = n - used;
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (rem[static_cast<std::size_t>(a)] != rem[static_cast<std::size_t>(b)])
      return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)];
    const double da = global_quota[static_cast<std::size_t>(a)] -
                      (assigned_so_far[static_cast<std::size_t>(a)] +
                       base[static_cast<std::size_t>(a)]);
    const double db = global_quota[static_cast<std::size_t>(b)] -
                      (assigned_so_far[static_cast<std::size_t>(b)] +
                       base[static_cast<std::size_t>(b)]);
    if (da != db) return da > db;
    return a < b;
  });
  for (int i = 0; i < left; ++i) ++base[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  return base;
}

}  // namespace

SplitManifest split_patients(const Manifest& manifest,
                             const std::array<double, 3>& ratios,
                             std::uint64_t seed, bool stratified) {
  double rsum = 0.0;
  for (double r : ratios) {
    if (r <= 0.0) throw ConfigError("split: ratios must be positive");
    rsum += r;
  }
  if (std::abs(rsum - 1.0) > 1e-9)
    throw ConfigError("split: ratios must sum to 1");

  // Patient -> label, in first-seen order; label taken from the first trial.
  std::map<std::string, int> patient_label;
  for (const auto& e : manifest.trials) patient_label.emplace(e.patient_id, e.label);
  if (patient_label.empty()) throw ConfigError("split: manifest has no trials");

  int n_pos = 0, n_neg = 0;
  for (const auto& [pid, lab] : patient_label) (lab == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw DegenerateTaskError("split: need at least one patient per class, have " +
                              std::to_string(n_pos) + " positive / " +
                              std::to_string(n_neg) + " negative");

  SplitManifest out;
  out.seed = seed;
  out.ratios = ratios;

  const int total = static_cast<int>(patient_label.size());
  std::array<double, 3> global_quota;
  for (int i = 0; i < 3; ++i)
    global_quota[static_cast<std::size_t>(i)] = total * ratios[static_cast<std::size_t>(i)];

  // Group patients by class (or one group when unstratified), each group
  // sorted lexicographically before the seeded shuffle so the partition
  // depends only on (manifest contents, seed).
  std::vector<std::vector<std::string>> groups;
  if (stratified) {
    groups.resize(2);
    for (const auto& [pid, lab] : patient_label)
      groups[lab == 1 ? 1 : 0].push_back(pid);
  } else {
    groups.resize(1);
    for (const auto& [pid, lab] : patient_label) groups[0].push_back(pid);
  }

  Rng rng(seed);
  std::array<int, 3> assigned = {0, 0, 0};
  for (auto& group : groups) {
    if (group.empty()) continue;
    std::sort(group.begin(), group.end());
    rng.shuffle(group);
    const auto sizes = apportion(static_cast<int>(group.size()), ratios,
                                 global_quota, assigned);
    std::size_t pos = 0;
    for (int si = 0; si < 3; ++si) {
      auto& dst = si == 0 ? out.train : si == 1 ? out.val : out.test;
      for (int k = 0; k < sizes[static_cast<std::size_t>(si)]; ++k)
        dst.push_back(group[pos++]);
      assigned[static_cast<std::size_t>(si)] += sizes[static_cast<std::size_t>(si)];
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());

  // Stratification can be arithmetically impossible on tiny cohorts; that
  // is reported, not silently ignored.
  if (stratified) {
    const char* names[3] = {"train", "val", "test"};
    for (int si = 0; si < 3; ++si) {
      const auto& ids = out.split(si);
      if (ids.empty()) {
        out.warnings.push_back(std::string("split '") + names[si] + "' is empty");
        continue;
      }
      int pos = 0;
      for (const auto& pid : ids) pos += patient_label.at(pid);
      if (pos == 0)
        out.warnings.push_back(std::string("split '") + names[si] +
                               "' has no positive patients");
      if (pos == static_cast<int>(ids.size()))
        out.warnings.push_back(std::string("split '") + names[si] +
                               "' has no negative patients");
    }
  }
  return out;
}

void save_split(const SplitManifest& s, const std::string& path) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["ratios"] = s.ratios;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  j["warnings"] = s.warnings;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open split manifest for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failure on split manifest: " + path);
}

SplitManifest load_split(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open split manifest: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ParseError("split manifest " + path + ": " + e.what());
  }
  SplitManifest s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratios = j.at("ratios").get<std::array<double, 3>>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    if (j.contains("warnings"))
      s.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("split manifest " + path + ": " + e.what());
  }
  std::set<std::string> seen;
  for (int i = 0; i < 3; ++i)
    for (const auto& pid : s.split(i))
      if (!seen.insert(pid).second)
        throw ParseError("split manifest " + path + ": patient '" + pid +
                         "' appears in more than one split");
  return s;
}

}  // namespace gaitattn
