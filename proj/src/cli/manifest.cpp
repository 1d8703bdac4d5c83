#include "adjwalk/cli/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adjwalk/error.hpp"

namespace adjwalk::cli {

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }

template <class T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    usage(std::string("manifest field '") + key + "': " + e.what());
  }
}

}  // namespace

Regime parse_regime(const std::string& text) {
  if (text == "fixed") return Regime::Fixed;
  if (text == "vanishing") return Regime::Vanishing;
  usage("regime must be 'fixed' or 'vanishing', got '" + text + "'");
}

std::vector<SweepEntry> parse_schedule(const std::string& text) {
  std::vector<SweepEntry> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = item.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) usage("schedule entries look like N:lambda:regime");
    SweepEntry e;
    try {
      e.N = std::stoi(item.substr(0, a));
      e.lambda = std::stod(item.substr(a + 1, b - a - 1));
    } catch (const std::exception&) {
      usage("cannot parse schedule entry '" + item + "'");
    }
    e.regime = parse_regime(item.substr(b + 1));
    out.push_back(e);
  }
  return out;
}

nlohmann::ordered_json to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["experiment"] = m.experiment;
  j["n"] = m.n;
  j["lambda"] = m.lambda;
  j["alpha1"] = m.alpha1;
  j["times"] = m.times;
  j["t"] = m.t;
  j["t_max"] = m.t_max;
  j["burn_in"] = m.burn_in;
  j["trajectories"] = m.trajectories;
  j["pilot_trajectories"] = m.pilot_trajectories;
  j["seed"] = m.seed;
  j["epsilon"] = m.epsilon;
  j["eps_x"] = m.eps_x;
  j["sites"] = m.sites;
  j["start"] = m.start;
  j["lower_start"] = m.lower_start;
  j["chooser"] = m.chooser;
  auto sched = nlohmann::ordered_json::array();
  for (const SweepEntry& e : m.schedule) {
    nlohmann::ordered_json row;
    row["n"] = e.N;
    row["lambda"] = e.lambda;
    row["regime"] = to_string(e.regime);
    sched.push_back(row);
  }
  j["schedule"] = sched;
  j["tolerance"] = m.tolerance ? nlohmann::ordered_json(*m.tolerance) : nlohmann::ordered_json(nullptr);
  j["output_dir"] = m.output_dir;
  j["tool_version"] = m.tool_version;
  return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) usage("manifest must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "n",     "lambda",      "alpha1",  "times",    "t",         "t_max",
      "burn_in",    "trajectories", "pilot_trajectories", "seed", "epsilon", "eps_x", "sites",
      "start",      "lower_start",  "chooser", "schedule", "tolerance", "output_dir", "tool_version"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) usage("unknown manifest field '" + key + "'");
  Manifest m;
  read(j, "experiment", m.experiment);
  read(j, "n", m.n);
  read(j, "lambda", m.lambda);
  read(j, "alpha1", m.alpha1);
  read(j, "times", m.times);
  read(j, "t", m.t);
  read(j, "t_max", m.t_max);
  read(j, "burn_in", m.burn_in);
  read(j, "trajectories", m.trajectories);
  read(j, "pilot_trajectories", m.pilot_trajectories);
  read(j, "seed", m.seed);
  read(j, "epsilon", m.epsilon);
  read(j, "eps_x", m.eps_x);
  read(j, "sites", m.sites);
  read(j, "start", m.start);
  read(j, "lower_start", m.lower_start);
  read(j, "chooser", m.chooser);
  read(j, "output_dir", m.output_dir);
  read(j, "tool_version", m.tool_version);
  if (j.contains("tolerance") && !j.at("tolerance").is_null()) {
    double tol = 0.0;
    read(j, "tolerance", tol);
    m.tolerance = tol;
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (!s.is_array()) usage("schedule must be an array");
    for (const auto& row : s) {
      SweepEntry e;
      std::string regime = "vanishing";
      read(row, "n", e.N);
      read(row, "lambda", e.lambda);
      read(row, "regime", regime);
      e.regime = parse_regime(regime);
      m.schedule.push_back(e);
    }
  }
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) usage("cannot open manifest '" + path + "'");
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    usage("manifest '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string manifest_hash(const Manifest& m) {
  nlohmann::ordered_json j = to_json(m);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool naive_regime(int N, double lambda) { return lambda * N >= 20.0; }

bool transformed_regime(int N, double lambda) { return lambda >= 4.0 * std::log(static_cast<double>(N)) / N; }

}  // namespace adjwalk::cli
