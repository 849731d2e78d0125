// src/config.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/config.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rtfdoa {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// section -> allowed keys
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"room",
       {"dims", "rt60", "mic_spacing", "range", "fs", "snr_db", "duration_s",
        "source", "tone_hz", "max_order"}},
      {"grid", {"min_deg", "max_deg", "count", "angles"}},
      {"stft", {"n_fft", "seq_len"}},
      {"train",
       {"j", "alpha", "lr", "batch", "epochs", "seed", "latent_dim",
        "likelihood"}},
      {"eval", {"splits", "n_off", "off_range_m"}},
      {"paths", {"cache", "checkpoints", "reports"}},
  };
  return kSchema;
}

double parse_real(const std::string& where, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: " + where + " is not a number: " + v);
}

long parse_integer(const std::string& where, const std::string& v) {
  try {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: " + where + " is not an integer: " + v);
}

uint64_t parse_u64(const std::string& where, const std::string& v) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: " + where +
                              " is not an unsigned integer: " + v);
}

std::vector<double> parse_real_list(const std::string& where,
                                    const std::string& v) {
  std::string s = v;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::stringstream ss(s);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_real(where, tok));
  if (out.empty()) {
    throw std::invalid_argument("config: " + where + " is empty");
  }
  return out;
}

void apply_key(RunConfig* c, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string where = section + "." + key;
  if (section == "room") {
    if (key == "dims") {
      const std::vector<double> d = parse_real_list(where, value);
      if (d.size() != 3) {
        throw std::invalid_argument("config: room.dims needs 3 values");
      }
      c->room.dims = {d[0], d[1], d[2]};
    } else if (key == "rt60") {
      c->room.rt60 = parse_real(where, value);
    } else if (key == "mic_spacing") {
      c->room.mic_spacing = parse_real(where, value);
    } else if (key == "range") {
      c->room.range = parse_real(where, value);
    } else if (key == "fs") {
      c->room.fs = parse_real(where, value);
    } else if (key == "snr_db") {
      c->room.snr_db = value == "inf" ? std::numeric_limits<double>::infinity()
                                      : parse_real(where, value);
    } else if (key == "duration_s") {
      c->room.duration_s = parse_real(where, value);
    } else if (key == "source") {
      c->room.source = value;
    } else if (key == "tone_hz") {
      c->room.tone_hz = parse_real(where, value);
    } else if (key == "max_order") {
      c->room.max_order = static_cast<int>(parse_integer(where, value));
    }
  } else if (section == "grid") {
    if (key == "min_deg") {
      c->grid.min_deg = parse_real(where, value);
    } else if (key == "max_deg") {
      c->grid.max_deg = parse_real(where, value);
    } else if (key == "count") {
      c->grid.count = static_cast<int>(parse_integer(where, value));
    } else if (key == "angles") {
      c->grid.angles = parse_real_list(where, value);
    }
  } else if (section == "stft") {
    if (key == "n_fft") {
      c->stft.n_fft = static_cast<int>(parse_integer(where, value));
    } else if (key == "seq_len") {
      c->stft.seq_len = static_cast<int>(parse_integer(where, value));
    }
  } else if (section == "train") {
    if (key == "j") {
      c->train.j_labeled = static_cast<int>(parse_integer(where, value));
    } else if (key == "alpha") {
      c->train.alpha = parse_real(where, value);
    } else if (key == "lr") {
      c->train.lr = parse_real(where, value);
    } else if (key == "batch") {
      c->train.batch = static_cast<int>(parse_integer(where, value));
    } else if (key == "epochs") {
      c->train.epochs = static_cast<int>(parse_integer(where, value));
    } else if (key == "seed") {
      c->train.seed = parse_u64(where, value);
    } else if (key == "latent_dim") {
      c->train.latent_dim = static_cast<int>(parse_integer(where, value));
    } else if (key == "likelihood") {
      c->train.likelihood = value;
    }
  } else if (section == "eval") {
    if (key == "splits") {
      c->eval.splits = value;
    } else if (key == "n_off") {
      c->eval.n_off = static_cast<int>(parse_integer(where, value));
    } else if (key == "off_range_m") {
      c->eval.off_range_m = parse_real(where, value);
    }
  } else if (section == "paths") {
    if (key == "cache") {
      c->paths.cache = value;
    } else if (key == "checkpoints") {
      c->paths.checkpoints = value;
    } else if (key == "reports") {
      c->paths.reports = value;
    }
  }
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (schema().find(section) == schema().end()) {
        throw std::invalid_argument("config: unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(lineno));
    }
    if (section.empty()) {
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::set<std::string>& allowed = schema().at(section);
    if (allowed.find(key) == allowed.end()) {
      throw std::invalid_argument("config: unknown key " + section + "." + key);
    }
    apply_key(&config, section, key, value);
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  RunConfig config = parse_config_text(buf.str());
  if (const char* env = std::getenv("RTFDOA_CACHE")) {
    if (env[0] != '\0') config.paths.cache = env;
  }
  return config;
}

void validate_config(const RunConfig& config) {
  const RoomSection& r = config.room;
  for (double d : r.dims) {
    if (d <= 0.0) throw std::invalid_argument("config: room.dims must be positive");
  }
  if (r.rt60 < 0.0) throw std::invalid_argument("config: room.rt60 must be >= 0");
  if (r.mic_spacing <= 0.0) {
    throw std::invalid_argument("config: room.mic_spacing must be positive");
  }
  if (r.range <= 0.0) throw std::invalid_argument("config: room.range must be positive");
  if (r.fs <= 0.0) throw std::invalid_argument("config: room.fs must be positive");
  if (r.duration_s <= 0.0) {
    throw std::invalid_argument("config: room.duration_s must be positive");
  }
  if (r.source != "speech" && r.source != "white" && r.source != "tone") {
    throw std::invalid_argument(
        "config: room.source must be speech, white, or tone");
  }
  if (r.max_order < 0) {
    throw std::invalid_argument("config: room.max_order must be >= 0");
  }
  if (!power_of_two(config.stft.n_fft)) {
    throw std::invalid_argument("config: stft.n_fft must be a power of two");
  }
  if (config.stft.seq_len < 1) {
    throw std::invalid_argument("config: stft.seq_len must be >= 1");
  }
  const DoaGrid grid = config_grid(config);
  grid.validate();
  const TrainSection& t = config.train;
  if (t.j_labeled < 1 || t.j_labeled % grid.t_count() != 0) {
    throw std::invalid_argument(
        "config: train.j must be a positive multiple of the grid size");
  }
  if (t.lr <= 0.0) throw std::invalid_argument("config: train.lr must be positive");
  if (t.batch < 1) throw std::invalid_argument("config: train.batch must be >= 1");
  if (t.epochs < 1) throw std::invalid_argument("config: train.epochs must be >= 1");
  if (t.latent_dim < 1) {
    throw std::invalid_argument("config: train.latent_dim must be >= 1");
  }
  if (t.likelihood != "truncated_normal" && t.likelihood != "normal") {
    throw std::invalid_argument(
        "config: train.likelihood must be truncated_normal or normal");
  }
  std::stringstream ss(config.eval.splits);
  std::string split;
  while (std::getline(ss, split, ',')) {
    split = trim(split);
    if (split.empty()) continue;
    if (split != "train-unlabeled" && split != "validation" &&
        split != "off-grid" && split != "off-range") {
      throw std::invalid_argument("config: eval.splits has unknown split " +
                                  split);
    }
  }
  if (config.eval.n_off < 1) {
    throw std::invalid_argument("config: eval.n_off must be >= 1");
  }
  if (config.eval.off_range_m <= 0.0) {
    throw std::invalid_argument("config: eval.off_range_m must be positive");
  }
}

DoaGrid config_grid(const RunConfig& config) {
  if (!config.grid.angles.empty()) {
    DoaGrid g;
    g.angles_deg = config.grid.angles;
    return g;
  }
  return make_uniform_grid(config.grid.min_deg, config.grid.max_deg,
                           config.grid.count);
}

namespace {

void append_kv(std::string* out, const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  *out += key;
  *out += '=';
  *out += buf;
  *out += '\n';
}

void append_kv(std::string* out, const std::string& key, const std::string& v) {
  *out += key;
  *out += '=';
  *out += v;
  *out += '\n';
}

std::string sim_text(const RunConfig& c) {
  std::string s;
  append_kv(&s, "room.dims.x", c.room.dims[0]);
  append_kv(&s, "room.dims.y", c.room.dims[1]);
  append_kv(&s, "room.dims.z", c.room.dims[2]);
  append_kv(&s, "room.rt60", c.room.rt60);
  append_kv(&s, "room.mic_spacing", c.room.mic_spacing);
  append_kv(&s, "room.range", c.room.range);
  append_kv(&s, "room.fs", c.room.fs);
  append_kv(&s, "room.snr_db", c.room.snr_db);
  append_kv(&s, "room.duration_s", c.room.duration_s);
  append_kv(&s, "room.source", c.room.source);
  append_kv(&s, "room.tone_hz", c.room.tone_hz);
  append_kv(&s, "room.max_order", static_cast<double>(c.room.max_order));
  const DoaGrid grid = config_grid(c);
  std::string angles;
  char buf[64];
  for (size_t i = 0; i < grid.angles_deg.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.angles_deg[i]);
    if (i) angles += ',';
    angles += buf;
  }
  append_kv(&s, "grid.angles", angles);
  append_kv(&s, "sim.seed", static_cast<double>(c.train.seed));
  return s;
}

}  // namespace

std::string canonical_sim_text(const RunConfig& config) {
  return sim_text(config);
}

std::string canonical_dataset_text(const RunConfig& config) {
  std::string s = sim_text(config);
  append_kv(&s, "stft.n_fft", static_cast<double>(config.stft.n_fft));
  append_kv(&s, "stft.seq_len", static_cast<double>(config.stft.seq_len));
  append_kv(&s, "train.j", static_cast<double>(config.train.j_labeled));
  append_kv(&s, "train.seed", static_cast<double>(config.train.seed));
  return s;
}

std::string canonical_train_text(const RunConfig& config) {
  std::string s = canonical_dataset_text(config);
  append_kv(&s, "train.alpha", config.train.alpha);
  append_kv(&s, "train.lr", config.train.lr);
  append_kv(&s, "train.batch", static_cast<double>(config.train.batch));
  append_kv(&s, "train.epochs", static_cast<double>(config.train.epochs));
  append_kv(&s, "train.latent_dim",
            static_cast<double>(config.train.latent_dim));
  append_kv(&s, "train.likelihood", config.train.likelihood);
  return s;
}

uint64_t fnv1a_hash(const std::string& text) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const std::string& text) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(text)));
  return buf;
}

}  // namespace rtfdoa
