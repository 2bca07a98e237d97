#include "kgrumor/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kgrumor {
namespace pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: bad boolean value '" + v + "'");
}

template <typename T>
T parse_num(const std::string& v) {
  std::istringstream ss(v);
  T out;
  ss >> out;
  if (!ss || !(ss >> std::ws).eof()) throw std::runtime_error("config: bad numeric value '" + v + "'");
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (d < 1 || d_e < 1 || dictionary_size < 1 || k < 1 || hop_cap < 1 || heads < 1 || batch < 1 ||
      epochs < 1)
    throw std::runtime_error("config: sizes and counts must be positive");
  if (d % heads != 0) throw std::runtime_error("config: d must be divisible by heads");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::runtime_error("config: alpha must be in (0,1)");
  if (lr < 0.0) throw std::runtime_error("config: negative learning rate");
}

void apply_config_value(const std::string& key, const std::string& value, RunConfig& c) {
  if (key == "triples_path") c.triples_path = value;
  else if (key == "embeddings_path") c.embeddings_path = value;
  else if (key == "posts_path") c.posts_path = value;
  else if (key == "d") c.d = parse_num<int>(value);
  else if (key == "d_e") c.d_e = parse_num<int>(value);
  else if (key == "M") c.dictionary_size = parse_num<int>(value);
  else if (key == "k") c.k = parse_num<int>(value);
  else if (key == "alpha") c.alpha = parse_num<double>(value);
  else if (key == "hop_cap") c.hop_cap = parse_num<int>(value);
  else if (key == "heads") c.heads = parse_num<int>(value);
  else if (key == "lr") c.lr = parse_num<double>(value);
  else if (key == "batch") c.batch = parse_num<int>(value);
  else if (key == "epochs") c.epochs = parse_num<int>(value);
  else if (key == "seed") c.seed = parse_num<std::uint64_t>(value);
  else if (key == "disable_bsc") c.disable_bsc = parse_bool(value);
  else if (key == "disable_kec") c.disable_kec = parse_bool(value);
  else if (key == "disable_align") c.disable_align = parse_bool(value);
  else if (key == "disable_se_i") c.disable_se_i = parse_bool(value);
  else if (key == "disable_se_c") c.disable_se_c = parse_bool(value);
  else if (key == "disable_e_i") c.disable_e_i = parse_bool(value);
  else if (key == "disable_e_c") c.disable_e_c = parse_bool(value);
  else if (key == "disable_path") c.disable_path = parse_bool(value);
  else throw std::runtime_error("config: unknown key '" + key + "'");
}

void apply_config_file(const std::string& path, RunConfig& into) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' at line " + std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key at line " + std::to_string(line_no));
    apply_config_value(key, value, into);
  }
}

std::string config_to_json(const RunConfig& c, double resolved_d_max, int d_raw) {
  nlohmann::json j;
  j["triples_path"] = c.triples_path;
  j["embeddings_path"] = c.embeddings_path;
  j["posts_path"] = c.posts_path;
  j["d"] = c.d;
  j["d_e"] = c.d_e;
  j["M"] = c.dictionary_size;
  j["k"] = c.k;
  j["alpha"] = c.alpha;
  j["hop_cap"] = c.hop_cap;
  j["heads"] = c.heads;
  j["lr"] = c.lr;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["disable_bsc"] = c.disable_bsc;
  j["disable_kec"] = c.disable_kec;
  j["disable_align"] = c.disable_align;
  j["disable_se_i"] = c.disable_se_i;
  j["disable_se_c"] = c.disable_se_c;
  j["disable_e_i"] = c.disable_e_i;
  j["disable_e_c"] = c.disable_e_c;
  j["disable_path"] = c.disable_path;
  j["d_max"] = resolved_d_max;
  j["d_raw"] = d_raw;
  return j.dump(2);
}

}  // namespace pipeline
}  // namespace kgrumor
