// mobius-like: experiment driver.
//
// Every subcommand resolves a JSON config (defaults, then --config file, then
// flags), runs, and writes CSV or JSON. CSV output starts with a comment line
// carrying the config hash and the resolved config; JSON output carries both
// as fields. Workers and output paths never enter the config, so output bytes
// do not depend on them.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobius_like/mobius_like.hpp"

using nlohmann::json;
using namespace mobius_like;

namespace {

// ---------------------------------------------------------------- numbers

/// Nonnegative integer from "123", "1e8", "2.5e6", "1E+8".
std::uint64_t parse_count(const std::string& text, const std::string& what) {
  static const std::regex re(R"(^\s*\+?([0-9]+)(?:\.([0-9]*))?(?:[eE]\+?([0-9]+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw InvalidArgument(what + ": '" + text + "' is not a nonnegative integer");
  }
  std::string digits = m[1].str();
  std::string frac = m[2].str();
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  const long exp10 = m[3].matched ? std::stol(m[3].str()) : 0;
  if (static_cast<long>(frac.size()) > exp10) {
    throw InvalidArgument(what + ": '" + text + "' is not an integer");
  }
  digits += frac;
  digits.append(static_cast<std::size_t>(exp10 - static_cast<long>(frac.size())), '0');
  unsigned __int128 v = 0;
  for (const char c : digits) {
    v = v * 10 + static_cast<unsigned>(c - '0');
    if (v > std::numeric_limits<std::uint64_t>::max()) {
      throw InvalidArgument(what + ": '" + text + "' is out of range");
    }
  }
  return static_cast<std::uint64_t>(v);
}

std::int64_t parse_signed(const std::string& text, const std::string& what) {
  const auto pos = text.find_first_not_of(" \t");
  if (pos != std::string::npos && text[pos] == '-') {
    const auto v = parse_count(text.substr(pos + 1), what);
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw InvalidArgument(what + ": '" + text + "' is out of range");
    }
    return -static_cast<std::int64_t>(v);
  }
  const auto v = parse_count(text, what);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw InvalidArgument(what + ": '" + text + "' is out of range");
  }
  return static_cast<std::int64_t>(v);
}

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw InvalidArgument(what + ": '" + text + "' is not a number");
  }
  return v;
}

/// Config values may be JSON integers, integral floats or strings like "1e8".
std::uint64_t count_of(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw InvalidArgument(what + " must be >= 0");
    return v.get<std::uint64_t>();
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d >= 0 && d <= 9007199254740992.0) || d != std::floor(d)) {
      throw InvalidArgument(what + " must be an exact integer");
    }
    return static_cast<std::uint64_t>(d);
  }
  if (v.is_string()) return parse_count(v.get<std::string>(), what);
  throw InvalidArgument(what + " must be an integer");
}

std::int64_t signed_of(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) return parse_signed(v.get<std::string>(), what);
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d != std::floor(d) || std::abs(d) > 9007199254740992.0) {
      throw InvalidArgument(what + " must be an exact integer");
    }
    return static_cast<std::int64_t>(d);
  }
  throw InvalidArgument(what + " must be an integer");
}

double real_of(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_real(v.get<std::string>(), what);
  throw InvalidArgument(what + " must be a number");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string config_hash(const json& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- flags

struct Flags {
  std::string config_path;
  std::string output;
  std::optional<unsigned> workers;
  bool dump_config = false;

  std::optional<std::string> discriminant, modulus, table;
  std::vector<std::string> signs;
  std::optional<std::string> function, x_max, segment_size, format;
  std::optional<std::string> points_per_decade, grid_ratio, checkpoints;
  std::optional<std::string> limit_n;                   // verify-identities
  std::vector<std::string> xs;                          // hyperbola
  std::optional<std::string> split, split_u;            // hyperbola
  std::optional<std::string> input, normalizer, normalizer_param, fit_x_min, fit_x_max,
      log_exponent;                                     // growth
  std::optional<std::string> slack, flag_from;          // lemma2
  std::optional<std::string> seed, trials, trial_limit; // random
  std::optional<std::string> rule, delta;               // perturb
};

enum Group : unsigned {
  kCharacter = 1,
  kFunction = 2,
  kRange = 4,
  kFormat = 8,
};

void add_common(CLI::App* sub, Flags& f, unsigned groups) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override it");
  sub->add_option("-o,--output", f.output, "output path (default: standard output)");
  sub->add_option("--workers", f.workers, "worker threads (default: available parallelism)")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--dump-config", f.dump_config, "print the resolved config and exit");
  if (groups & kCharacter) {
    sub->add_option("--discriminant", f.discriminant, "fundamental discriminant of the character");
    sub->add_option("--modulus", f.modulus, "modulus k, with --table");
    sub->add_option("--table", f.table, "character values chi(0),...,chi(k-1), comma separated");
    sub->add_option("--sign", f.signs, "sign of g at a prime dividing k, as p=+1 or p=-1");
  }
  if (groups & kFunction) {
    sub->add_option("--function", f.function, "f | g | mu | chi");
  }
  if (groups & kRange) {
    sub->add_option("--xmax", f.x_max, "largest x (accepts 1e8)");
    sub->add_option("--points-per-decade", f.points_per_decade, "geometric checkpoint grid density");
    sub->add_option("--grid-ratio", f.grid_ratio, "geometric checkpoint grid ratio");
    sub->add_option("--checkpoints", f.checkpoints, "explicit checkpoints, comma separated");
    sub->add_option("--segment-size", f.segment_size, "sieve segment length");
  }
  if (groups & kFormat) {
    sub->add_option("--format", f.format, "csv | json");
  }
}

// ---------------------------------------------------------------- config

const std::set<std::string>& allowed_keys(const std::string& cmd) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"partial-sums", {"character", "signs", "function", "x_max", "grid", "segment_size", "format"}},
      {"verify-identities", {"character", "signs", "N"}},
      {"hyperbola", {"character", "signs", "x", "split", "U", "segment_size"}},
      {"growth",
       {"character", "signs", "function", "x_max", "grid", "segment_size", "format", "input",
        "normalizer", "normalizer_param", "fit_x_min", "fit_x_max", "log_exponent"}},
      {"lemma2", {"character", "signs", "x_max", "grid", "segment_size", "slack", "flag_from"}},
      {"random",
       {"seed", "trials", "x_max", "grid", "segment_size", "fit_x_min", "limit", "format"}},
      {"perturb",
       {"character", "signs", "rule", "delta", "x_max", "grid", "segment_size", "fit_x_min",
        "format"}},
  };
  return keys.at(cmd);
}

json defaults_for(const std::string& cmd) {
  json c = json::object();
  const auto& k = allowed_keys(cmd);
  if (k.count("character")) c["character"] = {{"discriminant", -4}};
  if (k.count("function")) c["function"] = "f";
  if (k.count("x_max")) c["x_max"] = 1'000'000;
  if (k.count("grid")) c["grid"] = {{"kind", "geometric"}, {"points_per_decade", 8}};
  if (k.count("segment_size")) c["segment_size"] = SegmentConfig{}.segment_size;
  if (cmd == "partial-sums" || cmd == "perturb") c["format"] = "csv";
  if (cmd == "growth") c["format"] = "json";
  if (cmd == "verify-identities") c["N"] = 100'000;
  if (cmd == "hyperbola") {
    c["x"] = json::array({100'000});
    c["split"] = "theorem1";
  }
  if (cmd == "growth") {
    c["normalizer"] = "sqrt";
    c["fit_x_min"] = 100;
  }
  if (cmd == "lemma2") {
    c["slack"] = 0.5;
    c["flag_from"] = 10'000;
  }
  if (cmd == "random") {
    c["seed"] = 42;
    c["trials"] = 1;
    c["fit_x_min"] = 100;
    c["limit"] = kDefaultRandomLimit;
  }
  if (cmd == "perturb") {
    c["rule"] = "doubly-exponential";
    c["delta"] = 0.5;
    c["fit_x_min"] = 100;
  }
  return c;
}

json load_config_file(const std::string& path, const std::string& cmd) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  if (j.contains("command") && j["command"] != cmd) {
    throw InvalidArgument("config file is for command '" + j["command"].get<std::string>() +
                          "', not '" + cmd + "'");
  }
  j.erase("command");
  j.erase("workers");
  j.erase("output");
  for (const auto& [key, _] : j.items()) {
    if (!allowed_keys(cmd).count(key)) {
      throw InvalidArgument("config key '" + key + "' does not apply to " + cmd);
    }
  }
  return j;
}

void apply_flags(json& c, const Flags& f, const std::string& cmd) {
  if (f.discriminant && (f.modulus || f.table)) {
    throw InvalidArgument("give either --discriminant or --modulus with --table");
  }
  if (f.discriminant) c["character"] = {{"discriminant", parse_signed(*f.discriminant, "--discriminant")}};
  if (f.modulus || f.table) {
    if (!f.modulus || !f.table) throw InvalidArgument("--modulus and --table go together");
    std::vector<int> values;
    for (const auto& s : split_list(*f.table)) {
      values.push_back(static_cast<int>(parse_signed(s, "--table")));
    }
    c["character"] = {{"modulus", parse_count(*f.modulus, "--modulus")}, {"values", values}};
  }
  if (!f.signs.empty()) {
    json s = json::object();
    for (const auto& item : f.signs) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--sign expects p=+1 or p=-1, got '" + item + "'");
      const auto p = parse_count(item.substr(0, eq), "--sign prime");
      const auto v = item.substr(eq + 1);
      int sign = 0;
      if (v == "+1" || v == "1" || v == "+") sign = 1;
      if (v == "-1" || v == "-") sign = -1;
      if (sign == 0) throw InvalidArgument("--sign value must be +1 or -1, got '" + v + "'");
      s[std::to_string(p)] = sign;
    }
    c["signs"] = s;
  }
  auto set_count = [&](const std::optional<std::string>& v, const char* key, const char* flag) {
    if (v) c[key] = parse_count(*v, flag);
  };
  auto set_real = [&](const std::optional<std::string>& v, const char* key, const char* flag) {
    if (v) c[key] = parse_real(*v, flag);
  };
  if (f.function) c["function"] = *f.function;
  set_count(f.x_max, "x_max", "--xmax");
  set_count(f.segment_size, "segment_size", "--segment-size");
  if (f.format) c["format"] = *f.format;
  const int grid_flags = !!f.points_per_decade + !!f.grid_ratio + !!f.checkpoints;
  if (grid_flags > 1) throw InvalidArgument("give at most one of --points-per-decade, --grid-ratio, --checkpoints");
  if (f.points_per_decade) {
    c["grid"] = {{"kind", "geometric"}, {"points_per_decade", parse_count(*f.points_per_decade, "--points-per-decade")}};
  }
  if (f.grid_ratio) c["grid"] = {{"kind", "geometric"}, {"ratio", parse_real(*f.grid_ratio, "--grid-ratio")}};
  if (f.checkpoints) {
    std::vector<std::uint64_t> pts;
    for (const auto& s : split_list(*f.checkpoints)) pts.push_back(parse_count(s, "--checkpoints"));
    c["grid"] = {{"kind", "explicit"}, {"points", pts}};
  }
  set_count(f.limit_n, "N", "--limit");
  if (!f.xs.empty()) {
    std::vector<std::uint64_t> xs;
    for (const auto& s : f.xs) {
      for (const auto& item : split_list(s)) xs.push_back(parse_count(item, "--x"));
    }
    c["x"] = xs;
  }
  if (f.split) c["split"] = *f.split;
  if (f.split_u) {
    c["U"] = parse_count(*f.split_u, "--U");
    c["split"] = "explicit";
  }
  if (f.input) c["input"] = *f.input;
  if (f.normalizer) c["normalizer"] = *f.normalizer;
  set_real(f.normalizer_param, "normalizer_param", "--normalizer-param");
  set_count(f.fit_x_min, "fit_x_min", "--fit-xmin");
  set_count(f.fit_x_max, "fit_x_max", "--fit-xmax");
  set_count(f.log_exponent, "log_exponent", "--log-exponent");
  set_real(f.slack, "slack", "--slack");
  set_count(f.flag_from, "flag_from", "--flag-from");
  set_count(f.seed, "seed", "--seed");
  set_count(f.trials, "trials", "--trials");
  set_count(f.trial_limit, "limit", "--trial-limit");
  if (f.rule) c["rule"] = *f.rule;
  set_real(f.delta, "delta", "--delta");
  for (const auto& [key, _] : c.items()) {
    if (!allowed_keys(cmd).count(key)) {
      throw InvalidArgument("option for '" + key + "' does not apply to " + cmd);
    }
  }
}

// ---------------------------------------------------------------- resolution

struct Instance {
  Character chi;
  ExtendedMultiplicative g;
};

Character character_of(const json& c) {
  json j = c;
  if (j.contains("discriminant") && !j.contains("values")) {
    j["discriminant"] = signed_of(j["discriminant"], "character.discriminant");
  }
  if (j.contains("modulus")) j["modulus"] = count_of(j["modulus"], "character.modulus");
  try {
    return character_from_json(j);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed character: ") + e.what());
  }
}

/// Resolves character and signs in place; missing signs default to +1.
Instance resolve_instance(json& c) {
  Character chi = character_of(c.at("character"));
  std::map<std::uint64_t, int> signs;
  const json given = c.value("signs", json::object());
  if (!given.is_object()) throw InvalidArgument("signs must be an object {\"p\": +-1}");
  for (const auto& [key, v] : given.items()) {
    const auto p = parse_count(key, "signs key");
    if (!v.is_number_integer()) throw InvalidArgument("sign at " + key + " must be +1 or -1");
    signs[p] = v.get<int>();
  }
  for (const auto p : chi.bad_primes()) signs.try_emplace(p, 1);
  ExtendedMultiplicative g = extend_character(chi, signs);
  json resolved = json::object();
  for (const auto& [p, s] : g.bad_prime_signs()) resolved[std::to_string(p)] = s;
  c["signs"] = resolved;
  return {std::move(chi), std::move(g)};
}

CheckpointGrid resolve_grid(json& c) {
  json& g = c.at("grid");
  if (!g.is_object()) throw InvalidArgument("grid must be an object");
  if (g.contains("points_per_decade")) {
    g["points_per_decade"] = count_of(g["points_per_decade"], "grid.points_per_decade");
  }
  if (g.contains("ratio")) g["ratio"] = real_of(g["ratio"], "grid.ratio");
  if (g.contains("points")) {
    std::vector<std::uint64_t> pts;
    for (const auto& p : g["points"]) pts.push_back(count_of(p, "grid.points"));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    g["points"] = pts;
  }
  try {
    return grid_from_json(g);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed grid: ") + e.what());
  }
}

std::uint64_t resolve_count(json& c, const char* key) {
  const auto v = count_of(c.at(key), key);
  c[key] = v;
  return v;
}

double resolve_real(json& c, const char* key) {
  const auto v = real_of(c.at(key), key);
  c[key] = v;
  return v;
}

std::string resolve_choice(json& c, const char* key, std::initializer_list<const char*> choices) {
  if (!c.at(key).is_string()) throw InvalidArgument(std::string(key) + " must be a string");
  const auto v = c[key].get<std::string>();
  for (const char* ch : choices) {
    if (v == ch) return v;
  }
  std::string all;
  for (const char* ch : choices) all += std::string(all.empty() ? "" : ", ") + ch;
  throw InvalidArgument(std::string(key) + " '" + v + "' is not one of: " + all);
}

SegmentConfig segment_config(json& c, const Flags& f) {
  SegmentConfig cfg;
  if (c.contains("segment_size")) cfg.segment_size = resolve_count(c, "segment_size");
  if (cfg.segment_size < 1) throw InvalidArgument("segment_size must be >= 1");
  if (f.workers) cfg.workers = *f.workers;
  return cfg;
}

// ---------------------------------------------------------------- output

struct Emitter {
  std::string cmd;
  json config;
  bool dry = false;  // resolve the config only
  std::ostringstream body;

  std::string hash() const { return config_hash(config); }

  void csv_header() {
    body << "# config_hash=" << hash() << " config=" << config.dump() << '\n';
  }

  void json_result(const std::string& kind, json result) {
    json out = {{"kind", kind},
                {"config_hash", hash()},
                {"config", config},
                {"result", std::move(result)}};
    body << out.dump(2) << '\n';
  }
};

struct Range {
  std::uint64_t x_max;
  CheckpointGrid grid;
  SegmentConfig seg;
};

Range resolve_range(json& c, const Flags& f) {
  const auto x_max = resolve_count(c, "x_max");
  auto grid = resolve_grid(c);
  grid.resolve(x_max);  // reject checkpoints beyond x_max before any work
  return {x_max, std::move(grid), segment_config(c, f)};
}

/// Runs `visit` with the function named by `name`.
template <class Visit>
void with_function(const std::string& name, const Instance& inst, Visit&& visit) {
  if (name == "f") return visit(ResemblingFunction(inst.g));
  if (name == "g") return visit(inst.g);
  if (name == "mu") return visit(Mobius{});
  visit(CharacterFunction{inst.chi});
}

PartialSumSeries series_of_named(const std::string& name, const Instance& inst, const Range& r) {
  PartialSumSeries s;
  with_function(name, inst, [&](const auto& fn) { s = partial_sums(fn, r.x_max, r.grid, r.seg); });
  return s;
}

// ---------------------------------------------------------------- commands

void cmd_partial_sums(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto inst = resolve_instance(c);
  const auto format = resolve_choice(c, "format", {"csv", "json"});
  const auto name = resolve_choice(c, "function", {"f", "g", "mu", "chi"});
  const auto range = resolve_range(c, f);
  if (out.dry) return;
  const auto s = series_of_named(name, inst, range);
  if (format == "csv") {
    out.csv_header();
    write_series_csv(out.body, s);
  } else {
    out.json_result("series", s);
  }
}

int cmd_verify_identities(Emitter& out, const Flags&) {
  json& c = out.config;
  const auto inst = resolve_instance(c);
  const auto n = resolve_count(c, "N");
  if (n < 4) throw InvalidArgument("N must be >= 4");
  if (out.dry) return 0;

  json reports = json::array();
  bool passed = true;
  auto add = [&](const VerificationReport& r) {
    passed = passed && r.passed;
    reports.push_back(r);
  };
  add(verify_mobius_inversion(n));
  // every sign pattern at the primes dividing k
  const auto bad = inst.chi.bad_primes();
  for (std::uint64_t mask = 0; mask < (1ULL << bad.size()); ++mask) {
    std::map<std::uint64_t, int> signs;
    for (std::size_t i = 0; i < bad.size(); ++i) signs[bad[i]] = (mask >> i) & 1 ? -1 : 1;
    add(verify_h_is_mu_at_squares(ResemblingFunction(extend_character(inst.chi, signs)), n));
  }
  const auto l2 = verify_lemma2_h(default_extension(inst.chi), n);
  for (const auto& r : l2.reports) add(r);
  add(verify_prime_power_modulus(inst.g, inst.chi, n));
  add(verify_lemma3_hypotheses(inst.g, inst.chi, n));

  json result = {{"passed", passed},
                 {"limit", n},
                 {"character", inst.chi},
                 {"reports", reports},
                 {"karamata",
                  {{"x", n},
                   {"partial_sum", l2.partial_sum},
                   {"target", l2.karamata_target},
                   {"ratio", l2.karamata_ratio}}}};
  out.json_result("identity-suite", result);
  return passed ? 0 : 1;
}

void cmd_hyperbola(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto inst = resolve_instance(c);
  const auto split = resolve_choice(c, "split", {"theorem1", "sqrt", "explicit"});
  const auto seg = segment_config(c, f);
  std::vector<std::uint64_t> xs;
  for (const auto& v : c.at("x")) xs.push_back(count_of(v, "x"));
  if (xs.empty()) throw InvalidArgument("hyperbola needs at least one x");
  c["x"] = xs;
  std::optional<std::uint64_t> u;
  if (split == "explicit") {
    if (!c.contains("U")) throw InvalidArgument("explicit split needs U");
    u = resolve_count(c, "U");
  } else if (c.contains("U")) {
    throw InvalidArgument("U applies only to the explicit split");
  }
  if (out.dry) return;
  const ResemblingFunction fr(inst.g);
  out.csv_header();
  write_hyperbola_csv_header(out.body);
  for (const auto x : xs) {
    if (x < 1) throw InvalidArgument("x must be >= 1");
    std::pair<std::uint64_t, std::uint64_t> uv;
    if (split == "theorem1") uv = theorem1_split_points(x);
    if (split == "sqrt") uv = sqrt_split(x);
    if (split == "explicit") uv = {*u, *u >= 1 ? x / *u : 0};
    write_hyperbola_csv_row(out.body, decompose(fr, x, uv.first, uv.second, seg));
  }
}

PartialSumSeries read_series_csv(const std::string& path, int log_exponent) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read input '" + path + "'");
  PartialSumSeries s;
  s.function_id = "input";
  s.log_exponent = log_exponent;
  bool header = false;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("x,M", 0) != 0) {
        throw InvalidArgument(path + ": expected a header starting with x,M");
      }
      header = true;
      continue;
    }
    const auto cols = split_list(line);
    if (cols.size() < 2) throw InvalidArgument(path + ":" + std::to_string(line_no) + ": too few columns");
    const auto x = parse_count(cols[0], "x");
    const auto m = parse_signed(cols[1], "M");
    if (!s.checkpoints.empty() && x <= s.checkpoints.back()) {
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": x must increase");
    }
    s.checkpoints.push_back(x);
    s.sums.push_back(m);
  }
  if (!header) throw InvalidArgument(path + ": no CSV header");
  s.x_max = s.checkpoints.empty() ? 0 : s.checkpoints.back();
  return s;
}

void cmd_growth(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto format = resolve_choice(c, "format", {"csv", "json"});
  std::function<PartialSumSeries()> source;
  int log_exponent = 1;
  if (c.contains("input")) {
    if (!c["input"].is_string()) throw InvalidArgument("input must be a path");
    if (f.discriminant || f.modulus || !f.signs.empty() || f.function || f.x_max || f.checkpoints ||
        f.points_per_decade || f.grid_ratio || f.segment_size) {
      throw InvalidArgument("--input excludes function and range options");
    }
    // the series comes from the file; function settings do not apply
    for (const char* k : {"character", "signs", "function", "x_max", "grid", "segment_size"}) c.erase(k);
    if (!c.contains("log_exponent")) c["log_exponent"] = 1;
    log_exponent = static_cast<int>(resolve_count(c, "log_exponent"));
    const auto path = c["input"].get<std::string>();
    source = [path, log_exponent] { return read_series_csv(path, log_exponent); };
  } else {
    if (c.contains("log_exponent")) throw InvalidArgument("log_exponent applies only to --input");
    const auto inst = resolve_instance(c);
    const auto name = resolve_choice(c, "function", {"f", "g", "mu", "chi"});
    const auto range = resolve_range(c, f);
    log_exponent = name == "mu" ? 1 : inst.chi.omega_k();
    source = [inst, name, range] { return series_of_named(name, inst, range); };
  }
  const auto kind = resolve_choice(c, "normalizer", {"sqrt", "logpow", "xpow"});
  Normalizer norm = Normalizer::sqrt_x();
  if (kind == "sqrt") {
    if (c.contains("normalizer_param")) throw InvalidArgument("sqrt normalizer takes no parameter");
  } else {
    if (!c.contains("normalizer_param")) {
      c["normalizer_param"] = kind == "logpow" ? static_cast<double>(log_exponent) : 0.5;
    }
    const double a = resolve_real(c, "normalizer_param");
    norm = kind == "logpow" ? Normalizer::log_pow(a) : Normalizer::x_pow(a);
  }
  const auto lo = resolve_count(c, "fit_x_min");
  const auto hi = c.contains("fit_x_max") ? resolve_count(c, "fit_x_max")
                                          : std::numeric_limits<std::uint64_t>::max();
  if (out.dry) return;
  const auto s = source();
  const auto ratios = normalized_ratios(s, norm);
  if (format == "csv") {
    out.csv_header();
    out.body << "x,ratio\n";
    for (const auto& r : ratios) out.body << r.x << ',' << format_double(r.ratio) << '\n';
    return;
  }
  json jr = json::array();
  for (const auto& r : ratios) {
    jr.push_back({{"x", r.x}, {"ratio", std::isfinite(r.ratio) ? json(r.ratio) : json(nullptr)}});
  }
  out.json_result("growth", {{"function_id", s.function_id},
                             {"normalizer", norm.name()},
                             {"fit", fit_exponent(s, lo, hi)},
                             {"ratios", jr}});
}

void cmd_lemma2(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto inst = resolve_instance(c);
  const auto range = resolve_range(c, f);
  const double slack = resolve_real(c, "slack");
  if (!(slack >= 0)) throw InvalidArgument("slack must be >= 0");
  const auto from = resolve_count(c, "flag_from");
  if (!inst.g.all_signs_positive()) {
    throw InvalidArgument("the limsup bound needs g(p) = +1 at every p | k");
  }
  if (out.dry) return;
  const auto s = partial_sums(inst.g, range.x_max, range.grid, range.seg);
  json result = lemma2_bound(inst.g, s, slack, from);
  result["character"] = inst.chi;
  result["function_id"] = s.function_id;
  out.json_result("lemma2-bound", result);
}

void cmd_random(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto seed = resolve_count(c, "seed");
  const auto trials = resolve_count(c, "trials");
  const auto limit = resolve_count(c, "limit");
  const auto range = resolve_range(c, f);
  const auto& [x_max, grid, seg] = range;
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!c.contains("format")) c["format"] = trials == 1 ? "csv" : "json";
  const auto format = resolve_choice(c, "format", {"csv", "json"});
  const auto fit_min = resolve_count(c, "fit_x_min");
  if (trials > 1 && format == "csv") throw InvalidArgument("an ensemble (trials > 1) is reported as json");
  if (x_max > limit) {
    throw ResourceLimit("x_max " + std::to_string(x_max) + " exceeds per-trial limit " +
                        std::to_string(limit));
  }
  if (out.dry) return;
  if (trials == 1 && format == "csv") {
    out.csv_header();
    write_series_csv(out.body, sample_series({seed, x_max}, grid, seg, limit));
    return;
  }
  std::vector<std::uint64_t> seeds(trials);
  for (std::uint64_t i = 0; i < trials; ++i) seeds[i] = seed + i;
  EnsembleOptions opts;
  opts.fit_x_min = fit_min;
  opts.limit = limit;
  if (f.workers) opts.workers = *f.workers;
  json result = ensemble_stats(seeds, x_max, grid, opts);
  result["seeds"] = {{"first", seed}, {"count", trials}};
  out.json_result("ensemble", result);
}

void cmd_perturb(Emitter& out, const Flags& f) {
  json& c = out.config;
  const auto inst = resolve_instance(c);
  const auto rule = parse_flip_rule(resolve_choice(c, "rule", {"none", "doubly-exponential", "positive-density"}));
  PerturbOptions opts;
  opts.delta = resolve_real(c, "delta");
  const auto format = resolve_choice(c, "format", {"csv", "json"});
  const auto range = resolve_range(c, f);
  const auto x_max = range.x_max;
  const auto fit_min = resolve_count(c, "fit_x_min");
  if (!(opts.delta > 0.0 && opts.delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  if (out.dry) return;
  const auto pf = perturb(inst.g, rule, x_max, opts);
  const auto s = partial_sums(pf, x_max, range.grid, range.seg);
  if (format == "csv") {
    out.csv_header();
    out.body << "x,M,M_over_sqrt_x,M_over_logpow,D\n";
    std::ostringstream rows;
    write_series_csv(rows, s);
    std::istringstream in(rows.str());
    std::string line;
    std::getline(in, line);  // header
    for (std::size_t i = 0; std::getline(in, line); ++i) {
      out.body << line << ',' << pf.condition_sum(s.checkpoints[i]) << '\n';
    }
    return;
  }
  const double lx = std::log(static_cast<double>(x_max));
  const auto bound = 2 * static_cast<std::uint64_t>(std::ceil(std::sqrt(std::max(lx, 0.0)))) + 2;
  const auto d = pf.condition_sum(x_max);
  json fit = nullptr;
  try {
    fit = fit_exponent(s, fit_min);
  } catch (const InsufficientData&) {
  }
  const auto& flips = pf.flip_primes();
  const std::size_t shown = std::min<std::size_t>(flips.size(), 64);
  out.json_result("perturbation",
                  {{"function_id", pf.id()},
                   {"rule", to_string(rule)},
                   {"x_max", x_max},
                   {"flip_count", flips.size()},
                   {"flip_primes", std::vector<std::uint64_t>(flips.begin(), flips.begin() + shown)},
                   {"flip_primes_truncated", shown < flips.size()},
                   {"condition_sum", d},
                   {"condition_bound", bound},
                   {"satisfies_condition", d <= bound},
                   {"M_at_x_max", s.sums.back()},
                   {"fit", fit}});
}

// ---------------------------------------------------------------- driver

void emit_error(const std::string& kind, const std::string& message, int code, json extra = json::object()) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << std::endl;
}

int run(const std::string& cmd, Flags& f) {
  Emitter out;
  out.cmd = cmd;
  out.config = defaults_for(cmd);
  out.dry = f.dump_config;
  if (!f.config_path.empty()) {
    const json file = load_config_file(f.config_path, cmd);
    for (const auto& [k, v] : file.items()) out.config[k] = v;
  }
  apply_flags(out.config, f, cmd);

  int code = 0;
  if (cmd == "partial-sums") cmd_partial_sums(out, f);
  if (cmd == "verify-identities") code = cmd_verify_identities(out, f);
  if (cmd == "hyperbola") cmd_hyperbola(out, f);
  if (cmd == "growth") cmd_growth(out, f);
  if (cmd == "lemma2") cmd_lemma2(out, f);
  if (cmd == "random") cmd_random(out, f);
  if (cmd == "perturb") cmd_perturb(out, f);

  if (f.dump_config) {
    json dumped = out.config;
    dumped["command"] = cmd;
    std::cout << dumped.dump(2) << '\n';
    return 0;
  }
  if (f.output.empty()) {
    std::cout << out.body.str() << std::flush;
  } else {
    std::ofstream file(f.output, std::ios::binary);
    if (!file) throw InvalidArgument("cannot write output '" + f.output + "'");
    file << out.body.str();
    if (!file) throw ResourceLimit("writing '" + f.output + "' failed");
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial sums, identities and growth experiments for functions resembling mu"};
  app.require_subcommand(1);
  Flags f;

  auto* ps = app.add_subcommand("partial-sums", "checkpointed M(x) as CSV or JSON");
  add_common(ps, f, kCharacter | kFunction | kRange | kFormat);

  auto* vi = app.add_subcommand("verify-identities", "exact convolution identity suite");
  add_common(vi, f, kCharacter);
  vi->add_option("-N,--limit", f.limit_n, "truncation limit N");

  auto* hy = app.add_subcommand("hyperbola", "A + B - C decomposition of M_f(x)");
  add_common(hy, f, kCharacter);
  hy->add_option("--x", f.xs, "x values (repeatable or comma separated)");
  hy->add_option("--split", f.split, "theorem1 | sqrt | explicit");
  hy->add_option("--U", f.split_u, "explicit U; V = floor(x/U)");
  hy->add_option("--segment-size", f.segment_size, "sieve segment length");

  auto* gr = app.add_subcommand("growth", "normalized ratios and exponent fit");
  add_common(gr, f, kCharacter | kFunction | kRange | kFormat);
  gr->add_option("--input", f.input, "series CSV (x,M,...) instead of computing one");
  gr->add_option("--normalizer", f.normalizer, "sqrt | logpow | xpow");
  gr->add_option("--normalizer-param", f.normalizer_param, "w for (log x)^w, a for x^a");
  gr->add_option("--fit-xmin", f.fit_x_min, "smallest checkpoint in the fit");
  gr->add_option("--fit-xmax", f.fit_x_max, "largest checkpoint in the fit");
  gr->add_option("--log-exponent", f.log_exponent, "w for logpow with --input");

  auto* l2 = app.add_subcommand("lemma2", "|M_g(x)| / (log x)^omega(k) against its limsup bound");
  add_common(l2, f, kCharacter | kRange);
  l2->add_option("--slack", f.slack, "allowed excess over the bound, as a fraction");
  l2->add_option("--flag-from", f.flag_from, "first x at which excess is flagged");

  auto* rd = app.add_subcommand("random", "random multiplicative baseline");
  add_common(rd, f, kRange | kFormat);
  rd->add_option("--seed", f.seed, "seed (first seed of an ensemble)");
  rd->add_option("--trials", f.trials, "number of consecutive seeds");
  rd->add_option("--fit-xmin", f.fit_x_min, "smallest checkpoint in per-trial fits");
  rd->add_option("--trial-limit", f.trial_limit, "largest x_max allowed per trial");

  auto* pt = app.add_subcommand("perturb", "sign flips at sparse primes");
  add_common(pt, f, kCharacter | kRange | kFormat);
  pt->add_option("--rule", f.rule, "none | doubly-exponential | positive-density");
  pt->add_option("--delta", f.delta, "density for positive-density");
  pt->add_option("--fit-xmin", f.fit_x_min, "smallest checkpoint in the fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("invalid-argument", e.what(), 2);
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, f);
  } catch (const ValidationError& e) {
    emit_error(e.kind(), e.what(), e.exit_code(),
               {{"invariant", e.invariant()}, {"witness", {e.witness_a(), e.witness_b()}}});
    return e.exit_code();
  } catch (const InsufficientData& e) {
    emit_error(e.kind(), e.what(), e.exit_code(), {{"count", e.count()}});
    return e.exit_code();
  } catch (const Error& e) {
    emit_error(e.kind(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const json::exception& e) {
    emit_error("invalid-argument", std::string("config: ") + e.what(), 2);
    return 2;
  } catch (const std::bad_alloc&) {
    emit_error("resource-limit", "out of memory", 3);
    return 3;
  } catch (const std::exception& e) {
    emit_error("internal", e.what(), 1);
    return 1;
  }
}
