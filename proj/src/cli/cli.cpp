#include "qlearn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "qlearn/errors.hpp"
#include "qlearn/report.hpp"
#include "qlearn/simulator.hpp"
#include "qlearn/verify.hpp"

#ifndef QLEARN_VERSION
#define QLEARN_VERSION "unknown"
#endif

namespace qlearn::cli {

namespace {

using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// String-valued options of one subcommand, filled from flags and then from
// the --config file for anything the flags left unset.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_, "JSON file of option values; flags take precedence");
  }

  void option(const std::string& key, const std::string& help) {
    auto& slot = values_[key];
    slot.opt = app_->add_option("--" + key, slot.text, help);
  }
  void flag(const std::string& key, const std::string& help) {
    auto& slot = values_[key];
    slot.is_flag = true;
    slot.opt = app_->add_flag("--" + key, slot.on, help);
  }

  void apply_config() {
    for (auto& [key, slot] : values_) slot.set = slot.opt->count() > 0;
    if (config_.empty()) return;
    json cfg;
    try {
      cfg = json::parse(read_text(config_));
    } catch (const json::parse_error& e) {
      throw ValidationError("config " + config_ + ": " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config " + config_ + " must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      auto it = values_.find(key);
      if (it == values_.end())
        throw ValidationError("config " + config_ + ": unknown key '" + key + "' for command " +
                              app_->get_name());
      auto& slot = it->second;
      if (slot.set) continue;
      slot.set = true;
      if (slot.is_flag) {
        if (!value.is_boolean()) throw ValidationError("config key '" + key + "' must be a boolean");
        slot.on = value.get<bool>();
      } else {
        slot.text = config_text(key, value);
      }
    }
  }

  bool has(const std::string& key) const { return values_.at(key).set; }
  bool on(const std::string& key) const { return has(key) && values_.at(key).on; }
  const std::string& get(const std::string& key) const {
    if (!has(key)) throw ValidationError("missing required --" + key);
    return values_.at(key).text;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? values_.at(key).text : fallback;
  }

  static std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

 private:
  struct Slot {
    std::string text;
    bool on = false;
    bool is_flag = false;
    bool set = false;
    CLI::Option* opt = nullptr;
  };

  // Config values use the same spelling as the flags: arrays become
  // comma lists, nested arrays semicolon-separated groups.
  static std::string config_text(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_object()) return v.dump();
    if (v.is_array()) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += v[i].is_array() ? ";" : ",";
        out += v[i].is_array() ? config_text(key, v[i]) : v[i].dump();
      }
      return out;
    }
    throw ValidationError("config key '" + key + "' has an unsupported value");
  }

  CLI::App* app_;
  std::string config_;
  std::map<std::string, Slot> values_;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ValidationError(what + ": cannot parse '" + text + "'");
  return v;
}

// One value broadcast to every item, or exactly m values.
std::vector<double> parse_item_values(const std::string& text, int m, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<double>(part, what));
  if (out.size() == 1) out.assign(static_cast<std::size_t>(m), out.front());
  if (out.size() != static_cast<std::size_t>(m))
    throw ValidationError(what + ": expected 1 or " + std::to_string(m) + " values, got " +
                          std::to_string(out.size()));
  return out;
}

// "uniform", "point:<profile>", inline JSON, or a JSON file.
ProfileDistribution parse_pstar(const std::string& text, int k) {
  if (text == "uniform") return ProfileDistribution::uniform(k);
  if (text.starts_with("point:"))
    return ProfileDistribution::point_mass(k, parse_profile_label(text.substr(6), k));
  const std::string body =
      !text.empty() && (text.front() == '{' || text.front() == '[') ? text : Options::read_text(text);
  try {
    return distribution_from_json(json::parse(body), k);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("--pstar: ") + e.what());
  }
}

// One-based item lists, e.g. "1,2,3,4;3,4,5,6".
std::vector<std::vector<int>> parse_groups(const std::string& text) {
  std::vector<std::vector<int>> groups;
  for (const auto& g : split(text, ';')) {
    std::vector<int> items;
    for (const auto& part : split(g, ',')) items.push_back(parse_number<int>(part, "--groups") - 1);
    groups.push_back(std::move(items));
  }
  return groups;
}

ComboOrder parse_combos(const std::string& text, int m) {
  if (text == "saturated") return ComboOrder::saturated(m);
  if (text == "singles") return ComboOrder::singles(m);
  std::vector<ItemCombo> combos;
  for (const auto& c : split(text, ';')) {
    Mask bits = 0;
    for (const auto& part : split(c, ',')) {
      const int i = parse_number<int>(part, "--combos");
      if (i < 1 || i > m) throw ValidationError("--combos: item " + part + " out of range");
      bits |= Mask{1} << (i - 1);
    }
    combos.push_back(ItemCombo{bits});
  }
  return ComboOrder(m, std::move(combos));
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (!o.has("out")) {
    out << text;
    return;
  }
  std::ofstream f(o.get("out"), std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write " + o.get("out"));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write " + path);
}

QMatrix load_q(const Options& o) { return parse_qmatrix(Options::read_text(o.get("q"))); }

ResponseData load_responses(const Options& o) {
  return parse_responses(Options::read_text(o.get("responses")));
}

json header(const std::string& kind) {
  return json{{"schema_version", kReportSchemaVersion}, {"kind", kind}, {"version", QLEARN_VERSION}};
}

SearchOptions search_options(const Options& o) {
  SearchOptions s;
  if (o.has("budget")) s.budget = parse_number<std::uint64_t>(o.get("budget"), "--budget");
  if (o.has("tie-tol")) s.tie_tol = parse_number<double>(o.get("tie-tol"), "--tie-tol");
  if (!(s.tie_tol >= 0.0)) throw ValidationError("--tie-tol must be nonnegative");
  if (o.has("workers")) s.workers = parse_number<int>(o.get("workers"), "--workers");
  if (s.workers < 0) throw ValidationError("--workers must be nonnegative");
  if (s.workers == 0) s.workers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  s.keep_table = o.on("table");
  return s;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  if (!o.has("seed")) throw ValidationError("missing required --seed (simulation is stochastic)");
  SimConfig cfg{load_q(o), ProfileDistribution{}, DinaParams{}, 0, 0};
  const int m = cfg.q.items();
  cfg.p_star = parse_pstar(o.get_or("pstar", "uniform"), cfg.q.attributes());
  cfg.params.c = parse_item_values(o.get_or("c", "1"), m, "--c");
  cfg.params.g = parse_item_values(o.get_or("g", "0"), m, "--g");
  cfg.n = parse_number<std::size_t>(o.get("n"), "--n");
  cfg.seed = parse_number<std::uint64_t>(o.get("seed"), "--seed");

  const SimOutput sim = simulate(cfg);
  for (const auto& w : sim.warnings) err << "warning: " << w << '\n';
  emit(o, out, format_responses(sim.responses));
  if (o.has("profiles-out"))
    write_file(o.get("profiles-out"), format_profiles(sim.profiles, cfg.q.attributes()));
  if (o.has("out")) {
    json meta = header("simulation");
    meta["config"] = json{{"q", rows_json(cfg.q)},
                          {"pstar", distribution_json(cfg.p_star)},
                          {"c", cfg.params.c},
                          {"g", cfg.params.g},
                          {"n", cfg.n},
                          {"seed", cfg.seed}};
    meta["warnings"] = sim.warnings;
    write_file(o.get("out") + ".json", meta.dump(2) + '\n');
  }
  return kOk;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream&) {
  const auto start = std::chrono::steady_clock::now();
  const ResponseData data = load_responses(o);
  const int m = data.items;
  const int k = parse_number<int>(o.get("k"), "--k");
  const std::string mode = o.get_or("mode", "noiseless");
  const SearchOptions search = search_options(o);

  SplitParams params;
  if (mode == "noiseless") {
    if (o.has("c") || o.has("g")) throw ValidationError("mode noiseless takes no --c or --g");
    params = DinaParams::noiseless(m);
  } else if (mode == "known-cg") {
    params = DinaParams{parse_item_values(o.get("c"), m, "--c"),
                        parse_item_values(o.get("g"), m, "--g")};
  } else if (mode == "known-g") {
    if (o.has("c")) throw ValidationError("mode known-g estimates c; drop --c");
    params = GuessOnly{parse_item_values(o.get("g"), m, "--g")};
  } else {
    throw ValidationError("--mode must be noiseless, known-cg or known-g");
  }

  json report = header("estimation");
  report["mode"] = mode;
  report["m"] = m;
  report["k"] = k;
  report["n_subjects"] = data.n_subjects();
  bool ties = false;

  if (!o.has("groups")) {
    const AlphaVector alpha = compute_alpha(data, ComboOrder::saturated(m));
    EstimationResult r = std::holds_alternative<DinaParams>(params)
                             ? estimate_Q(alpha, std::get<DinaParams>(params), k, search)
                             : estimate_Q_unknown_c(alpha, std::get<GuessOnly>(params).g, k, search);
    ties = r.ties.size() > 1;
    report.update(estimation_json(r));
    report["groups"] = nullptr;
  } else {
    const auto groups = parse_groups(o.get("groups"));
    const SplitResult r = split_estimate(data, groups, k, params, search);
    json group_reports = json::array();
    std::size_t total = 0;
    for (std::size_t b = 0; b < groups.size(); ++b) {
      json g = estimation_json(r.groups[b]);
      json items = json::array();
      for (int i : groups[b]) items.push_back(i + 1);
      g["items"] = items;
      group_reports.push_back(g);
      total += r.groups[b].n_candidates;
      ties = ties || r.groups[b].ties.size() > 1;
    }
    report["q_hat"] = rows_json(r.q);
    report["score"] = nullptr;
    report["ties"] = json::array({rows_json(r.q)});
    report["p_tilde"] = nullptr;
    report["c_hat"] = nullptr;
    report["n_candidates"] = total;
    if (m <= kMaxSaturatedItems) {
      // Score the stitched matrix against the full alpha when it is small
      // enough to saturate.
      const AlphaVector alpha = compute_alpha(data, ComboOrder::saturated(m));
      std::optional<DinaParams> full;
      if (const auto* p = std::get_if<DinaParams>(&params)) {
        full = *p;
      } else {
        const auto& g = std::get<GuessOnly>(params).g;
        try {
          full = DinaParams{combined_slip(r.q, g, alpha).c, g};
          report["c_hat"] = full->c;
        } catch (const DegenerateSample&) {
        }
      }
      if (full) {
        report["score"] = score(r.q, alpha, *full);
        report["p_tilde"] = distribution_json(estimate_p(r.q, alpha, *full));
      }
    }
    report["groups"] = group_reports;
  }

  if (o.has("seed")) report["seed"] = parse_number<std::uint64_t>(o.get("seed"), "--seed");
  else report["seed"] = nullptr;
  report["wall_time"] =
      o.on("record-time")
          ? json(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count())
          : json(nullptr);
  emit(o, out, report.dump(2) + '\n');
  return ties ? kTies : kOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
  const QMatrix q = load_q(o);
  const int m = q.items();
  const DinaParams params{parse_item_values(o.get_or("c", "1"), m, "--c"),
                          parse_item_values(o.get_or("g", "0"), m, "--g")};
  const ProfileDistribution p_star = parse_pstar(o.get_or("pstar", "uniform"), q.attributes());
  IdentifiabilityOptions opt;
  if (o.has("budget")) opt.budget = parse_number<std::uint64_t>(o.get("budget"), "--budget");
  if (o.has("threshold")) opt.threshold = parse_number<double>(o.get("threshold"), "--threshold");

  const VerifyReport r = verify(q, params, p_star, opt);
  json report = header("verify");
  report["q"] = rows_json(q);
  report["c"] = params.c;
  report["g"] = params.g;
  report["pstar"] = distribution_json(p_star);
  report.update(verify_json(r));
  emit(o, out, report.dump(2) + '\n');
  return r.all_passed() ? kOk : kTies;
}

int cmd_tmatrix(const Options& o, std::ostream& out, std::ostream&) {
  const QMatrix q = load_q(o);
  const int m = q.items();
  const TVariant variant = parse_variant(o.get_or("variant", "plain"));
  const ComboOrder order = parse_combos(o.get_or("combos", "saturated"), m);
  const bool wants_c = variant != TVariant::plain;
  const bool wants_g = variant == TVariant::slip_guess || variant == TVariant::augmented;
  const std::string name = to_string(variant);
  if (wants_c && !o.has("c")) throw ValidationError("variant " + name + " needs --c");
  if (wants_g && !o.has("g")) throw ValidationError("variant " + name + " needs --g");
  if (!wants_c && o.has("c")) throw ValidationError("variant " + name + " takes no --c");
  if (!wants_g && o.has("g")) throw ValidationError("variant " + name + " takes no --g");

  TMatrix t = [&] {
    if (variant == TVariant::plain) return build_T(q, order);
    const auto c = parse_item_values(o.get("c"), m, "--c");
    if (variant == TVariant::slip) return build_Tc(q, c, order);
    const DinaParams p{c, parse_item_values(o.get("g"), m, "--g")};
    p.validate(m);
    return variant == TVariant::slip_guess ? build_Tcg(q, p, order) : build_T_tilde(q, p, order);
  }();
  emit(o, out, tmatrix_tsv(t));
  return kOk;
}

int cmd_alpha(const Options& o, std::ostream& out, std::ostream&) {
  const ResponseData data = load_responses(o);
  const ComboOrder order = parse_combos(o.get_or("combos", "saturated"), data.items);
  emit(o, out, alpha_tsv(compute_alpha(data, order)));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Q-matrix learning for the DINA model", "qlearn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QLEARN_VERSION);

  std::vector<std::pair<CLI::App*, std::unique_ptr<Options>>> commands;
  using Handler = int (*)(const Options&, std::ostream&, std::ostream&);
  std::map<CLI::App*, Handler> handlers;
  auto command = [&](const char* name, const char* help, Handler h) -> Options& {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, std::make_unique<Options>(sub));
    handlers[sub] = h;
    return *commands.back().second;
  };

  auto& sim = command("simulate", "draw DINA responses", cmd_simulate);
  sim.option("q", "Q-matrix file");
  sim.option("pstar", "profile distribution: uniform, point:<profile>, JSON, or JSON file");
  sim.option("c", "1 - slip per item (one value or m values)");
  sim.option("g", "guess per item (one value or m values)");
  sim.option("n", "number of subjects");
  sim.option("seed", "random seed");
  sim.option("out", "response file; metadata goes to <out>.json");
  sim.option("profiles-out", "also write the drawn profiles here");

  auto& est = command("estimate", "estimate the Q-matrix from responses", cmd_estimate);
  est.option("responses", "response file");
  est.option("k", "number of attributes");
  est.option("mode", "noiseless | known-cg | known-g");
  est.option("c", "1 - slip per item (known-cg)");
  est.option("g", "guess per item (known-cg, known-g)");
  est.option("groups", "split search over item groups, e.g. 1,2,3,4;3,4,5,6");
  est.option("workers", "scoring threads (0 = all cores)");
  est.option("budget", "maximum raw candidate count");
  est.option("tie-tol", "score tolerance for reporting ties");
  est.option("seed", "recorded in the report");
  est.option("out", "report file");
  est.flag("record-time", "report wall time");
  est.flag("table", "include every candidate's score");

  auto& ver = command("verify", "rank, D-matrix and identifiability checks", cmd_verify);
  ver.option("q", "Q-matrix file");
  ver.option("c", "1 - slip per item");
  ver.option("g", "guess per item");
  ver.option("pstar", "profile distribution: uniform, point:<profile>, JSON, or JSON file");
  ver.option("budget", "maximum raw candidate count");
  ver.option("threshold", "delta at or below which a candidate is flagged");
  ver.option("out", "report file");

  auto& tm = command("tmatrix", "dump a T-matrix as TSV", cmd_tmatrix);
  tm.option("q", "Q-matrix file");
  tm.option("variant", "plain | slip | slip-guess | augmented");
  tm.option("c", "1 - slip per item");
  tm.option("g", "guess per item");
  tm.option("combos", "saturated | singles | explicit list such as 1;2;3;1,2");
  tm.option("out", "TSV file");

  auto& al = command("alpha", "dump the alpha vector as TSV", cmd_alpha);
  al.option("responses", "response file");
  al.option("combos", "saturated | singles | explicit list such as 1;2;3;1,2");
  al.option("out", "TSV file");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    for (auto& [sub, opts] : commands) {
      if (!sub->parsed()) continue;
      opts->apply_config();
      return handlers.at(sub)(*opts, out, err);
    }
    return kValidation;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace qlearn::cli
