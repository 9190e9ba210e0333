#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <ostream>
#include <thread>

#include "audit.hpp"
#include "dilp/errors.hpp"
#include "dilp/operator_bench.hpp"
#include "dilp/tasks.hpp"
#include "run.hpp"

namespace dilp::app {

namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Converts a command-line string to the JSON type the config key expects by
// trying the types the resolver accepts, most specific first.
Json flag_value(const std::string& key, const std::string& text) {
  static const std::vector<std::string> text_keys{"rule", "task", "data", "facts", "op_mode"};
  static const std::vector<std::string> flag_keys{"early_stop", "balance"};
  if (std::find(text_keys.begin(), text_keys.end(), key) != text_keys.end()) return text;
  if (std::find(flag_keys.begin(), flag_keys.end(), key) != flag_keys.end()) {
    if (text == "true" || text == "1" || text == "on") return true;
    if (text == "false" || text == "0" || text == "off") return false;
    throw DomainError("--" + dashed(key) + ": expected true or false, got " + text);
  }
  std::uint64_t u = 0;
  const char* end = text.data() + text.size();
  if (auto [p, ec] = std::from_chars(text.data(), end, u); ec == std::errc{} && p == end) return u;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(text.data(), end, d); ec == std::errc{} && p == end) return d;
  throw DomainError("--" + dashed(key) + ": expected a number, got " + text);
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_rules(std::ostream& out, const std::vector<ExtractedRule>& rules, const PredicateSchema& schema,
                 bool with_coverage) {
  if (rules.empty()) out << "(no rules)\n";
  for (const auto& e : rules) {
    out << render_rule(e.rule, schema) << '\n';
    if (with_coverage) {
      out << "  coverage N_b=" << e.coverage.body_count << " N_r=" << e.coverage.positive_count
          << " ratio=" << e.coverage.ratio << '\n';
    }
    out << "  syntax " << (e.syntax.valid ? "valid" : "invalid");
    for (const auto& v : e.syntax.violations) out << "; " << v;
    out << '\n';
  }
}

struct Gen {
  std::string rule;
  std::string task;
  std::size_t rows = 1000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
};

int cmd_gen(const Gen& g, std::ostream& out) {
  if (g.rule.empty() == g.task.empty()) throw DomainError("gen: give exactly one of --rule and --task");
  Json side{{"schema_version", kSchemaVersion}, {"version", version()}, {"command", "gen"}};
  if (!g.rule.empty()) {
    if (g.format != "csv") throw DomainError("gen: --format facts needs --task");
    const BuiltinRule rule = builtin_rule(g.rule);
    const Dataset data = gen_synthetic(rule.m, g.rows, rule.ast, g.noise, g.seed);
    std::size_t flipped = 0;
    for (std::size_t r = 0; r < data.size(); ++r) flipped += eval_rule(rule.ast, data.row(r)) != data.labels[r];
    save_csv(data, g.out);
    side["rule"] = g.rule;
    side["rows"] = g.rows;
    side["noise"] = g.noise;
    side["seed"] = g.seed;
    side["m"] = rule.m;
    side["positives"] = data.positives();
    side["flipped"] = flipped;
    out << "wrote " << data.size() << " rows (m=" << rule.m << ", positives=" << data.positives()
        << ", flipped=" << flipped << ") to " << g.out << '\n';
  } else {
    const Task task = builtin_task(g.task);
    side["task"] = g.task;
    side["format"] = g.format;
    side["examples_positive"] = task.facts.positive.size();
    side["examples_negative"] = task.facts.negative.size();
    if (g.format == "facts") {
      write_facts(task.facts, g.out);
      out << "wrote " << task.name << " facts to " << g.out << '\n';
    } else if (g.format == "csv") {
      const Dataset data = propositionalize(task.facts, task.schema);
      save_csv(data, g.out);
      side["rows"] = data.size();
      side["m"] = data.m;
      side["positives"] = data.positives();
      out << "wrote " << data.size() << " rows (m=" << data.m << ") to " << g.out << '\n';
    } else {
      throw DomainError("gen: --format must be csv or facts");
    }
  }
  write_text(g.out + ".manifest.json", side.dump(2) + "\n");
  return kExitOk;
}

int cmd_train(const Json& flat, const std::string& dir, std::size_t jobs, bool verbose, std::ostream& out,
              std::ostream& err) {
  const RunConfig config = resolve_config(flat);
  const Problem problem = load_problem(config.source);
  const RunResult result = run(config, problem, jobs, verbose ? &err : nullptr);
  write_outputs(dir, config, problem, result);
  const auto& best = result.search.best;
  out << "selected n=" << result.search.selected_n << " restart=" << result.search.best_restart
      << " epochs=" << best.history.size() << " train_acc=" << best.train_accuracy
      << " val_acc=" << best.val_accuracy << " rule_acc=" << best.rule_accuracy << '\n';
  print_rules(out, result.rules, problem.schema, true);
  if (result.recovered) out << "recovered " << (*result.recovered ? "yes" : "no") << '\n';
  return kExitOk;
}

int cmd_extract(const std::string& weights_path, double eta_prime, const std::string& data_path,
                const std::string& out_path, std::ostream& out) {
  const SavedWeights saved = read_weights(weights_path);
  std::optional<Dataset> data;
  if (!data_path.empty()) data = load_csv(data_path);
  const auto rules = extract(saved.weights, saved.schema, eta_prime, data ? &*data : nullptr);
  std::ostringstream text;
  print_rules(text, rules, saved.schema, data.has_value());
  out << text.str();
  if (!out_path.empty()) write_text(out_path, text.str());
  return kExitOk;
}

int cmd_bench(const DominanceConfig& cfg, std::size_t resolution, const std::string& dir, std::ostream& out) {
  const DominanceSummary s = dominance_study(cfg);
  std::filesystem::create_directories(dir);
  write_dominance_csv(s, std::filesystem::path(dir) / "dominance.csv");
  write_curves_csv(membership_curves(resolution, cfg.beta), std::filesystem::path(dir) / "curves.csv");
  const Json summary{{"schema_version", kSchemaVersion},
                     {"samples", s.samples},
                     {"beta", cfg.beta},
                     {"seed", cfg.seed},
                     {"m_min", cfg.m_min},
                     {"m_max", cfg.m_max},
                     {"dominance_fraction", s.dominance_fraction},
                     {"mean_attention_error", s.mean_attention_error},
                     {"mean_product_error", s.mean_product_error},
                     {"bound_violations", s.bound_violations}};
  write_text(std::filesystem::path(dir) / "bench.json", summary.dump(2) + "\n");
  out << "samples " << s.samples << " beta " << cfg.beta << '\n'
      << "dominance fraction " << s.dominance_fraction << '\n'
      << "mean error attention " << s.mean_attention_error << " product " << s.mean_product_error << '\n'
      << "bound violations " << s.bound_violations << '\n';
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t points, std::ostream& out) {
  bool ok = true;
  for (const auto& row : gradient_audit(seed, points)) {
    const bool pass = row.worst_relative_error < 1e-4;
    ok = ok && pass;
    out << std::left << std::setw(20) << row.operation << std::setw(6) << row.points << std::scientific
        << std::setprecision(3) << row.worst_relative_error << std::defaultfloat << (pass ? "  ok" : "  FAIL") << '\n';
  }
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentiable rule learning: data generation, training, extraction, operator study"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  Gen gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic rule table or a classical task (CSV or facts)");
  g->add_option("--rule", gen.rule, "Built-in rule: R1..R6, F2, grandparent6");
  g->add_option("--task", gen.task, "Built-in relational task");
  g->add_option("--n", gen.rows, "Rows for --rule")->capture_default_str();
  g->add_option("--noise", gen.noise, "Label flip probability")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generation seed")->capture_default_str();
  g->add_option("--format", gen.format, "csv or facts (tasks only)")->capture_default_str();
  g->add_option("--out", gen.out, "Output file; the sidecar is <out>.manifest.json")->required();

  auto* t = app.add_subcommand("train", "Search the rule count, train, and extract rules");
  std::string config_path;
  std::string train_out;
  std::size_t jobs = default_jobs();
  bool verbose = false;
  t->add_option("--config", config_path, "Flat JSON config or a previous manifest.json");
  t->add_option("--out", train_out, "Output directory")->required();
  t->add_option("--jobs", jobs, "Restarts trained concurrently")->capture_default_str();
  t->add_flag("--verbose", verbose, "Per-epoch progress on stderr");
  std::vector<std::pair<std::string, CLI::Option*>> keyed;
  const std::vector<std::string> keys = config_keys();
  std::vector<std::string> raw(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& key = keys[i];
    keyed.emplace_back(key, t->add_option("--" + dashed(key), raw[i], "Config key " + key));
  }

  std::string weights_path;
  double eta_prime = 0.4;
  std::string extract_data;
  std::string extract_out;
  auto* x = app.add_subcommand("extract", "Extract rules from a weights file");
  x->add_option("--weights", weights_path, "weights.json written by train")->required();
  x->add_option("--eta-prime", eta_prime, "Entropy threshold (0.8 for noisy data)")->capture_default_str();
  x->add_option("--data", extract_data, "CSV for coverage reports");
  x->add_option("--out", extract_out, "Also write the report to this file");

  DominanceConfig dom;
  std::size_t resolution = 101;
  std::string bench_out;
  auto* b = app.add_subcommand("bench", "Operator dominance study and membership curves");
  b->add_option("--samples", dom.samples)->capture_default_str();
  b->add_option("--beta", dom.beta)->capture_default_str();
  b->add_option("--seed", dom.seed)->capture_default_str();
  b->add_option("--m-min", dom.m_min)->capture_default_str();
  b->add_option("--m-max", dom.m_max)->capture_default_str();
  b->add_option("--resolution", resolution)->capture_default_str();
  b->add_option("--out", bench_out, "Output directory")->required();

  std::uint64_t check_seed = 0;
  std::size_t check_points = 100;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference audit of every analytic gradient");
  c->add_option("--seed", check_seed)->capture_default_str();
  c->add_option("--points", check_points, "Random points per operation")->capture_default_str();

  app.allow_extras();
  for (auto* sub : {g, t, x, b, c}) sub->allow_extras();
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    std::vector<std::string> extras;
    for (CLI::App* a : {&app, g, t, x, b, c})
      for (const auto& s : a->remaining()) extras.push_back(s);
    if (!extras.empty()) {
      err << "unexpected arguments:";
      for (const auto& s : extras) err << ' ' << s;
      err << "\nRun with --help for more information.\n";
      return kExitUsage;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) {
      Json flat = config_path.empty() ? Json::object() : read_config_file(config_path);
      const bool source_flag = std::any_of(keyed.begin(), keyed.end(), [](const auto& k) {
        return (k.first == "rule" || k.first == "task" || k.first == "data") && k.second->count() > 0;
      });
      if (source_flag && flat.is_object()) {
        for (const char* key : {"rule", "task", "data", "facts"}) flat.erase(key);
      }
      for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (keyed[i].second->count() > 0) flat[keyed[i].first] = flag_value(keyed[i].first, raw[i]);
      }
      return cmd_train(flat, train_out, jobs, verbose, out, err);
    }
    if (x->parsed()) return cmd_extract(weights_path, eta_prime, extract_data, extract_out, out);
    if (b->parsed()) return cmd_bench(dom, resolution, bench_out, out);
    if (c->parsed()) return cmd_gradcheck(check_seed, check_points, out);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dilp::app
