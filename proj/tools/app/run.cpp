#include "run.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dilp/errors.hpp"
#include "dilp/tasks.hpp"

#ifndef DILP_VERSION
#define DILP_VERSION "0.0.0"
#endif

namespace dilp::app {

std::string version() { return DILP_VERSION; }

namespace {

enum class Kind { Real, Count, Flag, Text };

struct Field {
  std::string name;
  Kind kind;
  std::function<void(RunConfig&, const Json&)> set;
  std::function<Json(const RunConfig&)> get;
};

template <class T>
Field train_field(std::string name, Kind kind, T TrainConfig::*member) {
  return {std::move(name), kind, [member](RunConfig& c, const Json& v) { c.train.*member = v.get<T>(); },
          [member](const RunConfig& c) { return Json(c.train.*member); }};
}

template <class T>
Field source_field(std::string name, Kind kind, T DataSource::*member) {
  return {std::move(name), kind, [member](RunConfig& c, const Json& v) { c.source.*member = v.get<T>(); },
          [member](const RunConfig& c) { return Json(c.source.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(source_field("rule", Kind::Text, &DataSource::rule));
    f.push_back(source_field("task", Kind::Text, &DataSource::task));
    f.push_back(source_field("data", Kind::Text, &DataSource::data));
    f.push_back(source_field("facts", Kind::Text, &DataSource::facts));
    f.push_back(source_field("rows", Kind::Count, &DataSource::rows));
    f.push_back(source_field("noise", Kind::Real, &DataSource::noise));
    f.push_back(source_field("data_seed", Kind::Count, &DataSource::data_seed));
    f.push_back(source_field("split", Kind::Real, &DataSource::split));
    f.push_back(train_field("learning_rate", Kind::Real, &TrainConfig::learning_rate));
    f.push_back(train_field("lr_decay", Kind::Real, &TrainConfig::lr_decay));
    f.push_back(train_field("beta", Kind::Real, &TrainConfig::beta));
    f.push_back(train_field("lambda", Kind::Real, &TrainConfig::lambda));
    f.push_back(train_field("gamma", Kind::Real, &TrainConfig::gamma));
    f.push_back({"op_mode", Kind::Text,
                 [](RunConfig& c, const Json& v) {
                   const auto s = v.get<std::string>();
                   if (s == "attention") c.train.op_mode = OperatorMode::Attention;
                   else if (s == "product") c.train.op_mode = OperatorMode::Product;
                   else throw DomainError("config: op_mode must be attention or product, got " + s);
                 },
                 [](const RunConfig& c) {
                   return Json(c.train.op_mode == OperatorMode::Product ? "product" : "attention");
                 }});
    f.push_back(train_field("eta", Kind::Real, &TrainConfig::eta));
    f.push_back(train_field("c1", Kind::Real, &TrainConfig::c1));
    f.push_back(train_field("c2", Kind::Real, &TrainConfig::c2));
    f.push_back(train_field("epochs", Kind::Count, &TrainConfig::epochs));
    f.push_back(train_field("restarts", Kind::Count, &TrainConfig::restarts));
    f.push_back(train_field("batch_size", Kind::Count, &TrainConfig::batch_size));
    f.push_back(train_field("accuracy_threshold", Kind::Real, &TrainConfig::accuracy_threshold));
    f.push_back(train_field("early_stop", Kind::Flag, &TrainConfig::early_stop));
    f.push_back(train_field("balance", Kind::Flag, &TrainConfig::balance));
    f.push_back(train_field("lambda_E_max", Kind::Real, &TrainConfig::lambda_E_max));
    f.push_back(train_field("lambda_S_max", Kind::Real, &TrainConfig::lambda_S_max));
    f.push_back(train_field("lambda_S_min", Kind::Real, &TrainConfig::lambda_S_min));
    f.push_back(train_field("lambda_R_max", Kind::Real, &TrainConfig::lambda_R_max));
    f.push_back(train_field("lambda_C_max", Kind::Real, &TrainConfig::lambda_C_max));
    f.push_back(train_field("lambda_D_max", Kind::Real, &TrainConfig::lambda_D_max));
    f.push_back(train_field("eta_prime", Kind::Real, &TrainConfig::eta_prime));
    f.push_back(train_field("clip_norm", Kind::Real, &TrainConfig::clip_norm));
    f.push_back(train_field("init_stddev", Kind::Real, &TrainConfig::init_stddev));
    f.push_back(train_field("seed", Kind::Count, &TrainConfig::seed));
    f.push_back(train_field("n_max", Kind::Count, &TrainConfig::n_max));
    return f;
  }();
  return table;
}

void check_type(const Field& f, const Json& v) {
  bool ok = false;
  switch (f.kind) {
    case Kind::Real: ok = v.is_number(); break;
    case Kind::Count: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Kind::Flag: ok = v.is_boolean(); break;
    case Kind::Text: ok = v.is_string(); break;
  }
  if (!ok) throw DomainError("config: wrong type for key " + f.name);
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json atom_json(const Atom& a) { return Json{{"predicate", a.predicate}, {"vars", a.vars}}; }

Atom atom_from(const Json& j) { return {j.at("predicate").get<std::string>(), j.at("vars").get<std::vector<std::size_t>>()}; }

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.name);
  return out;
}

Json to_json(const RunConfig& config) {
  Json out = Json::object();
  for (const auto& f : fields()) out[f.name] = f.get(config);
  return out;
}

RunConfig resolve_config(const Json& flat) {
  if (!flat.is_object()) throw DomainError("config: expected a JSON object");
  for (const auto& [key, value] : flat.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.name == key; });
    if (it == fields().end()) throw DomainError("config: unknown key " + key);
    check_type(*it, value);
  }
  auto text = [&](const char* key) { return flat.contains(key) ? flat.at(key).get<std::string>() : std::string(); };
  const int sources = !text("rule").empty() + !text("task").empty() + !text("data").empty();
  if (sources != 1) throw DomainError("config: exactly one of rule, task and data must be set");

  RunConfig out;
  if (!text("task").empty()) {
    out.train.balance = false;
    out.train.accuracy_threshold = 1.0;
  }
  if (flat.contains("noise") && flat.at("noise").get<double>() > 0.0) out.train.eta_prime = 0.8;
  for (const auto& f : fields()) {
    if (flat.contains(f.name)) f.set(out, flat.at(f.name));
  }
  if (!out.source.facts.empty() && out.source.task.empty()) throw DomainError("config: facts requires task");
  if (!(out.source.split > 0.0 && out.source.split <= 1.0)) throw DomainError("config: split must be in (0, 1]");
  if (!(out.source.noise >= 0.0 && out.source.noise < 0.5)) throw DomainError("config: noise must be in [0, 0.5)");
  out.train.validate();
  return out;
}

Json read_config_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ParseError("config: " + path.string() + ": " + e.what(), e.byte);
  }
  if (j.is_object() && j.contains("schema_version") && j.contains("config")) return j.at("config");
  return j;
}

Problem load_problem(const DataSource& source) {
  Problem p;
  Dataset all;
  if (!source.task.empty()) {
    Task task = builtin_task(source.task);
    if (!source.facts.empty()) {
      task.facts = read_facts(source.facts);
      task.facts.validate();
    }
    p.schema = task.schema;
    p.reference = task.reference;
    p.train = propositionalize(task.facts, task.schema);
    p.val = p.train;
    return p;
  }
  if (!source.rule.empty()) {
    const BuiltinRule rule = builtin_rule(source.rule);
    p.schema = rule.schema;
    p.reference = rule.ast;
    all = gen_synthetic(rule.m, source.rows, rule.ast, source.noise, source.data_seed);
  } else {
    all = load_csv(source.data);
    p.schema = PredicateSchema::propositional(all.m);
  }
  if (source.split >= 1.0) {
    p.train = all;
    p.val = all;
  } else {
    std::tie(p.train, p.val) = split(all, source.split, source.data_seed);
  }
  return p;
}

std::vector<ExtractedRule> extract(const RuleWeights& w, const PredicateSchema& schema, double eta_prime,
                                   const Dataset* data) {
  if (w.m() != schema.m()) throw DomainError("extract: weights do not match the schema width");
  if (data && data->m != schema.m()) throw DomainError("extract: data width does not match the weights");
  std::vector<ExtractedRule> out;
  for (auto& rule : build_rules(identify_predicates(w, eta_prime), data)) {
    ExtractedRule e;
    if (data) e.coverage = coverage(rule, *data);
    e.syntax = validate_syntax(rule, schema);
    e.rule = std::move(rule);
    out.push_back(std::move(e));
  }
  return out;
}

RunResult run(const RunConfig& config, const Problem& problem, std::size_t jobs, std::ostream* progress) {
  RunResult r;
  r.search = search_rule_count(config.train, problem.schema, problem.train, problem.val, {jobs, progress});
  r.rules = extract(r.search.best.weights, problem.schema, config.train.eta_prime, &problem.train);
  if (problem.reference) {
    std::vector<SymbolicRule> got;
    for (const auto& e : r.rules) got.push_back(e.rule);
    r.recovered = same_rules(got, rules_from_ast(*problem.reference));
  }
  return r;
}

Json manifest(const RunConfig& config, const Problem& problem, const RunResult& result) {
  const SearchReport& s = result.search;
  Json runs = Json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"subrules", r.subrules},
                    {"restart", r.restart},
                    {"seed", r.seed},
                    {"epochs", r.epochs},
                    {"final_loss", r.final_loss},
                    {"train_accuracy", r.train_accuracy},
                    {"val_accuracy", r.val_accuracy},
                    {"rule_accuracy", r.rule_accuracy}});
  }
  Json rules = Json::array();
  for (const auto& e : result.rules) {
    rules.push_back({{"text", render_rule(e.rule, problem.schema)},
                     {"body_count", e.coverage.body_count},
                     {"positive_count", e.coverage.positive_count},
                     {"ratio", e.coverage.ratio},
                     {"syntax_valid", e.syntax.valid},
                     {"violations", e.syntax.violations}});
  }
  Json out{{"schema_version", kSchemaVersion},
           {"version", version()},
           {"config", to_json(config)},
           {"data",
            {{"m", problem.schema.m()},
             {"train_rows", problem.train.size()},
             {"train_positives", problem.train.positives()},
             {"val_rows", problem.val.size()},
             {"val_positives", problem.val.positives()}}},
           {"search",
            {{"selected_n", s.selected_n},
             {"best_restart", s.best_restart},
             {"best_seed", s.best.seed},
             {"runs", runs}}},
           {"metrics",
            {{"epochs", s.best.history.size()},
             {"early_stopped", s.best.early_stopped},
             {"final_loss", s.best.final_loss},
             {"train_accuracy", s.best.train_accuracy},
             {"val_accuracy", s.best.val_accuracy},
             {"rule_accuracy", s.best.rule_accuracy}}},
           {"rules", rules}};
  if (result.recovered) out["recovered"] = *result.recovered;
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,loss,train_accuracy,val_accuracy,rule_accuracy\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << fmt(h.loss) << ',' << fmt(h.train_accuracy) << ',' << fmt(h.val_accuracy) << ','
        << fmt(h.rule_accuracy) << '\n';
  }
  return out.str();
}

void write_outputs(const std::filesystem::path& dir, const RunConfig& config, const Problem& problem,
                   const RunResult& result) {
  std::filesystem::create_directories(dir);
  write_text(dir / "manifest.json", manifest(config, problem, result).dump(2) + "\n");
  std::string rules;
  for (const auto& e : result.rules) rules += render_rule(e.rule, problem.schema) + "\n";
  write_text(dir / "rules.txt", rules);
  write_text(dir / "history.csv", history_csv(result.search.best.history));
  write_text(dir / "weights.json", weights_to_json(result.search.best.weights, problem.schema).dump() + "\n");
  const Json timing{{"schema_version", kSchemaVersion},
                    {"search_seconds", result.search.wall_seconds},
                    {"best_run_seconds", result.search.best.wall_seconds}};
  write_text(dir / "timing.json", timing.dump(2) + "\n");
}

Json weights_to_json(const RuleWeights& w, const PredicateSchema& schema) {
  Json body = Json::array();
  for (const auto& a : schema.body()) body.push_back(atom_json(a));
  return Json{{"schema_version", kSchemaVersion},
              {"head", atom_json(schema.head())},
              {"body", body},
              {"n", w.n()},
              {"m", w.m()},
              {"logits", std::vector<double>(w.data().begin(), w.data().end())}};
}

SavedWeights read_weights(const std::filesystem::path& path) {
  try {
    const Json j = Json::parse(read_text(path));
    std::vector<Atom> body;
    for (const auto& a : j.at("body")) body.push_back(atom_from(a));
    SavedWeights out{PredicateSchema(atom_from(j.at("head")), std::move(body)), {}};
    const auto n = j.at("n").get<std::size_t>();
    const auto m = j.at("m").get<std::size_t>();
    if (m != out.schema.m()) throw DomainError("weights: m does not match the body atoms");
    out.weights = RuleWeights(n, m, j.at("logits").get<std::vector<double>>());
    return out;
  } catch (const Json::parse_error& e) {
    throw ParseError("weights: " + path.string() + ": " + e.what(), e.byte);
  } catch (const Json::exception& e) {
    throw DomainError("weights: " + path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw DomainError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dilp::app
