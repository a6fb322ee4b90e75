#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfgeom/connection.hpp"
#include "lfgeom/curvature.hpp"
#include "lfgeom/errors.hpp"
#include "lfgeom/fundamental.hpp"
#include "lfgeom/geodesics.hpp"
#include "lfgeom/models.hpp"
#include "lfgeom/transport.hpp"
#include "lfgeom/verify.hpp"

namespace lfgeom::cli {

namespace {

using nlohmann::json;

json read_json_arg(const std::string& text) {
  std::string src = text;
  if (!text.empty() && text.front() != '{' && text.front() != '[' && std::filesystem::exists(text)) {
    std::ifstream in(text);
    std::stringstream ss;
    ss << in.rdbuf();
    src = ss.str();
  }
  try {
    return json::parse(src);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, "cannot parse JSON argument '" + text + "': " + e.what());
  }
}

// Inline JSON, a JSON file, or a bare zoo name.
ModelPtr load_model(const std::string& arg) {
  if (arg.empty()) throw Error(ErrorCode::kBadConfig, "--model is required");
  if (arg.front() == '{' || std::filesystem::exists(arg)) return model_from_json(read_json_arg(arg));
  return model_from_json(json{{"name", arg}});
}

// "1,0.5" or "[1, 0.5]".
Vec parse_vec(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == '[' || c == ']') c = ' ';
  std::istringstream in(s);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kBadConfig, "not a number list: '" + text + "'");
    }
  }
  if (vals.empty() || vals.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::kBadConfig, "vector must have 1 to 4 entries: '" + text + "'");
  }
  Vec v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
  return v;
}

Vec parse_vec_dim(const std::string& text, const SpacetimeModel& m, const char* what) {
  Vec v = parse_vec(text);
  if (v.size() != m.dim()) {
    throw Error(ErrorCode::kBadConfig, std::string(what) + " must have " + std::to_string(m.dim()) + " entries");
  }
  return v;
}

DiscreteMeasure load_measure(const std::string& arg, int dim) {
  json j = read_json_arg(arg);
  if (!j.is_object() || !j.contains("atoms")) throw Error(ErrorCode::kBadConfig, "measure JSON needs \"atoms\"");
  DiscreteMeasure mu;
  try {
    for (const json& a : j.at("atoms")) {
      std::vector<double> xs = a.get<std::vector<double>>();
      mu.atoms.push_back(Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<int>(xs.size())));
    }
    if (j.contains("weights")) {
      mu.weights = j.at("weights").get<std::vector<double>>();
    } else {
      mu.weights.assign(mu.atoms.size(), 1.0 / static_cast<double>(mu.atoms.size()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("bad measure JSON: ") + e.what());
  }
  for (const Point& a : mu.atoms)
    if (a.size() != dim) throw Error(ErrorCode::kBadConfig, "measure atom dimension does not match the space");
  return mu;
}

GroundSpace load_space(const std::string& arg) {
  json j = read_json_arg(arg);
  GroundSpace sp;
  try {
    sp.dim = j.value("dim", 2);
    const std::string norm = j.value("norm", std::string("euclidean"));
    if (norm == "euclidean") {
      sp = euclidean_space(sp.dim);
    } else if (norm == "p-norm" || norm == "pnorm") {
      sp = p_norm_space(sp.dim, j.at("p").get<double>());
    } else {
      throw Error(ErrorCode::kBadConfig, "norm must be \"euclidean\" or \"p-norm\"");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("bad space JSON: ") + e.what());
  }
  validate(sp);
  return sp;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// Where a data product goes: "csv"/"json" mean that format on stdout, anything else is a file path.
struct Sink {
  std::string target;

  bool to_stdout() const { return target.empty() || target == "csv" || target == "json" || target == "-"; }

  void write(const std::string& text, std::ostream& out) const {
    if (to_stdout()) {
      out << text;
      return;
    }
    std::ofstream f(target);
    if (!f) throw Error(ErrorCode::kBadConfig, "cannot open output file " + target);
    f << text;
  }
};

std::string path_csv(const GeodesicPath& p) {
  std::ostringstream os;
  const int n = p.model->dim();
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  for (int i = 0; i < n; ++i) os << ",v" << i;
  os << "\n";
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    os << fmt(p.t[k]);
    for (int i = 0; i < n; ++i) os << "," << fmt(p.x[k](i));
    for (int i = 0; i < n; ++i) os << "," << fmt(p.v[k](i));
    os << "\n";
  }
  return os.str();
}

struct Options {
  bool json_out = false;
  std::string model;
  std::uint64_t seed = 42;
  std::string out;
  bool timing = false;
  // per-subcommand
  std::string x, v, from, to, space, mu, nu, kind = "all";
  int samples = 200, points = 8, dirs = 6, grid = 17, pairs = -1, paths = 50;
  bool timelike_only = false;
};

void print_report_human(const CheckReport& r, std::ostream& out) {
  out << r.check << ": " << (r.pass ? "pass" : "fail");
  if (r.worst_deficit) out << "  worst_deficit=" << fmt(*r.worst_deficit);
  out << "\n";
}

int cmd_zoo(const Options& o, std::ostream& out) {
  if (o.json_out) {
    out << json(zoo_names()).dump() << "\n";
  } else {
    for (const std::string& n : zoo_names()) out << n << "\n";
  }
  return 0;
}

int cmd_classify(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  const Vec x = parse_vec_dim(o.x, *m, "--x"), v = parse_vec_dim(o.v, *m, "--v");
  require_in_chart(*m, x);
  CausalClass c = classify(*m, x, v);
  json j{{"kind", std::string(to_string(c.kind))},
         {"orientation", std::string(to_string(c.orientation))},
         {"L", m->in_cone(v) ? json(eval_L(*m, x, v)) : json(nullptr)}};
  if (c.causal()) j["F"] = norm_F(*m, x, v);
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_metric(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  const Vec x = parse_vec_dim(o.x, *m, "--x"), v = parse_vec_dim(o.v, *m, "--v");
  MetricAtV g = metric_tensor(*m, x, v);
  json rows = json::array();
  for (int i = 0; i < m->dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < m->dim(); ++j) row.push_back(g.g(i, j));
    rows.push_back(row);
  }
  out << json{{"g", rows}, {"L", eval_L(*m, x, v)}}.dump(2) << "\n";
  return 0;
}

int cmd_geodesic(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  const Vec x = parse_vec_dim(o.from, *m, "--from"), y = parse_vec_dim(o.to, *m, "--to");
  BvpOptions opts;
  std::vector<double> grid(o.grid);
  for (int i = 0; i < o.grid; ++i) grid[i] = static_cast<double>(i) / (o.grid - 1);
  opts.forced = grid;
  BvpSolution sol = solve_bvp(m, x, y, opts);
  const double tau = time_separation(m, x, y);
  json j{{"velocity", to_json(sol.velocity)}, {"tau", tau}, {"iterations", sol.iterations}};
  const std::string csv = path_csv(sol.path);
  Sink sink{o.out};
  if (sink.to_stdout()) {
    j["path_csv"] = csv;
  } else {
    sink.write(csv, out);
    j["path_csv"] = o.out;
  }
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_curvature_scan(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  CurvatureScan scan = curvature_scan(m, o.samples, o.seed);
  const FlagSample& worst = scan.samples[scan.argmin];
  json summary{{"min_K", scan.min_K},
               {"argmin", {{"index", scan.argmin}, {"x", to_json(worst.x)}, {"v", to_json(worst.v)}, {"w", to_json(worst.w)}}},
               {"samples", o.samples},
               {"seed", o.seed}};
  std::ostringstream csv;
  const int n = m->dim();
  for (const char* name : {"x", "v", "w"})
    for (int i = 0; i < n; ++i) csv << name << i << ",";
  csv << "K\n";
  for (const FlagSample& s : scan.samples) {
    for (const Vec* p : {&s.x, &s.v, &s.w})
      for (int i = 0; i < n; ++i) csv << fmt((*p)(i)) << ",";
    csv << fmt(s.K) << "\n";
  }
  Sink sink{o.out};
  if (sink.to_stdout() && !o.json_out && o.out != "json") {
    sink.write(csv.str(), out);
    return 0;
  }
  if (!sink.to_stdout()) sink.write(csv.str(), out);
  out << summary.dump(2) << "\n";
  return 0;
}

int cmd_berwald(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  CheckReport r = scan_berwald(m, o.points, o.dirs, o.seed);
  json j = r.to_json();
  j["max_deviation"] = r.details["max_deviation"];
  Sink sink{o.out};
  if (!sink.to_stdout()) sink.write(j.dump(2) + "\n", out);
  out << j.dump(2) << "\n";
  return r.pass ? 0 : 1;
}

CheckReport composite(const std::string& name, std::uint64_t seed, const std::vector<CheckReport>& parts) {
  CheckReport r;
  r.check = name;
  r.seed = seed;
  r.details["checks"] = json::array();
  for (const CheckReport& p : parts) {
    r.pass = r.pass && p.pass;
    if (!p.pass && r.witness.is_null()) r.witness = {{"check", p.check}, {"witness", p.witness}};
    r.details["checks"].push_back(p.to_json());
  }
  return r;
}

int cmd_verify(const Options& o, std::ostream& out) {
  ModelPtr m = load_model(o.model);
  const auto start = std::chrono::steady_clock::now();
  TheoremBudget b;
  if (o.pairs > 0) {
    b.concavity_pairs = o.pairs;
    b.capsule_pairs = o.pairs;
  }
  CheckReport r;
  if (o.kind == "concavity") {
    r = scan_concavity(m, b.concavity_pairs, b.grid_size, o.timelike_only, o.seed);
  } else if (o.kind == "capsule") {
    r = composite("capsule", o.seed,
                  {scan_capsules(m, CapsuleSide::kFuture, b.capsule_pairs, b.s_grid, b.capsule_r, o.seed),
                   scan_capsules(m, CapsuleSide::kPast, b.capsule_pairs, b.s_grid, b.capsule_r, o.seed)});
    double worst = 0.0;
    bool first = true;
    for (const json& c : r.details["checks"]) {
      const double d = c["worst_deficit"].get<double>();
      worst = first ? d : std::min(worst, d);
      first = false;
    }
    r.worst_deficit = worst;
  } else if (o.kind == "berwald") {
    r = scan_berwald(m, o.points, o.dirs, o.seed);
  } else if (o.kind == "parallel") {
    r = scan_parallel(m, o.paths, 1e-6, o.seed);
  } else if (o.kind == "flag") {
    r = scan_flag_curvature(m, o.samples, o.seed);
  } else {
    TheoremReport t = verify_theorem(m, b, o.seed);
    r = composite("all", o.seed, t.conditions);
    r.details["berwald"] = t.berwald;
    r.details["agree"] = t.agree;
    r.details["warnings"] = t.warnings;
  }
  if (o.timing) {
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  const std::string text = r.to_json().dump(2) + "\n";
  Sink sink{o.out};
  if (!sink.to_stdout()) sink.write(text, out);
  if (o.json_out || sink.to_stdout()) {
    out << text;
  } else {
    print_report_human(r, out);
    for (const json& c : r.details.value("checks", json::array())) {
      out << "  " << c["check"].get<std::string>() << ": " << c["verdict"].get<std::string>() << "\n";
    }
  }
  return r.pass ? 0 : 1;
}

int cmd_variance(const Options& o, std::ostream& out) {
  const GroundSpace sp = load_space(o.space.empty() ? "{\"dim\":2,\"norm\":\"euclidean\"}" : o.space);
  const DiscreteMeasure mu = load_measure(o.mu, sp.dim), nu = load_measure(o.nu, sp.dim);
  SqrtVarReport rep = check_sqrt_var_convexity(sp, mu, nu, o.grid);
  const TransportPlan plan = w2_distance(sp, mu, nu);
  std::ostringstream csv;
  csv << "t,sqrt_var,var\n";
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    csv << fmt(rep.grid[i]) << "," << fmt(rep.sqrt_var[i]) << "," << fmt(rep.sqrt_var[i] * rep.sqrt_var[i]) << "\n";
  }
  json j{{"check", "sqrt-var-convexity"},
         {"verdict", rep.pass ? "pass" : "fail"},
         {"worst_deficit", rep.worst_deficit},
         {"w2", plan.distance},
         {"threshold", rep.threshold}};
  if (!rep.pass) j["witness"] = {{"t", rep.grid[rep.witness_index]}};
  Sink sink{o.out};
  if (sink.to_stdout() && !o.json_out && o.out != "json") {
    out << csv.str();
  } else {
    if (!sink.to_stdout()) sink.write(csv.str(), out);
    out << j.dump(2) << "\n";
  }
  return rep.pass ? 0 : 1;
}

}  // namespace

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chart-local Lorentz-Finsler geometry and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_flag("--json", o.json_out, "Machine-readable output");

  auto add_model = [&](CLI::App* c) { c->add_option("--model", o.model, "Model: JSON object, JSON file or zoo name")->required(); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "64-bit seed"); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output file, or csv/json for stdout"); };

  CLI::App* zoo = app.add_subcommand("zoo", "Model zoo");
  zoo->add_subcommand("list", "List zoo model names");
  zoo->require_subcommand(1);

  CLI::App* cls = app.add_subcommand("classify", "Causal character of a vector");
  add_model(cls);
  cls->add_option("--x", o.x, "Point")->required();
  cls->add_option("--v", o.v, "Vector")->required();

  CLI::App* met = app.add_subcommand("metric", "Fundamental tensor g_v at x");
  add_model(met);
  met->add_option("--x", o.x, "Point")->required();
  met->add_option("--v", o.v, "Reference vector")->required();

  CLI::App* geo = app.add_subcommand("geodesic", "Geodesic between two points and their time separation");
  add_model(geo);
  geo->add_option("--from", o.from, "Start point")->required();
  geo->add_option("--to", o.to, "End point")->required();
  geo->add_option("--grid", o.grid, "Output knots")->check(CLI::Range(2, 100000));
  add_out(geo);

  CLI::App* cs = app.add_subcommand("curvature-scan", "Sample flag curvature");
  add_model(cs);
  add_seed(cs);
  add_out(cs);
  cs->add_option("--samples", o.samples)->check(CLI::Range(1, 10000000));

  CLI::App* bw = app.add_subcommand("berwald-check", "Direction dependence of the Chern coefficients");
  add_model(bw);
  add_seed(bw);
  add_out(bw);
  bw->add_option("--points", o.points)->check(CLI::Range(1, 100000));
  bw->add_option("--dirs", o.dirs)->check(CLI::Range(2, 100000));

  CLI::App* ver = app.add_subcommand("verify", "Run a verification check");
  ver->add_option("check", o.kind, "concavity|capsule|berwald|parallel|flag|all")
      ->required()
      ->check(CLI::IsMember({"concavity", "capsule", "berwald", "parallel", "flag", "all"}));
  add_model(ver);
  add_seed(ver);
  add_out(ver);
  ver->add_flag("--timing", o.timing, "Record runtime_ms");
  ver->add_flag("--timelike-only", o.timelike_only, "Concavity along timelike geodesics only");
  ver->add_option("--pairs", o.pairs, "Pairs per concavity/capsule scan")->check(CLI::Range(1, 100000));
  ver->add_option("--samples", o.samples, "Flag samples")->check(CLI::Range(1, 10000000));
  ver->add_option("--points", o.points)->check(CLI::Range(1, 100000));
  ver->add_option("--dirs", o.dirs)->check(CLI::Range(2, 100000));
  ver->add_option("--paths", o.paths)->check(CLI::Range(1, 100000));

  CLI::App* var = app.add_subcommand("variance-demo", "sqrt(var) along a W2 geodesic");
  var->add_option("--space", o.space, "Ground space JSON");
  var->add_option("--mu", o.mu, "Measure JSON or file")->required();
  var->add_option("--nu", o.nu, "Measure JSON or file")->required();
  var->add_option("--grid", o.grid)->check(CLI::Range(3, 100000));
  add_out(var);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "bad-config: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*zoo) return cmd_zoo(o, out);
    if (*cls) return cmd_classify(o, out);
    if (*met) return cmd_metric(o, out);
    if (*geo) return cmd_geodesic(o, out);
    if (*cs) return cmd_curvature_scan(o, out);
    if (*bw) return cmd_berwald(o, out);
    if (*ver) return cmd_verify(o, out);
    if (*var) return cmd_variance(o, out);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace lfgeom::cli
