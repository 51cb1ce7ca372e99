#include "robustreg/robustreg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robustreg;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string method_list() {
  std::string out;
  for (MethodId m : all_methods()) {
    if (!out.empty()) out += ", ";
    out += method_name(m);
  }
  return out;
}

// The eight estimators tabulated side by side in the simulation study.
const std::vector<MethodId> kTableMethods = {
    MethodId::ols, MethodId::m_huber, MethodId::m_tukey, MethodId::lms,
    MethodId::lts, MethodId::s,       MethodId::mm,      MethodId::rewlse};

std::vector<MethodId> parse_method_list(const std::string& arg, bool table_default) {
  if (arg == "all") {
    if (table_default) return kTableMethods;
    return all_methods();
  }
  std::vector<MethodId> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto m = parse_method(tok);
    if (!m) throw DataError("unknown method '" + tok + "'. available: " + method_list());
    out.push_back(*m);
  }
  if (out.empty()) throw DataError("empty method list");
  return out;
}

json fit_to_json(const RegressionFit& f) {
  json j;
  j["method"] = method_name(f.method);
  j["coefficients"] = std::vector<double>(f.coefficients.begin(), f.coefficients.end());
  j["scale"] = f.scale;
  j["objective"] = f.objective;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["weights"] = std::vector<double>(f.weights.begin(), f.weights.end());
  j["residuals"] = std::vector<double>(f.residuals.begin(), f.residuals.end());
  return j;
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& outputs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  outputs.push_back(path.filename().string());
}

// Every file-producing run drops a manifest holding the exact configuration
// needed to reproduce it byte for byte.
void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, std::uint64_t seed, double seconds,
                    const std::vector<std::string>& outputs) {
  json j;
  j["tool"] = "robustreg";
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["wall_time_seconds"] = seconds;
  j["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

struct FitArgs {
  std::string method;
  std::string input;
  std::string response;
  bool no_intercept = false;
  std::uint64_t seed = 0;
  double k1 = 4.68;
  double lambda = 2.5;
  double eta = 2.5;
};

FitOptions make_options(std::uint64_t seed, double k1, double lambda, double eta) {
  FitOptions opt;
  opt.search.rng_seed = seed;
  opt.mm_k1 = k1;
  opt.meanshift_lambda = lambda;
  opt.rewlse_eta = eta;
  return opt;
}

int run_fit(const FitArgs& a) {
  auto method = parse_method(a.method);
  if (!method) {
    std::cerr << "unknown method '" << a.method << "'. available: " << method_list()
              << '\n';
    return 1;
  }
  const Dataset d = dataset_from_csv(a.input, a.response, !a.no_intercept);
  const RegressionFit f = fit(d, *method, make_options(a.seed, a.k1, a.lambda, a.eta));
  std::cout << fit_to_json(f).dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string example = "1";
  std::string error_case = "I";
  int n = 100;
  int reps = 200;
  std::uint64_t seed = 0;
  std::string methods = "all";
  std::string out = ".";
};

Scenario make_scenario(const std::string& example, const std::string& error_case,
                       int n, int reps, std::uint64_t seed) {
  Scenario s;
  s.example = parse_example(example);
  s.error_case = parse_error_case(error_case);
  s.n = n;
  s.replicates = reps;
  s.seed = seed;
  s.validate();
  return s;
}

int run_simulate(const SimulateArgs& a) {
  Timer timer;
  const Scenario s = make_scenario(a.example, a.error_case, a.n, a.reps, a.seed);
  const std::vector<MethodId> methods = parse_method_list(a.methods, true);
  const MseTable table = run_mse(s, methods);
  fs::create_directories(a.out);
  std::vector<std::string> outputs;
  write_file(fs::path(a.out) / "mse.csv", mse_table_csv(table), outputs);
  write_file(fs::path(a.out) / "mse.json", mse_table_json(table) + "\n", outputs);
  json config = {{"example", a.example}, {"case", a.error_case},   {"n", a.n},
                 {"reps", a.reps},       {"methods", a.methods}};
  write_manifest(a.out, "simulate", config, a.seed, timer.seconds(), outputs);
  std::cout << mse_table_csv(table);
  return 0;
}

struct BenchArgs {
  std::string kind;
  std::string method = "all";
  int n = 50;
  int reps = 1000;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int run_bench(const BenchArgs& a) {
  Timer timer;
  const std::vector<MethodId> methods = parse_method_list(a.method, false);
  fs::create_directories(a.out);
  std::vector<std::string> outputs;
  json config = {{"bench", a.kind}, {"method", a.method}, {"n", a.n}, {"reps", a.reps}};

  if (a.kind == "breakdown") {
    std::ostringstream detail;
    std::ostringstream summary;
    summary << "method,n,delta_star\n";
    bool first = true;
    for (MethodId m : methods) {
      const BreakdownReport r = breakdown_probe(m, a.n, a.seed);
      std::string rows = breakdown_report_csv(r);
      if (!first) rows = rows.substr(rows.find('\n') + 1);  // keep one header
      detail << rows;
      summary << method_name(m) << ',' << a.n << ',' << r.delta_star_label() << '\n';
      first = false;
    }
    write_file(fs::path(a.out) / "breakdown.csv", summary.str(), outputs);
    write_file(fs::path(a.out) / "breakdown_detail.csv", detail.str(), outputs);
    write_manifest(a.out, "bench breakdown", config, a.seed, timer.seconds(), outputs);
    std::cout << summary.str();
    return 0;
  }
  if (a.kind == "efficiency") {
    std::ostringstream table;
    table << "method,n,replicates,efficiency_vs_ols\n";
    for (MethodId m : methods) {
      const double ratio = efficiency_probe(m, a.n, a.reps, a.seed);
      table << method_name(m) << ',' << a.n << ',' << a.reps << ',' << ratio << '\n';
    }
    write_file(fs::path(a.out) / "efficiency.csv", table.str(), outputs);
    write_manifest(a.out, "bench efficiency", config, a.seed, timer.seconds(), outputs);
    std::cout << table.str();
    return 0;
  }
  std::cerr << "unknown bench kind '" << a.kind << "' (breakdown|efficiency)\n";
  return 1;
}

struct DemoArgs {
  std::string out = ".";
};

std::string format_coef(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int run_demo(const DemoArgs& a) {
  Timer timer;
  const Dataset full = cigarette_dataset();
  int usa = -1;
  for (int i = 0; i < full.n(); ++i)
    if (full.row_label(i) == "USA") usa = i;
  const Dataset reduced = full.without_row(usa);

  struct Row {
    const char* name;
    RegressionFit(*run)(const Dataset&);
  };
  const Row rows[] = {
      {"ls", [](const Dataset& d) { return fit_ols(d); }},
      {"mm", [](const Dataset& d) { return fit_mm(d); }},
      {"rewlse", [](const Dataset& d) { return fit_rewlse(d); }},
  };

  std::ostringstream fits;
  fits << "method,data,intercept,slope\n";
  std::vector<RegressionFit> full_fits;
  for (const Row& row : rows) {
    const RegressionFit on_full = row.run(full);
    const RegressionFit on_reduced = row.run(reduced);
    fits << row.name << ",complete," << format_coef(on_full.coefficients(0)) << ','
         << format_coef(on_full.coefficients(1)) << '\n';
    fits << row.name << ",without_usa," << format_coef(on_reduced.coefficients(0))
         << ',' << format_coef(on_reduced.coefficients(1)) << '\n';
    full_fits.push_back(on_full);
  }

  std::ostringstream plot;
  plot << "# points: country,consumption,deaths\n";
  for (int i = 0; i < full.n(); ++i)
    plot << full.row_label(i) << ',' << full.x()(i, 0) << ',' << full.y()(i) << '\n';
  plot << "# lines: method,x1,y1,x2,y2\n";
  const double x1 = full.x().col(0).minCoeff();
  const double x2 = full.x().col(0).maxCoeff();
  for (size_t k = 0; k < full_fits.size(); ++k) {
    const Vector& b = full_fits[k].coefficients;
    plot << rows[k].name << ',' << x1 << ',' << format_coef(b(0) + b(1) * x1) << ','
         << x2 << ',' << format_coef(b(0) + b(1) * x2) << '\n';
  }

  fs::create_directories(a.out);
  std::vector<std::string> outputs;
  write_file(fs::path(a.out) / "cigarette_fits.csv", fits.str(), outputs);
  write_file(fs::path(a.out) / "cigarette_plot.csv", plot.str(), outputs);
  write_manifest(a.out, "demo cigarette", json::object(), 0, timer.seconds(), outputs);
  std::cout << fits.str();
  return 0;
}

struct FiguresArgs {
  std::string example = "1";
  int n = 100;
  int reps = 200;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int run_figures(const FiguresArgs& a) {
  Timer timer;
  const std::vector<MethodId> methods = {MethodId::lms, MethodId::lts, MethodId::s,
                                         MethodId::mm, MethodId::rewlse};
  const std::vector<ErrorCase> cases = {ErrorCase::I,  ErrorCase::II, ErrorCase::III,
                                        ErrorCase::IV, ErrorCase::V,  ErrorCase::VI};
  std::vector<MseTable> tables;
  for (ErrorCase c : cases)
    tables.push_back(
        run_mse(make_scenario(a.example, case_name(c), a.n, a.reps, a.seed), methods));

  fs::create_directories(a.out);
  std::vector<std::string> outputs;
  const int n_coef = tables.front().n_coef;
  for (int j = 0; j < n_coef; ++j) {
    std::ostringstream csv;
    csv << "case";
    for (MethodId m : methods) csv << ',' << method_name(m);
    csv << '\n';
    for (size_t c = 0; c < cases.size(); ++c) {
      csv << case_name(cases[c]);
      for (size_t m = 0; m < methods.size(); ++m)
        csv << ',' << tables[c].mse(static_cast<int>(m), j);
      csv << '\n';
    }
    std::string name = "figure_example" + a.example + "_beta" + std::to_string(j) + ".csv";
    write_file(fs::path(a.out) / name, csv.str(), outputs);
  }
  json config = {{"example", a.example}, {"n", a.n}, {"reps", a.reps}};
  write_manifest(a.out, "figures", config, a.seed, timer.seconds(), outputs);
  std::cout << "wrote " << outputs.size() << " figure tables to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust linear regression toolkit"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* cmd_fit = app.add_subcommand("fit", "fit one estimator to a CSV dataset");
  cmd_fit->add_option("--method", fit_args.method, "estimator id")->required();
  cmd_fit->add_option("--input", fit_args.input, "input CSV path")->required();
  cmd_fit->add_option("--response", fit_args.response, "response column name")->required();
  cmd_fit->add_flag("--no-intercept", fit_args.no_intercept, "fit without intercept");
  cmd_fit->add_option("--seed", fit_args.seed, "seed for randomized searches");
  cmd_fit->add_option("--k1", fit_args.k1, "efficient-stage bisquare constant (mm)");
  cmd_fit->add_option("--lambda", fit_args.lambda,
                      "mean-shift threshold in initial-scale units");
  cmd_fit->add_option("--eta", fit_args.eta, "trimming cutoff (rewlse)");

  SimulateArgs sim_args;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "Monte-Carlo MSE table");
  cmd_sim->add_option("--example", sim_args.example, "design: 1 or 2");
  cmd_sim->add_option("--case", sim_args.error_case, "error case I..VI");
  cmd_sim->add_option("--n", sim_args.n, "sample size");
  cmd_sim->add_option("--reps", sim_args.reps, "replicates");
  cmd_sim->add_option("--seed", sim_args.seed, "base seed");
  cmd_sim->add_option("--methods", sim_args.methods, "comma list or 'all'");
  cmd_sim->add_option("--out", sim_args.out, "output directory");

  BenchArgs bench_args;
  CLI::App* cmd_bench = app.add_subcommand("bench", "breakdown / efficiency probes");
  cmd_bench->add_option("kind", bench_args.kind, "breakdown|efficiency")->required();
  cmd_bench->add_option("--method", bench_args.method, "method id or 'all'");
  cmd_bench->add_option("--n", bench_args.n, "sample size");
  cmd_bench->add_option("--reps", bench_args.reps, "replicates (efficiency)");
  cmd_bench->add_option("--seed", bench_args.seed, "base seed");
  cmd_bench->add_option("--out", bench_args.out, "output directory");

  DemoArgs demo_args;
  CLI::App* cmd_demo = app.add_subcommand("demo", "built-in dataset walkthrough");
  std::string demo_name;
  cmd_demo->add_option("name", demo_name, "demo name (cigarette)")->required();
  cmd_demo->add_option("--out", demo_args.out, "output directory");

  FiguresArgs fig_args;
  CLI::App* cmd_fig = app.add_subcommand("figures", "per-coefficient MSE-by-case tables");
  cmd_fig->add_option("--example", fig_args.example, "design: 1 or 2");
  cmd_fig->add_option("--n", fig_args.n, "sample size");
  cmd_fig->add_option("--reps", fig_args.reps, "replicates");
  cmd_fig->add_option("--seed", fig_args.seed, "base seed");
  cmd_fig->add_option("--out", fig_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_fit->parsed()) return run_fit(fit_args);
    if (cmd_sim->parsed()) return run_simulate(sim_args);
    if (cmd_bench->parsed()) return run_bench(bench_args);
    if (cmd_demo->parsed()) {
      if (demo_name != "cigarette") {
        std::cerr << "unknown demo '" << demo_name << "' (available: cigarette)\n";
        return 1;
      }
      return run_demo(demo_args);
    }
    if (cmd_fig->parsed()) return run_figures(fig_args);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
