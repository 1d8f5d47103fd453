#include "nlshape/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nlshape/format.hpp"
#include "nlshape/funcs1d.hpp"
#include "nlshape/hostility.hpp"
#include "nlshape/law_io.hpp"
#include "nlshape/laws.hpp"
#include "nlshape/nonlocal.hpp"
#include "nlshape/parallel.hpp"
#include "nlshape/shape.hpp"
#include "nlshape/shape_factor.hpp"

namespace nlshape::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

double parse_real(std::string_view text) {
  const std::string token = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("schedule: cannot parse number \"" + token + "\"");
  }
  if (used != token.size()) throw std::invalid_argument("schedule: cannot parse number \"" + token + "\"");
  return value;
}

// Expands "a..b", "a..b:step" and "a..bxratio"; splits lists on commas.
std::vector<double> expand_schedule(std::string_view text) {
  const std::string spec = trim(text);
  if (spec.empty()) throw std::invalid_argument("schedule is empty");
  const auto dots = spec.find("..");
  if (dots == std::string::npos) {
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const auto comma = spec.find(',', start);
      values.push_back(parse_real(std::string_view(spec).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return values;
  }
  const double first = parse_real(std::string_view(spec).substr(0, dots));
  std::string rest = spec.substr(dots + 2);
  double step = 1.0;
  double ratio = 0.0;
  if (const auto colon = rest.find(':'); colon != std::string::npos) {
    step = parse_real(std::string_view(rest).substr(colon + 1));
    rest = rest.substr(0, colon);
  } else if (const auto times = rest.find('x'); times != std::string::npos) {
    ratio = parse_real(std::string_view(rest).substr(times + 1));
    rest = rest.substr(0, times);
  }
  const double last = parse_real(rest);
  std::vector<double> values;
  constexpr std::size_t kMaxEntries = 1000000;
  if (ratio != 0.0) {
    if (!(ratio > 0.0) || ratio == 1.0 || !(first > 0.0) || !(last > 0.0))
      throw std::invalid_argument("schedule: geometric ranges need positive ends and a positive ratio != 1");
    if ((ratio > 1.0) != (last >= first) && first != last)
      throw std::invalid_argument("schedule: ratio moves away from the range end");
    const double slack = 1e-9 * std::abs(last);
    for (std::size_t i = 0;; ++i) {
      const double value = first * std::pow(ratio, static_cast<double>(i));
      if (ratio > 1.0 ? value > last + slack : value < last - slack) break;
      values.push_back(value);
      if (values.size() > kMaxEntries) throw std::invalid_argument("schedule: too many entries");
    }
  } else {
    if (last < first) step = -std::abs(step);
    if (step == 0.0 || (last - first) * step < 0.0)
      throw std::invalid_argument("schedule: step moves away from the range end");
    const double slack = 1e-9 * std::max(std::abs(step), std::abs(last));
    for (std::size_t i = 0;; ++i) {
      const double value = first + step * static_cast<double>(i);
      if (step > 0.0 ? value > last + slack : value < last - slack) break;
      values.push_back(value);
      if (values.size() > kMaxEntries) throw std::invalid_argument("schedule: too many entries");
    }
  }
  return values;
}

Json number(double value) {
  if (std::isfinite(value)) return value;
  return format_number(value);
}

struct Config {
  std::string law = "step:1";
  double p = 1.0;
  std::string delta = "1e-1,1e-2,1e-3";
  std::string n;
  std::uint64_t seed = kDefaultSeed;
  std::string out = "nlshape-out";
  double tol = 0.0;  // 0 keeps each command's default
  bool json = false;
  // Command-specific knobs.
  int d = 1;
  std::string m = "1..5";
  std::string profile = "bump";
  int k = 1;
  int range = 3;
  int trials = 100;
  int restarts = 8;
  int steps = 16;
  double width = 0.25;
};

struct Outcome {
  std::string csv;
  Json result = Json::object();
  std::string failure;  // non-empty: an assertion of the experiment failed
};

Json config_json(const std::string& command, const Config& c) {
  Json config = {{"law", c.law}, {"p", c.p}, {"seed", c.seed}, {"out", c.out}, {"tol", c.tol},
                 {"json", c.json}, {"workers", worker_count()}};
  if (command == "geom-constant") config["d"] = c.d;
  if (command == "pointwise-limit" || command == "recovery") {
    config["delta"] = c.delta;
    config["u"] = c.profile;
  }
  if (command == "shape-factor" || command == "minimize" || command == "sup-demo" || command == "verify-identity") {
    config["n"] = c.n;
    config["restarts"] = c.restarts;
  }
  if (command == "shape-factor") {
    config["steps"] = c.steps;
    config["width"] = c.width;
  }
  if (command == "sup-demo") config["m"] = c.m;
  if (command == "hostility-check") {
    config["n"] = c.n;
    config["range"] = c.range;
    config["k"] = c.k;
  }
  if (command == "hostility-check" || command == "verify-identity") config["trials"] = c.trials;
  return config;
}

std::vector<double> law_coefficients(const laws::InteractionLaw& law, const Config& c, Json& result) {
  if (auto lambdas = laws::pca_coefficients(law)) return *lambdas;
  const auto approximation = laws::lower_pca_approximation(law, c.steps, c.width);
  result["approximation"] = laws::describe(approximation);
  return *laws::pca_coefficients(approximation);
}

shape::MinimizeOptions minimize_options(const Config& c) {
  shape::MinimizeOptions options;
  options.restarts = c.restarts;
  options.seed = c.seed;
  if (c.tol > 0.0) options.tolerance = c.tol;
  return options;
}

Outcome scale_factor_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  const auto report = laws::scale_factor_report(law, c.tol > 0.0 ? c.tol : 1e-10);
  Outcome o;
  o.csv = "law,N,error,exact\n" + laws::describe(law) + "," + format_number(report.value) + "," +
          format_number(report.error_estimate) + "," + (report.exact ? "true" : "false") + "\n";
  o.result = {{"law", laws::describe(law)}, {"N", number(report.value)}, {"error", report.error_estimate},
              {"exact", report.exact}};
  if (!report.diagnostic.empty()) o.result["diagnostic"] = report.diagnostic;
  return o;
}

Outcome geom_constant_command(const Config& c) {
  const double g = laws::geometric_constant(c.d, c.p, c.tol > 0.0 ? c.tol : 1e-12);
  Outcome o;
  o.csv = "d,p,G\n" + std::to_string(c.d) + "," + format_number(c.p) + "," + format_number(g) + "\n";
  o.result = {{"d", c.d}, {"p", c.p}, {"G", g}};
  return o;
}

Outcome shape_factor_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  Outcome o;
  const auto lambdas = law_coefficients(law, c, o.result);
  shape::ShapeFactorOptions options;
  options.minimize = minimize_options(c);
  const auto schedule = parse_integer_schedule(c.n.empty() ? "16..128:16" : c.n);
  const auto estimate = shape::shape_factor_estimate(lambdas, c.p, schedule, options);
  o.csv = "n,I_n,I_n_over_n_p,fit_constant,K_hat\n";
  for (const auto& row : estimate.rows)
    o.csv += std::to_string(row.n) + "," + format_number(row.value) + "," + format_number(row.scaled) + "," +
             format_number(estimate.limit.constant) + "," + format_number(estimate.estimate) + "\n";
  o.result["law"] = laws::describe(law);
  o.result["label"] = estimate.label;
  o.result["K_hat"] = estimate.estimate;
  o.result["uncertainty"] = estimate.uncertainty;
  o.result["fit_constant"] = estimate.limit.constant;
  o.result["fit_model"] = estimate.limit.model_used;
  if (estimate.limit.alternative_constant) o.result["fit_constant_quadratic"] = *estimate.limit.alternative_constant;
  o.result["kappa"] = estimate.kappa;
  o.result["G"] = estimate.geometric;
  o.result["N"] = estimate.scale;
  o.result["all_converged"] = estimate.all_converged;
  if (!estimate.all_converged) o.result["warning"] = "some minimisations stopped above the residual tolerance";
  return o;
}

Outcome sup_demo_command(const Config& c) {
  if (c.p != 1.0) throw std::invalid_argument("sup-demo is defined for p = 1 only");
  std::vector<int> ms;
  for (auto m : parse_integer_schedule(c.m)) ms.push_back(static_cast<int>(m));
  shape::ShapeFactorOptions options;
  options.minimize = minimize_options(c);
  const auto demo = shape::sup_demo(ms, parse_integer_schedule(c.n.empty() ? "64,96,128,192,256" : c.n), options);
  Outcome o;
  o.csv = "m,K_hat,uncertainty,prediction\n";
  Json rows = Json::array();
  for (const auto& row : demo.rows) {
    o.csv += std::to_string(row.m) + "," + format_number(row.estimate) + "," + format_number(row.uncertainty) + "," +
             format_number(row.prediction) + "\n";
    rows.push_back({{"m", row.m}, {"K_hat", row.estimate}, {"prediction", row.prediction}});
  }
  o.result = {{"rows", rows}, {"strictly_increasing", demo.strictly_increasing},
              {"label", "lower-bound constant (conjecturally sharp)"}};
  if (!demo.strictly_increasing) o.failure = "estimates are not strictly increasing in m";
  return o;
}

nonlocal::EvaluationOptions evaluation_options(const Config& c) {
  nonlocal::EvaluationOptions options;
  if (c.tol > 0.0) options.quadrature_tolerance = c.tol;
  return options;
}

Outcome study_outcome(const std::vector<nonlocal::StudyRow>& rows) {
  Outcome o;
  o.csv = nonlocal::study_csv(rows);
  const auto& last = rows.back();
  o.result = {{"final_delta", last.delta}, {"final_value", number(last.value.value)},
              {"target", number(last.target)}, {"final_ratio", number(last.ratio)},
              {"degenerate", last.degenerate}};
  bool converged = true;
  for (const auto& row : rows) converged = converged && row.value.converged;
  o.result["converged"] = converged;
  if (!converged) o.failure = "quadrature did not reach the requested tolerance";
  return o;
}

nonlocal::Profile profile_of(const std::string& name) {
  if (name == "bump") return funcs1d::bump_function();
  if (name == "tent") return funcs1d::tent_function();
  throw std::invalid_argument("unknown profile \"" + name + "\" (expected bump or tent)");
}

Outcome pointwise_limit_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  const auto deltas = parse_real_schedule(c.delta);
  return study_outcome(nonlocal::pointwise_limit_study(law, profile_of(c.profile), c.p, deltas, evaluation_options(c)));
}

Outcome recovery_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  const auto profile = profile_of(c.profile);
  const auto* affine = std::get_if<funcs1d::PiecewiseAffine1D>(&profile);
  if (!affine) throw std::invalid_argument("recovery needs a piecewise-affine profile (--u tent)");
  return study_outcome(nonlocal::recovery_study(law, *affine, c.p, parse_real_schedule(c.delta)));
}

Outcome hostility_command(const Config& c) {
  const auto lengths = parse_integer_schedule(c.n.empty() ? "5" : c.n);
  if (lengths.size() != 1) throw std::invalid_argument("hostility-check takes a single --n");
  const auto report = hostility::verify_rearrangement_minimality(static_cast<int>(lengths.front()), c.range, c.k,
                                                                 c.trials, c.seed);
  Outcome o;
  o.csv = "n,species_range,k,trials,seed,arrangements,comparisons,counterexamples,min_gap,result\n" +
          std::to_string(report.n) + "," + std::to_string(report.species_range) + "," + std::to_string(report.k) +
          "," + std::to_string(report.trials) + "," + std::to_string(report.seed) + "," +
          std::to_string(report.arrangements) + "," + std::to_string(report.comparisons) + "," +
          std::to_string(report.counterexamples) + "," + format_number(report.min_gap) + "," +
          (report.passed ? "pass" : "fail") + "\n";
  o.result = {{"arrangements", report.arrangements}, {"comparisons", report.comparisons},
              {"counterexamples", report.counterexamples}, {"min_gap", report.min_gap},
              {"result", report.passed ? "pass" : "fail"}};
  if (!report.passed) o.failure = std::to_string(report.counterexamples) + " counterexamples to H_k(u) >= H_k(Mu)";
  return o;
}

Outcome verify_identity_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  Outcome o;
  const auto lambdas = law_coefficients(law, c, o.result);
  const auto lengths = parse_integer_schedule(c.n.empty() ? std::to_string(shape::effective_order(lambdas) + 2) : c.n);
  o.csv = "n,p,trials,kappa\n";
  Json rows = Json::array();
  for (auto n : lengths) {
    const double kappa = nonlocal::verify_p_identity(n, lambdas, c.p, c.trials, c.seed);
    o.csv += std::to_string(n) + "," + format_number(c.p) + "," + std::to_string(c.trials) + "," +
             format_number(kappa) + "\n";
    rows.push_back({{"n", n}, {"kappa", kappa}});
  }
  o.result["law"] = laws::describe(law);
  o.result["rows"] = rows;
  o.result["constant_within"] = 1e-8;
  return o;
}

Outcome minimize_command(const Config& c) {
  const auto law = laws::load_law(c.law);
  Outcome o;
  const auto lambdas = law_coefficients(law, c, o.result);
  const auto lengths = parse_integer_schedule(c.n.empty() ? "2..16" : c.n);
  std::vector<shape::MinimizationReport> reports(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    auto options = minimize_options(c);
    options.seed = split_seed(c.seed, lengths[i]);
    reports[i] = shape::minimize_I(lengths[i], lambdas, c.p, options);
  }
  o.csv = "n,I_n,I_n_over_n_p,equal_length_value,residual,iterations,converged\n";
  bool converged = true;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto& r = reports[i];
    converged = converged && r.converged;
    o.csv += std::to_string(lengths[i]) + "," + format_number(r.value) + "," +
             format_number(r.value / std::pow(static_cast<double>(lengths[i]), c.p)) + "," +
             format_number(shape::equal_length_value(lengths[i], lambdas, c.p)) + "," +
             format_number(r.first_order_residual) + "," + std::to_string(r.iterations) + "," +
             (r.converged ? "true" : "false") + "\n";
  }
  o.result["law"] = laws::describe(law);
  o.result["rows"] = lengths.size();
  o.result["all_converged"] = converged;
  return o;
}

void flatten(const Json& node, const std::string& prefix, std::string& text) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, text);
    return;
  }
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], prefix + "[" + std::to_string(i) + "]", text);
    return;
  }
  text += prefix + ": ";
  if (node.is_string()) {
    text += node.get<std::string>();
  } else if (node.is_number_float()) {
    text += format_number(node.get<double>());
  } else {
    text += node.dump();
  }
  text += "\n";
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << contents;
  if (!file) throw std::runtime_error("cannot write " + path.string());
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--tol", c.tol, "tolerance override");
  sub->add_flag("--json", c.json, "write the summary as JSON");
}

}  // namespace

std::vector<double> parse_real_schedule(std::string_view text) { return expand_schedule(text); }

std::vector<std::size_t> parse_integer_schedule(std::string_view text) {
  std::vector<std::size_t> result;
  for (double value : expand_schedule(text)) {
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-9 * std::max(1.0, std::abs(value)) || rounded < 0.0)
      throw std::invalid_argument("schedule: expected non-negative integers, got " + format_number(value));
    result.push_back(static_cast<std::size_t>(rounded));
  }
  for (std::size_t i = 1; i < result.size(); ++i)
    if (result[i] <= result[i - 1]) throw std::invalid_argument("schedule must be strictly increasing");
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Non-local functionals, interaction laws and shape factors", "nlshape");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Config c;
  using Handler = std::function<Outcome(const Config&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* description, Handler handler) {
    auto* sub = app.add_subcommand(name, description);
    add_common(sub, c);
    commands.emplace_back(sub, std::move(handler));
    return sub;
  };
  auto law_option = [&](CLI::App* sub) {
    sub->add_option("--law", c.law, "law file or inline spec (step:1, pca:[1,1,1], ramp, JSON)")->capture_default_str();
  };
  auto p_option = [&](CLI::App* sub) { sub->add_option("--p", c.p, "exponent p >= 1")->capture_default_str(); };

  auto* scale = add("scale-factor", "N(phi) of a law", scale_factor_command);
  law_option(scale);
  auto* geom = add("geom-constant", "G_{d,p}", geom_constant_command);
  p_option(geom);
  geom->add_option("--d", c.d, "dimension")->capture_default_str();
  auto* shape_cmd = add("shape-factor", "extrapolated shape factor K_hat", shape_factor_command);
  law_option(shape_cmd);
  p_option(shape_cmd);
  shape_cmd->add_option("--n", c.n, "n schedule (default 16..128:16)");
  shape_cmd->add_option("--restarts", c.restarts, "random starts per n")->capture_default_str();
  shape_cmd->add_option("--steps", c.steps, "steps for the piecewise-constant approximation of other laws")
      ->capture_default_str();
  shape_cmd->add_option("--width", c.width, "step width of that approximation")->capture_default_str();
  auto* sup = add("sup-demo", "K_hat for 2^m - 1 unit coefficients", sup_demo_command);
  p_option(sup);
  sup->add_option("--m", c.m, "package counts")->capture_default_str();
  sup->add_option("--n", c.n, "n schedule (default 64,96,128,192,256)");
  sup->add_option("--restarts", c.restarts, "random starts per n")->capture_default_str();
  auto* pointwise = add("pointwise-limit", "Lambda_delta against its pointwise limit", pointwise_limit_command);
  law_option(pointwise);
  p_option(pointwise);
  pointwise->add_option("--delta", c.delta, "decreasing delta schedule")->capture_default_str();
  pointwise->add_option("--u", c.profile, "profile: bump or tent")->capture_default_str();
  auto* recovery = add("recovery", "Lambda_delta(S_delta u) against the pointwise limit", recovery_command);
  law_option(recovery);
  p_option(recovery);
  recovery->add_option("--delta", c.delta, "decreasing delta schedule")->capture_default_str();
  recovery->add_option("--u", c.profile, "profile (tent)");
  auto* hostile = add("hostility-check", "exhaustive rearrangement check", hostility_command);
  hostile->add_option("--n", c.n, "arrangement length (default 5)");
  hostile->add_option("--range", c.range, "species 0..range")->capture_default_str();
  hostile->add_option("--k", c.k, "hostility threshold")->capture_default_str();
  hostile->add_option("--trials", c.trials, "random weight tables")->capture_default_str();
  auto* identity = add("verify-identity", "kappa_p = Lambda_hat / P", verify_identity_command);
  law_option(identity);
  p_option(identity);
  identity->add_option("--n", c.n, "step counts (default m + 2)");
  identity->add_option("--trials", c.trials, "random simplex points")->capture_default_str();
  auto* minimize = add("minimize", "I_{n,p} tables", minimize_command);
  law_option(minimize);
  p_option(minimize);
  minimize->add_option("--n", c.n, "n schedule (default 2..16)");
  minimize->add_option("--restarts", c.restarts, "random starts per n")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (const auto& [sub, handler] : commands) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    if (name == "recovery" && sub->count("--u") == 0) c.profile = "tent";
    Json summary = {{"command", name}, {"version", kVersion}, {"seed", c.seed}, {"config", config_json(name, c)}};
    int status = 0;
    try {
      Outcome outcome = handler(c);
      summary["result"] = outcome.result;
      summary["status"] = outcome.failure.empty() ? "ok" : "failed";
      if (!outcome.failure.empty()) {
        summary["failure"] = outcome.failure;
        err << "nlshape " << name << ": assertion failed: " << outcome.failure << "\n";
        status = 1;
      }
      std::filesystem::create_directories(c.out);
      write_file(std::filesystem::path(c.out) / (name + ".csv"), outcome.csv);
    } catch (const std::invalid_argument& e) {
      err << "nlshape " << name << ": " << e.what() << "\n";
      return 2;
    } catch (const std::length_error& e) {
      err << "nlshape " << name << ": " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "nlshape " << name << ": " << e.what() << "\n";
      summary["status"] = "failed";
      summary["failure"] = e.what();
      status = 1;
    }
    std::string text;
    if (c.json) {
      text = summary.dump(2) + "\n";
    } else {
      flatten(summary, "", text);
    }
    try {
      std::filesystem::create_directories(c.out);
      write_file(std::filesystem::path(c.out) / (name + (c.json ? ".summary.json" : ".summary.txt")), text);
    } catch (const std::exception& e) {
      err << "nlshape " << name << ": " << e.what() << "\n";
      return 1;
    }
    out << text;
    return status;
  }
  return 2;
}

}  // namespace nlshape::cli
