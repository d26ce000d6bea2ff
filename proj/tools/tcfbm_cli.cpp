#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tcfbm/monte_carlo.hpp"
#include "tcfbm/tfbm.hpp"

namespace {

using tcfbm::detail::float_to_string;

constexpr const char* kCsvHeader = "quantity,family,params,H,sigma2,t,s,value";

const std::vector<std::string> kQuantities = {
    "cov", "corr", "var", "moment", "increment-moment", "increment-cov", "cov-y"};

struct ModelArgs {
  std::string family;
  double alpha = 0.0, a = 0.0, alpha1 = 0.0, alpha2 = 0.0, c1 = 0.0, c2 = 0.0, mu = 0.0;
  double hurst = 0.5, sigma2 = 1.0;
  CLI::Option* hurst_opt = nullptr;
  CLI::Option* sigma2_opt = nullptr;
};

struct QuantityArgs {
  double t = 0.0, s = 0.0, v = 0.0, kappa = 0.0, m = 0.0;
  CLI::Option* t_opt = nullptr;
  CLI::Option* s_opt = nullptr;
  CLI::Option* v_opt = nullptr;
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* m_opt = nullptr;
};

void add_model_flags(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--family", args.family, "subordinator family")
      ->required()
      ->check(CLI::IsMember({"stable", "tempered", "mixture", "drift"}));
  cmd->add_option("--alpha", args.alpha, "stable or tempered index");
  cmd->add_option("--a", args.a, "tempering rate");
  cmd->add_option("--alpha1", args.alpha1, "mixture lower index");
  cmd->add_option("--alpha2", args.alpha2, "mixture upper index");
  cmd->add_option("--c1", args.c1, "mixture weight of alpha1");
  cmd->add_option("--c2", args.c2, "mixture weight of alpha2");
  cmd->add_option("--mu", args.mu, "drift rate");
  args.hurst_opt = cmd->add_option("--hurst", args.hurst, "Hurst index of the fractional part");
  args.sigma2_opt = cmd->add_option("--sigma2", args.sigma2, "scale parameter sigma^2");
}

void add_quantity_flags(CLI::App* cmd, QuantityArgs& args) {
  args.t_opt = cmd->add_option("--t", args.t, "first time argument");
  args.s_opt = cmd->add_option("--s", args.s, "second time argument");
  args.v_opt = cmd->add_option("--v", args.v, "increment lag offset");
  args.kappa_opt = cmd->add_option("--kappa", args.kappa, "moment order of the time change");
  args.m_opt = cmd->add_option("--m", args.m, "absolute-increment moment order");
}

tcfbm::SubordinatorSpec build_spec(const CLI::App* cmd, const ModelArgs& args) {
  std::map<std::string, std::string> kv = {{"family", args.family}};
  auto forward = [&](const char* flag, const char* key, double value) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt != nullptr && opt->count() > 0) kv[key] = float_to_string(value);
  };
  forward("--alpha", "alpha", args.alpha);
  forward("--a", "a", args.a);
  forward("--alpha1", "alpha1", args.alpha1);
  forward("--alpha2", "alpha2", args.alpha2);
  forward("--c1", "c1", args.c1);
  forward("--c2", "c2", args.c2);
  forward("--mu", "mu", args.mu);
  return tcfbm::spec_from_kv(kv);
}

// The params CSV column: family-specific key=value pairs, semicolon-joined.
std::string params_csv(const tcfbm::SubordinatorSpec& spec) {
  std::string kv = tcfbm::spec_to_kv(spec);
  const auto cut = kv.find(' ');
  if (cut == std::string::npos) return "";
  std::string params = kv.substr(cut + 1);
  for (auto& ch : params)
    if (ch == ' ') ch = ';';
  return params;
}

struct QuantityNeeds {
  bool s = false, v = false, kappa = false, m = false, model = true;
};

QuantityNeeds quantity_needs(const std::string& quantity) {
  if (quantity == "var") return {false, false, false, false, true};
  if (quantity == "cov" || quantity == "corr") return {true, false, false, false, true};
  if (quantity == "moment") return {false, false, true, false, false};
  if (quantity == "increment-moment") return {true, false, false, true, true};
  if (quantity == "increment-cov") return {false, true, false, false, true};
  return {true, false, false, false, false};  // cov-y
}

void require_flags(const std::string& quantity, const QuantityArgs& args) {
  const QuantityNeeds needs = quantity_needs(quantity);
  auto missing = [&](const char* flag) {
    throw CLI::RequiredError(std::string(flag) + " (required by quantity '" + quantity + "')");
  };
  if (args.t_opt->count() == 0) missing("--t");
  if (needs.s && args.s_opt->count() == 0) missing("--s");
  if (needs.v && args.v_opt->count() == 0) missing("--v");
  if (needs.kappa && args.kappa_opt->count() == 0) missing("--kappa");
  if (needs.m && args.m_opt->count() == 0) missing("--m");
}

double evaluate_quantity(const std::string& quantity, const tcfbm::SubordinatorSpec& spec,
                         const ModelArgs& model_args, double t, const QuantityArgs& args) {
  const tcfbm::TfbmModel model{spec, model_args.hurst, model_args.sigma2};
  if (quantity == "var") return tcfbm::var_Z(model, t);
  if (quantity == "cov") return tcfbm::cov_Z(model, t, args.s);
  if (quantity == "corr") return tcfbm::corr_Z(model, t, args.s);
  if (quantity == "moment") return tcfbm::increment_moment_Y(spec, args.kappa, t, args.s);
  if (quantity == "increment-moment")
    return tcfbm::abs_increment_moment_Z(model, args.m, t, args.s);
  if (quantity == "increment-cov") return tcfbm::increment_cov_Z(model, t, args.v);
  return tcfbm::cov_Y(spec, t, args.s);
}

tcfbm::McQuery make_query(const std::string& quantity, double t, const QuantityArgs& args) {
  using tcfbm::McQuantity;
  tcfbm::McQuery query;
  query.t = t;
  if (quantity == "var") {
    query.quantity = McQuantity::var_z;
  } else if (quantity == "cov") {
    query.quantity = McQuantity::cov_z;
    query.s = args.s;
  } else if (quantity == "corr") {
    query.quantity = McQuantity::corr_z;
    query.s = args.s;
  } else if (quantity == "moment") {
    query.quantity = McQuantity::increment_moment_y;
    query.s = args.s;
    query.order = args.kappa;
  } else if (quantity == "increment-moment") {
    query.quantity = McQuantity::abs_increment_moment_z;
    query.s = args.s;
    query.order = args.m;
  } else if (quantity == "increment-cov") {
    query.quantity = McQuantity::increment_cov_z;
    query.v = args.v;
  } else {
    query.quantity = McQuantity::cov_y;
    query.s = args.s;
  }
  return query;
}

// One CSV row; the s column carries v for increment-cov and stays empty for
// quantities without a second time argument. H and sigma2 stay empty for
// quantities of the time change alone.
std::string csv_row(const std::string& quantity, const tcfbm::SubordinatorSpec& spec,
                    const ModelArgs& model_args, double t, const QuantityArgs& args,
                    double value) {
  const QuantityNeeds needs = quantity_needs(quantity);
  std::string second;
  if (needs.v)
    second = float_to_string(args.v);
  else if (needs.s || quantity == "moment")
    second = float_to_string(args.s);
  std::string h_col, s2_col;
  if (needs.model) {
    h_col = float_to_string(model_args.hurst);
    s2_col = float_to_string(model_args.sigma2);
  }
  return quantity + "," + tcfbm::family_name(spec) + "," + params_csv(spec) + "," + h_col +
         "," + s2_col + "," + float_to_string(t) + "," + second + "," + float_to_string(value);
}

int run_eval(const CLI::App* cmd, const std::string& quantity, const ModelArgs& model_args,
             const QuantityArgs& args) {
  require_flags(quantity, args);
  const tcfbm::SubordinatorSpec spec = build_spec(cmd, model_args);
  std::cout << float_to_string(evaluate_quantity(quantity, spec, model_args, args.t, args))
            << "\n";
  return 0;
}

struct TableArgs {
  double t_start = 0.0, t_stop = 0.0;
  long t_count = 0;
  std::string spacing = "linear";
  std::vector<double> s_values;
  std::string output;
};

int run_table(const CLI::App* cmd, const std::string& quantity, const ModelArgs& model_args,
              QuantityArgs args, const TableArgs& table) {
  const QuantityNeeds needs = quantity_needs(quantity);
  if (!(table.t_start < table.t_stop))
    throw CLI::ValidationError("--t-start must be strictly below --t-stop");
  if (table.t_count < 2) throw CLI::ValidationError("--t-count must be at least 2");
  if (table.spacing == "log" && !(table.t_start > 0.0))
    throw CLI::ValidationError("--spacing log needs --t-start > 0");
  std::vector<double> second = table.s_values;
  if (needs.s || needs.v) {
    if (second.empty())
      throw CLI::RequiredError(std::string("--s (required by quantity '") + quantity + "')");
  } else if (quantity == "moment" && second.empty()) {
    second = {0.0};
  } else if (!needs.s && !needs.v) {
    second = {0.0};
  }
  if (needs.kappa && args.kappa_opt->count() == 0)
    throw CLI::RequiredError("--kappa (required by quantity 'moment')");
  if (needs.m && args.m_opt->count() == 0)
    throw CLI::RequiredError("--m (required by quantity 'increment-moment')");

  const tcfbm::SubordinatorSpec spec = build_spec(cmd, model_args);
  std::ofstream file;
  if (!table.output.empty()) {
    file.open(table.output, std::ios::binary);
    if (!file) throw CLI::ValidationError("--output: cannot open '" + table.output + "'");
  }
  std::ostream& out = table.output.empty() ? std::cout : file;

  out << kCsvHeader << "\n";
  for (long i = 0; i < table.t_count; ++i) {
    double t;
    const double frac = static_cast<double>(i) / static_cast<double>(table.t_count - 1);
    if (i == 0)
      t = table.t_start;
    else if (i == table.t_count - 1)
      t = table.t_stop;
    else if (table.spacing == "log")
      t = table.t_start * std::pow(table.t_stop / table.t_start, frac);
    else
      t = table.t_start + frac * (table.t_stop - table.t_start);
    for (const double x : second) {
      if (needs.v)
        args.v = x;
      else
        args.s = x;
      const double value = evaluate_quantity(quantity, spec, model_args, t, args);
      out << csv_row(quantity, spec, model_args, t, args, value) << "\n";
    }
  }
  return 0;
}

struct McArgs {
  std::string quantity = "cov";
  long reps = 100000;
  std::uint64_t seed = 42;
  double dt = 0.0;
};

int run_mc(const CLI::App* cmd, const ModelArgs& model_args, const QuantityArgs& args,
           const McArgs& mc) {
  require_flags(mc.quantity, args);
  const tcfbm::SubordinatorSpec spec = build_spec(cmd, model_args);
  const double analytic = evaluate_quantity(mc.quantity, spec, model_args, args.t, args);
  const tcfbm::TfbmModel model{spec, model_args.hurst, model_args.sigma2};
  const tcfbm::McEstimate est = tcfbm::estimate(model, make_query(mc.quantity, args.t, args),
                                                mc.reps, mc.seed, {0.0, mc.dt});
  double z = 0.0;
  if (est.std_error > 0.0)
    z = (est.mean - analytic) / est.std_error;
  else if (est.mean != analytic)
    z = std::numeric_limits<double>::infinity();
  std::cout << kCsvHeader << ",mc_mean,mc_se,z,reps,seed\n"
            << csv_row(mc.quantity, spec, model_args, args.t, args, analytic) << ","
            << float_to_string(est.mean) << "," << float_to_string(est.std_error) << ","
            << float_to_string(z) << "," << est.n_replicates << "," << mc.seed << "\n";
  return std::fabs(z) <= 3.0 ? 0 : 1;
}

struct AsymptoticsArgs {
  std::string regime = "large-t";
};

std::string trim_ws(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return text.substr(begin, text.find_last_not_of(" \t\r") - begin + 1);
}

// Appends --key value tokens from a key=value config file, skipping every
// key already present on the command line (explicit flags win).
std::vector<std::string> with_config_applied(std::vector<std::string> tokens) {
  std::string path;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "--config" && i + 1 < tokens.size())
      path = tokens[i + 1];
    else if (tokens[i].rfind("--config=", 0) == 0)
      path = tokens[i].substr(9);
  }
  if (path.empty()) return tokens;
  std::ifstream file(path);
  if (!file) throw CLI::FileError("--config: cannot open '" + path + "'");
  const std::vector<std::string> given = tokens;
  std::string line;
  while (std::getline(file, line)) {
    const std::string entry = trim_ws(line);
    if (entry.empty() || entry.front() == '#' || entry.front() == ';') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw CLI::FileError("--config: line is not key=value: '" + entry + "'");
    const std::string key = trim_ws(entry.substr(0, eq));
    std::string value = trim_ws(entry.substr(eq + 1));
    if (key.empty() || key == "config") continue;
    const std::string flag = "--" + key;
    const bool overridden = std::any_of(given.begin(), given.end(), [&](const std::string& t) {
      return t == flag || t.rfind(flag + "=", 0) == 0;
    });
    if (overridden) continue;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      tokens.push_back(flag);
      tokens.push_back(value.substr(1, value.size() - 2));
      continue;
    }
    std::istringstream pieces(value);
    std::string piece;
    while (pieces >> piece) {
      tokens.push_back(flag);
      tokens.push_back(piece);
    }
  }
  return tokens;
}

int run_asymptotics(const CLI::App* cmd, const std::string& family, const ModelArgs& model_args,
                    const QuantityArgs& args, const AsymptoticsArgs& asym) {
  tcfbm::AsymptoticRegime regime = tcfbm::AsymptoticRegime::large_t;
  if (asym.regime == "small-t") regime = tcfbm::AsymptoticRegime::small_t;
  if (asym.regime == "small-s") regime = tcfbm::AsymptoticRegime::small_s;
  if (asym.regime == "large-v") regime = tcfbm::AsymptoticRegime::large_v_increments;
  const double t = args.t_opt->count() > 0 ? args.t : 1.0;
  const double s = args.s_opt->count() > 0 ? args.s : 1.0;
  const double v = args.v_opt->count() > 0 ? args.v : 1.0;

  ModelArgs family_args = model_args;
  family_args.family = family;
  const tcfbm::SubordinatorSpec spec = build_spec(cmd, family_args);
  tcfbm::AsymptoticReport report;
  if (family == "stable") {
    report = tcfbm::stable_asymptotics(std::get<tcfbm::Stable>(spec).alpha, model_args.hurst,
                                       model_args.sigma2, t, s, v, regime);
  } else if (family == "mixture") {
    report = tcfbm::mixture_asymptotics(std::get<tcfbm::StableMixture>(spec), model_args.hurst,
                                        model_args.sigma2, t, regime);
  } else {
    report = tcfbm::tempered_asymptotics(std::get<tcfbm::TemperedStable>(spec),
                                         model_args.hurst, model_args.sigma2, t, s, regime);
  }
  std::cout << "regime=" << report.regime << "\n"
            << "leading_value=" << float_to_string(report.leading_value) << "\n"
            << "leading_exponent=" << float_to_string(report.leading_exponent) << "\n";
  if (std::isfinite(report.second_exponent))
    std::cout << "second_value=" << float_to_string(report.second_value) << "\n"
              << "second_exponent=" << float_to_string(report.second_exponent) << "\n";
  std::cout << "description=" << report.description << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order structure of inverse-subordinated fractional Brownian motion"};
  app.require_subcommand(1);

  std::string eval_quantity, table_quantity, asym_family;
  ModelArgs eval_model, table_model, mc_model, asym_model;
  QuantityArgs eval_args, table_args, mc_args, asym_args;
  TableArgs table_extra;
  McArgs mc_extra;
  AsymptoticsArgs asym_extra;

  CLI::App* eval = app.add_subcommand("eval", "evaluate one quantity and print the value");
  eval->add_option("quantity", eval_quantity, "quantity to evaluate")
      ->required()
      ->check(CLI::IsMember(kQuantities));
  add_model_flags(eval, eval_model);
  add_quantity_flags(eval, eval_args);
  std::string config_path;
  eval->add_option("--config", config_path, "key=value file mirroring flags; flags win");

  CLI::App* table = app.add_subcommand("table", "emit a CSV table over a t-grid");
  table->add_option("quantity", table_quantity, "quantity to tabulate")
      ->required()
      ->check(CLI::IsMember(kQuantities));
  add_model_flags(table, table_model);
  table_args.t_opt = table->add_option("--t", table_args.t)->group("");
  table_args.s_opt = table->add_option(
      "--s", table_extra.s_values,
      "second-argument values (s, or v for increment-cov), one row each per t");
  table_args.v_opt = table_args.s_opt;
  table_args.kappa_opt =
      table->add_option("--kappa", table_args.kappa, "moment order of the time change");
  table_args.m_opt = table->add_option("--m", table_args.m, "absolute-increment moment order");
  table->add_option("--t-start", table_extra.t_start, "grid start")->required();
  table->add_option("--t-stop", table_extra.t_stop, "grid stop")->required();
  table->add_option("--t-count", table_extra.t_count, "grid size (>= 2)")->required();
  table->add_option("--spacing", table_extra.spacing, "grid spacing")
      ->check(CLI::IsMember({"linear", "log"}));
  table->add_option("--output", table_extra.output, "write CSV here instead of stdout");
  table->add_option("--config", config_path, "key=value file mirroring flags; flags win");

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo validation");
  CLI::App* validate = mc->add_subcommand("validate", "compare analytic value vs simulation");
  validate->add_option("--quantity", mc_extra.quantity, "quantity to validate")
      ->check(CLI::IsMember(kQuantities));
  add_model_flags(validate, mc_model);
  add_quantity_flags(validate, mc_args);
  validate->add_option("--reps", mc_extra.reps, "replicate count (>= 100)");
  validate->add_option("--seed", mc_extra.seed, "base seed for replicate streams");
  validate->add_option("--dt", mc_extra.dt, "subordinator grid step (default horizon/1000)");
  validate->add_option("--config", config_path, "key=value file mirroring flags; flags win");
  mc->require_subcommand(1);

  CLI::App* asym = app.add_subcommand("asymptotics", "print an asymptotic-regime report");
  asym->add_option("family", asym_family, "subordinator family")
      ->required()
      ->check(CLI::IsMember({"stable", "mixture", "tempered"}));
  asym->add_option("--regime", asym_extra.regime, "asymptotic regime")
      ->check(CLI::IsMember({"large-t", "small-t", "small-s", "large-v"}));
  asym->add_option("--alpha", asym_model.alpha, "stable or tempered index");
  asym->add_option("--a", asym_model.a, "tempering rate");
  asym->add_option("--alpha1", asym_model.alpha1, "mixture lower index");
  asym->add_option("--alpha2", asym_model.alpha2, "mixture upper index");
  asym->add_option("--c1", asym_model.c1, "mixture weight of alpha1");
  asym->add_option("--c2", asym_model.c2, "mixture weight of alpha2");
  asym_model.hurst_opt = asym->add_option("--hurst", asym_model.hurst, "Hurst index");
  asym_model.sigma2_opt = asym->add_option("--sigma2", asym_model.sigma2, "scale sigma^2");
  add_quantity_flags(asym, asym_args);
  asym->add_option("--config", config_path, "key=value file mirroring flags; flags win");

  try {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    tokens = with_config_applied(std::move(tokens));
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eval->parsed()) return run_eval(eval, eval_quantity, eval_model, eval_args);
    if (table->parsed()) return run_table(table, table_quantity, table_model, table_args,
                                          table_extra);
    if (mc->parsed()) return run_mc(validate, mc_model, mc_args, mc_extra);
    return run_asymptotics(asym, asym_family, asym_model, asym_args, asym_extra);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const CLI::App* active = eval->parsed() ? eval
                             : table->parsed()
                                 ? table
                                 : mc->parsed() ? static_cast<const CLI::App*>(validate) : asym;
    std::string quantity = eval->parsed()   ? eval_quantity
                           : table->parsed() ? table_quantity
                           : mc->parsed()    ? mc_extra.quantity
                                             : asym_family;
    const ModelArgs& margs = eval->parsed()    ? eval_model
                             : table->parsed() ? table_model
                             : mc->parsed()    ? mc_model
                                               : asym_model;
    std::cerr << "numerical failure (family=" << margs.family << ", quantity=" << quantity
              << "): " << e.what() << "\n";
    (void)active;
    return 1;
  }
}
