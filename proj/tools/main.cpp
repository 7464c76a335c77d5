// svine command line: fit stationary vine copula models to multivariate time
// series, simulate, forecast, backtest, and verify structures.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "svine/backtest.hpp"
#include "svine/bootstrap.hpp"
#include "svine/estimation.hpp"
#include "svine/forecast.hpp"
#include "svine/io.hpp"

namespace {

using namespace svine;

std::vector<FamilyTag> parse_families(const std::string& list) {
  std::vector<Family> fams;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) fams.push_back(family_from_name(tok));
  }
  if (fams.empty()) throw std::domain_error("empty family list");
  return expand_family_menu(fams);
}

void warn_rejected(const Dataset& ds) {
  if (ds.rejected_rows.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < ds.rejected_rows.size(); ++i) {
    if (i) os << ',';
    os << ds.rejected_rows[i];
  }
  std::cerr << "warning: dropped rows with missing values: " << os.str()
            << "\n";
}

int cmd_fit(const std::string& csv, int markov, const std::string& mode,
            const std::string& structure, const std::string& families,
            const std::string& out) {
  const Dataset ds = read_csv(csv);
  warn_rejected(ds);
  ModelBuildOptions opt;
  opt.mode = margin_mode_from_name(mode);
  opt.menu = parse_families(families);
  opt.markov_order = markov;
  if (structure != "auto") {
    SVineSpec spec = SVineSpec::from_json_string(read_text_file(structure));
    if (markov < 0) opt.markov_order = spec.markov_order;
    opt.structure = std::move(spec);
  }
  if (opt.markov_order < 0) opt.markov_order = 1;

  const SVineModel model = fit_model(ds.values, opt);
  write_text_file(out, model.to_json_string());

  nlohmann::json summary;
  summary["T"] = model.T;
  summary["d"] = model.dim();
  summary["markov_order"] = model.markov_order();
  summary["mode"] = margin_mode_name(model.mode);
  summary["loglik"] = model.loglik;
  summary["aic"] = model.aic;
  summary["copula_parameters"] = model.copula_param_count();
  summary["in_perm"] = model.spec.in_perm;
  summary["out_perm"] = model.spec.out_perm;
  nlohmann::json fams = nlohmann::json::object();
  for (const auto& [key, cop] : model.copulas) {
    fams[key] = family_name(cop.tag().family);
  }
  summary["classes"] = fams;
  summary["model_file"] = out;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const std::string& model_file, int n, std::uint64_t seed,
                 const std::string& out) {
  const SVineModel model =
      SVineModel::from_json_string(read_text_file(model_file));
  const Matrix sims = simulate_unconditional(model, n, seed);
  std::vector<std::string> header;
  for (int j = 1; j <= model.dim(); ++j) header.push_back("V" + std::to_string(j));
  write_matrix_csv(out, sims, header);
  std::cout << "{\"rows\": " << n << ", \"cols\": " << model.dim()
            << ", \"file\": \"" << out << "\"}\n";
  return 0;
}

int cmd_forecast(const std::string& model_file, const std::string& history_csv,
                 int horizon, int n, const std::string& levels_str,
                 int bootstrap_R, int block, std::uint64_t seed,
                 const std::string& out, const std::string& sims_out) {
  const SVineModel model =
      SVineModel::from_json_string(read_text_file(model_file));
  const int p = model.markov_order();
  const Dataset hist_ds = read_csv(history_csv);
  warn_rejected(hist_ds);
  if (hist_ds.values.rows < p) {
    throw std::domain_error("history has fewer rows than the Markov order");
  }
  Matrix history(p, model.dim());
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < model.dim(); ++c) {
      history.at(r, c) = hist_ds.values.at(hist_ds.values.rows - p + r, c);
    }
  }

  ForecastRequest req;
  req.history = history;
  req.horizon = horizon;
  req.n_sims = n > 0 ? n : 10 * std::max(model.T, 100);
  req.seed = seed;
  req.functionals = {Functional::mean()};
  {
    std::stringstream ss(levels_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) {
        req.functionals.push_back(Functional::quantile(std::stod(tok)));
      }
    }
  }

  const ForecastResult fr = forecast(model, req);
  nlohmann::json j;
  j["horizon"] = horizon;
  j["n_sims"] = req.n_sims;
  nlohmann::json fj = nlohmann::json::object();
  for (std::size_t f = 0; f < req.functionals.size(); ++f) {
    nlohmann::json steps = nlohmann::json::array();
    for (int s = 0; s < horizon; ++s) {
      nlohmann::json rowv = nlohmann::json::array();
      for (int c = 0; c < model.dim(); ++c) rowv.push_back(fr.point[f].at(s, c));
      steps.push_back(rowv);
    }
    fj[req.functionals[f].name()] = steps;
  }
  j["functionals"] = fj;

  if (bootstrap_R > 0) {
    // bands need the training sample, not just the p history rows
    const PseudoSample ps = to_pseudo_sample(hist_ds.values, model);
    const int b = block > 0 ? block : default_block(ps.u.rows);
    const ForecastBands bands =
        bootstrap_forecast(model, ps, req, bootstrap_R, b, seed + 1, 0.9);
    nlohmann::json bj = nlohmann::json::object();
    for (const auto& band : bands.bands) {
      nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
      for (int s = 0; s < horizon; ++s) {
        nlohmann::json lorow = nlohmann::json::array(),
                       hirow = nlohmann::json::array();
        for (int c = 0; c < model.dim(); ++c) {
          lorow.push_back(band.lo.at(s, c));
          hirow.push_back(band.hi.at(s, c));
        }
        lo.push_back(lorow);
        hi.push_back(hirow);
      }
      bj[band.functional.name()] = {{"lo", lo}, {"hi", hi}};
    }
    j["bootstrap_bands"] = bj;
    j["bootstrap"] = {{"R", bootstrap_R}, {"block", b}, {"nominal", 0.9}};
  }

  if (!sims_out.empty()) {
    std::vector<std::string> header;
    for (int s = 1; s <= horizon; ++s) {
      for (int c = 1; c <= model.dim(); ++c) {
        header.push_back("t" + std::to_string(s) + ".V" + std::to_string(c));
      }
    }
    write_matrix_csv(sims_out, fr.simulations, header);
    j["simulations_file"] = sims_out;
  }
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_file(out, j.dump(2));
    std::cout << "{\"file\": \"" << out << "\"}\n";
  }
  return 0;
}

int cmd_backtest(const std::string& csv, const std::string& config_file,
                 const CLI::App* sub, BacktestConfig cfg,
                 const std::string& families, const std::string& mode,
                 const std::string& horizon, const std::string& out) {
  if (!config_file.empty()) {
    const auto j = nlohmann::json::parse(read_text_file(config_file));
    BacktestConfig fc;
    fc.window = j.value("window", fc.window);
    fc.stride = j.value("stride", fc.stride);
    fc.horizon_steps = j.value("horizon", std::string("day")) == "week" ? 5 : 1;
    fc.n_sims = j.value("n_sims", fc.n_sims);
    if (j.contains("measures")) {
      fc.measures = j.at("measures").get<std::vector<std::string>>();
    }
    if (j.contains("portfolios")) {
      const auto& pj = j.at("portfolios");
      fc.n_portfolios = pj.value("count", fc.n_portfolios);
      fc.weight_low = pj.value("low", fc.weight_low);
      fc.weight_high = pj.value("high", fc.weight_high);
    }
    fc.model.markov_order = j.value("markov_order", 1);
    fc.model.mode =
        margin_mode_from_name(j.value("mode", std::string("parametric")));
    if (j.contains("families")) {
      std::vector<Family> fams;
      for (const auto& f : j.at("families")) {
        fams.push_back(family_from_name(f.get<std::string>()));
      }
      fc.model.menu = expand_family_menu(fams);
    }
    fc.seed = j.value("seed", fc.seed);
    // flags override the file
    if (!sub->count("--window")) cfg.window = fc.window;
    if (!sub->count("--stride")) cfg.stride = fc.stride;
    if (!sub->count("--horizon")) cfg.horizon_steps = fc.horizon_steps;
    if (!sub->count("--n")) cfg.n_sims = fc.n_sims;
    if (!sub->count("--portfolios")) cfg.n_portfolios = fc.n_portfolios;
    if (!sub->count("--markov")) cfg.model.markov_order = fc.model.markov_order;
    if (!sub->count("--mode")) cfg.model.mode = fc.model.mode;
    if (!sub->count("--families")) cfg.model.menu = fc.model.menu;
    if (!sub->count("--seed")) cfg.seed = fc.seed;
    if (!sub->count("--measures")) cfg.measures = fc.measures;
    cfg.weight_low = fc.weight_low;
    cfg.weight_high = fc.weight_high;
  }
  if (sub->count("--horizon")) cfg.horizon_steps = horizon == "week" ? 5 : 1;
  if (sub->count("--mode")) cfg.model.mode = margin_mode_from_name(mode);
  if (sub->count("--families")) cfg.model.menu = parse_families(families);

  const Dataset ds = read_csv(csv);
  warn_rejected(ds);
  const BacktestResult res = run_backtest(ds.values, cfg);

  std::ofstream outf(out);
  if (!outf) throw std::runtime_error("cannot write " + out);
  outf << "measure,mean,se,n\n";
  outf.precision(12);
  for (const auto& row : res.rows) {
    outf << row.measure << ',' << row.mean << ',' << row.se << ',' << row.n
         << "\n";
  }
  nlohmann::json j;
  j["steps"] = res.rows.empty() ? 0 : res.rows.front().n;
  j["refits"] = res.refits;
  for (const auto& row : res.rows) {
    j["scores"][row.measure] = {{"mean", row.mean}, {"se", row.se}};
  }
  j["file"] = out;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_check_structure(const std::string& file, int T) {
  const std::string text = read_text_file(file);
  const auto j = nlohmann::json::parse(text);
  VineStructure vine;
  std::string kind;
  if (j.contains("in_perm")) {
    const SVineSpec spec = SVineSpec::from_json_string(text);
    vine = build_svine(spec, T);
    kind = "svine-spec";
  } else {
    vine = VineStructure::from_json_string(text);
    kind = "vine";
  }
  const StationarityReport rep = is_stationary_vine(vine);
  nlohmann::json out;
  out["kind"] = kind;
  out["T"] = vine.max_time();
  out["d"] = vine.vars_per_time();
  out["stationary"] = rep.stationary;
  if (!rep.stationary) {
    out["witness"] = {{"t", rep.witness_t}, {"m", rep.witness_m}};
  } else {
    out["distinct_copulas"] = edge_classes(vine).classes.size();
  }
  std::cout << out.dump(2) << "\n";
  std::cout << (rep.stationary ? "PASS" : "FAIL") << "\n";
  return rep.stationary ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "svine: stationary vine copula models for multivariate time series"};
  app.require_subcommand(1);
  app.footer("Thread count is taken from the SVINE_THREADS environment variable.");

  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV of time series");
  std::string fit_csv, fit_mode = "parametric", fit_structure = "auto";
  std::string fit_families =
      "independence,gaussian,student_t,clayton,gumbel,frank";
  std::string fit_out = "model.json";
  int fit_markov = -1;
  fit->add_option("csv", fit_csv, "input CSV (header row)")->required();
  fit->add_option("--markov", fit_markov, "Markov order p (default 1)");
  fit->add_option("--mode", fit_mode, "par|semipar margins")
      ->check(CLI::IsMember({"par", "parametric", "semipar", "semiparametric"}));
  fit->add_option("--structure", fit_structure, "auto or a structure JSON file");
  fit->add_option("--families", fit_families, "comma-separated family menu");
  fit->add_option("--out", fit_out, "output model JSON path");

  auto* sim = app.add_subcommand("simulate", "Simulate a path from a model");
  std::string sim_model, sim_out = "simulations.csv";
  int sim_n = 1000;
  std::uint64_t sim_seed = 1;
  sim->add_option("model", sim_model, "model JSON file")->required();
  sim->add_option("--n", sim_n, "number of time points");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output CSV path");

  auto* fc = app.add_subcommand("forecast", "Conditional Monte-Carlo forecast");
  std::string fc_model, fc_history, fc_levels = "0.05,0.5,0.95";
  std::string fc_out, fc_sims;
  int fc_h = 1, fc_n = 0, fc_R = 0, fc_block = 0;
  std::uint64_t fc_seed = 1;
  fc->add_option("model", fc_model, "model JSON file")->required();
  fc->add_option("history", fc_history,
                 "CSV whose last p rows condition the forecast")
      ->required();
  fc->add_option("--horizon", fc_h, "forecast steps");
  fc->add_option("--n", fc_n, "Monte-Carlo replicates (default 10*T)");
  fc->add_option("--levels", fc_levels, "quantile levels, comma-separated");
  fc->add_option("--bootstrap", fc_R, "bootstrap replicates for bands");
  fc->add_option("--block", fc_block,
                 "multiplier block length (default T^(1/3))");
  fc->add_option("--seed", fc_seed, "RNG seed");
  fc->add_option("--out", fc_out, "write the JSON summary here");
  fc->add_option("--sims-out", fc_sims, "write raw replicates CSV here");

  auto* bt = app.add_subcommand("backtest", "Rolling forecast evaluation");
  std::string bt_csv, bt_config, bt_out = "backtest.csv";
  std::string bt_mode = "parametric", bt_families, bt_horizon = "day";
  BacktestConfig bt_cfg;
  std::vector<std::string> bt_measures;
  bt->add_option("csv", bt_csv, "input CSV")->required();
  bt->add_option("--config", bt_config, "JSON config file (flags override)");
  bt->add_option("--window", bt_cfg.window, "fitting window length");
  bt->add_option("--stride", bt_cfg.stride, "refit stride");
  bt->add_option("--horizon", bt_horizon, "day|week")
      ->check(CLI::IsMember({"day", "week"}));
  bt->add_option("--n", bt_cfg.n_sims, "Monte-Carlo replicates per step");
  bt->add_option("--portfolios", bt_cfg.n_portfolios, "random portfolios");
  bt->add_option("--measures", bt_measures, "subset of CRPS,logS,VaR95,VaR99");
  bt->add_option("--markov", bt_cfg.model.markov_order, "Markov order");
  bt->add_option("--mode", bt_mode, "par|semipar margins");
  bt->add_option("--families", bt_families, "family menu");
  bt->add_option("--seed", bt_cfg.seed, "RNG seed");
  bt->add_option("--out", bt_out, "output table CSV");

  auto* chk = app.add_subcommand("check-structure",
                                 "Verify stationarity of a vine structure");
  std::string chk_file;
  int chk_T = 4;
  chk->add_option("structure", chk_file, "structure JSON file")->required();
  chk->add_option("--T", chk_T, "time points for spec expansion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    nlohmann::json err;
    err["error"] = {{"type", "usage"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }

  try {
    if (*fit) {
      return cmd_fit(fit_csv, fit_markov, fit_mode, fit_structure,
                     fit_families, fit_out);
    }
    if (*sim) return cmd_simulate(sim_model, sim_n, sim_seed, sim_out);
    if (*fc) {
      return cmd_forecast(fc_model, fc_history, fc_h, fc_n, fc_levels, fc_R,
                          fc_block, fc_seed, fc_out, fc_sims);
    }
    if (*bt) {
      if (!bt_measures.empty()) bt_cfg.measures = bt_measures;
      return cmd_backtest(bt_csv, bt_config, bt, bt_cfg, bt_families, bt_mode,
                          bt_horizon, bt_out);
    }
    if (*chk) return cmd_check_structure(chk_file, chk_T);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = {{"type", "runtime"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
