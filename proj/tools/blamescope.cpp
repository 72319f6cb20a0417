// blamescope: blameworthiness and responsibility attribution for human-AI
// decision systems.
//
//   blamescope validate --scm model.json --cases log.csv
//   blamescope prob --scm model.json --outcome wrong [--samples N --seed S]
//   blamescope counterfactual --scm model.json --observe X=1,Y=0 --do X=0 --outcome y1
//   blamescope blame --scm model.json --action a --baseline b --outcome y1 --cost c
//   blamescope hitl --cases log.csv --l 0.2 --u 0.8
//   blamescope metrics --ratings pairs.csv
//   blamescope gen --seed 42 --n 200 --out log.csv
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 model error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blamescope/commands.hpp"

namespace {

using blamescope::Error;
using blamescope::ErrorCode;
using blamescope::cli::RunConfig;

int fail(ErrorCode code, const std::string& subject, const std::string& message) {
  Error e(code, subject, message);
  std::cerr << blamescope::io::canonical_dump(blamescope::cli::error_json(e));
  return blamescope::exit_code(e.category());
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out) blamescope::io::write_file(*cfg.out, text);
  else std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal blameworthiness and responsibility attribution for human-AI decision systems"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--scm", cfg.scm_path, "SCM description file (JSON)");
    sub->add_option("--outcome", cfg.outcome, "Outcome name declared in the model file");
    sub->add_option("--action", cfg.action, "Action applied to the model");
    sub->add_option("--do", cfg.do_, "Intervention VAR=value (repeatable, comma lists allowed)");
    sub->add_option("--samples", cfg.samples, "Monte Carlo sample count (exact enumeration if absent)");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_flag("--exact", cfg.exact, "Force exact enumeration");
  };
  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--cases", cfg.cases_path, "Case log CSV");
    sub->add_option("--l", cfg.l, "Lower confidence threshold");
    sub->add_option("--u", cfg.u, "Upper confidence threshold");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "Output path (default stdout)"); };

  auto* validate = app.add_subcommand("validate", "Load and validate model, case log and ratings files");
  validate->add_option("--scm", cfg.scm_path, "SCM description file (JSON)");
  validate->add_option("--cases", cfg.cases_path, "Case log CSV");
  validate->add_option("--ratings", cfg.ratings_path, "Rating pairs CSV");
  add_out(validate);

  auto* prob = app.add_subcommand("prob", "Probability of an outcome");
  add_model(prob);
  add_out(prob);

  auto* cf = app.add_subcommand("counterfactual", "Counterfactual probability of an outcome");
  add_model(cf);
  cf->add_option("--observe", cfg.observe, "Observation VAR=value (repeatable, comma lists allowed)");
  add_out(cf);

  auto* blame = app.add_subcommand("blame", "Blameworthiness of --action relative to --baseline");
  add_model(blame);
  blame->add_option("--baseline", cfg.baseline, "Reference action");
  blame->add_option("--cost", cfg.cost, "Cost model name");
  blame->add_option("--discount", cfg.discount, "unit or cost_ratio")->check(CLI::IsMember({"unit", "cost_ratio"}));
  add_out(blame);

  auto* hitl = app.add_subcommand("hitl", "HITL vs human-only blame and responsibility attribution");
  add_policy(hitl);
  hitl->add_option("--ai-cost", cfg.ai_cost, "Cost per decision the AI makes alone");
  hitl->add_option("--human-cost", cfg.human_cost, "Cost per human-reviewed decision");
  hitl->add_option("--discount", cfg.discount, "unit or cost_ratio")->check(CLI::IsMember({"unit", "cost_ratio"}));
  hitl->add_option("--seed", cfg.seed, "Random seed (recorded in the report)");
  add_out(hitl);

  auto* metrics = app.add_subcommand("metrics", "Agreement and classification metrics with blame conversions");
  metrics->add_option("--ratings", cfg.ratings_path, "Rating pairs CSV");
  metrics->add_option("--k", cfg.k, "Number of ordinal categories (default: data maximum)");
  metrics->add_option("--kappa", cfg.kappa, "Known QWK value to convert into blame");
  add_policy(metrics);
  metrics->add_option("--positive", cfg.positive, "Positive label for precision/recall");
  metrics->add_option("--f1-hitl", cfg.f1_hitl, "F1 of the HITL system");
  metrics->add_option("--f1-human", cfg.f1_human, "F1 of the human-only system");
  add_out(metrics);

  auto* gen = app.add_subcommand("gen", "Generate a seeded synthetic case log (CSV)");
  gen->add_option("--seed", cfg.seed, "Random seed");
  gen->add_option("--n", cfg.n_cases, "Number of cases");
  gen->add_option("--ai-accuracy", cfg.ai_accuracy, "Probability the AI decision is correct");
  gen->add_option("--human-accuracy", cfg.human_accuracy, "Probability the human decision is correct");
  gen->add_option("--profile", cfg.profile, "calibrated or overconfident");
  add_out(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::ConfigError, "arguments", e.what());
  }

  try {
    namespace cli = blamescope::cli;
    const CLI::App* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    if (sub == gen) {
      emit(cfg, cli::cmd_gen(cfg));
      return 0;
    }
    nlohmann::json report;
    if (sub == validate) report = cli::cmd_validate(cfg);
    else if (sub == prob) report = cli::cmd_prob(cfg);
    else if (sub == cf) report = cli::cmd_counterfactual(cfg);
    else if (sub == blame) report = cli::cmd_blame(cfg);
    else if (sub == hitl) report = cli::cmd_hitl(cfg);
    else report = cli::cmd_metrics(cfg);
    emit(cfg, blamescope::io::canonical_dump(report));
    return 0;
  } catch (const Error& e) {
    std::cerr << blamescope::io::canonical_dump(blamescope::cli::error_json(e));
    return blamescope::exit_code(e.category());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorCode::ParseError, "json", e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::ParseError, "", e.what());
  }
}
