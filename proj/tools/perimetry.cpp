// perimetry: dilation derivatives, covariograms, Q-variations, Boolean-model
// contact distributions and the property suite from the command line.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "perimetry/cli_run.hpp"

namespace {

struct Flags {
  std::string config;
  std::string shape, spec, q, r, u, level, method, csv, json;
  std::uint64_t seed = 1;
  std::int64_t samples = 0, points = 0;
  int workers = 1, m_max = 12;
  double precision = 0.0;
  bool inject_fault = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON configuration file (its values win over flags)");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--samples", f.samples, "Sample budget (realizations for contact)");
  sub->add_option("--workers", f.workers, "Worker threads (capped by PERIMETRY_THREADS)");
  sub->add_option("--csv", f.csv, "Write the data table here");
  sub->add_option("--json", f.json, "Write the JSON summary here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace perimetry;
  CLI::App app{"Dilation derivatives and contact distributions of sets with finite perimeter"};
  app.require_subcommand(1);
  Flags f;

  auto* derivative = app.add_subcommand("derivative", "G(rQ, 1_A)/r along a radius schedule, extrapolated to r = 0");
  auto* covariogram = app.add_subcommand("covariogram", "Directional derivative of the covariogram at 0");
  auto* qvar = app.add_subcommand("qvariation", "Q-variation and its bounds for a shape");
  auto* contact = app.add_subcommand("contact", "Contact distribution of a Boolean model and its slope at 0");
  auto* counter = app.add_subcommand("counterexample", "Dilation ratios of the countable-Q counterexample");
  auto* suite = app.add_subcommand("suite", "Run the property suite");

  for (auto* sub : {derivative, covariogram, qvar, contact, counter, suite}) add_common(sub, f);
  for (auto* sub : {derivative, covariogram, qvar}) sub->add_option("--shape", f.shape, "Shape JSON file");
  for (auto* sub : {derivative, qvar, contact}) sub->add_option("--q", f.q, "Structuring element, e.g. \"0,0;1,0\"");
  for (auto* sub : {derivative, covariogram, contact}) sub->add_option("--r", f.r, "Radius schedule, e.g. \"0.1;0.05;0.025\"");
  for (auto* sub : {derivative, covariogram}) sub->add_option("--method", f.method, "auto, exact, grid or monte-carlo");
  derivative->add_option("--precision", f.precision, "Target standard error of the extrapolated value");
  covariogram->add_option("--u", f.u, "Direction, e.g. \"1,1\"");
  contact->add_option("--spec", f.spec, "Boolean model JSON file");
  contact->add_option("--points", f.points, "Test points per realization");
  counter->add_option("--m-max", f.m_max, "Largest ring index (4..20)");
  suite->add_option("--level", f.level, "smoke or full");
  suite->add_flag("--inject-fault", f.inject_fault, "Corrupt a surface measure to exercise failure reporting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  json flags = {{"command", sub->get_name()}};
  auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
  if (given("--shape")) flags["shape"] = f.shape;
  if (given("--spec")) flags["spec"] = f.spec;
  if (given("--q")) flags["q"] = f.q;
  if (given("--r")) flags["r"] = f.r;
  if (given("--u")) flags["u"] = f.u;
  if (given("--seed")) flags["seed"] = f.seed;
  if (given("--samples")) flags["samples"] = f.samples;
  if (given("--points")) flags["points"] = f.points;
  if (given("--workers")) flags["workers"] = f.workers;
  if (given("--m-max")) flags["m_max"] = f.m_max;
  if (given("--level")) flags["level"] = f.level;
  if (given("--method")) flags["method"] = f.method;
  if (given("--precision")) flags["precision"] = f.precision;
  if (given("--inject-fault")) flags["inject_fault"] = f.inject_fault;
  if (given("--csv")) flags["csv"] = f.csv;
  if (given("--json")) flags["json"] = f.json;

  try {
    json merged = flags;
    std::string text, source = "command line";
    if (!f.config.empty()) {
      json file = load_config_file(f.config, &text);
      if (file.contains("command") && file["command"] != flags["command"]) {
        throw ValidationError(f.config + ": config is for command '" + file["command"].dump() + "', not '" + sub->get_name() + "'");
      }
      std::vector<std::string> warnings;
      merged = merge_config(flags, file, warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      source = f.config;
    }
    const auto cfg = config_from_json(merged, source, text);
    return execute(cfg, std::cerr, std::cout);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  }
}
