#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "pcd/report.hpp"

namespace {

void emit(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + out_path);
  }
  out << payload;
}

pcd::ModelKind parse_model(const std::string& name) {
  if (name == "I" || name == "independent") return pcd::ModelKind::kIndependent;
  if (name == "II" || name == "dependent") return pcd::ModelKind::kDependent;
  throw CLI::ValidationError("--model must be I|II|independent|dependent");
}

// Config file values are read first; explicit flags override them.
void load_config_file(const std::string& path, pcd::RunConfig& cfg,
                      std::string& model_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.contains("K")) cfg.kmax = doc["K"].get<int>();
  if (doc.contains("kmax")) cfg.kmax = doc["kmax"].get<int>();
  if (doc.contains("m")) cfg.n_alternatives = doc["m"].get<int>();
  if (doc.contains("levels")) cfg.n_levels = doc["levels"].get<int>();
  if (doc.contains("model")) model_name = doc["model"].get<std::string>();
  if (doc.contains("sigma0_sq")) cfg.sigma0_sq = doc["sigma0_sq"].get<double>();
  if (doc.contains("sigma_t_sq"))
    cfg.sigma_t_sq = doc["sigma_t_sq"].get<double>();
  if (doc.contains("quantitative"))
    cfg.quantitative = doc["quantitative"].get<bool>();
  if (doc.contains("beta1"))
    cfg.beta1 = doc["beta1"].get<std::vector<double>>();
  if (doc.contains("beta2")) cfg.beta2 = doc["beta2"].get<double>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Locally D-optimal designs for multinomial probit choice experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // --format/--out/--full-precision after a subcommand

  std::string format = "csv";
  std::string out_path;
  bool full_precision = false;
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "Write output to this path");
  app.add_flag("--full-precision", full_precision,
               "Disable table rounding in CSV output");

  auto* cmd_table1 = app.add_subcommand(
      "table1", "Optimal standardized settings z* for paired comparisons");
  int t1_kmax = 10;
  cmd_table1->add_option("--kmax", t1_kmax, "Largest attribute count")
      ->check(CLI::Range(1, 1000));

  auto* cmd_table = app.add_subcommand(
      "table", "Orbit characteristics for three-alternative choice sets");
  int t_id = 2;
  int t_kmax = 7;
  cmd_table->add_option("--id", t_id, "Table id (2, 3 or 4)")
      ->required()
      ->check(CLI::IsMember({2, 3, 4}));
  cmd_table->add_option("--kmax", t_kmax, "Largest attribute count")
      ->check(CLI::Range(1, 12));

  auto* cmd_verify =
      app.add_subcommand("verify", "Run a numeric verification suite");
  std::string suite = "lemmas";
  std::uint64_t seed = 42;
  cmd_verify->add_option("--suite", suite, "Suite to run")
      ->required()
      ->check(CLI::IsMember({"lemmas", "equivalence", "mc", "identities"}));
  cmd_verify->add_option("--seed", seed, "Random seed");

  auto* cmd_design =
      app.add_subcommand("design", "Compute a locally D-optimal design");
  pcd::RunConfig dcfg;
  dcfg.kmax = 2;
  std::string model_name = "dependent";
  std::string config_path;
  cmd_design->add_option("--config", config_path, "JSON config file");
  auto* opt_k = cmd_design->add_option("--K", dcfg.kmax,
                                       "Number of qualitative attributes");
  auto* opt_m =
      cmd_design->add_option("--m", dcfg.n_alternatives, "Alternatives (2|3)");
  auto* opt_v =
      cmd_design->add_option("--levels", dcfg.n_levels, "Levels per attribute");
  auto* opt_model = cmd_design->add_option("--model", model_name,
                                           "I|II|independent|dependent");
  double sigma0 = 0.0;
  auto* opt_s0 = cmd_design->add_option(
      "--sigma0-sq", sigma0, "Part-worth variance (default 1/(2K))");
  auto* opt_st = cmd_design->add_option("--sigma-t-sq", dcfg.sigma_t_sq,
                                        "Quantitative part-worth variance");
  auto* opt_q = cmd_design->add_flag("--quantitative", dcfg.quantitative,
                                     "Include the quantitative attribute");
  auto* opt_b1 = cmd_design->add_option("--beta1", dcfg.beta1,
                                        "Qualitative coefficients");
  auto* opt_b2 =
      cmd_design->add_option("--beta2", dcfg.beta2, "Quantitative coefficient");
  auto* opt_seed = cmd_design->add_option("--seed", dcfg.seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_table1->parsed()) {
      emit(format == "json" ? pcd::table1_json(t1_kmax)
                            : pcd::table1_csv(t1_kmax, full_precision),
           out_path);
    } else if (cmd_table->parsed()) {
      emit(format == "json" ? pcd::table_json(t_id, t_kmax)
                            : pcd::table_csv(t_id, t_kmax, full_precision),
           out_path);
    } else if (cmd_verify->parsed()) {
      const pcd::VerifyReport rep = pcd::verify_report(suite, seed);
      emit(rep.json, out_path);
      if (!rep.passed) {
        std::cerr << "verification suite '" << suite << "' FAILED\n";
        return 1;
      }
    } else if (cmd_design->parsed()) {
      // File first, flags override.
      pcd::RunConfig file_cfg = dcfg;
      std::string file_model = model_name;
      if (!config_path.empty()) {
        load_config_file(config_path, file_cfg, file_model);
        if (opt_k->count() == 0) dcfg.kmax = file_cfg.kmax;
        if (opt_m->count() == 0) dcfg.n_alternatives = file_cfg.n_alternatives;
        if (opt_v->count() == 0) dcfg.n_levels = file_cfg.n_levels;
        if (opt_model->count() == 0) model_name = file_model;
        if (opt_s0->count() == 0) dcfg.sigma0_sq = file_cfg.sigma0_sq;
        if (opt_st->count() == 0) dcfg.sigma_t_sq = file_cfg.sigma_t_sq;
        if (opt_q->count() == 0) dcfg.quantitative = file_cfg.quantitative;
        if (opt_b1->count() == 0) dcfg.beta1 = file_cfg.beta1;
        if (opt_b2->count() == 0) dcfg.beta2 = file_cfg.beta2;
        if (opt_seed->count() == 0) dcfg.seed = file_cfg.seed;
      }
      if (opt_s0->count() > 0) dcfg.sigma0_sq = sigma0;
      dcfg.kind = parse_model(model_name);
      dcfg.full_precision = full_precision;
      emit(pcd::design_report(dcfg), out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
