#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "chp/artifacts.hpp"

namespace {

void add_common(CLI::App* cmd, chp::RunConfig& cfg, bool needs_instance) {
  auto* inst = cmd->add_option("--instance", cfg.instance_path, "instance file (json)");
  if (needs_instance) inst->required();
  cmd->add_option("--out", cfg.out_dir, "output directory for run artifacts");
  cmd->add_option("--kkt-tol", cfg.kkt_tol, "KKT residual tolerance");
  cmd->add_option("--price-tol", cfg.price_tol, "price oracle tolerance");
  cmd->add_option("--seed", cfg.seed, "seed for randomized sweeps");
  cmd->add_option("--targets", cfg.targets,
                  "restrict verification to targets (node:ID or bus:ID)")
      ->delimiter(',');
  cmd->add_flag("--export-qp", cfg.export_qp, "write the assembled program in LP format");
  cmd->add_flag("--dump-dynamics", cfg.dump_dynamics,
                "write the heat recurrence matrices per period");
}

int finish(const chp::RunOutputs& out) {
  if (!out.log.empty()) std::fputs(out.log.c_str(), stdout);
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chpmarket: combined heat and power market clearing and settlement"};
  app.require_subcommand(1);

  chp::RunConfig cfg;

  CLI::App* clear = app.add_subcommand("clear", "solve, price and settle an instance");
  add_common(clear, cfg, true);
  clear->callback([&] { cfg.command = "clear"; });

  CLI::App* verify = app.add_subcommand("verify", "finite-difference price verification");
  add_common(verify, cfg, true);
  verify->add_option("--sweep", cfg.sweep_count, "also run a randomized property sweep");
  verify
      ->add_option("--fault-scale-heat-duals", cfg.fault_scale_heat_duals,
                   "test hook: scale heat balance duals before pricing")
      ->group("");  // hidden
  verify->callback([&] { cfg.command = "verify"; });

  CLI::App* plotdata = app.add_subcommand("plotdata", "export plot-ready series from a run");
  add_common(plotdata, cfg, false);
  plotdata->callback([&] { cfg.command = "plotdata"; });

  CLI::App* validate = app.add_subcommand("validate", "check an instance file");
  add_common(validate, cfg, true);
  validate->callback([&] { cfg.command = "validate"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (cfg.command == "clear") return finish(chp::run_clear(cfg));
    if (cfg.command == "verify") return finish(chp::run_verify(cfg));
    if (cfg.command == "plotdata") {
      if (cfg.out_dir.empty()) {
        std::fputs("plotdata requires --out pointing at a completed clear run\n", stderr);
        return 1;
      }
      return finish(chp::run_plotdata(cfg));
    }
    if (cfg.command == "validate") return finish(chp::run_validate(cfg));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
