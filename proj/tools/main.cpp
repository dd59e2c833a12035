#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "rfvqa/error.hpp"

namespace {

int exit_code(rfvqa::ErrorCategory c) {
  switch (c) {
    case rfvqa::ErrorCategory::Config:
      return 2;
    case rfvqa::ErrorCategory::MissingArtifact:
      return 3;
    case rfvqa::ErrorCategory::Transport:
    case rfvqa::ErrorCategory::Auth:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rfvqa::cli;
  CLI::App app{"RF signal visualization and VQA benchmark toolkit"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_file;
  std::uint64_t seed = 0;
  std::string output_dir;
  unsigned workers = 0;
  app.add_option("-c,--config", config_file, "JSON run configuration");
  app.add_option("--set", ov.sets, "override one key, e.g. --set dataset.n_way=5 (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* out_opt = app.add_option("-o,--output-dir", output_dir, "experiment folder (overrides the config)");
  auto* workers_opt = app.add_option("-j,--workers", workers, "generation worker threads, 0 = all cores");

  app.add_subcommand("classes", "list the modulation taxonomy (name, family, order)");
  app.add_subcommand("gen", "synthesize signals and render image assets");
  app.add_subcommand("build", "assemble VQA episodes from the asset manifest");
  auto* infer = app.add_subcommand("infer", "query a chat-completions endpoint for every episode");
  bool no_resume = false;
  infer->add_flag("--no-resume", no_resume, "discard existing responses instead of skipping them");
  app.add_subcommand("score", "score responses and write reports/");
  auto* sweep = app.add_subcommand("sweep", "tabulate accuracy against SNR, n-way or OOV count");
  std::string facet;
  std::vector<std::string> report_args;
  sweep->add_option("--facet", facet, "snr | nway | oov")->required();
  sweep->add_option("--report", report_args, "label=path of a scored report.json (repeatable)");
  app.add_subcommand("baseline", "nearest-centroid spectrogram baseline on the generated assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "classes") {
      cmd_classes(std::cout);
      return 0;
    }
    if (!config_file.empty()) ov.file = config_file;
    if (*seed_opt) ov.seed = seed;
    if (*out_opt) ov.output_dir = output_dir;
    if (*workers_opt) ov.workers = workers;
    const RunConfig cfg = resolve_config(ov);
    if (cmd == "gen") {
      cmd_gen(cfg, std::cerr);
    } else if (cmd == "build") {
      cmd_build(cfg, std::cerr);
    } else if (cmd == "infer") {
      cmd_infer(cfg, !no_resume, std::cerr);
    } else if (cmd == "score") {
      cmd_score(cfg, std::cout);
    } else if (cmd == "sweep") {
      std::vector<std::pair<std::string, std::filesystem::path>> reports;
      for (const auto& r : report_args) reports.push_back(parse_report_arg(r));
      rfvqa::SweepFacet f;
      try {
        f = rfvqa::parse_facet(facet);
      } catch (const rfvqa::InvalidArgument& e) {
        throw rfvqa::ConfigError(e.what());
      }
      cmd_sweep(cfg, f, reports, std::cout);
    } else if (cmd == "baseline") {
      cmd_baseline(cfg, std::cout);
    }
    return 0;
  } catch (const rfvqa::Error& e) {
    std::cerr << "error[" << rfvqa::category_name(e.category()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}
