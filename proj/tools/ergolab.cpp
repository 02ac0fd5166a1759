#include <iostream>

#include <CLI11.hpp>

#include "ergolab/lab.hpp"

namespace {

std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print(const ergolab::ExperimentResult& r) {
  if (!r.error.empty()) {
    std::cerr << "error " << r.error << "\n";
    return;
  }
  std::cout << r.name << " (" << r.kind << "): " << (r.pass ? "pass" : "fail") << " [" << r.detail
            << "] final=" << short_fmt(r.final_value) << " tol=" << short_fmt(r.tolerance);
  if (r.expected) std::cout << " expect=" << *r.expected << (r.exit_code == 0 ? " (met)" : " (unmet)");
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergolab: numerical laboratory for multiple ergodic averages"};
  app.set_version_flag("--version", std::string(ergolab::kVersion));
  app.require_subcommand(1);

  std::string config, manifest, out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool parallel = false;

  auto* run = app.add_subcommand("run", "run the experiments of one config");
  run->add_option("config", config, "config file")->required();
  run->add_option("--out", out, "directory for CSV and JSON reports");
  run->add_option("--threads", threads, "worker threads (else ERGOLAB_THREADS, else all cores)");
  auto* seed_opt = run->add_option("--seed", seed, "seed for randomized estimators");

  auto* batch = app.add_subcommand("batch", "run every config listed in a manifest");
  batch->add_option("manifest", manifest, "manifest file")->required();
  batch->add_option("--out", out, "directory for reports (one subdirectory per config)");
  batch->add_option("--threads", threads, "worker threads");
  batch->add_flag("--parallel", parallel, "run configs concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ergolab::RunOptions opt;
  if (!out.empty()) opt.out = out;
  opt.threads = threads;
  if (*seed_opt) opt.seed = seed;

  if (*run) {
    auto res = ergolab::run_file(config, opt);
    if (!res.error.empty()) std::cerr << "error " << res.error << "\n";
    for (const auto& r : res.experiments) print(r);
    return res.exit_code;
  }
  auto res = ergolab::run_batch(manifest, opt, parallel);
  if (!res.error.empty()) std::cerr << "error " << res.error << "\n";
  std::size_t count = 0;
  for (const auto& e : res.entries) {
    std::cout << "== " << e.config.string() << " (exit " << e.result.exit_code << ")\n";
    if (!e.result.error.empty()) std::cerr << "error " << e.result.error << "\n";
    for (const auto& r : e.result.experiments) {
      print(r);
      ++count;
    }
  }
  std::cout << "batch: " << res.entries.size() << " configs, " << count << " experiments, exit " << res.exit_code
            << "\n";
  return res.exit_code;
}
