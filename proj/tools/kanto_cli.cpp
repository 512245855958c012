// Config-driven experiment runner. Exit codes: 0 all assertions hold,
// 1 assertion violations (reports written), 2 configuration or solver error.

#include <CLI11.hpp>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "kanto/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Outputs {
  std::vector<std::pair<fs::path, std::string>> files;
};

int fail(const std::string& msg) {
  std::cerr << "kanto: " << msg << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport-entropy experiments on finite lattice volumes"};
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  unsigned jobs = 1;
  app.add_option("--config", config_path, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed-override", seed_override, "replace the master seed");
  app.add_option("--jobs", jobs, "experiments run concurrently")->check(CLI::Range(1u, 256u));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  kanto::RunConfig rc;
  try {
    std::ifstream in(config_path);
    const auto j = kanto::Json::parse(in);
    rc = kanto::parse_config(j);
  } catch (const kanto::Json::exception& e) {
    return fail(std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  if (seed_override) rc.seed = *seed_override;
  if (!out_dir.empty()) rc.output_dir = out_dir;
  if (rc.output_dir.empty()) return fail("no output directory: set output_dir or pass --out");

  std::vector<kanto::ExperimentResult> results(rc.experiments.size());
  std::vector<std::string> errors(rc.experiments.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rc.experiments.size();) {
      try {
        results[i] = kanto::run_experiment(rc.experiments[i], rc.seed);
      } catch (const std::exception& e) {
        errors[i] = rc.experiments[i].name + ": " + e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(rc.experiments.size()));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (!e.empty()) return fail(e);

  // everything is computed; only now touch the filesystem
  const auto summary = kanto::summarize(rc, results);
  Outputs out;
  out.files.emplace_back(fs::path(rc.output_dir) / "summary.json", summary.dump(2) + "\n");
  for (const auto& r : results)
    for (const auto& [suffix, text] : r.csv) out.files.emplace_back(fs::path(rc.output_dir) / (r.name + suffix + ".csv"), text);
  try {
    fs::create_directories(rc.output_dir);
    for (const auto& [path, text] : out.files) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << text;
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }

  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.kind << " " << r.name << "\n";
    for (const auto& f : r.failures) std::cout << "  " << f << "\n";
  }
  return summary["passed"].get<bool>() ? 0 : 1;
}
