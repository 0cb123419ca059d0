// Runs acceptance criteria 1..11 and prints one PASS/FAIL line per criterion.
// Full verdict details go to <out-dir>/acceptance.json.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "voterlab/errors.hpp"
#include "voterlab/suites.hpp"
#include "voterlab/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"voterlab acceptance criteria"};
  voterlab::SuiteOptions opts;
  std::string out_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--seed", opts.seed, "base seed");
  app.add_option("--threads", opts.threads, "worker threads (0 = hardware)");
  app.add_option("--scale", opts.scale, "multiplier on trial counts (1 = full size)");
  app.add_option("--out-dir", out_dir, "directory for acceptance.json");
  app.add_option("--only", only, "run only these criterion ids");
  CLI11_PARSE(app, argc, argv);
  if (const char* env = std::getenv("VOTERLAB_SEED")) opts.seed = std::stoull(env);

  const std::set<int> selected(only.begin(), only.end());
  nlohmann::json report{{"version", voterlab::kVersion}, {"seed", opts.seed}, {"scale", opts.scale},
                        {"criteria", nlohmann::json::array()}};
  bool all = true;
  for (const auto& c : voterlab::acceptance_criteria()) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    nlohmann::json entry{{"id", c.id}, {"title", c.title}};
    bool pass = false;
    std::string note;
    try {
      const auto res = c.run(opts);
      pass = res.pass();
      entry["result"] = res.to_json();
      std::size_t failed = 0;
      for (const auto& v : res.verdicts) failed += !v.pass;
      note = std::to_string(res.verdicts.size() - failed) + "/" + std::to_string(res.verdicts.size()) + " checks";
    } catch (const std::exception& e) {
      note = std::string("error: ") + e.what();
      entry["error"] = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    entry["pass"] = pass;
    entry["seconds"] = secs;
    report["criteria"].push_back(entry);
    all = all && pass;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.title << " (" << note << ", "
              << static_cast<long>(secs) << "s)" << std::endl;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "acceptance.json") << report.dump(2) << '\n';
  return all ? 0 : 1;
}
