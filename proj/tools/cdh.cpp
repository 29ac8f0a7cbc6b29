#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "cdh/errors.hpp"
#include "cdh/scenario.hpp"

namespace {

void print_failures(const cdh::Json& failures) {
  for (const auto& f : failures) std::cout << "failure " << f.dump() << "\n";
}

int run_command(const std::string& path, const std::optional<std::size_t>& depth,
                const std::optional<std::size_t>& budget, const std::optional<std::uint64_t>& seed,
                const std::optional<double>& tolerance, const std::string& csv, const std::string& out) {
  cdh::Scenario s = cdh::load_scenario(path);
  if (depth) s.depth = *depth;
  if (budget) s.budget = *budget;
  if (seed) s.seed = *seed;
  if (tolerance) s.tolerance = *tolerance;
  const std::string base = std::filesystem::path(path).parent_path().string();
  const auto result = cdh::run_scenario(s, base.empty() ? "." : base);
  const std::string target = out.empty() ? (s.name.empty() ? s.operation : s.name) + ".cert.json" : out;
  cdh::write_file_atomic(target, result.document.dump() + "\n");
  if (!csv.empty()) {
    if (result.csv.empty()) std::cout << "no plot data for " << s.operation << "\n";
    else cdh::write_file_atomic(csv, result.csv);
  }
  std::cout << s.operation << " " << (result.passed() ? "pass" : "fail") << " -> " << target << "\n";
  if (s.operation == "cdh-run" && result.document.at("body").contains("pairs")) {
    std::cout << "settled pairs: " << result.document.at("body").at("pairs").size() << "\n";
  }
  print_failures(result.document.at("failures"));
  return result.passed() ? 0 : 1;
}

int reverify_command(const std::string& path, const std::string& out) {
  const auto doc = cdh::read_document(path);
  const auto report = cdh::reverify_document(doc);
  for (const auto& e : report.entries) {
    const char* status = !e.passed ? "FAIL" : e.certified ? "ok" : "sampled";
    std::cout << status << " " << e.entry << ": " << e.detail << "\n";
  }
  const auto j = report.to_json();
  print_failures(j.at("failures"));
  if (!out.empty()) cdh::write_file_atomic(out, j.dump(1) + "\n");
  std::cout << "reverify " << (report.passed() ? "pass" : "fail") << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified homeomorphisms of product spaces"};
  app.require_subcommand(1);

  std::string scenario, csv, out, cert, report_out;
  std::optional<std::size_t> depth, budget;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;

  auto* run = app.add_subcommand("run", "Run a scenario and write its certificate document");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--depth", depth, "Evaluation depth");
  run->add_option("--budget", budget, "Task budget");
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--tolerance", tolerance, "Float tolerance");
  run->add_option("--csv", csv, "Write plot data as CSV");
  run->add_option("--out", out, "Certificate path (default <name>.cert.json)");

  auto* rev = app.add_subcommand("reverify", "Re-check a certificate document from its recorded data");
  rev->add_option("certificate", cert, "Certificate document")->required();
  rev->add_option("--out", report_out, "Write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(scenario, depth, budget, seed, tolerance, csv, out);
    return reverify_command(cert, report_out);
  } catch (const cdh::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
