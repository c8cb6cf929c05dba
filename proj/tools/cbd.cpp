#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbd/error.hpp"
#include "cbd/ingestion.hpp"
#include "cbd/report.hpp"

namespace {

constexpr int kNoncontextual = 0;
constexpr int kContextual = 1;
constexpr int kFailure = 2;

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cbd::Error(cbd::ErrorCode::EmptyInput, "cannot read '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw cbd::Error(cbd::ErrorCode::EmptyInput, "cannot write '" + path + "'");
}

struct Outcome {
  int code = kFailure;
  std::string output;
  std::string error;
};

template <class Fn>
Outcome guarded(const std::string& source, Fn&& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.code = kFailure;
    o.error = source + ": " + e.what();
  }
  return o;
}

int emit(const std::vector<Outcome>& outcomes) {
  int code = kNoncontextual;
  for (const auto& o : outcomes) {
    if (!o.output.empty()) std::cout << o.output;
    if (!o.error.empty()) std::cerr << "error: " << o.error << '\n';
    if (o.code == kFailure) {
      code = kFailure;
    } else if (o.code == kContextual && code != kFailure) {
      code = kContextual;
    }
  }
  return code;
}

int verdict_code(const cbd::Report& r) {
  if (r.verdict) return r.verdict->contextual ? kContextual : kNoncontextual;
  if (r.cyclic && r.cyclic->cyclic) return r.cyclic->contextual() ? kContextual : kNoncontextual;
  return kNoncontextual;
}

std::vector<Outcome> fan_out(const std::vector<std::string>& files,
                             const std::function<Outcome(const std::string&)>& task) {
  std::vector<std::future<Outcome>> jobs;
  for (const auto& f : files) {
    const auto policy = files.size() > 1 && f != "-" ? std::launch::async : std::launch::deferred;
    jobs.push_back(std::async(policy, [&task, f] { return guarded(f, [&] { return task(f); }); }));
  }
  std::vector<Outcome> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string render(const cbd::Report& r, const std::string& format) {
  if (format == "json") return cbd::report_to_json(r) + "\n";
  return cbd::report_to_text(r);
}

std::array<double, 4> parse_angles(const std::string& text) {
  std::array<double, 4> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 4) throw cbd::Error(cbd::ErrorCode::DimensionMismatch, "expected four angles");
    std::size_t used = 0;
    try {
      out[n] = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || !std::isfinite(out[n])) {
      throw cbd::Error(cbd::ErrorCode::InvalidNumber, "bad angle '" + item + "'");
    }
    ++n;
  }
  if (n != 4) throw cbd::Error(cbd::ErrorCode::DimensionMismatch, "expected four angles");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextuality analysis of context-content systems"};
  app.require_subcommand(1);

  std::vector<std::string> analyze_files;
  bool measure = false;
  bool witness = false;
  std::size_t max_columns = cbd::kDefaultMaxColumns;
  std::string format = "text";
  auto* analyze = app.add_subcommand("analyze", "Decide contextuality of system files (\"-\" reads stdin)");
  analyze->add_option("files", analyze_files, "System JSON files")->required();
  analyze->add_flag("--measure", measure, "Also compute the total-variation measure");
  analyze->add_flag("--witness", witness, "Print couplings, quasi-couplings and certificates");
  analyze->add_option("--max-columns", max_columns, "Cap on hidden outcomes")->check(CLI::PositiveNumber);
  analyze->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::vector<std::string> cyclic_files;
  std::string cyclic_format = "text";
  auto* cyclic = app.add_subcommand("cyclic", "Evaluate the cyclic-system criterion");
  cyclic->add_option("files", cyclic_files, "System JSON files")->required();
  cyclic->add_option("--format", cyclic_format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string trials_path;
  std::string layout_path;
  std::string estimate_out;
  auto* estimate = app.add_subcommand("estimate", "Estimate a system from trial counts");
  estimate->add_option("trials", trials_path, "Trial CSV")->required();
  estimate->add_option("layout", layout_path, "Layout JSON (system document without bunches)")->required();
  estimate->add_option("-o,--output", estimate_out, "Output file (default stdout)");

  auto* generate = app.add_subcommand("generate", "Emit bundled or generated systems");
  generate->require_subcommand(1);
  std::string angles_text;
  std::uint64_t bound = 1'000'000;
  std::string generate_out;
  auto* epr = generate->add_subcommand("epr-b", "Spin measurements on a singlet pair");
  epr->add_option("--angles", angles_text, "Four comma-separated axis angles in radians")->required();
  epr->add_option("--denominator-bound", bound, "Largest denominator of the rounded masses")
      ->check(CLI::PositiveNumber);
  epr->add_option("-o,--output", generate_out, "Output file (default stdout)");
  std::string example_name;
  std::string p_text = "1/2";
  auto* example = generate->add_subcommand("example", "A bundled example system");
  example->add_option("--name", example_name, "Example name")->required()->check(CLI::IsMember(cbd::example_names()));
  example->add_option("--p", p_text, "Parameter of fig14");
  example->add_option("-o,--output", generate_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kFailure;
  }

  if (*analyze) {
    cbd::ReportOptions options;
    options.measure = measure;
    options.witness = witness;
    options.analysis.max_columns = max_columns;
    return emit(fan_out(analyze_files, [&](const std::string& f) {
      const auto s = cbd::parse_system(read_input(f));
      const auto r = cbd::build_report(s, options, f);
      return Outcome{verdict_code(r), render(r, format), {}};
    }));
  }

  if (*cyclic) {
    cbd::ReportOptions options;
    options.verdict = false;
    return emit(fan_out(cyclic_files, [&](const std::string& f) {
      const auto s = cbd::parse_system(read_input(f));
      const auto r = cbd::build_report(s, options, f);
      return Outcome{verdict_code(r), render(r, cyclic_format), {}};
    }));
  }

  if (*estimate) {
    return emit({guarded(trials_path, [&] {
      const auto trials = cbd::parse_trials(read_input(trials_path));
      const auto layout = cbd::parse_layout(read_input(layout_path));
      write_output(estimate_out, cbd::serialize_system(cbd::estimate_system(trials, layout)));
      return Outcome{kNoncontextual, {}, {}};
    })});
  }

  if (*epr) {
    return emit({guarded("epr-b", [&] {
      const auto g = cbd::generate_epr_b(parse_angles(angles_text), bound);
      write_output(generate_out, cbd::serialize_system(g.system));
      std::ostringstream note;
      note << "denominator bound " << g.denominator_bound << ", max mass error " << g.max_mass_error
           << ", max product-expectation error " << g.max_product_error << '\n';
      std::cerr << note.str();
      return Outcome{kNoncontextual, {}, {}};
    })});
  }

  if (*example) {
    return emit({guarded(example_name, [&] {
      const auto s = cbd::example_system(example_name, cbd::Rational::parse(p_text));
      write_output(generate_out, cbd::serialize_system(s));
      return Outcome{kNoncontextual, {}, {}};
    })});
  }
  return kFailure;
}
