// flagquer command line: compute flag quermassintegrals for concrete bodies
// and functions, run the verification suites, and reproduce the worked
// examples. Batch-oriented; every printed number carries its standard error
// and the seed that produced it.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flagquer/flagquer.hpp"

namespace {

using namespace flagquer;

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid integer in " + flag + ": \"" + item + "\"");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + " must be a comma-separated list");
  return out;
}

json load_json_arg(const std::string& arg, const std::string& flag) {
  std::string text = arg;
  if (!arg.empty() && arg.front() == '@') {
    std::ifstream in(arg.substr(1));
    if (!in) throw std::invalid_argument("cannot open file for " + flag + ": " + arg.substr(1));
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return json::parse(text);
  } catch (const std::exception& err) {
    throw std::invalid_argument("malformed JSON for " + flag + ": " + err.what());
  }
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << text;
}

std::string describe(const Estimate& e) {
  std::ostringstream os;
  os.precision(10);
  os << e.mean << " +- " << e.std_error << "  (samples=" << e.samples << " seed=" << e.seed;
  if (e.rejected) os << " rejected=" << e.rejected;
  os << " kurtosis=" << e.excess_kurtosis << ")";
  if (e.excess_kurtosis > 100.0 || e.rejected > 0)
    os << "  [unstable: heavy-tailed integrand, treat the SE with care]";
  return os.str();
}

struct ComputeArgs {
  std::string quantity;
  std::string body_json;
  std::string function_json;
  std::string indices;
  std::string permutation;
  std::string d_values;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string format = "text";
  std::string output;
  std::string route = "direct";
};

int run_compute(const ComputeArgs& args) {
  RunOptions opts;
  opts.samples = args.samples;
  opts.seed = args.seed;
  opts.threads = args.threads;
  if (args.route == "via-complete")
    opts.route = FlagRoute::via_complete;
  else if (args.route != "direct")
    throw std::invalid_argument("unknown --route (use direct or via-complete)");

  Result result;
  result.quantity = args.quantity;

  auto need_body = [&]() {
    if (args.body_json.empty()) throw std::invalid_argument("--body is required");
    const json j = load_json_arg(args.body_json, "--body");
    Body body = parse_body(j);
    result.body = emit_body(body);
    return body;
  };
  auto need_indices = [&](int n) {
    if (args.indices.empty()) throw std::invalid_argument("--indices is required");
    IndexSeq seq(n, parse_int_list(args.indices, "--indices"));
    result.indices = seq.indices();
    return seq;
  };
  auto need_permutation = [&]() {
    if (args.permutation.empty()) throw std::invalid_argument("--permutation is required");
    Permutation perm(parse_int_list(args.permutation, "--permutation"));
    result.permutation = perm.values();
    return perm;
  };
  auto need_function = [&]() {
    if (args.function_json.empty()) throw std::invalid_argument("--function is required");
    FlagFunction f = parse_function(load_json_arg(args.function_json, "--function"));
    result.body = emit_function(f);
    return f;
  };

  std::string note;
  if (args.quantity == "psi_r") {
    const Body body = need_body();
    result.estimate = psi_r(body, need_indices(body.dim()), opts);
  } else if (args.quantity == "phi_r") {
    const Body body = need_body();
    result.estimate = phi_r(body, need_indices(body.dim()), opts);
  } else if (args.quantity == "psi_full") {
    result.estimate = psi_full(need_body(), opts);
  } else if (args.quantity == "phi_full") {
    result.estimate = phi_full(need_body(), opts);
  } else if (args.quantity == "psi_omega") {
    result.estimate = psi_omega(need_body(), need_permutation(), opts);
  } else if (args.quantity == "phi_omega") {
    result.estimate = phi_omega(need_body(), need_permutation(), opts);
  } else if (args.quantity == "functional_i") {
    const FlagFunction f = need_function();
    result.estimate = functional_I(f, need_indices(function_dim(f)), opts);
  } else if (args.quantity == "dpp_ratio") {
    const FlagFunction f = need_function();
    const BoundReport r = dpp_flag_ratio(f, need_indices(function_dim(f)), opts);
    result.estimate = r.lhs;
    std::ostringstream os;
    os.precision(10);
    os << "bound=" << r.bound << " margin_se=" << r.margin_se
       << (r.holds_within_3se ? " (holds)" : " (VIOLATED)");
    note = os.str();
  } else if (args.quantity == "phi_r_function") {
    const FlagFunction f = need_function();
    const auto* stack = std::get_if<LevelStackFn>(&f);
    if (!stack)
      throw std::invalid_argument("phi_r_function needs a level_stack function");
    result.estimate = phi_r_of_function(*stack, need_indices(stack->dim()), opts);
  } else if (args.quantity == "example2_a") {
    if (args.d_values.empty()) throw std::invalid_argument("--d is required (three values)");
    std::vector<double> d;
    std::stringstream ss(args.d_values);
    std::string item;
    while (std::getline(ss, item, ',')) d.push_back(std::stod(item));
    if (d.size() != 3) throw std::invalid_argument("--d needs exactly three values");
    result.estimate = example2_A(d[0], d[1], d[2], opts);
  } else {
    throw std::invalid_argument("unknown --quantity \"" + args.quantity + "\"");
  }

  if (args.format == "text") {
    std::ostringstream os;
    os << result.quantity << ": " << describe(result.estimate);
    if (!note.empty()) os << "\n" << note;
    write_output(os.str(), args.output);
  } else if (args.format == "json") {
    write_output(result_to_json(result).dump(2), args.output);
  } else if (args.format == "csv") {
    write_output(result_csv_header() + "\n" + result_to_csv(result), args.output);
  } else {
    throw std::invalid_argument("unknown --format (use text, json, or csv)");
  }
  return 0;
}

int run_verify(const std::vector<std::string>& names, harness::RunConfig cfg,
               const std::string& format, const std::string& output) {
  std::vector<std::string> selected = names;
  if (selected.empty()) selected.push_back("all");
  const auto reports = harness::run_suite(selected, cfg);
  double total_ms = 0.0;
  for (const auto& r : reports) total_ms += r.wall_time_ms;
  if (format == "text")
    write_output(harness::reports_to_text(reports), output);
  else if (format == "json")
    write_output(harness::reports_to_json(reports).dump(2), output);
  else if (format == "csv")
    write_output(harness::reports_to_csv(reports), output);
  else
    throw std::invalid_argument("unknown --format (use text, json, or csv)");
  std::cerr << "suite wall time: " << static_cast<long>(total_ms) << " ms\n";
  return harness::suite_exit_code(reports);
}

int run_list() {
  std::cout << "checks:\n";
  for (const auto& spec : harness::registry())
    std::cout << "  " << spec.name << " (criterion " << spec.criterion << "): "
              << spec.description << "\n";
  std::cout << "body types: ball, ellipsoid, cube, polytope_v, polytope_h\n";
  std::cout << "function types: gaussian, level_stack\n";
  std::cout << "quantities: psi_r phi_r psi_full phi_full psi_omega phi_omega "
               "functional_i dpp_ratio phi_r_function example2_a\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "flag-manifold quermassintegrals: Monte Carlo estimators, closed-form "
      "oracles, and a statistical verification suite"};
  app.require_subcommand(1);

  ComputeArgs cargs;
  auto* compute = app.add_subcommand("compute", "estimate one quantity");
  compute->add_option("--quantity", cargs.quantity,
                      "psi_r|phi_r|psi_full|phi_full|psi_omega|phi_omega|functional_i|"
                      "dpp_ratio|phi_r_function|example2_a")
      ->required();
  compute->add_option("--body", cargs.body_json, "body JSON (inline or @file)");
  compute->add_option("--function", cargs.function_json, "function JSON (inline or @file)");
  compute->add_option("--indices", cargs.indices, "comma-separated index sequence, e.g. 1,2");
  compute->add_option("--permutation", cargs.permutation, "comma-separated permutation");
  compute->add_option("--d", cargs.d_values, "d1,d2,d3 for example2_a");
  compute->add_option("--samples", cargs.samples, "flag samples (default 200000)");
  compute->add_option("--seed", cargs.seed, "base seed (default 0)");
  compute->add_option("--threads", cargs.threads,
                      "worker threads (default: FLAGQUER_THREADS or all cores)");
  compute->add_option("--format", cargs.format,
                      "text|json|csv (default text; csv columns: quantity,body,indices,"
                      "permutation,mean,std_error,samples,seed,wall_time_ms)");
  compute->add_option("--output", cargs.output, "write to file instead of stdout");
  compute->add_option("--route", cargs.route, "direct|via-complete flag sampling");

  std::vector<std::string> verify_names;
  harness::RunConfig vcfg;
  std::string vformat = "text", voutput;
  auto* verify = app.add_subcommand("verify", "run named verification checks (or all)");
  verify->add_option("names", verify_names, "check names, or 'all' (default: all)");
  verify->add_option("--seed", vcfg.seed, "suite seed (default 42)");
  verify->add_option("--samples", vcfg.samples, "override per-check sample budget");
  verify->add_option("--threads", vcfg.threads, "worker threads");
  verify->add_option("--format", vformat, "text|json|csv");
  verify->add_option("--output", voutput, "write to file instead of stdout");

  std::string target;
  harness::RunConfig rcfg;
  auto* reproduce =
      app.add_subcommand("reproduce", "re-run a named worked example or inequality");
  reproduce->add_option("target", target, "example1|example2|busemann-straus|santalo-pair")
      ->required();
  reproduce->add_option("--seed", rcfg.seed, "suite seed (default 42)");
  reproduce->add_option("--samples", rcfg.samples, "override sample budget");
  reproduce->add_option("--threads", rcfg.threads, "worker threads");

  auto* list = app.add_subcommand("list", "list checks, body types, and quantities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit 2, --help exits 0
  }

  try {
    if (compute->parsed()) return run_compute(cargs);
    if (verify->parsed()) return run_verify(verify_names, vcfg, vformat, voutput);
    if (reproduce->parsed())
      return run_verify(harness::reproduce_checks(target), rcfg, "text", "");
    if (list->parsed()) return run_list();
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
