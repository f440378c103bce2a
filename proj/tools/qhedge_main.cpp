#include <openssl/evp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>

#include "qhedge/cli.hpp"

namespace {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qhedge::InputError(path + ": cannot open file");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 unavailable");
  }
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    qhedge::io::write_text(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qhedge;
  CLI::App app{"Strategy SDPs, parallel-repetition certificates and error-reduction planning"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::GlobalOptions opt;
  std::string out_path;
  bool quiet = false;
  app.add_option("--tol", opt.tol, "solver tolerance, in [1e-10, 1e-2]")->capture_default_str();
  app.add_option("--max-iter", opt.max_iter, "interior-point iteration cap")->capture_default_str();
  app.add_option("--out", out_path, "write the report (or CSV) here instead of stdout");
  app.add_flag("--quiet", quiet, "suppress the summary on stderr");

  cli::SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve a strategy SDP for a game");
  solve->add_option("--game", solve_args.game_file, "game JSON")->required();
  solve->add_option("--objective", solve_args.objective, "win | value:v0,v1,... | threshold:n,k")->capture_default_str();
  solve->add_option("--n", solve_args.n, "parallel copies for value objectives")->capture_default_str();
  std::string solve_witness_out;
  solve->add_option("--witness-out", solve_witness_out, "write the certified dual witness here");

  cli::CertifyArgs cert_args;
  std::string cert_witness, cert_construction, cert_values, cert_witness_out;
  std::size_t cert_k = 0;
  auto* certify = app.add_subcommand("certify", "check a dual witness, read from a file or built by a named construction");
  certify->add_option("--game", cert_args.game_file, "game JSON")->required();
  auto* wopt = certify->add_option("--witness", cert_witness, "witness JSON");
  auto* copt = certify->add_option("--construction", cert_construction,
                                   "average | tensor-power | naive | snk | classical-binomial");
  wopt->excludes(copt);
  certify->add_option("--n", cert_args.n, "parallel copies")->capture_default_str();
  auto* kopt = certify->add_option("--k", cert_k, "threshold (default 1; tensor-power uses n)");
  certify->add_option("--values", cert_values, "outcome values for the average construction, comma separated");
  certify->add_option("--witness-out", cert_witness_out, "write the checked witness here");

  auto* demo = app.add_subcommand("hedging-demo", "reproduce the perfect-hedging counterexample end to end");

  cli::PlanArgs plan_args;
  auto* plan = app.add_subcommand("error-reduction", "plan threshold repetition for an interactive proof");
  plan->add_option("--alpha", plan_args.alpha, "completeness probability")->required();
  plan->add_option("--beta", plan_args.beta, "soundness probability")->required();
  plan->add_option("--epsilon", plan_args.epsilon, "target error, in (0, 0.5)")->required();

  cli::CurveArgs curve_args;
  auto* curve = app.add_subcommand("plot-entropy", "sample 2^(-H(x)/x) as CSV");
  curve->add_option("--min", curve_args.x_min)->capture_default_str();
  curve->add_option("--max", curve_args.x_max)->capture_default_str();
  curve->add_option("--step", curve_args.step)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kInputError;
  }

  try {
    cli::RunReport report;
    std::string artifact;
    if (solve->parsed()) {
      if (!solve_witness_out.empty()) solve_args.witness_out = solve_witness_out;
      report = cli::cmd_solve(solve_args, opt, sha256_file);
    } else if (certify->parsed()) {
      if (!cert_witness.empty()) cert_args.witness_file = cert_witness;
      if (!cert_construction.empty()) cert_args.construction = cert_construction;
      if (kopt->count()) cert_args.k = cert_k;
      if (!cert_values.empty())
        for (const auto& v : cli::detail::split(cert_values, ','))
          cert_args.values.push_back(cli::detail::parse_double(v, "--values"));
      if (!cert_witness_out.empty()) cert_args.witness_out = cert_witness_out;
      report = cli::cmd_certify(cert_args, opt, sha256_file);
    } else if (demo->parsed()) {
      report = cli::cmd_hedging_demo(opt);
    } else if (plan->parsed()) {
      report = cli::cmd_plan(plan_args);
    } else if (curve->parsed()) {
      report = cli::cmd_plot_entropy(curve_args, artifact);
    }
    if (artifact.empty()) artifact = cli::to_json(report).dump(2) + "\n";
    emit(artifact, out_path);
    if (!quiet) std::cerr << report.command << ": " << report.summary << "\n";
    return report.exit_code;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::kInputError;
  } catch (const DomainError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return cli::kDomainNegative;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kNumerical;
  }
}
