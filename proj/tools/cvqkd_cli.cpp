// Command-line front end: full protocol runs, parameter sweeps, and
// rate-only evaluation. Reports land in the output directory as
// report.json / blocks.jsonl / key.bin (when a key was extracted),
// sweep.csv and plotdata/*.dat for sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvqkd/config.hpp"
#include "cvqkd/pipeline.hpp"
#include "cvqkd/rates.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int do_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
           const std::string& out_dir) {
  cvqkd::ProtocolConfig cfg = cvqkd::load_config(config_path);
  if (seed_set) cfg.seed = seed;

  const cvqkd::RunReport rep = cvqkd::run_protocol(cfg);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "report.json", cvqkd::report_to_json(rep));
  write_file(fs::path(out_dir) / "blocks.jsonl", cvqkd::blocks_to_jsonl(rep));
  if (!rep.key.empty()) {
    const std::vector<std::uint8_t> packed = cvqkd::pack_key_bytes(rep.key);
    std::ofstream key_out(fs::path(out_dir) / "key.bin", std::ios::binary);
    key_out.write(reinterpret_cast<const char*>(packed.data()),
                  static_cast<std::streamsize>(packed.size()));
    if (!key_out) throw std::runtime_error("write failed: key.bin");
  }

  std::cout << "status: " << rep.status << "\n";
  if (rep.status == "OK") {
    std::printf("p_EC: %.4f   FER: %.4f   mean rounds: %.2f\n", rep.acct.p_ec, rep.acct.fer,
                rep.mean_fnd_rnd);
    std::printf("R: %.6g bits/use   r: %lld bits   epsilon: %.3e\n", rep.rates.R,
                static_cast<long long>(rep.rates.key_bits), rep.rates.epsilon);
    if (!rep.key.empty())
      std::printf("key: %zu bits, digest %s, match=%s\n", rep.key.size(),
                  cvqkd::hex64(rep.key_digest).c_str(), rep.keys_match ? "yes" : "no");
    else
      std::cout << "key: none (" << rep.key_status << ")\n";
  }
  std::cout << "report: " << (fs::path(out_dir) / "report.json").string() << "\n";
  return 0;
}

int do_sweep(const std::string& config_path, const std::string& param,
             const std::string& grid_csv, int reps, const std::string& out_dir) {
  cvqkd::ProtocolConfig cfg = cvqkd::load_config(config_path);

  std::vector<double> grid;
  std::string item;
  std::istringstream ss(grid_csv);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stod(item));
  }

  const std::vector<cvqkd::SweepPoint> points = cvqkd::run_sweep(cfg, param, grid, reps);

  fs::create_directories(fs::path(out_dir) / "plotdata");
  write_file(fs::path(out_dir) / "sweep.csv", cvqkd::sweep_to_csv(param, points));

  std::string dat = "# " + param + "  mean_R  stderr_R\n";
  std::string dat_rounds = "# " + param + "  mean_fnd_rnd  stderr_fnd_rnd\n";
  char line[256];
  for (const auto& pt : points) {
    std::snprintf(line, sizeof line, "%.10g %.10g %.10g\n", pt.value, pt.mean_R, pt.stderr_R);
    dat += line;
    std::snprintf(line, sizeof line, "%.10g %.10g %.10g\n", pt.value, pt.mean_fnd_rnd,
                  pt.stderr_fnd_rnd);
    dat_rounds += line;
  }
  write_file(fs::path(out_dir) / "plotdata" / ("R_vs_" + param + ".dat"), dat);
  write_file(fs::path(out_dir) / "plotdata" / ("rounds_vs_" + param + ".dat"), dat_rounds);

  for (const auto& pt : points)
    std::printf("%s=%-10.6g R=%.6g±%.2g  FER=%.3f  p_EC=%.3f  rounds=%.2f\n", param.c_str(),
                pt.value, pt.mean_R, pt.stderr_R, pt.mean_fer, pt.mean_p_ec, pt.mean_fnd_rnd);
  std::cout << "sweep table: " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

int do_rate(const std::string& config_path) {
  const cvqkd::ProtocolConfig cfg = cvqkd::load_config(config_path);
  const cvqkd::DerivedParams d = cvqkd::derive_params(cfg);

  const double I = cvqkd::mutual_information(d.snr);
  const double chi = cvqkd::holevo_bound(d.mu, d.T, cfg.eta, cfg.xi, cfg.v_el);
  const double R_asy = cfg.beta * I - chi;
  const double R_theo = cvqkd::theoretical_rate(
      d.mu, d.T, cfg.eta, cfg.xi, cfg.v_el, cfg.beta, 0.99, static_cast<double>(d.n),
      static_cast<double>(cfg.N), static_cast<double>(d.M_used), cfg.p, cfg.eps_pe, cfg.eps_s,
      cfg.eps_h);

  nlohmann::json j = {{"T", d.T},
                      {"Xi", d.Xi},
                      {"mu", d.mu},
                      {"snr", d.snr},
                      {"I_xy", I},
                      {"chi_Ey", chi},
                      {"R_asy", R_asy},
                      {"R_theo", R_theo},
                      {"m_per_block", d.m},
                      {"n_per_block", d.n}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-modulated CV-QKD simulation and post-processing"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", param, grid_csv;
  std::uint64_t seed = 0;
  int reps = 3;

  CLI::App* run = app.add_subcommand("run", "simulate one full protocol run");
  run->add_option("--config", config_path, "config file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default .)");

  CLI::App* sweep = app.add_subcommand("sweep", "repeat runs over a parameter grid");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--param", param, "one of N, L, xi, snr, p")->required();
  sweep->add_option("--grid", grid_csv, "comma-separated values")->required();
  sweep->add_option("--reps", reps, "repetitions per grid point (default 3)");
  sweep->add_option("--out", out_dir, "output directory (default .)");

  CLI::App* rate = app.add_subcommand("rate", "derived parameters and rates, no simulation");
  rate->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(config_path, seed, seed_opt->count() > 0, out_dir);
    if (sweep->parsed()) return do_sweep(config_path, param, grid_csv, reps, out_dir);
    return do_rate(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
