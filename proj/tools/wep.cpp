// wep command-line front end.
//
//   wep simulate --model bm-copula --weight pow:0.25 --n 100000 --seed 42
//   wep verify feller
//   wep clt sup --reps 2000 --csv sups.csv
//   wep replay run.json.manifest
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wep/commands.hpp"
#include "wep/config.hpp"

namespace {

struct Bindings {
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  std::string manifest_path;
};

bool is_switch(const wep::ConfigKey& k) { return k.fallback == "false"; }

void add_config_options(CLI::App* app, Bindings& b) {
  app->add_option("--config", b.config_path, "read settings from a config file (flags win)");
  app->add_option("--manifest", b.manifest_path, "manifest path (default: <out>.manifest when --out is set)");
  for (const auto& k : wep::config_keys()) {
    const std::string key = wep::RunConfig::key_of(k);
    const std::string help(k.help);
    if (is_switch(k)) {
      b.options[key] = app->add_flag(wep::flag_name(k), b.flags[key], help);
    } else {
      b.options[key] = app->add_option(wep::flag_name(k), b.text[key], help);
    }
  }
}

void apply(const Bindings& b, wep::RunConfig& cfg) {
  if (!b.config_path.empty()) {
    std::ifstream in(b.config_path);
    if (!in) throw wep::ConfigError("cannot open config file '" + b.config_path + "'");
    wep::read_config(in, cfg);
  }
  for (const auto& [key, opt] : b.options) {
    if (opt->count() == 0) continue;
    cfg.set(key, b.flags.count(key) ? (b.flags.at(key) ? "true" : "false") : b.text.at(key));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wep::ConfigError("cannot write '" + path + "'");
  out << text;
}

int execute(wep::RunConfig& cfg, const std::string& manifest_path) {
  const wep::CommandResult res = wep::run_command(cfg);
  const std::string out = cfg.text("run.out");
  if (out.empty()) {
    std::cout << res.output;
  } else {
    write_text(out, res.output);
  }
  if (cfg.has("run.csv") && !res.csv.empty()) write_text(cfg.text("run.csv"), res.csv);
  std::string manifest = manifest_path;
  if (manifest.empty() && !out.empty()) manifest = out + ".manifest";
  if (!manifest.empty()) write_text(manifest, wep::write_manifest(cfg));
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wep: weighted time-dependent empirical processes"};
  app.require_subcommand(1);

  Bindings sim_b, ver_b, clt_b;
  std::string check, mode, replay_path, replay_out, replay_csv, replay_manifest;

  CLI::App* sim = app.add_subcommand("simulate", "write the weighted empirical field as CSV");
  add_config_options(sim, sim_b);

  CLI::App* ver = app.add_subcommand("verify", "run one bound check and print its JSON report");
  ver->add_option("check", check, "check name")->required();
  add_config_options(ver, ver_b);

  CLI::App* clt = app.add_subcommand("clt", "finite-dimensional and sup-functional limit checks");
  clt->add_option("mode", mode, "marginal | cov | sup")->required();
  add_config_options(clt, clt_b);

  CLI::App* rep = app.add_subcommand("replay", "rerun from a manifest");
  rep->add_option("manifest_file", replay_path, "manifest file")->required();
  rep->add_option("--out", replay_out, "output file (default: as recorded)");
  rep->add_option("--csv", replay_csv, "replication CSV (default: as recorded)");
  rep->add_option("--manifest", replay_manifest, "write the replayed manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    wep::RunConfig cfg;
    std::string manifest_path;
    if (sim->parsed()) {
      cfg.command = "simulate";
      apply(sim_b, cfg);
      manifest_path = sim_b.manifest_path;
    } else if (ver->parsed()) {
      cfg.command = "verify";
      cfg.target = check;
      apply(ver_b, cfg);
      manifest_path = ver_b.manifest_path;
    } else if (clt->parsed()) {
      cfg.command = "clt";
      cfg.target = mode;
      apply(clt_b, cfg);
      manifest_path = clt_b.manifest_path;
    } else {
      std::ifstream in(replay_path);
      if (!in) throw wep::ConfigError("cannot open manifest '" + replay_path + "'");
      wep::read_config(in, cfg);
      if (cfg.command.empty()) throw wep::ConfigError("manifest has no [invocation] command");
      if (!replay_out.empty()) cfg.set("run.out", replay_out);
      if (!replay_csv.empty()) cfg.set("run.csv", replay_csv);
      manifest_path = replay_manifest;
    }
    return execute(cfg, manifest_path);
  } catch (const wep::ConfigError& e) {
    std::cerr << "wep: error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "wep: error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "wep: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "wep: internal error: " << e.what() << "\n";
    return 3;
  }
}
