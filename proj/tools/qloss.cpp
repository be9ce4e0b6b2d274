// Copyright 2026 The qloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace qloss;
using namespace qloss::cli;

// Command line as typed, minus the thread count, so that output headers do
// not depend on how many workers produced them.
std::string invocation(int argc, char** argv) {
  std::string out = "qloss";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0) continue;
    out += ' ';
    out += a.find_first_of(" \t\"'") == std::string::npos ? a : '\'' + a + '\'';
  }
  return out;
}

unsigned default_threads() {
  if (const char* env = std::getenv("QLOSS_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("QLOSS_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct RawOptions {
  std::string design = "both";
  std::string etas;
  std::string loss_db;
  std::string photons;
  std::string format;
  std::string herald = "valid";
  std::string source = "printed";
  std::string encoding = "first-mode-one";
  std::string ports;
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulation of lossy multiport interferometers"};
  app.set_version_flag("--version", std::string(qloss::kVersion));
  app.require_subcommand(1);

  RunConfig cfg;
  RawOptions raw;

  auto common = [&](CLI::App* sub, bool grids) {
    sub->add_option("--design", raw.design, "Mesh design: rect, tri or both")->check(CLI::IsMember({"rect", "tri", "both"}));
    sub->add_option("--threads", raw.threads, "Worker threads (default: QLOSS_THREADS or hardware concurrency)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "Output file (default: stdout)");
    sub->add_option("--format", raw.format, "Output format: csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    if (grids) {
      sub->add_option("--etas", raw.etas, "Unit-cell transmission grid, start:stop:count or a,b,c");
      sub->add_option("--loss-db", raw.loss_db, "Unit-cell loss grid in dB, start:stop:count or a,b,c");
    }
  };

  auto* preimage = app.add_subcommand("preimage", "Haar-averaged single-photon preimage fidelity vs eta");
  common(preimage, true);
  preimage->add_option("-m,--modes", cfg.modes, "Number of modes");
  preimage->add_option("--samples", cfg.samples, "Haar samples");
  preimage->add_option("--seed", cfg.seed, "Base seed (sample i uses seed + i)");

  auto* post = app.add_subcommand("postselected", "Haar-averaged postselected circuit fidelity vs loss");
  common(post, true);
  post->add_option("-m,--modes", cfg.modes, "Number of modes");
  post->add_option("--samples", cfg.samples, "Haar samples");
  post->add_option("--seed", cfg.seed, "Base seed (sample i uses seed + i)");

  auto* distill = app.add_subcommand("distill", "Fourier photon distillation: exact simulation vs closed forms");
  common(distill, true);
  distill->add_option("-N,--photons", raw.photons, "Photon counts, e.g. 3,4,5 (at most 5)");
  distill->add_option("--herald", raw.herald, "Herald rule: valid (all lossless-allowed patterns) or all-ones")
      ->check(CLI::IsMember({"valid", "all-ones"}));

  auto* ghz = app.add_subcommand("ghz", "Heralded three-qubit GHZ generation on the ten-mode circuit");
  common(ghz, true);
  ghz->add_option("--source", raw.source, "Circuit matrix: printed (4 decimals) or exact")
      ->check(CLI::IsMember({"printed", "exact"}));
  ghz->add_option("--encoding", raw.encoding, "Dual-rail convention: first-mode-one or first-mode-zero")
      ->check(CLI::IsMember({"first-mode-one", "first-mode-zero"}));
  ghz->add_option("--ports", raw.ports, "Six zero-based input ports in column order (default 4,5,6,7,8,9)");
  ghz->add_flag("--search-assignment", cfg.search_assignment, "Pick the input ports maximizing mean qubit transmittance");
  ghz->add_flag("--spectator-vacuum", cfg.spectator_vacuum, "Also herald the spectator mode empty");
  ghz->add_option("--rho-out", cfg.rho_out, "Write the heralded density matrix as CSV (single point)");
  ghz->add_option("--transfer-out", cfg.transfer_out, "Write the 10x6 lossy transfer matrix as CSV (single point)");

  auto* self = app.add_subcommand("selftest", "Run the invariant suite; nonzero exit on any violation");
  common(self, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::ostringstream buffer;
  try {
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    cfg.invocation = invocation(argc, argv);
    cfg.designs = parse_designs(raw.design);
    cfg.par.threads = raw.threads > 0 ? static_cast<unsigned>(raw.threads) : default_threads();
    if (!raw.etas.empty()) cfg.etas = parse_grid(raw.etas);
    if (!raw.loss_db.empty()) cfg.loss_db = parse_grid(raw.loss_db);
    if (!raw.photons.empty()) cfg.photons = parse_int_list(raw.photons);
    cfg.herald_rule = raw.herald == "valid" ? HeraldRule::kValidPatterns : HeraldRule::kAllOnes;
    cfg.source = raw.source == "printed" ? UsubSource::kPrinted : UsubSource::kExact;
    cfg.encoding = raw.encoding == "first-mode-one" ? RailEncoding::kFirstModeOne : RailEncoding::kFirstModeZero;
    if (!raw.ports.empty()) {
      const auto ports = parse_int_list(raw.ports);
      if (ports.size() != kGhzPhotons) throw ConfigError("--ports needs exactly six entries");
      std::array<int, kGhzPhotons> a{};
      std::copy(ports.begin(), ports.end(), a.begin());
      cfg.ports = a;
    }
    const std::string fmt = !raw.format.empty() ? raw.format : cfg.command == "ghz" ? "json" : "csv";
    cfg.format = fmt == "csv" ? Format::kCsv : fmt == "json" ? Format::kJson : Format::kSvg;
    if (cfg.command == "ghz" && raw.design == "both") cfg.designs = {Design::kTriangular};

    bool ok = true;
    if (cfg.command == "preimage") {
      if (!cfg.loss_db.empty()) throw ConfigError("preimage takes --etas");
      run_preimage(cfg, buffer);
    } else if (cfg.command == "postselected") {
      if (!cfg.etas.empty()) throw ConfigError("postselected takes --loss-db");
      run_postselected(cfg, buffer);
    } else if (cfg.command == "distill") {
      if (!cfg.loss_db.empty()) throw ConfigError("distill takes --etas");
      run_distill(cfg, buffer);
    } else if (cfg.command == "ghz") {
      run_ghz(cfg, buffer);
    } else {
      if (cfg.format == Format::kSvg) throw ConfigError("selftest writes csv or json");
      ok = run_selftest_command(cfg, buffer);
    }

    if (cfg.out.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream f(cfg.out);
      if (!f) throw ConfigError("cannot open '" + cfg.out + "' for writing");
      f << buffer.str();
      if (!f) throw ConfigError("failed writing '" + cfg.out + "'");
    }
    if (!ok) {
      std::cerr << "qloss: selftest reported violations\n";
      return kExitNumeric;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "qloss: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qloss: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "qloss: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
