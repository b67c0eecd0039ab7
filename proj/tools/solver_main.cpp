// Command-line front end: spectrum | offline | online | vanilla | bench | solution.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsz/commands.hpp"

namespace {

std::vector<int> parse_ranks(const std::string& s) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(pos, comma - pos);
    if (!tok.empty()) {
      try {
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
        out.push_back(v);
      } catch (const std::exception&) {
        throw rsz::error(rsz::errc::config_error, "--ranks: bad entry \"" + tok + "\"");
      }
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced Schwarz solver for rough-media elliptic problems"};
  app.require_subcommand(1);

  std::string config_path, out_path, archive_path = "maps.rswz", ranks_str = "40,70,100,130";
  int repeat = 1, patch_id = 3;

  auto* sp = app.add_subcommand("spectrum", "singular spectra of one patch's maps");
  auto* off = app.add_subcommand("offline", "compress all patches into a map archive");
  auto* onl = app.add_subcommand("online", "run the reduced iteration from an archive");
  auto* van = app.add_subcommand("vanilla", "run exact Schwarz");
  auto* ben = app.add_subcommand("bench", "timing table across ranks plus a vanilla run");
  auto* sol = app.add_subcommand("solution", "write the configured method's solution field");

  for (auto* s : {sp, off, onl, van, ben, sol})
    s->add_option("--config", config_path, "experiment config (JSON)")->required();
  sp->add_option("--out", out_path, "output CSV [spectrum.csv]");
  sp->add_option("--patch", patch_id, "patch index [3]");
  off->add_option("--archive", archive_path, "archive to write [maps.rswz]");
  onl->add_option("--archive", archive_path, "archive to read [maps.rswz]");
  onl->add_option("--out", out_path, "output prefix [online]");
  van->add_option("--out", out_path, "output prefix [vanilla]");
  ben->add_option("--out", out_path, "output CSV [bench.csv]");
  ben->add_option("--ranks", ranks_str, "comma-separated ranks [40,70,100,130]");
  ben->add_option("--repeat", repeat, "timing repetitions, median reported [1]")
      ->check(CLI::PositiveNumber);
  sol->add_option("--out", out_path, "output CSV [solution.csv]");
  sol->add_option("--archive", archive_path,
                  "map archive for the reduced method (computed on the fly if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    rsz::ExperimentConfig cfg = rsz::load_config(config_path);
    if (sp->parsed()) {
      rsz::cmd_spectrum(cfg, patch_id, out_path.empty() ? "spectrum.csv" : out_path);
    } else if (off->parsed()) {
      rsz::cmd_offline(cfg, archive_path);
    } else if (onl->parsed()) {
      rsz::cmd_online(cfg, archive_path, out_path.empty() ? "online" : out_path);
    } else if (van->parsed()) {
      rsz::cmd_vanilla(cfg, out_path.empty() ? "vanilla" : out_path);
    } else if (ben->parsed()) {
      rsz::cmd_bench(cfg, parse_ranks(ranks_str), repeat, out_path.empty() ? "bench.csv" : out_path);
    } else if (sol->parsed()) {
      std::string arch = sol->count("--archive") ? archive_path : std::string();
      rsz::cmd_solution(cfg, arch, out_path.empty() ? "solution.csv" : out_path);
    }
  } catch (const rsz::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_config() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
