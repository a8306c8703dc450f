// Copyright 2026 The gradraker Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: experiment runners, the encoding utility and the
// new-node timing table.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gradraker/bench.hpp"
#include "gradraker/io_util.hpp"
#include "gradraker/random_features.hpp"

namespace {

using gradraker::ExperimentConfig;
using gradraker::Report;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "tsv";
  std::vector<std::string> overrides;
};

struct EncodeOptions {
  std::string kernel = "gaussian:1";
  std::size_t d = 3;
  std::string pattern;
  std::string pattern_file;
  std::string map;
  std::string save_map;
};

ExperimentConfig load_config(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{}
                                          : ExperimentConfig::from_file(g.config);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

Eigen::VectorXd parse_pattern(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(normalized);
  while (in >> item) values.push_back(gradraker::parse_exact(item));
  if (values.empty()) throw std::invalid_argument("empty connectivity pattern");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Report run_encode(const GlobalOptions& g, const EncodeOptions& e) {
  if (e.pattern.empty() == e.pattern_file.empty()) {
    throw std::invalid_argument("encode needs exactly one of --pattern or --pattern-file");
  }
  std::string text = e.pattern;
  if (!e.pattern_file.empty()) {
    std::ifstream in(e.pattern_file);
    if (!in) throw std::runtime_error("cannot open '" + e.pattern_file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  const Eigen::VectorXd a = parse_pattern(text);
  const ExperimentConfig cfg = load_config(g);

  std::optional<gradraker::RfMap> map;
  if (!e.map.empty()) {
    std::ifstream in(e.map);
    if (!in) throw std::runtime_error("cannot open map '" + e.map + "'");
    map.emplace(gradraker::RfMap::load(in));
  } else {
    if (e.d < 1) throw std::invalid_argument("--d must be >= 1");
    map.emplace(gradraker::KernelSpec::parse(e.kernel), static_cast<Eigen::Index>(e.d),
                a.size(), cfg.seed);
  }
  if (!e.save_map.empty()) {
    std::ofstream out(e.save_map);
    if (!out) throw std::runtime_error("cannot write map '" + e.save_map + "'");
    map->save(out);
  }
  const gradraker::RfFeatures z = map->encode(a);

  Report r;
  r.command = "encode";
  r.config = cfg.echo();
  r.seed = map->seed();
  r.results.columns = {"index", "z"};
  std::vector<double> values;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    r.results.rows.push_back({std::to_string(i), gradraker::format_exact(z.values()(i))});
    values.push_back(z.values()(i));
  }
  r.summary["kernel"] = map->kernel().to_string();
  r.summary["d"] = map->d();
  r.summary["dim"] = map->dim();
  r.summary["map_seed"] = map->seed();
  r.summary["z"] = values;
  return r;
}

void emit(const GlobalOptions& g, const Report& r) {
  if (!g.out.empty()) r.write(g.out);
  if (g.format == "json") {
    std::cout << r.to_json().dump(2) << '\n';
  } else {
    r.results.write_tsv(std::cout);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-kernel learning over graphs with random features"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config, "Flat key = value experiment config");
  app.add_option("--seed", global.seed, "Base seed (overrides the config)");
  app.add_option("--out", global.out, "Output directory for report.tsv, summary.json, traces/");
  app.add_option("--format", global.format, "Table printed on stdout")
      ->check(CLI::IsMember({"tsv", "json"}));
  app.add_option("--set", global.overrides, "Config override key=value (repeatable)");

  auto* synthetic = app.add_subcommand("synthetic", "Synthetic ER experiment");
  auto* dataset = app.add_subcommand("dataset", "Experiment on an edge list with labels");
  auto* regret = app.add_subcommand("regret", "Static regret against the best fixed RF function");
  auto* encode = app.add_subcommand("encode", "Random-feature encoding of one pattern");
  auto* bench = app.add_subcommand("bench-newnode", "New-node inference time over graph sizes");

  EncodeOptions enc;
  encode->add_option("--kernel", enc.kernel, "Kernel, e.g. gaussian:1");
  encode->add_option("--d", enc.d, "Number of random features");
  encode->add_option("--pattern", enc.pattern, "Comma or space separated pattern");
  encode->add_option("--pattern-file", enc.pattern_file, "File holding the pattern");
  encode->add_option("--map", enc.map, "Load a saved map instead of sampling one");
  encode->add_option("--save-map", enc.save_map, "Write the map used");

  for (auto* sub : {synthetic, dataset, regret, encode, bench}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (encode->parsed()) {
      emit(global, run_encode(global, enc));
      return 0;
    }
    const ExperimentConfig cfg = load_config(global);
    if (synthetic->parsed()) {
      emit(global, gradraker::make_report(cfg, "synthetic", gradraker::run_synthetic(cfg)));
    } else if (dataset->parsed()) {
      emit(global, gradraker::make_report(cfg, "dataset", gradraker::run_dataset(cfg)));
    } else if (regret->parsed()) {
      emit(global, gradraker::make_report(cfg, gradraker::run_regret(cfg)));
    } else if (bench->parsed()) {
      emit(global, gradraker::make_report(cfg, gradraker::bench_newnode(cfg)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
