// Copyright 2026 The kxfer Authors
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

// kxfer: build knowledge libraries and indexes, translate images by patch
// swapping, explain translations, and benchmark the search methods.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kxfer/image_io.hpp"
#include "kxfer/kxfer.hpp"
#include "kxfer/manifest.hpp"
#include "kxfer/parallel.hpp"

namespace {

using namespace kxfer;
namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  return fs::path(path).replace_extension(ext).string();
}

FeatureMap load_input(const std::string& path, bool features) {
  const bool is_kft = detail::lower_extension(path) == ".kft";
  if (features && !is_kft) {
    fail(ErrorKind::kUsage, "--features expects .kft inputs, got '" + path + "'");
  }
  if (!features && is_kft) {
    fail(ErrorKind::kUsage, "'" + path + "' is a feature tensor; pass --features");
  }
  if (!fs::exists(path)) fail(ErrorKind::kIo, "cannot read input '" + path + "'");
  try {
    return load_map(path);
  } catch (const Error& e) {
    fail(e.kind(), "while reading '" + path + "': " + e.detail());
  }
}

std::vector<std::size_t> parse_branching(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorKind::kUsage, "bad --k entry '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- build-library

struct BuildLibraryArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string name;
  float tau = kDefaultTau;
  std::size_t window = 2;
  std::size_t stride = 0;
  float scale = 1.0f;
  bool features = false;
};

int cmd_build_library(const BuildLibraryArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  PatchSpec spec{a.window, a.window, a.stride == 0 ? a.window : a.stride};
  std::vector<LabeledMap> maps;
  std::size_t total = 0;
  for (const auto& path : a.inputs) {
    maps.push_back({path, load_input(path, a.features)});
    total += patch_count(maps.back().map.height(), maps.back().map.width(), spec);
  }
  const std::string name = a.name.empty() ? fs::path(a.out).stem().string() : a.name;
  const KnowledgeLibrary lib = build_library(name, maps, spec, a.tau, a.scale);
  save_library(lib, a.out);

  RunManifest manifest;
  manifest.command = "build-library";
  manifest.parameters = {{"out", a.out},       {"name", name},
                         {"tau", a.tau},       {"window", a.window},
                         {"stride", spec.stride}, {"scale", a.scale},
                         {"features", a.features}};
  for (const auto& path : a.inputs) manifest.add_input(path);
  manifest.write_for(a.out);

  std::printf("%zu records (%zu merged)\n", lib.size(), total - lib.size());
  std::printf("elapsed %.3f s\n", seconds_since(t0));
  return 0;
}

// ---------------------------------------------------------------- build-index

struct BuildIndexArgs {
  std::string library;
  std::string out;
  std::size_t levels = 2;
  std::string k = "16,16";
  std::size_t bands = 2;
  std::size_t probes = 1;
  std::size_t iters = 25;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

IndexConfig index_config(std::size_t levels, const std::string& k, std::size_t bands,
                         std::size_t probes, std::size_t iters, double tol,
                         std::uint64_t seed) {
  IndexConfig cfg;
  cfg.branching = parse_branching(k);
  if (cfg.branching.size() != levels) {
    fail(ErrorKind::kUsage, "--k lists " + std::to_string(cfg.branching.size()) +
                                " branching factors but --levels is " + std::to_string(levels));
  }
  cfg.bands = bands;
  cfg.probes = probes;
  cfg.kmeans_max_iters = iters;
  cfg.kmeans_tol = tol;
  cfg.seed = seed;
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kUsage, e.detail());
  }
  return cfg;
}

int cmd_build_index(const BuildIndexArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const IndexConfig cfg =
      index_config(a.levels, a.k, a.bands, a.probes, a.iters, a.tol, a.seed);
  const KnowledgeLibrary lib = load_library(a.library);
  const std::string out = a.out.empty() ? replace_extension(a.library, ".bhkm") : a.out;
  const BhkmIndex index = build_index(lib, cfg);
  save_index(index, out);

  RunManifest manifest;
  manifest.command = "build-index";
  manifest.seed = a.seed;
  manifest.parameters = {{"out", out},     {"levels", a.levels}, {"k", cfg.branching},
                         {"bands", a.bands}, {"iters", a.iters}, {"tol", a.tol}};
  manifest.add_input(a.library);
  manifest.write_for(out);

  std::printf("%zu records in %zu leaves\n", index.record_count(), index.leaves().size());
  std::printf("elapsed %.3f s\n", seconds_since(t0));
  return 0;
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
  std::string source;
  std::string library;
  std::string index;
  std::string out;
  std::string matches;
  std::string mode = "geometric";
  std::size_t stride = 1;
  std::size_t topk = 1;
  std::size_t probes = 1;
  std::size_t bands = 0;
  bool rerank = false;
  double eps = 1e-5;
  bool per_channel = false;
  std::size_t threads = 1;
  bool features = false;
};

int cmd_translate(const TranslateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const KnowledgeLibrary lib = load_library(a.library);
  const std::string index_path =
      a.index.empty() ? replace_extension(a.library, ".bhkm") : a.index;
  if (!fs::exists(index_path)) {
    fail(ErrorKind::kIo, "index file not found: expected '" + index_path +
                             "' (build it with build-index or pass --index)");
  }
  const BhkmIndex index = load_index_for(index_path, lib);
  const FeatureMap src = load_input(a.source, a.features);

  TransferOptions opts;
  opts.mode = parse_swap_mode(a.mode);
  opts.query_spec = {lib.spec().window_h, lib.spec().window_w, a.stride};
  opts.epsilon = a.eps;
  opts.stats_scope = a.per_channel ? StatsScope::kPerChannel : StatsScope::kPooled;
  opts.query = {a.probes, a.topk, a.bands, a.rerank};
  opts.threads = a.threads;
  if (a.probes < 1 || a.topk < 1) fail(ErrorKind::kUsage, "--probes and --topk must be >= 1");

  const TranslationResult result = translate(src, lib, index, opts);
  save_map(result.output, a.out);
  const std::string matches_path = a.matches.empty() ? a.out + ".kfm" : a.matches;
  save_match_list(make_match_list(result, src, lib, opts), matches_path);

  RunManifest manifest;
  manifest.command = "translate";
  manifest.parameters = {{"out", a.out},         {"matches", matches_path},
                         {"index", index_path},  {"mode", a.mode},
                         {"stride", a.stride},   {"topk", a.topk},
                         {"probes", a.probes},   {"bands", a.bands},
                         {"rerank", a.rerank},   {"eps", a.eps},
                         {"per_channel", a.per_channel}, {"threads", a.threads},
                         {"features", a.features}};
  manifest.add_input(a.source);
  manifest.add_input(a.library);
  manifest.add_input(index_path);
  manifest.write_for(a.out);

  std::printf("%zu patches matched against %zu records\n", result.matches.size(), lib.size());
  std::printf("elapsed %.3f s\n", seconds_since(t0));
  return 0;
}

// ---------------------------------------------------------------- backtrack

struct BacktrackArgs {
  std::string library;
  std::string matches;
  std::string out;
  std::string overlay;
  std::string source;
  std::string image_root = ".";
  std::size_t max_links = 64;
};

int cmd_backtrack(const BacktrackArgs& a) {
  const KnowledgeLibrary lib = load_library(a.library);
  const MatchList list = load_match_list(a.matches);
  const auto entries = backtrack(list, lib);
  const std::string jsonl = to_jsonl(entries);
  if (a.out.empty() || a.out == "-") {
    std::fwrite(jsonl.data(), 1, jsonl.size(), stdout);
  } else {
    io::write_file(a.out, jsonl);
  }
  if (!a.overlay.empty()) {
    if (a.source.empty()) fail(ErrorKind::kUsage, "--overlay needs --source");
    const FeatureMap source = load_map(a.source);
    std::vector<LabeledMap> knowledge;
    for (const auto& name : lib.image_names()) {
      const fs::path p = fs::path(name).is_absolute() ? fs::path(name)
                                                      : fs::path(a.image_root) / name;
      knowledge.push_back({name, load_map(p.string())});
    }
    save_png(render_backtrack_overlay(source, knowledge, entries, list.query_spec, a.max_links),
             a.overlay);
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string library;
  std::size_t synthetic = 0;
  std::size_t clustered = 0;
  std::size_t clusters = 64;
  std::size_t channels = 3;
  std::size_t queries = 1000;
  double noise = 0.005;
  std::size_t repeats = 5;
  std::size_t patches_per_image = 63 * 63;
  std::size_t levels = 2;
  std::string k = "16,16";
  std::size_t probes = 1;
  std::uint64_t seed = 0;
  std::size_t pq_sub = 4;
  std::size_t pq_codewords = 256;
  bool no_pq = false;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const int sources = !a.library.empty() + (a.synthetic > 0) + (a.clustered > 0);
  if (sources != 1) {
    fail(ErrorKind::kUsage, "give exactly one of --library, --synthetic N, --clustered N");
  }
  BenchOptions opts;
  opts.index = index_config(a.levels, a.k, 2, a.probes, 25, 1e-4, a.seed);
  opts.repeats = a.repeats;
  opts.patches_per_image = a.patches_per_image;
  opts.pq_sub_vectors = a.pq_sub;
  opts.pq_codewords = a.pq_codewords;
  opts.include_pq = !a.no_pq;

  std::vector<float> queries;
  auto lib = [&]() -> KnowledgeLibrary {
    if (a.synthetic > 0) {
      auto l = synthetic::random_library(a.synthetic, a.channels, a.seed + 1);
      queries = synthetic::gaussian_vectors(a.queries, l.dimension(), a.seed + 2);
      return l;
    }
    KnowledgeLibrary l = a.clustered > 0
                             ? synthetic::clustered_library(a.clustered, a.clusters, a.channels,
                                                            a.seed + 1)
                                   .library
                             : load_library(a.library);
    queries = synthetic::perturbed_queries(l, a.queries, a.noise, a.seed + 2);
    return l;
  }();
  const std::string csv = bench_csv(run_bench(lib, queries, opts));
  if (a.out.empty() || a.out == "-") {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    io::write_file(a.out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kxfer: patch knowledge libraries, BHKM search and knowledge transfer"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.require_subcommand(1);

  BuildLibraryArgs bl;
  auto* c_bl = app.add_subcommand("build-library", "Build a knowledge library (.gpkl)");
  c_bl->add_option("inputs", bl.inputs, "Images (.png/.ppm) or, with --features, .kft tensors")
      ->required();
  c_bl->add_option("--out", bl.out, "Output library path")->required();
  c_bl->add_option("--name", bl.name, "Library name (default: output file stem)");
  c_bl->add_option("--tau", bl.tau, "Redundancy threshold; values > 1 disable merging");
  c_bl->add_option("--window", bl.window, "Square window size")->check(CLI::PositiveNumber);
  c_bl->add_option("--stride", bl.stride, "Library stride (default: window width)");
  c_bl->add_option("--scale", bl.scale, "Map-to-image scale factor stored in the library");
  c_bl->add_flag("--features", bl.features, "Inputs are .kft feature tensors");

  BuildIndexArgs bi;
  auto* c_bi = app.add_subcommand("build-index", "Build a BHKM index (.bhkm) for a library");
  c_bi->add_option("library", bi.library, "Library (.gpkl)")->required();
  c_bi->add_option("--out", bi.out, "Output index path (default: library path with .bhkm)");
  c_bi->add_option("--levels", bi.levels, "Tree depth");
  c_bi->add_option("--k", bi.k, "Comma-separated branching per level");
  c_bi->add_option("--bands", bi.bands, "Wavelet bands kept in leaves (0: raw vectors)");
  c_bi->add_option("--probes", bi.probes, "Default probes (validated against --k)");
  c_bi->add_option("--iters", bi.iters, "k-means iteration cap");
  c_bi->add_option("--tol", bi.tol, "k-means centroid movement tolerance");
  c_bi->add_option("--seed", bi.seed, "Clustering seed");

  TranslateArgs tr;
  tr.threads = default_threads();
  auto* c_tr = app.add_subcommand("translate", "Translate a source by knowledge transfer");
  c_tr->add_option("source", tr.source, "Source image or, with --features, .kft")->required();
  c_tr->add_option("--library", tr.library, "Library (.gpkl)")->required();
  c_tr->add_option("--index", tr.index, "Index (default: library path with .bhkm)");
  c_tr->add_option("--out", tr.out, "Output .png/.ppm/.kft")->required();
  c_tr->add_option("--matches", tr.matches, "Match list output (default: <out>.kfm)");
  c_tr->add_option("--mode", tr.mode, "geometric | statistics")
      ->check(CLI::IsMember({"geometric", "statistics"}));
  c_tr->add_option("--stride", tr.stride, "Query stride")->check(CLI::PositiveNumber);
  c_tr->add_option("--topk", tr.topk, "Candidate count");
  c_tr->add_option("--probes", tr.probes, "Branches explored per node");
  c_tr->add_option("--bands", tr.bands, "Bands used for leaf matching (0: all in index)");
  c_tr->add_flag("--rerank", tr.rerank, "Rescore top-k candidates with full vectors");
  c_tr->add_option("--eps", tr.eps, "Statistics swap variance floor");
  c_tr->add_flag("--per-channel", tr.per_channel, "Statistics swap per channel");
  c_tr->add_option("--threads", tr.threads, "Worker threads (env KF_THREADS)")
      ->check(CLI::PositiveNumber);
  c_tr->add_flag("--features", tr.features, "Source is a .kft feature tensor");

  BacktrackArgs bt;
  auto* c_bt = app.add_subcommand("backtrack", "Explain a translation as JSON Lines");
  c_bt->add_option("--library", bt.library, "Library (.gpkl)")->required();
  c_bt->add_option("--matches", bt.matches, "Match list (.kfm)")->required();
  c_bt->add_option("--out", bt.out, "JSONL output (default: stdout)");
  c_bt->add_option("--overlay", bt.overlay, "Write an inspection PNG");
  c_bt->add_option("--source", bt.source, "Image drawn on the left of the overlay");
  c_bt->add_option("--image-root", bt.image_root, "Directory for library image names");
  c_bt->add_option("--max-links", bt.max_links, "Links drawn in the overlay");

  BenchArgs be;
  auto* c_be = app.add_subcommand("bench", "Time traverse, HKM, m-BHKM and PQ search (CSV)");
  c_be->add_option("--library", be.library, "Benchmark an existing library");
  c_be->add_option("--synthetic", be.synthetic, "Random Gaussian library of N records");
  c_be->add_option("--clustered", be.clustered, "Clustered unit-vector library of N records");
  c_be->add_option("--clusters", be.clusters, "Cluster count for --clustered");
  c_be->add_option("--channels", be.channels, "Channels for generated libraries");
  c_be->add_option("--queries", be.queries, "Query count");
  c_be->add_option("--noise", be.noise, "Query noise angle (radians) around members");
  c_be->add_option("--repeats", be.repeats, "Timing repeats; medians are reported");
  c_be->add_option("--patches-per-image", be.patches_per_image, "Patches per image");
  c_be->add_option("--levels", be.levels, "Tree depth");
  c_be->add_option("--k", be.k, "Comma-separated branching per level");
  c_be->add_option("--probes", be.probes, "Branches explored per node");
  c_be->add_option("--seed", be.seed, "Seed for data, clustering and PQ");
  c_be->add_option("--pq-sub", be.pq_sub, "PQ sub-vectors");
  c_be->add_option("--pq-codewords", be.pq_codewords, "PQ codewords per sub-vector");
  c_be->add_flag("--no-pq", be.no_pq, "Skip the PQ row");
  c_be->add_option("--out", be.out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*c_bl) return cmd_build_library(bl);
    if (*c_bi) return cmd_build_index(bi);
    if (*c_tr) return cmd_translate(tr);
    if (*c_bt) return cmd_backtrack(bt);
    if (*c_be) return cmd_bench(be);
  } catch (const Error& e) {
    std::cerr << "kxfer: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "kxfer: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
