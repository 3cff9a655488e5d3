#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairguide/community.hpp"
#include "fairguide/eval.hpp"
#include "fairguide/graph.hpp"
#include "fairguide/io.hpp"
#include "fairguide/manifest.hpp"
#include "fairguide/meta_gradient.hpp"
#include "fairguide/metrics.hpp"
#include "fairguide/rng.hpp"
#include "fairguide/sampler.hpp"

namespace fs = std::filesystem;
using namespace fairguide;

namespace {

int verbosity() {
  const char* env = std::getenv("FAIRGUIDE_LOG");
  if (!env) return 1;
  std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

std::vector<std::pair<std::string, std::string>> dataset_inputs(
    const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> inputs;
  for (const char* name : {kEdgeFile, kFeatureFile, kSensitiveFile, kLabelFile}) {
    fs::path p = fs::path(dir) / name;
    if (fs::exists(p)) inputs.emplace_back(p.string(), file_digest(p.string()));
  }
  return inputs;
}

struct GenerateArgs {
  SbmSpec spec;
  std::string out;
};

void run_generate(const GenerateArgs& args) {
  args.spec.validate();
  fs::create_directories(args.out);

  RunManifest manifest;
  manifest.command = "generate";
  manifest.config = {{"n", args.spec.n},
                     {"blocks", args.spec.num_blocks},
                     {"p_in", args.spec.p_in},
                     {"p_out", args.spec.p_out},
                     {"alignment", args.spec.group_block_alignment},
                     {"feat_dim", args.spec.feature_dim},
                     {"feat_signal", args.spec.feature_signal},
                     {"label_noise", args.spec.label_noise},
                     {"seed", args.spec.seed}};
  manifest.seeds = {args.spec.seed};
  for (const char* name : {kEdgeFile, kFeatureFile, kSensitiveFile, kLabelFile})
    manifest.outputs.push_back((fs::path(args.out) / name).string());
  write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());

  Graph g = generate_sbm(args.spec);
  save_dataset(g, args.out);
  if (verbosity() >= 1)
    std::printf("generated SBM: %d nodes, %ld edges -> %s\n", g.num_nodes,
                g.num_edges, args.out.c_str());
}

struct GuideArgs {
  std::string data;
  std::string out;
  GuideConfig cfg;
};

void run_guide(const GuideArgs& args) {
  args.cfg.validate();
  Graph g = load_dataset(args.data);
  if (args.cfg.budget > candidate_count(g))
    throw ValidationError("budget " + std::to_string(args.cfg.budget) +
                          " exceeds candidate pairs (" +
                          std::to_string(candidate_count(g)) + ")");
  fs::create_directories(args.out);

  RunManifest manifest;
  manifest.command = "guide";
  manifest.config = {{"budget", args.cfg.budget},
                     {"batch", args.cfg.batch_k},
                     {"alpha", args.cfg.alpha},
                     {"k_steps", args.cfg.k_steps},
                     {"communities", args.cfg.communities},
                     {"beta", args.cfg.beta},
                     {"tau", args.cfg.tau},
                     {"epsilon", args.cfg.epsilon},
                     {"seed", args.cfg.seed},
                     {"ae_hidden", args.cfg.autoencoder.hidden},
                     {"ae_latent", args.cfg.autoencoder.latent},
                     {"ae_epochs", args.cfg.autoencoder.epochs},
                     {"ae_lr", args.cfg.autoencoder.lr}};
  manifest.inputs = dataset_inputs(args.data);
  manifest.seeds = {args.cfg.seed};
  for (const char* name : {"additions.tsv", "trace.csv", kEdgeFile})
    manifest.outputs.push_back((fs::path(args.out) / name).string());
  write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());

  GuideResult result = guide(g, args.cfg);
  save_additions(result.additions, (fs::path(args.out) / "additions.tsv").string());
  save_trace_csv(result, (fs::path(args.out) / "trace.csv").string());
  save_edges(result.final_graph, (fs::path(args.out) / kEdgeFile).string());

  if (verbosity() >= 1) {
    for (const auto& it : result.iterations) {
      std::printf("iteration %d: soft_dsp %.6f -> %.6f (added %d, cross_group %.3f)\n",
                  it.iteration, it.dsp_before, it.dsp_after, it.batch_size,
                  it.cross_group_fraction);
      if (verbosity() >= 2 && it.tiny_score_count > 0)
        std::fprintf(stderr, "iteration %d: %ld candidate scores below epsilon\n",
                     it.iteration, it.tiny_score_count);
    }
    std::printf("added %ld links; soft_dsp %.6f -> %.6f%s\n", result.links_added,
                result.loss_trace.front(), result.loss_trace.back(),
                result.exhausted ? " (candidates exhausted)" : "");
  }
}

struct EvaluateArgs {
  std::string data;
  std::vector<std::string> graph_specs;  // NAME=EDGEFILE
  long add_random = 0;
  long add_linkpred = 0;
  std::vector<std::uint64_t> seeds = {10, 20, 30, 40, 50};
  std::uint64_t baseline_seed = 10;
  int jobs = 1;
  GcnConfig gcn;
  std::string out;
};

void run_evaluate(const EvaluateArgs& args) {
  Graph original = load_dataset(args.data);
  if (!original.has_labels())
    throw ValidationError("evaluate needs labels.txt in the dataset directory");
  fs::create_directories(args.out);

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config = {{"seeds", args.seeds},
                     {"jobs", args.jobs},
                     {"add_random", args.add_random},
                     {"add_linkpred", args.add_linkpred},
                     {"seed", args.baseline_seed},
                     {"gcn_hidden", args.gcn.hidden},
                     {"gcn_epochs", args.gcn.epochs},
                     {"gcn_lr", args.gcn.lr},
                     {"graphs", args.graph_specs}};
  manifest.inputs = dataset_inputs(args.data);
  manifest.seeds = args.seeds;
  manifest.outputs = {(fs::path(args.out) / "report.txt").string(),
                      (fs::path(args.out) / "report.kv").string()};
  if (args.add_random > 0)
    manifest.outputs.push_back((fs::path(args.out) / "rand_add.tsv").string());
  if (args.add_linkpred > 0)
    manifest.outputs.push_back((fs::path(args.out) / "linkpred_add.tsv").string());

  std::vector<std::pair<std::string, Graph>> named;
  named.emplace_back("Vanilla", original);
  if (args.add_random > 0) {
    named.emplace_back("Rand. Add", baseline_random_add(original, args.add_random,
                                                        args.baseline_seed));
  }
  if (args.add_linkpred > 0) {
    named.emplace_back("Link Pred.",
                       baseline_linkpred_add(original, args.add_linkpred,
                                             args.baseline_seed));
  }
  for (const auto& spec : args.graph_specs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw UsageError("--graph expects NAME=EDGEFILE, got '" + spec + "'");
    std::string name = spec.substr(0, eq);
    std::string path = spec.substr(eq + 1);
    manifest.inputs.emplace_back(path, file_digest(path));
    Graph g = load_graph(path, (fs::path(args.data) / kFeatureFile).string(),
                         (fs::path(args.data) / kSensitiveFile).string(),
                         (fs::path(args.data) / kLabelFile).string());
    named.emplace_back(name, std::move(g));
  }
  write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());

  if (args.add_random > 0)
    save_edges(named[1].second, (fs::path(args.out) / "rand_add.tsv").string());
  if (args.add_linkpred > 0) {
    std::size_t idx = args.add_random > 0 ? 2 : 1;
    save_edges(named[idx].second,
               (fs::path(args.out) / "linkpred_add.tsv").string());
  }

  std::vector<std::pair<std::string, const Graph*>> view;
  view.reserve(named.size());
  for (const auto& [name, g] : named) view.emplace_back(name, &g);

  EvalOptions options;
  options.seeds = args.seeds;
  options.gcn = args.gcn;
  options.jobs = args.jobs;
  std::vector<EvalColumn> columns = evaluate(view, options);

  std::ostringstream table, kv;
  write_report_table(table, columns);
  write_report_kv(kv, columns);
  write_text_file((fs::path(args.out) / "report.txt").string(), table.str());
  write_text_file((fs::path(args.out) / "report.kv").string(), kv.str());
  if (verbosity() >= 1) std::cout << table.str();
}

struct GradcheckArgs {
  std::string data;
  double alpha = 0.1;
  int k_steps = 2;
  int communities = 5;
  std::uint64_t seed = 10;
  int pairs = 200;
  double step = 1e-5;
  int max_nodes = 50;
  double abs_tol = 1e-6;
  double rel_tol = 1e-4;
  bool inject_sign_flip = false;
  int dump_top = 0;
  AutoencoderConfig ae;
};

int run_gradcheck(const GradcheckArgs& args) {
  Graph g = load_dataset(args.data);
  if (g.num_nodes > args.max_nodes)
    throw ValidationError("gradcheck: graph has " + std::to_string(g.num_nodes) +
                          " nodes, cap is " + std::to_string(args.max_nodes) +
                          " (finite differences are dense; raise --max-nodes "
                          "to override)");

  AutoencoderConfig ae = args.ae;
  ae.seed = args.seed;
  Mat standardized = standardize_columns(g.features);
  AutoencoderModel model = train_autoencoder(standardized, ae);
  CommunityInit init =
      kmeans(model.encode(standardized), args.communities, args.seed, 100);

  MetaGradient grad = meta_gradient(g, init, args.alpha, args.k_steps);
  std::vector<std::pair<int, int>> candidates = candidate_edges(g);
  if (candidates.empty())
    throw ValidationError("gradcheck: graph has no candidate pairs");

  Rng rng(derive_seed(args.seed, "gradcheck"));
  int n_pairs = std::min<int>(args.pairs, static_cast<int>(candidates.size()));
  double max_abs_err = 0.0, max_rel_err = 0.0;
  std::pair<int, int> worst{-1, -1};
  bool flipped = false;
  double max_abs_grad = 0.0;
  std::pair<int, int> flip_target{-1, -1};

  std::vector<std::pair<int, int>> sample;
  for (int t = 0; t < n_pairs; ++t) {
    auto pick = candidates[static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::uint64_t>(candidates.size())))];
    sample.push_back(pick);
    double a = grad.entry(pick.first, pick.second);
    if (std::abs(a) > max_abs_grad) {
      max_abs_grad = std::abs(a);
      flip_target = pick;
    }
  }

  bool pass = true;
  for (auto [i, j] : sample) {
    double analytic = grad.entry(i, j);
    if (args.inject_sign_flip && !flipped && i == flip_target.first &&
        j == flip_target.second) {
      analytic = -analytic;
      flipped = true;
    }
    double fd = finite_difference_oracle(g, init, args.alpha, args.k_steps, i, j,
                                         args.step);
    double abs_err = std::abs(analytic - fd);
    double rel_err = abs_err / std::max(std::abs(fd), 1e-300);
    bool ok = abs_err <= args.abs_tol || rel_err <= args.rel_tol;
    if (pass && (!ok || abs_err > max_abs_err)) worst = {i, j};
    max_abs_err = std::max(max_abs_err, abs_err);
    max_rel_err = std::max(max_rel_err, rel_err);
    if (!ok) pass = false;
  }

  std::printf(
      "gradcheck: %d pairs, max abs err %.3e, max rel err %.3e, worst pair "
      "(%d,%d)\n",
      n_pairs, max_abs_err, max_rel_err, worst.first, worst.second);
  if (args.dump_top > 0) {
    for (const auto& e : most_negative_entries(grad, g, args.dump_top))
      std::printf("%d\t%d\t%.10e\n", e.i, e.j, e.value);
  }
  if (!pass) {
    std::fprintf(stderr, "gradcheck FAILED: tolerance exceeded at (%d,%d)\n",
                 worst.first, worst.second);
    return 3;
  }
  std::printf("gradcheck PASS\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairguide: guide graph structures toward fairness via new links"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "generate a synthetic SBM dataset");
  cmd_gen->add_option("--n", gen.spec.n, "number of nodes");
  cmd_gen->add_option("--blocks", gen.spec.num_blocks, "number of blocks");
  cmd_gen->add_option("--p-in", gen.spec.p_in, "intra-block edge probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--p-out", gen.spec.p_out, "inter-block edge probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--alignment", gen.spec.group_block_alignment,
                      "P(sensitive = block majority)")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--feat-dim", gen.spec.feature_dim, "feature dimension");
  cmd_gen->add_option("--feat-signal", gen.spec.feature_signal,
                      "per-block feature mean shift");
  cmd_gen->add_option("--label-noise", gen.spec.label_noise, "label flip rate")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--seed", gen.spec.seed, "generator seed");
  cmd_gen->add_option("--out", gen.out, "output dataset directory")->required();
  cmd_gen->callback([&]() { run_generate(gen); });

  GuideArgs gd;
  auto* cmd_guide = app.add_subcommand("guide", "add fairness-guided links");
  cmd_guide->add_option("--data", gd.data, "dataset directory")->required();
  cmd_guide->add_option("--out", gd.out, "output directory")->required();
  cmd_guide->add_option("--budget", gd.cfg.budget, "total links to add")
      ->required();
  cmd_guide->add_option("--batch", gd.cfg.batch_k, "links per iteration");
  cmd_guide->add_option("--alpha", gd.cfg.alpha, "restart probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_guide->add_option("--k-steps", gd.cfg.k_steps, "propagation depth");
  cmd_guide->add_option("--communities", gd.cfg.communities,
                        "number of communities");
  cmd_guide->add_option("--beta", gd.cfg.beta, "cross-group boost");
  cmd_guide->add_option("--tau", gd.cfg.tau, "Gumbel temperature");
  cmd_guide->add_option("--epsilon", gd.cfg.epsilon, "log underflow guard");
  cmd_guide->add_option("--seed", gd.cfg.seed, "run seed");
  cmd_guide->add_option("--ae-hidden", gd.cfg.autoencoder.hidden,
                        "autoencoder hidden width");
  cmd_guide->add_option("--ae-latent", gd.cfg.autoencoder.latent,
                        "autoencoder latent width");
  cmd_guide->add_option("--ae-epochs", gd.cfg.autoencoder.epochs,
                        "autoencoder training epochs");
  cmd_guide->add_option("--ae-lr", gd.cfg.autoencoder.lr,
                        "autoencoder learning rate");
  cmd_guide->add_option("--cache", gd.cfg.community_cache,
                        "community-init cache file");
  cmd_guide->callback([&]() { run_guide(gd); });

  EvaluateArgs ev;
  auto* cmd_eval = app.add_subcommand(
      "evaluate", "downstream GCN + Louvain fairness comparison");
  cmd_eval->add_option("--data", ev.data, "original dataset directory")
      ->required();
  cmd_eval->add_option("--graph", ev.graph_specs,
                       "NAME=EDGEFILE modified graph (repeatable)");
  cmd_eval->add_option("--add-random", ev.add_random,
                       "include a Rand. Add column with this many links");
  cmd_eval->add_option("--add-linkpred", ev.add_linkpred,
                       "include a Link Pred. column with this many links");
  cmd_eval->add_option("--seeds", ev.seeds, "evaluation seeds")
      ->delimiter(',');
  cmd_eval->add_option("--seed", ev.baseline_seed, "baseline sampling seed");
  cmd_eval->add_option("--jobs", ev.jobs, "seed-level parallelism");
  cmd_eval->add_option("--gcn-hidden", ev.gcn.hidden, "GCN hidden width");
  cmd_eval->add_option("--gcn-epochs", ev.gcn.epochs, "GCN training epochs");
  cmd_eval->add_option("--gcn-lr", ev.gcn.lr, "GCN learning rate");
  cmd_eval->add_option("--out", ev.out, "output directory")->required();
  cmd_eval->callback([&]() { run_evaluate(ev); });

  GradcheckArgs gc;
  int gradcheck_rc = 0;
  auto* cmd_gc = app.add_subcommand(
      "gradcheck", "validate the analytic meta-gradient against finite differences");
  cmd_gc->add_option("--data", gc.data, "dataset directory")->required();
  cmd_gc->add_option("--alpha", gc.alpha, "restart probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gc->add_option("--k-steps", gc.k_steps, "propagation depth");
  cmd_gc->add_option("--communities", gc.communities, "number of communities");
  cmd_gc->add_option("--seed", gc.seed, "run seed");
  cmd_gc->add_option("--pairs", gc.pairs, "number of sampled candidate pairs");
  cmd_gc->add_option("--step", gc.step, "finite-difference step");
  cmd_gc->add_option("--max-nodes", gc.max_nodes, "node cap for the dense oracle");
  cmd_gc->add_option("--abs-tol", gc.abs_tol, "absolute tolerance");
  cmd_gc->add_option("--rel-tol", gc.rel_tol, "relative tolerance");
  cmd_gc->add_flag("--inject-sign-flip", gc.inject_sign_flip,
                   "debug: corrupt one analytic entry (harness self-test)");
  cmd_gc->add_option("--dump-top", gc.dump_top,
                     "debug: print the k most negative gradient entries");
  cmd_gc->callback([&]() { gradcheck_rc = run_gradcheck(gc); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return gradcheck_rc;
}
