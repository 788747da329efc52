// drp: offline experiment driver around the drp core library.
//
// Subcommands: generate, train, eval, heatmap, gradcheck, ablate. Every
// command reads one JSON config (--config), applies flag overrides, writes
// the resolved effective config into the report directory, then runs.
// Exit codes: 0 success, 1 failed check, 2 input/config error, 3 undefined
// metric, 4 training divergence.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "drp/checkpoint.hpp"
#include "drp/error.hpp"
#include "drp/gradcheck.hpp"
#include "drp/metrics.hpp"
#include "drp/pipeline.hpp"
#include "drp/run_config.hpp"
#include "drp/synthworld.hpp"

namespace fs = std::filesystem;
using namespace drp;

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<std::size_t> rank_d;
  bool lenient = false;
};

// Precedence: flags > config file > defaults.
RunConfig resolve_config(const Flags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = RunConfig::from_file(f.config_path);
  if (f.seed) {
    cfg.world.seed = *f.seed;
    cfg.train.seed = *f.seed;
  }
  if (!f.variant.empty()) cfg.train.variant = variant_from(f.variant);
  if (f.delta) cfg.model.delta = *f.delta;
  if (f.rank_d) cfg.model.rank_d = *f.rank_d;
  if (!f.out_dir.empty()) cfg.paths.reports = f.out_dir;
  return cfg;
}

void echo_effective_config(const RunConfig& cfg) {
  fs::create_directories(cfg.paths.reports);
  std::ofstream out(fs::path(cfg.paths.reports) / "effective_config.json");
  out << cfg.to_json().dump(2) << '\n';
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("DRP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::size_t(v);
  }
  return std::min(n, jobs);
}

const std::vector<std::size_t>& pick_split(const Split& split,
                                           const std::string& name,
                                           std::vector<std::size_t>& all) {
  if (name == "train") return split.train;
  if (name == "validation") return split.validation;
  if (name == "test") return split.test;
  all.clear();
  all.insert(all.end(), split.train.begin(), split.train.end());
  all.insert(all.end(), split.validation.begin(), split.validation.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  return all;
}

MetricsReport evaluate_split(Model& model, Variant variant,
                             const std::vector<SessionExample>& examples,
                             const std::vector<std::size_t>& idx,
                             std::size_t cutoff) {
  const auto scores = score_examples(model, variant, examples, idx);
  std::vector<int> labels;
  std::vector<std::int64_t> sessions;
  labels.reserve(idx.size());
  sessions.reserve(idx.size());
  for (auto i : idx) {
    labels.push_back(examples[i].label);
    sessions.push_back(examples[i].session_id);
  }
  return compute_metrics(sessions, scores, labels, cutoff);
}

int cmd_generate(const RunConfig& cfg) {
  echo_effective_config(cfg);
  SynthWorld world(cfg.world);
  auto examples = world.generate();
  if (fs::path(cfg.paths.dataset).has_parent_path()) {
    fs::create_directories(fs::path(cfg.paths.dataset).parent_path());
  }
  write_dataset(cfg.paths.dataset, examples);

  const auto& s = world.summary();
  std::printf("wrote %zu examples to %s\n", examples.size(),
              cfg.paths.dataset.c_str());
  std::printf("area histogram:");
  for (int a = 0; a < 6; ++a) std::printf(" %d:%zu", a, s.area_counts[a]);
  std::printf("\nP*/R* correlation: %.6f\n", s.pr_correlation);
  std::printf("positive rate: %.6f\n", s.positive_rate);

  std::ostringstream os;
  os << "{\"examples\":" << examples.size() << ",\"area_counts\":[";
  for (int a = 0; a < 6; ++a) os << (a ? "," : "") << s.area_counts[a];
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", s.pr_correlation);
  os << "],\"pr_correlation\":" << buf;
  std::snprintf(buf, sizeof(buf), "%.17g", s.positive_rate);
  os << ",\"positive_rate\":" << buf << "}\n";
  write_file(fs::path(cfg.paths.reports) / "generate_summary.json", os.str());
  return 0;
}

int cmd_train(const RunConfig& cfg, bool lenient) {
  echo_effective_config(cfg);
  auto data = load_dataset(cfg.paths.dataset, lenient);
  const auto split = time_split(data.examples);

  Model model(data.spec, cfg.model, cfg.train.seed);
  Trainer trainer(model, cfg.train);
  const auto result = trainer.train(data.examples, split.train, split.validation);

  std::ostringstream log;
  log << "epoch,train_loss,val_auc,improved\n";
  for (const auto& h : result.history) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", h.epoch,
                  h.train_loss, h.val_auc, h.improved ? 1 : 0);
    log << buf;
  }
  write_file(fs::path(cfg.paths.reports) / "train_log.csv", log.str());
  write_file(fs::path(cfg.paths.reports) / "split_summary.csv",
             split_summary_csv(data.examples, split));

  Checkpoint::capture(model, cfg.train, result).save(cfg.paths.checkpoint);
  std::printf("trained %s for %zu epochs, best val AUC %.6f (epoch %zu)\n",
              to_string(cfg.train.variant).c_str(), result.history.size(),
              result.best_val_auc, result.best_epoch);
  std::printf("checkpoint: %s\n", cfg.paths.checkpoint.c_str());
  return 0;
}

int cmd_eval(const RunConfig& cfg, bool lenient) {
  echo_effective_config(cfg);
  if (!fs::exists(cfg.paths.checkpoint)) {
    throw ConfigError("checkpoint '" + cfg.paths.checkpoint + "' not found");
  }
  auto ck = Checkpoint::load(cfg.paths.checkpoint);
  auto data = load_dataset(cfg.paths.dataset, lenient);
  const auto split = time_split(data.examples);
  Model model = ck.restore();

  std::vector<std::size_t> all;
  const auto& idx = pick_split(split, cfg.eval.split, all);
  const auto report = evaluate_split(model, ck.train.variant, data.examples,
                                     idx, cfg.eval.cutoff);

  write_file(fs::path(cfg.paths.reports) / "metrics.csv", report.to_csv());
  write_file(fs::path(cfg.paths.reports) / "metrics.json",
             report.to_json() + "\n");
  std::printf("%s", report.to_csv().c_str());
  return 0;
}

int cmd_heatmap(const RunConfig& cfg, bool lenient) {
  echo_effective_config(cfg);
  if (!fs::exists(cfg.paths.checkpoint)) {
    throw ConfigError("checkpoint '" + cfg.paths.checkpoint + "' not found");
  }
  auto ck = Checkpoint::load(cfg.paths.checkpoint);
  auto data = load_dataset(cfg.paths.dataset, lenient);
  const auto split = time_split(data.examples);
  Model model = ck.restore();

  std::vector<std::size_t> all;
  const auto& idx = pick_split(split, cfg.eval.split, all);
  const auto stages = stage_scores(model, ck.train.variant, data.examples, idx);

  std::vector<StagePredictions> preds(stages.size());
  for (std::size_t i = 0; i < stages.size(); ++i) {
    preds[i] = {stages[i].fixed, stages[i].global_score, stages[i].local_score};
  }

  HeatmapTable table;
  if (cfg.eval.heatmap_mode == "oracle") {
    std::vector<int> areas;
    areas.reserve(idx.size());
    for (auto i : idx) {
      if (!data.examples[i].area) {
        throw ConfigError(
            "oracle heatmap requires area labels; use score mode");
      }
      areas.push_back(*data.examples[i].area);
    }
    table = heatmap_oracle(areas, preds);
  } else {
    std::vector<double> rel, pref;
    std::vector<int> labels;
    rel.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      rel.push_back(stages[k].r_hat);
      pref.push_back(stages[k].p_cal);
      labels.push_back(data.examples[idx[k]].label);
    }
    table = heatmap_by_scores(rel, pref, labels, preds);
  }

  write_file(fs::path(cfg.paths.reports) / "heatmap.csv", table.to_csv());
  write_file(fs::path(cfg.paths.reports) / "heatmap.json",
             table.to_json() + "\n");
  std::printf("%s", table.to_csv().c_str());
  if (table.low_count_warning) {
    std::printf("warning: some area holds fewer than 10 examples\n");
  }
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
  echo_effective_config(cfg);
  // Small deterministic world, batch of 8.
  WorldConfig wc = cfg.world;
  wc.users = std::min<std::size_t>(wc.users, 50);
  wc.queries = std::min<std::size_t>(wc.queries, 30);
  wc.items = std::min<std::size_t>(wc.items, 200);
  wc.interactions = 64;
  SynthWorld world(wc);
  const auto examples = world.generate();

  Model model(world.feature_spec(), cfg.model, cfg.train.seed);
  const Variant variant = cfg.train.variant;
  auto params = model.trainable(variant);

  std::vector<std::size_t> batch;
  Rng rng(hash_mix(cfg.train.seed, 0xba7c8ULL));
  for (int i = 0; i < 8; ++i) batch.push_back(rng.below(examples.size()));

  Model::Workspace ws;
  auto loss = [&] {
    double total = 0.0;
    for (auto i : batch) {
      const auto s = model.forward(examples[i], variant, ws);
      total += bce_loss(s.final_score, examples[i].label);
    }
    return total / double(batch.size());
  };
  auto grads = [&] {
    const double inv = 1.0 / double(batch.size());
    for (auto i : batch) {
      const auto s = model.forward(examples[i], variant, ws);
      model.backward(inv * bce_grad(s.final_score, examples[i].label), variant,
                     ws);
    }
  };

  GradCheckConfig gc;
  gc.seed = cfg.train.seed;
  const auto report = check_gradients(loss, grads, params, gc);
  for (const auto& e : report.per_param) {
    std::printf("%-24s rel_err %.3e  (%zu coords)\n", e.param.c_str(),
                e.max_rel_err, e.coords_checked);
  }
  std::printf("max rel err %.3e on %s -> %s\n", report.max_rel_err,
              report.worst_param.c_str(), report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

int cmd_ablate(const RunConfig& cfg, bool lenient) {
  echo_effective_config(cfg);
  auto data = load_dataset(cfg.paths.dataset, lenient);
  const auto split = time_split(data.examples);

  const std::vector<Variant> variants = {
      Variant::FULL,        Variant::V1_NON_ORTHO, Variant::V2_NO_FUSION,
      Variant::V3_NO_GLOBAL, Variant::V4_NO_LOCAL,  Variant::V5_NO_EDIT,
      Variant::BASE_FIXED};

  struct Job {
    Variant variant;
    std::uint64_t seed;
    MetricsReport report;
  };
  std::vector<Job> jobs;
  for (auto v : variants) {
    for (std::size_t k = 0; k < cfg.ablate_seeds; ++k) {
      jobs.push_back({v, cfg.train.seed + k, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto run_job = [&](Job& job) {
    TrainConfig tc = cfg.train;
    tc.variant = job.variant;
    tc.seed = job.seed;
    Model model(data.spec, cfg.model, tc.seed);
    Trainer trainer(model, tc);
    trainer.train(data.examples, split.train, split.validation);
    job.report = evaluate_split(model, job.variant, data.examples, split.test,
                                cfg.eval.cutoff);
    std::lock_guard lock(io_mutex);
    std::printf("done %-13s seed %llu: auc %.6f\n",
                to_string(job.variant).c_str(),
                static_cast<unsigned long long>(job.seed), job.report.auc);
  };

  const std::size_t workers = worker_count(jobs.size());
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          run_job(jobs[i]);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // mean and sample stddev per variant, fixed row order
  std::ostringstream os;
  os << "variant,auc_mean,auc_std,logloss_mean,logloss_std,"
        "ndcg_mean,ndcg_std,hr_mean,hr_std\n";
  for (auto v : variants) {
    std::vector<const MetricsReport*> rs;
    for (const auto& j : jobs) {
      if (j.variant == v) rs.push_back(&j.report);
    }
    auto stats = [&](auto get) {
      double mean = 0.0;
      for (auto* r : rs) mean += get(*r);
      mean /= double(rs.size());
      double var = 0.0;
      for (auto* r : rs) var += (get(*r) - mean) * (get(*r) - mean);
      var = rs.size() > 1 ? var / double(rs.size() - 1) : 0.0;
      return std::pair{mean, std::sqrt(var)};
    };
    const auto [am, as] = stats([](const MetricsReport& r) { return r.auc; });
    const auto [lm, ls] = stats([](const MetricsReport& r) { return r.logloss; });
    const auto [nm, ns] = stats([](const MetricsReport& r) { return r.ndcg_at_10; });
    const auto [hm, hs] = stats([](const MetricsReport& r) { return r.hr_at_10; });
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  to_string(v).c_str(), am, as, lm, ls, nm, ns, hm, hs);
    os << buf;
  }
  write_file(fs::path(cfg.paths.reports) / "ablation.csv", os.str());
  std::printf("%s", os.str().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint relevance-preference behavior modeling"};
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--config", flags.config_path, "JSON config file");
  app.add_option("--seed", flags.seed, "override world and train seed");
  app.add_option("--variant", flags.variant, "override train variant");
  app.add_option("--delta", flags.delta, "override fusion exponent delta");
  app.add_option("--rank-d", flags.rank_d, "override projection rank D");
  app.add_option("--out", flags.out_dir, "report directory");
  app.add_flag("--lenient", flags.lenient, "skip malformed dataset lines");

  auto* c_generate = app.add_subcommand("generate", "generate a synthetic world");
  auto* c_train = app.add_subcommand("train", "train a model variant");
  auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* c_heatmap = app.add_subcommand("heatmap", "per-area mean predictions");
  auto* c_gradcheck = app.add_subcommand("gradcheck", "finite-difference audit");
  auto* c_ablate = app.add_subcommand("ablate", "run all variants over seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(flags);
    if (c_generate->parsed()) return cmd_generate(cfg);
    if (c_train->parsed()) return cmd_train(cfg, flags.lenient);
    if (c_eval->parsed()) return cmd_eval(cfg, flags.lenient);
    if (c_heatmap->parsed()) return cmd_heatmap(cfg, flags.lenient);
    if (c_gradcheck->parsed()) return cmd_gradcheck(cfg);
    if (c_ablate->parsed()) return cmd_ablate(cfg, flags.lenient);
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 4;
  } catch (const MetricError& e) {
    std::fprintf(stderr, "metric error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
