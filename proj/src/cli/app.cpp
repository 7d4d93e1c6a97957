#include "dman/cli/app.hpp"

#include <functional>
#include <map>

#include <CLI11.hpp>

#include "dman/cli/commands.hpp"
#include "dman/cli/manifest.hpp"

namespace dman::cli {

namespace {

struct ModelFlags {
  bool no_encoder = false, no_char = false, no_pos = false, no_ner = false, no_em = false;

  void add(CLI::App* sub, DMANConfig& c) {
    sub->add_option("--hidden", c.hidden, "hidden size h")->capture_default_str();
    sub->add_option("--char-dim", c.char_dim)->capture_default_str();
    sub->add_option("--char-filters", c.char_filters)->capture_default_str();
    sub->add_option("--char-width", c.char_width)->capture_default_str();
    sub->add_option("--pos-dim", c.pos_dim)->capture_default_str();
    sub->add_option("--ner-dim", c.ner_dim)->capture_default_str();
    sub->add_flag("--no-encoder", no_encoder, "drop the discourse sentence encoder");
    sub->add_flag("--no-char", no_char, "drop character features");
    sub->add_flag("--no-pos", no_pos, "drop POS features");
    sub->add_flag("--no-ner", no_ner, "drop NER features");
    sub->add_flag("--no-em", no_em, "drop exact-match features");
    sub->add_flag("--only-encoder", c.only_encoder, "classify from the sentence encoder alone");
    sub->add_flag("--raw-attention", c.raw_attention, "use unnormalized similarity as attention weights");
    sub->add_option("--lambda", c.lambda, "weight of the cross-entropy term")->capture_default_str();
    sub->add_option("--keep-prob", c.keep_prob)->capture_default_str();
    sub->add_option("--keep-decay", c.keep_decay)->capture_default_str();
    sub->add_option("--decay-steps", c.decay_steps)->capture_default_str();
    sub->add_option("--keep-floor", c.keep_floor)->capture_default_str();
    sub->add_option("--init-range", c.init_range)->capture_default_str();
  }

  void apply(DMANConfig& c) const {
    if (no_encoder) c.use_encoder = false;
    if (no_char) c.use_char = false;
    if (no_pos) c.use_pos = false;
    if (no_ner) c.use_ner = false;
    if (no_em) c.use_em = false;
  }
};

struct TrainFlags {
  std::string rl_mode = "exact";
  std::optional<double> stop_at;

  void add(CLI::App* sub, TrainConfig& t) {
    sub->add_option("--batch-size", t.batch_size)->capture_default_str();
    sub->add_option("--lr", t.lr, "AdaDelta learning rate")->capture_default_str();
    sub->add_option("--rho", t.rho)->capture_default_str();
    sub->add_option("--eps", t.eps)->capture_default_str();
    sub->add_option("--epochs", t.epochs)->capture_default_str();
    sub->add_option("--eval-every", t.eval_every, "steps between dev evaluations, 0 = once per epoch")
        ->capture_default_str();
    sub->add_option("--rl-mode", rl_mode)->check(CLI::IsMember({"exact", "sampled"}))->capture_default_str();
    sub->add_option("--rl-samples", t.rl_samples)->capture_default_str();
    sub->add_flag("--rl-baseline", t.rl_baseline);
    sub->add_option("--stop-at-train-acc", stop_at);
  }

  void apply(TrainConfig& t) const {
    t.rl_mode = rl_mode == "sampled" ? RLMode::sampled : RLMode::exact;
    if (stop_at) {
      t.stop_at_train_acc = stop_at;
      t.track_train_acc = true;
    }
  }
};

void add_data(CLI::App* sub, NliDataOptions& d) {
  sub->add_option("--train", d.train, "training JSONL")->required();
  sub->add_option("--dev", d.dev, "dev JSONL")->required();
  sub->add_option("--train-tags", d.train_tags, "POS/NER sidecar for --train");
  sub->add_option("--dev-tags", d.dev_tags, "POS/NER sidecar for --dev");
  sub->add_option("--dmp-checkpoint", d.dmp_checkpoint, "pretrained discourse marker model");
  sub->add_option("--embeddings", d.embeddings, "word vectors in text format");
  sub->add_option("--word-dim", d.word_dim, "size of random word vectors")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discourse marker augmented network for natural language inference", "dman"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with option defaults; command-line flags win");
  app.set_version_flag("--version", artifact_version());

  RunOptions run;
  app.add_option("--seed", run.seed, "random seed")->capture_default_str();
  app.add_option("--runs-root", run.runs_root, "parent directory of run directories");
  app.add_option("--run-dir", run.run_dir, "exact run directory");
  run.args = args;

  Console io{out, err};
  std::function<int()> action;

  ExtractMarkersOptions ex;
  auto* sub = app.add_subcommand("extract-markers", "extract discourse marker pairs from raw text");
  sub->add_option("--input", ex.input, "raw text, one or more sentences per line")->required();
  sub->add_option("--markers", ex.markers, "comma-separated marker list")->delimiter(',');
  sub->callback([&] { action = [&] { ex.run = run; return cmd_extract_markers(ex, io); }; });

  TrainDmpOptions dmp;
  sub = app.add_subcommand("train-dmp", "pretrain the discourse marker prediction model");
  sub->add_option("--train", dmp.train, "pairs TSV")->required();
  sub->add_option("--val", dmp.val, "validation pairs TSV; default holds out part of --train");
  sub->add_option("--val-fraction", dmp.val_fraction)->capture_default_str();
  sub->add_option("--embeddings", dmp.embeddings, "word vectors in text format");
  sub->add_option("--word-dim", dmp.word_dim, "size of random word vectors")->capture_default_str();
  sub->add_option("--markers", dmp.markers, "comma-separated marker list")->delimiter(',');
  sub->add_option("--hidden", dmp.config.hidden)->capture_default_str();
  sub->add_option("--epochs", dmp.config.epochs)->capture_default_str();
  sub->add_option("--batch-size", dmp.config.batch_size)->capture_default_str();
  sub->add_option("--lr", dmp.config.lr)->capture_default_str();
  sub->add_option("--keep-prob", dmp.config.keep_prob)->capture_default_str();
  sub->add_option("--init-range", dmp.config.init_range)->capture_default_str();
  sub->callback([&] { action = [&] { dmp.run = run; return cmd_train_dmp(dmp, io); }; });

  TrainNliOptions nli;
  ModelFlags nli_model;
  TrainFlags nli_train;
  sub = app.add_subcommand("train-nli", "train the NLI model");
  add_data(sub, nli.data);
  nli_model.add(sub, nli.model);
  nli_train.add(sub, nli.train);
  sub->callback([&] {
    action = [&] {
      nli.run = run;
      nli_model.apply(nli.model);
      nli_train.apply(nli.train);
      return cmd_train_nli(nli, io);
    };
  });

  EvalOptions ev;
  sub = app.add_subcommand("eval", "accuracy of one checkpoint");
  sub->add_option("--checkpoint", ev.checkpoints, "model checkpoint")->required()->expected(1);
  sub->add_option("--data", ev.data, "JSONL")->required();
  sub->add_option("--tags", ev.tags, "POS/NER sidecar for --data");
  sub->callback([&] { action = [&] { ev.run = run; return cmd_eval(ev, io); }; });

  EvalOptions ens;
  sub = app.add_subcommand("ensemble-eval", "accuracy of averaged predictions");
  sub->add_option("--checkpoint", ens.checkpoints, "model checkpoint, repeatable")->required();
  sub->add_option("--data", ens.data, "JSONL")->required();
  sub->add_option("--tags", ens.tags, "POS/NER sidecar for --data");
  sub->callback([&] { action = [&] { ens.run = run; return cmd_ensemble_eval(ens, io); }; });

  AblateOptions ab;
  ModelFlags ab_model;
  TrainFlags ab_train;
  sub = app.add_subcommand("ablate", "train every ablation variant and rank them");
  add_data(sub, ab.data);
  ab_model.add(sub, ab.model);
  ab_train.add(sub, ab.train);
  sub->add_option("--jobs", ab.jobs, "variants trained at once, each in its own process")->capture_default_str();
  sub->callback([&] {
    action = [&] {
      ab.run = run;
      ab_model.apply(ab.model);
      ab_train.apply(ab.train);
      return cmd_ablate(ab, io);
    };
  });

  StatsOptions st;
  sub = app.add_subcommand("stats", "annotator label statistics of an NLI file");
  sub->add_option("--input", st.input, "JSONL")->required();
  sub->callback([&] { action = [&] { st.run = run; return cmd_stats(st, io); }; });

  DumpAttentionOptions da;
  sub = app.add_subcommand("dump-attention", "write attention matrices as JSON");
  sub->add_option("--checkpoint", da.checkpoint, "model checkpoint")->required();
  sub->add_option("--data", da.data, "JSONL")->required();
  sub->add_option("--tags", da.tags, "POS/NER sidecar for --data");
  sub->add_option("--limit", da.limit, "number of examples, 0 = all")->capture_default_str();
  sub->callback([&] { action = [&] { da.run = run; return cmd_dump_attention(da, io); }; });

  MakeSyntheticOptions sy;
  sub = app.add_subcommand("make-synthetic", "write the synthetic transfer suite");
  sub->add_option("--dmp-train", sy.sizes.dmp_train)->capture_default_str();
  sub->add_option("--dmp-val", sy.sizes.dmp_val)->capture_default_str();
  sub->add_option("--nli-train", sy.sizes.nli_train)->capture_default_str();
  sub->add_option("--nli-dev", sy.sizes.nli_dev)->capture_default_str();
  sub->add_option("--word-dim", sy.sizes.word_dim)->capture_default_str();
  sub->callback([&] { action = [&] { sy.run = run; return cmd_make_synthetic(sy, io); }; });

  std::vector<std::string> argv_s;
  argv_s.reserve(args.size() + 1);
  argv_s.push_back("dman");
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? int{kOk} : int{kUsage};
  }
  if (!action) return kUsage;
  return action();
}

}  // namespace dman::cli
