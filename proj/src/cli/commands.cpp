#include "dman/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "dman/cli/manifest.hpp"
#include "dman/corpus/featurize.hpp"
#include "dman/corpus/label_stats.hpp"
#include "dman/corpus/markers.hpp"
#include "dman/corpus/nli_io.hpp"
#include "dman/errors.hpp"

namespace dman::cli {

namespace fs = std::filesystem;

namespace {

class EmptyResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Run {
  fs::path dir;
  RunManifest manifest;
  Console& io;

  fs::path output(const std::string& name) {
    manifest.outputs.push_back(name);
    const fs::path p = dir / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  fs::path input(const std::string& path) {
    const fs::path p = resolve_input(path);
    if (!fs::is_regular_file(p)) throw IoError("cannot open " + path);
    manifest.add_input(p);
    return p;
  }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

class JsonLines {
 public:
  explicit JsonLines(const fs::path& p) : out_(p, std::ios::binary), path_(p) {
    if (!out_) throw IoError("cannot write " + p.string());
  }
  void write(const nlohmann::json& j) {
    out_ << j.dump() << '\n';
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  fs::path path_;
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

template <typename Body>
int with_run(const std::string& command, const RunOptions& ro, Console& io, Body&& body) {
  Run run{{}, {}, io};
  run.manifest.command = command;
  run.manifest.args = ro.args;
  run.manifest.seed = ro.seed;
  run.manifest.version = artifact_version();
  run.manifest.started_at = utc_timestamp();
  try {
    if (ro.run_dir.empty()) {
      run.dir = make_run_dir(runs_root(ro.runs_root), ro.seed);
    } else {
      run.dir = ro.run_dir;
      std::error_code ec;
      fs::create_directories(run.dir, ec);
      if (ec) throw IoError("cannot create " + run.dir.string() + ": " + ec.message());
    }
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kIo;
  }

  int code = kOk;
  try {
    code = body(run);
  } catch (const EmptyResult& e) {
    io.err << "empty result: " << e.what() << '\n';
    code = kEmpty;
  } catch (const DivergenceError& e) {
    io.err << "diverged: " << e.what() << '\n';
    code = kDiverged;
  } catch (const IoError& e) {
    io.err << "error: " << e.what() << '\n';
    code = kIo;
  } catch (const FormatError& e) {
    io.err << "error: " << e.what() << '\n';
    code = kIo;
  } catch (const fs::filesystem_error& e) {
    io.err << "error: " << e.what() << '\n';
    code = kIo;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    code = kUsage;
  }

  run.manifest.finished_at = utc_timestamp();
  run.manifest.exit_code = code;
  try {
    write_json(run.dir / "manifest.json", run.manifest.to_json());
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    if (code == kOk) code = kIo;
  }
  io.out << "run directory: " << run.dir.string() << '\n';
  return code;
}

std::optional<std::vector<TagRow>> maybe_sidecar(Run& run, const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_tag_sidecar(run.input(path).string());
}

NLIDataset read_dataset(Run& run, const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  return read_nli_jsonl(run.input(path).string());
}

nlohmann::json read_counts(const NLIReadStats& s) {
  return {{"lines", s.lines},
          {"accepted", s.accepted},
          {"skipped_no_consensus", s.skipped_no_consensus},
          {"rejected_no_annotators", s.rejected_no_annotators}};
}

void print_eval(std::ostream& out, const EvalResult& r) {
  out << "accuracy " << fixed(r.accuracy, 4) << " (" << r.n << " examples)\n";
  out << "gold \\ predicted  entailment  neutral  contradiction\n";
  for (std::size_t g = 0; g < kNumLabels; ++g) {
    out << std::left << std::setw(18) << label_name(static_cast<Label>(g)) << std::right << std::setw(10)
        << r.confusion[g][0] << std::setw(9) << r.confusion[g][1] << std::setw(15) << r.confusion[g][2] << '\n';
  }
}

// Data, vocabularies and encoder shared by train-nli and ablate.
struct NliSetup {
  std::vector<NLIExample> train, dev;
  EmbeddingTable words;
  TagVocabs tags = TagVocabs::with_rule_tags();
  std::optional<EncoderParams> encoder;
  std::optional<std::vector<TagRow>> train_tags, dev_tags;
};

NliSetup prepare_nli(Run& run, const NliDataOptions& d, DMANConfig& mc, bool encoder_optional) {
  if (!d.embeddings.empty() && !d.dmp_checkpoint.empty()) {
    throw ConfigError("--embeddings and --dmp-checkpoint are exclusive; the checkpoint carries its word table");
  }
  NliSetup s;
  auto train = read_dataset(run, d.train, "train");
  auto dev = read_dataset(run, d.dev, "dev");
  if (train.examples.empty()) throw EmptyResult("no usable training examples in " + d.train);
  if (dev.examples.empty()) throw EmptyResult("no usable dev examples in " + d.dev);
  s.train = std::move(train.examples);
  s.dev = std::move(dev.examples);
  s.train_tags = maybe_sidecar(run, d.train_tags);
  s.dev_tags = maybe_sidecar(run, d.dev_tags);

  if (!d.dmp_checkpoint.empty()) {
    const Checkpoint ckpt = read_checkpoint(run.input(d.dmp_checkpoint).string());
    s.encoder = import_encoder(ckpt, mc.hidden);
    s.words = load_dmp_model(ckpt).words;
    s.words.trainable = false;
  } else {
    if (mc.use_encoder && !encoder_optional) {
      if (mc.only_encoder) throw ConfigError("--only-encoder needs --dmp-checkpoint");
      run.io.err << "warning: no --dmp-checkpoint; training without the sentence encoder\n";
      mc.use_encoder = false;
    } else if (mc.use_encoder) {
      run.io.err << "warning: no --dmp-checkpoint; encoder rows use an untrained encoder\n";
    }
    if (!d.embeddings.empty()) {
      s.words = load_embeddings(run.input(d.embeddings).string(), VocabMode::build_from_file);
    } else {
      if (d.word_dim == 0) throw ConfigError("--word-dim must be positive");
      Vocab v;
      for (const auto* set : {&s.train, &s.dev}) {
        for (const auto& ex : *set) {
          for (const auto& t : ex.premise.tokens) v.add(t);
          for (const auto& t : ex.hypothesis.tokens) v.add(t);
        }
      }
      Rng rng = Rng(mc.seed).substream("cli.words");
      s.words = random_embeddings(v, d.word_dim, 0.1, rng, false);
    }
  }
  if (s.train_tags) grow_tag_vocabs(s.tags, s.train, *s.train_tags);
  return s;
}

void prepare_all(const DMANModel& m, std::vector<NLIExample>& examples, const std::optional<std::vector<TagRow>>& tags) {
  for (auto& ex : examples) m.prepare(ex, tags ? &*tags : nullptr);
}

nlohmann::json log_json(const LogRecord& r) { return r.to_json(); }

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  return out;
}

}  // namespace

int cmd_extract_markers(const ExtractMarkersOptions& o, Console& io) {
  return with_run("extract-markers", o.run, io, [&](Run& run) {
    if (o.markers.empty()) throw ConfigError("marker list is empty");
    run.manifest.config = {{"markers", o.markers}};
    const fs::path in = run.input(o.input);
    std::vector<MarkerPair> pairs;
    const auto ex = extract_marker_pairs(in.string(), o.markers, [&](MarkerPair&& p) { pairs.push_back(std::move(p)); });
    const MarkerStats ms = marker_stats(pairs, o.markers);
    write_marker_tsv(run.output("pairs.tsv").string(), pairs, o.markers);
    nlohmann::json report = ms.to_json();
    report["extraction"] = {{"sentences", ex.sentences},
                            {"pairs", ex.pairs},
                            {"skipped_no_marker", ex.skipped_no_marker},
                            {"skipped_multi_marker", ex.skipped_multi_marker},
                            {"skipped_short_clause", ex.skipped_short_clause},
                            {"skipped_no_context", ex.skipped_no_context}};
    write_json(run.output("marker_stats.json"), report);

    io.out << std::left << std::setw(12) << "marker" << std::right << std::setw(10) << "count" << std::setw(10)
           << "percent" << '\n';
    for (std::size_t i = 0; i < ms.markers.size(); ++i) {
      io.out << std::left << std::setw(12) << ms.markers[i] << std::right << std::setw(10) << ms.counts[i]
             << std::setw(10) << fixed(ms.percent(i), 2) << '\n';
    }
    io.out << std::left << std::setw(12) << "total" << std::right << std::setw(10) << ms.total << '\n';
    if (pairs.empty()) throw EmptyResult("no marker pairs in " + o.input);
    return int{kOk};
  });
}

int cmd_train_dmp(const TrainDmpOptions& o, Console& io) {
  return with_run("train-dmp", o.run, io, [&](Run& run) {
    DMPConfig cfg = o.config;
    cfg.seed = o.run.seed;
    cfg.validate();
    if (o.markers.empty()) throw ConfigError("marker list is empty");
    if (!(o.val_fraction > 0 && o.val_fraction < 1)) throw ConfigError("--val-fraction must lie in (0, 1)");
    run.manifest.config = {{"dmp", cfg.to_json()}, {"markers", o.markers}, {"val_fraction", o.val_fraction},
                           {"word_dim", o.word_dim}};

    auto train = read_marker_tsv(run.input(o.train).string(), o.markers);
    std::vector<MarkerPair> val;
    if (!o.val.empty()) {
      val = read_marker_tsv(run.input(o.val).string(), o.markers);
    } else {
      if (train.size() < 2) throw EmptyResult("need at least two pairs to hold out validation data");
      Rng split = Rng(cfg.seed).substream("dmp.split");
      split.shuffle(train);
      const auto n_val = std::clamp<std::size_t>(
          static_cast<std::size_t>(o.val_fraction * static_cast<double>(train.size()) + 0.5), 1, train.size() - 1);
      val.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
      train.resize(train.size() - n_val);
    }
    if (train.empty()) throw EmptyResult("no training pairs in " + o.train);
    if (val.empty()) throw EmptyResult("no validation pairs");

    EmbeddingTable words;
    if (!o.embeddings.empty()) {
      words = load_embeddings(run.input(o.embeddings).string(), VocabMode::build_from_file);
    } else {
      if (o.word_dim == 0) throw ConfigError("--word-dim must be positive");
      Vocab v;
      for (const auto* set : {&train, &val}) {
        for (const auto& p : *set) {
          for (const auto& t : p.s1.tokens) v.add(t);
          for (const auto& t : p.s2.tokens) v.add(t);
        }
      }
      Rng rng = Rng(cfg.seed).substream("cli.words");
      words = random_embeddings(v, o.word_dim, 0.1, rng, false);
    }

    JsonLines log(run.output("log.jsonl"));
    const auto result = train_dmp(train, val, std::move(words), o.markers, cfg, [&](const DMPEpoch& e) {
      log.write({{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}, {"val_acc", e.val_acc}});
      io.out << "epoch " << e.epoch << "  lr " << e.lr << "  loss " << fixed(e.train_loss, 4) << "  val_acc "
             << fixed(e.val_acc, 4) << '\n';
    });
    write_checkpoint(run.output("dmp.ckpt").string(), dmp_checkpoint(result.model));
    write_json(run.output("summary.json"), {{"best_epoch", result.best_epoch},
                                            {"best_val_acc", result.best_val_acc},
                                            {"train_pairs", train.size()},
                                            {"val_pairs", val.size()}});
    io.out << "best epoch " << result.best_epoch << "  val_acc " << fixed(result.best_val_acc, 4) << '\n';
    return int{kOk};
  });
}

int cmd_train_nli(const TrainNliOptions& o, Console& io) {
  return with_run("train-nli", o.run, io, [&](Run& run) {
    DMANConfig mc = o.model;
    mc.seed = o.run.seed;
    TrainConfig tc = o.train;
    tc.seed = o.run.seed;
    tc.validate();
    mc.validate();
    auto s = prepare_nli(run, o.data, mc, false);
    mc.validate();
    run.manifest.config = {{"model", mc.to_json()}, {"train", tc.to_json()}};

    const DMANModel model = make_model(mc, s.words, s.tags, s.encoder);
    prepare_all(model, s.train, s.train_tags);
    prepare_all(model, s.dev, s.dev_tags);
    io.out << "parameters " << model.parameter_count() << "  train " << s.train.size() << "  dev " << s.dev.size()
           << '\n';

    JsonLines log(run.output("log.jsonl"));
    const auto result = train_nli(model, s.train, s.dev, tc, [&](const LogRecord& r) {
      log.write(log_json(r));
      io.out << "step " << r.step << "  epoch " << r.epoch << "  loss " << fixed(r.train_loss, 4) << "  dev_acc "
             << fixed(r.dev_acc, 4) << '\n';
    });
    write_checkpoint(run.output("model.ckpt").string(), model_checkpoint(result.model));
    const EvalResult dev = evaluate(result.model, s.dev);
    nlohmann::json summary = dev.to_json();
    summary["best_step"] = result.best_step;
    summary["steps"] = result.steps;
    summary["clamped_probs"] = result.clamped_probs;
    summary["parameter_count"] = result.model.parameter_count();
    write_json(run.output("dev_eval.json"), summary);
    print_eval(io.out, dev);
    return int{kOk};
  });
}

namespace {

int eval_impl(const char* command, bool ensemble, const EvalOptions& o, Console& io) {
  return with_run(command, o.run, io, [&](Run& run) {
    if (o.checkpoints.empty()) throw ConfigError("missing --checkpoint");
    if (!ensemble && o.checkpoints.size() != 1) throw ConfigError("eval takes exactly one --checkpoint");
    std::vector<DMANModel> models;
    for (const auto& c : o.checkpoints) models.push_back(load_model(read_checkpoint(run.input(c).string())));
    auto data = read_dataset(run, o.data, "data");
    const auto tags = maybe_sidecar(run, o.tags);
    if (data.examples.empty()) throw EmptyResult("no usable examples in " + o.data);
    run.manifest.config = {{"checkpoints", o.checkpoints}};

    nlohmann::json report;
    EvalResult result;
    if (ensemble) {
      nlohmann::json members = nlohmann::json::array();
      for (std::size_t i = 0; i < models.size(); ++i) {
        auto copy = data.examples;
        prepare_all(models[i], copy, tags);
        const double acc = evaluate(models[i], copy).accuracy;
        members.push_back({{"checkpoint", o.checkpoints[i]}, {"accuracy", acc}});
        io.out << "member " << i + 1 << "  accuracy " << fixed(acc, 4) << "  " << o.checkpoints[i] << '\n';
      }
      result = ensemble_eval(models, data.examples, tags ? &*tags : nullptr);
      report = result.to_json();
      report["members"] = members;
    } else {
      prepare_all(models[0], data.examples, tags);
      result = evaluate(models[0], data.examples);
      report = result.to_json();
    }
    report["read"] = read_counts(data.stats);
    write_json(run.output("eval.json"), report);
    print_eval(io.out, result);
    return int{kOk};
  });
}

}  // namespace

int cmd_eval(const EvalOptions& o, Console& io) { return eval_impl("eval", false, o, io); }

int cmd_ensemble_eval(const EvalOptions& o, Console& io) { return eval_impl("ensemble-eval", true, o, io); }

std::vector<AblationVariant> ablation_variants(const DMANConfig& base) {
  std::vector<AblationVariant> v;
  auto add = [&](const std::string& name, auto&& edit) {
    DMANConfig c = base;
    c.use_encoder = true;
    c.only_encoder = false;
    edit(c);
    v.push_back({name, c});
  };
  add("Only Sentence Encoder Model", [](DMANConfig& c) { c.only_encoder = true; });
  add("No Sentence Encoder Model", [](DMANConfig& c) { c.use_encoder = false; });
  add("No Char Embedding", [](DMANConfig& c) { c.use_char = false; });
  add("No POS Embedding", [](DMANConfig& c) { c.use_pos = false; });
  add("No NER Embedding", [](DMANConfig& c) { c.use_ner = false; });
  add("No Exact Match", [](DMANConfig& c) { c.use_em = false; });
  add("No REINFORCE", [](DMANConfig& c) { c.lambda = 1; });
  add("DMAN", [](DMANConfig&) {});
  return v;
}

namespace {

nlohmann::json run_variant(const AblationVariant& v, const NliSetup& s, const TrainConfig& tc, const fs::path& log_path) {
  nlohmann::json row = {{"name", v.name}, {"config", v.config.to_json()}};
  try {
    const DMANModel model = make_model(v.config, s.words, s.tags, s.encoder);
    row["parameter_count"] = model.parameter_count();
    JsonLines log(log_path);
    const auto result = train_nli(model, s.train, s.dev, tc, [&](const LogRecord& r) { log.write(log_json(r)); });
    const EvalResult dev = evaluate(result.model, s.dev);
    row["status"] = "ok";
    row["accuracy"] = dev.accuracy;
    row["best_step"] = result.best_step;
  } catch (const std::exception& e) {
    row["status"] = "failed";
    row["error"] = e.what();
  }
  return row;
}

}  // namespace

int cmd_ablate(const AblateOptions& o, Console& io) {
  return with_run("ablate", o.run, io, [&](Run& run) {
    DMANConfig base = o.model;
    base.seed = o.run.seed;
    TrainConfig tc = o.train;
    tc.seed = o.run.seed;
    tc.validate();
    auto s = prepare_nli(run, o.data, base, true);
    const auto variants = ablation_variants(base);
    for (const auto& v : variants) v.config.validate();
    run.manifest.config = {{"model", base.to_json()}, {"train", tc.to_json()}};

    // Preparation depends only on the word and tag vocabularies, which every variant shares.
    const DMANModel probe = make_model(base, s.words, s.tags, s.encoder);
    prepare_all(probe, s.train, s.train_tags);
    prepare_all(probe, s.dev, s.dev_tags);

    const std::size_t n = variants.size();
    std::vector<fs::path> logs;
    for (const auto& v : variants) logs.push_back(run.output("logs/" + slug(v.name) + ".jsonl"));
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) rows.push_back(nullptr);
    auto done = [&](std::size_t i, nlohmann::json row) {
      if (row["status"] == "ok") {
        io.out << std::left << std::setw(30) << variants[i].name << std::right
               << fixed(row["accuracy"].get<double>(), 4) << '\n';
      } else {
        io.err << variants[i].name << ": " << row["error"].get<std::string>() << '\n';
      }
      rows[i] = std::move(row);
    };

    if (o.jobs <= 1) {
      for (std::size_t i = 0; i < n; ++i) done(i, run_variant(variants[i], s, tc, logs[i]));
    } else {
      // One worker process per variant; each leaves its row in a scratch file.
      auto scratch = [&](std::size_t i) { return run.dir / (".row-" + std::to_string(i) + ".json"); };
      std::map<pid_t, std::size_t> active;
      auto reap = [&] {
        int status = 0;
        const pid_t pid = waitpid(-1, &status, 0);
        if (pid < 0) throw IoError("waitpid failed");
        const std::size_t i = active.at(pid);
        active.erase(pid);
        const fs::path f = scratch(i);
        nlohmann::json row;
        if (WIFEXITED(status) && WEXITSTATUS(status) == 0 && fs::exists(f)) {
          std::ifstream in(f);
          row = nlohmann::json::parse(in);
        } else {
          row = {{"name", variants[i].name}, {"config", variants[i].config.to_json()}, {"status", "failed"},
                 {"error", "worker exited with status " + std::to_string(status)}};
        }
        fs::remove(f);
        done(i, std::move(row));
      };
      for (std::size_t i = 0; i < n; ++i) {
        while (active.size() >= o.jobs) reap();
        io.out.flush();
        io.err.flush();
        const pid_t pid = fork();
        if (pid < 0) throw IoError("fork failed");
        if (pid == 0) {
          int code = 0;
          try {
            write_text(scratch(i), run_variant(variants[i], s, tc, logs[i]).dump());
          } catch (...) {
            code = 1;
          }
          std::_Exit(code);
        }
        active[pid] = i;
      }
      while (!active.empty()) reap();
    }
    std::size_t failed = 0;
    for (const auto& row : rows) failed += row["status"] != "ok";

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i]["status"] == "ok") order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rows[a]["accuracy"].get<double>() > rows[b]["accuracy"].get<double>();
    });
    for (std::size_t r = 0; r < order.size(); ++r) rows[order[r]]["rank"] = r + 1;

    std::ostringstream table;
    table << std::left << std::setw(30) << "model" << std::right << std::setw(10) << "accuracy" << std::setw(6)
          << "rank" << std::setw(12) << "parameters" << '\n';
    for (const auto& row : rows) {
      table << std::left << std::setw(30) << row["name"].get<std::string>() << std::right << std::setw(10)
            << (row["status"] == "ok" ? fixed(row["accuracy"].get<double>(), 4) : std::string("failed"))
            << std::setw(6) << (row.contains("rank") ? std::to_string(row["rank"].get<std::size_t>()) : "-")
            << std::setw(12)
            << (row.contains("parameter_count") ? std::to_string(row["parameter_count"].get<std::size_t>()) : "-")
            << '\n';
    }
    write_json(run.output("ablation.json"), {{"rows", rows}, {"dev_examples", s.dev.size()}});
    write_text(run.output("ablation.txt"), table.str());
    io.out << table.str();
    if (failed == variants.size()) throw EmptyResult("every ablation variant failed");
    return failed > 0 ? int{kPartial} : int{kOk};
  });
}

std::string format_label_stats(const nlohmann::json& stats) {
  std::ostringstream out;
  out << std::left << std::setw(4) << "k" << std::right << std::setw(10) << "total" << std::setw(10) << "correct"
      << '\n';
  for (const auto& row : stats.at("rows")) {
    out << std::left << std::setw(4) << row.at("k").get<std::size_t>() << std::right << std::setw(10)
        << row.at("total").get<std::size_t>() << std::setw(10) << row.at("correct").get<std::size_t>() << '\n';
  }
  out << "accepted " << stats.at("accepted").get<std::size_t>() << ", gold label absent "
      << stats.at("gold_absent").get<std::size_t>() << '\n';
  return out.str();
}

int cmd_stats(const StatsOptions& o, Console& io) {
  return with_run("stats", o.run, io, [&](Run& run) {
    const auto data = read_nli_jsonl(run.input(o.input).string());
    nlohmann::json report = label_stats(data.examples).to_json();
    report["read"] = read_counts(data.stats);
    write_json(run.output("stats.json"), report);
    const std::string text = format_label_stats(report);
    write_text(run.output("stats.txt"), text);
    io.out << text;
    return int{kOk};
  });
}

int cmd_dump_attention(const DumpAttentionOptions& o, Console& io) {
  return with_run("dump-attention", o.run, io, [&](Run& run) {
    const DMANModel model = load_model(read_checkpoint(run.input(o.checkpoint).string()));
    if (model.config.only_encoder) throw ConfigError("an only-encoder model has no attention");
    auto data = read_dataset(run, o.data, "data");
    const auto tags = maybe_sidecar(run, o.tags);
    if (data.examples.empty()) throw EmptyResult("no usable examples in " + o.data);
    run.manifest.config = {{"limit", o.limit}};
    const std::size_t n = o.limit == 0 ? data.examples.size() : std::min(o.limit, data.examples.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto& ex = data.examples[i];
      model.prepare(ex, tags ? &*tags : nullptr);
      char name[48];
      std::snprintf(name, sizeof name, "attention/%06zu.json", i);
      nlohmann::json j = dump_attention(model, ex).to_json();
      j["source_index"] = ex.source_index;
      write_json(run.output(name), j);
    }
    io.out << "wrote " << n << " attention files\n";
    return int{kOk};
  });
}

int cmd_make_synthetic(const MakeSyntheticOptions& o, Console& io) {
  return with_run("make-synthetic", o.run, io, [&](Run& run) {
    const auto& z = o.sizes;
    if (z.dmp_train == 0 || z.dmp_val == 0 || z.nli_train == 0 || z.nli_dev == 0 || z.word_dim == 0) {
      throw ConfigError("synthetic sizes must be positive");
    }
    run.manifest.config = {{"dmp_train", z.dmp_train}, {"dmp_val", z.dmp_val}, {"nli_train", z.nli_train},
                           {"nli_dev", z.nli_dev},     {"word_dim", z.word_dim}};
    const auto suite = synth::make_suite(o.run.seed, z);
    const auto& markers = default_markers();
    write_marker_tsv(run.output("dmp_train.tsv").string(), suite.dmp_train, markers);
    write_marker_tsv(run.output("dmp_val.tsv").string(), suite.dmp_val, markers);
    write_nli_jsonl(run.output("nli_train.jsonl").string(), suite.nli_train);
    write_nli_jsonl(run.output("nli_dev.jsonl").string(), suite.nli_dev);
    write_embeddings(run.output("embeddings.txt").string(), suite.words);
    Rng text_rng = Rng(o.run.seed).substream("synth.text");
    std::string text;
    for (const auto& line : synth::marker_text(suite.lexicon, z.dmp_train, text_rng, markers)) text += line + "\n";
    write_text(run.output("markers.txt"), text);
    io.out << "dmp " << suite.dmp_train.size() << "/" << suite.dmp_val.size() << "  nli " << suite.nli_train.size()
           << "/" << suite.nli_dev.size() << "  vocabulary " << suite.words.rows() << '\n';
    return int{kOk};
  });
}

}  // namespace dman::cli
