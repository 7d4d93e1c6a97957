#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "dman/dmp/encoder.hpp"
#include "dman/model/dman.hpp"
#include "dman/synth/synthetic.hpp"
#include "dman/train/trainer.hpp"

namespace dman::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kEmpty = 3,
  kDiverged = 4,
  kPartial = 5,
};

struct Console {
  std::ostream& out;
  std::ostream& err;
};

struct RunOptions {
  std::uint64_t seed = 1;
  std::string runs_root;  // parent of the timestamped run directories
  std::string run_dir;    // exact output directory instead of a timestamped one
  std::vector<std::string> args;
};

struct ExtractMarkersOptions {
  RunOptions run;
  std::string input;
  std::vector<std::string> markers = default_markers();
};

struct TrainDmpOptions {
  RunOptions run;
  std::string train;
  std::string val;            // empty: hold out val_fraction of train
  double val_fraction = 0.1;
  std::string embeddings;     // empty: random vectors over the pair vocabulary
  std::size_t word_dim = 300;
  std::vector<std::string> markers = default_markers();
  DMPConfig config;
};

struct NliDataOptions {
  std::string train;
  std::string dev;
  std::string train_tags;
  std::string dev_tags;
  std::string dmp_checkpoint;
  std::string embeddings;
  std::size_t word_dim = 300;
};

struct TrainNliOptions {
  RunOptions run;
  NliDataOptions data;
  DMANConfig model;
  TrainConfig train;
};

struct AblateOptions {
  RunOptions run;
  NliDataOptions data;
  DMANConfig model;
  TrainConfig train;
  std::size_t jobs = 1;  // > 1: variants run in that many worker processes
};

struct EvalOptions {
  RunOptions run;
  std::vector<std::string> checkpoints;  // eval uses the first only
  std::string data;
  std::string tags;
};

struct StatsOptions {
  RunOptions run;
  std::string input;
};

struct DumpAttentionOptions {
  RunOptions run;
  std::string checkpoint;
  std::string data;
  std::string tags;
  std::size_t limit = 0;  // 0: every example
};

struct MakeSyntheticOptions {
  RunOptions run;
  synth::SuiteSizes sizes;
};

int cmd_extract_markers(const ExtractMarkersOptions& o, Console& io);
int cmd_train_dmp(const TrainDmpOptions& o, Console& io);
int cmd_train_nli(const TrainNliOptions& o, Console& io);
int cmd_eval(const EvalOptions& o, Console& io);
int cmd_ensemble_eval(const EvalOptions& o, Console& io);
int cmd_ablate(const AblateOptions& o, Console& io);
int cmd_stats(const StatsOptions& o, Console& io);
int cmd_dump_attention(const DumpAttentionOptions& o, Console& io);
int cmd_make_synthetic(const MakeSyntheticOptions& o, Console& io);

struct AblationVariant {
  std::string name;
  DMANConfig config;
};

// Ablation rows in report order; the full model is last.
std::vector<AblationVariant> ablation_variants(const DMANConfig& base);

// Text rendering of a label_stats report.
std::string format_label_stats(const nlohmann::json& stats);

}  // namespace dman::cli
