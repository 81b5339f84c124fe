#pragma once

#include <string>

#include "dualprox/dcopf.hpp"
#include "dualprox/ipm.hpp"
#include "dualprox/metrics.hpp"
#include "dualprox/mlp.hpp"

namespace dualprox {

// One parametric sample: the demand vector, and optionally the reference
// solution computed offline. Training never reads the oracle block; loaders
// expose it only through evaluation-side types.
struct DatasetSample {
  Vec beta;
  bool has_oracle = false;
  std::uint8_t status = 0;  // SolveStatus as byte
  double lstar = 0.0;
  Vec xstar, ystar;
};

struct Dataset {
  std::string case_text;
  std::uint64_t sample_seed = 0;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  int m = 0, n = 0;

  // rebuilt from case_text on load
  PowerNetwork net;
  PtdfMatrix ptdf;

  std::vector<DatasetSample> samples;
  std::vector<int> train_idx, test_idx;

  ParametricLpInstance prototype() const;
  Vec rhs(int sample) const { return rhs_for_demand(net, ptdf, samples[sample].beta); }
};

// Samples demands, optionally solves every sample, splits train/test.
// A sample whose solve does not come back Optimal is redrawn with a fresh
// sub-seed, up to 10 times.
Dataset generate_dataset(const std::string& case_text, int n_samples, double train_fraction,
                         std::uint64_t seed, bool with_oracle);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Training/validation views (the validation slice is carved off the end of
// the shuffled training indices).
void make_train_views(const Dataset& ds, double validation_fraction, TrainData& train_out,
                      ValData& val_out);
std::vector<EvalSample> make_eval_samples(const Dataset& ds, const std::vector<int>& idx);

struct Checkpoint {
  MlpModel model;
  TrainConfig cfg;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Manifest of one training run; everything in it is reproducible from the
// seed, so two runs with the same inputs produce identical bytes. Wall-clock
// timings go to a separate sidecar file for that reason.
std::string manifest_json(const TrainConfig& cfg, const Dataset& ds,
                          const std::string& dataset_path, const TrainResult& result);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& text);

}  // namespace dualprox
