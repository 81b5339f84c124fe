#pragma once

#include <cstdint>
#include <string>

#include "dualprox/loss.hpp"

namespace dualprox {

enum class Method { S3L, DLL, DC3, Penalty };
enum class HeadKind { DualY, DualYZl, DualYZlZu };

const char* method_name(Method m);
Method method_from_name(const std::string& s);
HeadKind head_for_method(Method m);

struct TrainConfig {
  int epochs = 500;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double mu0 = 1.0;
  double mu_decay = 0.99;
  double mu_floor = 0.0;  // 0 = decay all the way
  Method method = Method::S3L;
  double penalty_weight = 0.0;  // <= 0: auto (100x running mean |dual obj|)
  int dc3_steps = 10;
  double dc3_lr = 1e-2;
  double dc3_momentum = 0.5;
  int hidden_dim = 128;
  double validation_fraction = 0.1;
};

// 4 affine layers (3 softplus hidden layers), linear y head, softplus on any
// predicted multiplier block so those stay nonnegative.
struct MlpModel {
  int input_dim = 0;
  int hidden_dim = 0;
  int m = 0;  // y block size
  int n = 0;  // multiplier block size (per block)
  HeadKind head = HeadKind::DualY;
  std::vector<Matrix> W;  // W[k]: out_k x in_k
  std::vector<Vec> bias;
  Vec feat_mean, feat_std;  // frozen at train start

  int output_dim() const;
  std::size_t parameter_count() const;

  static MlpModel create(int input_dim, int hidden_dim, int m, int n, HeadKind head,
                         std::uint64_t seed);
};

struct ForwardCache {
  std::vector<Matrix> act;  // act[0] = standardized input, act[k] = hidden k
  std::vector<Matrix> pre;  // pre-activations per layer
};

// Raw features in, head outputs (post-activation) out.
Matrix mlp_forward(const MlpModel& model, const Matrix& features, ForwardCache* cache);

struct ParamGrads {
  std::vector<Matrix> dW;
  std::vector<Vec> db;
  void scale(double a);
};

// Gradients of sum_s <upstream[s], output[s]> with respect to all parameters.
// Fold any 1/batch factor into upstream.
ParamGrads mlp_backward(const MlpModel& model, const Matrix& upstream, const ForwardCache& cache);

struct AdamState {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step_count = 0;
  std::vector<Matrix> mW, vW;
  std::vector<Vec> mb, vb;

  static AdamState create(const MlpModel& model, double lr);
  void step(MlpModel& model, const ParamGrads& g);
};

inline double mu_schedule_step(double mu, double decay) {
  if (mu < 0.0 || decay <= 0.0 || decay > 1.0) throw ValidationError("bad mu schedule arguments");
  return decay * mu;
}

// Training-visible slice of a dataset: parameters and right-hand sides only,
// no solution data of any kind.
struct TrainData {
  Matrix features;  // n_samples x input_dim
  Matrix rhs;       // n_samples x m
};

// Held-out slice used for learning curves; optima are optional.
struct ValData {
  Matrix features;
  Matrix rhs;
  Vec lstar;  // empty => per-epoch gap curves recorded as NaN
};

struct EpochStats {
  int epoch = 0;
  double mu = 0.0;
  double train_loss = 0.0;  // maximization form, mean over samples
  double val_gstar_mean = 0.0;
  double val_gstar_max = 0.0;
};

struct TrainResult {
  bool ok = false;
  std::string abort_reason;
  std::vector<EpochStats> history;
};

TrainResult train(MlpModel& model, const ParametricLpInstance& proto, const TrainData& data,
                  const ValData& val, const TrainConfig& cfg);

}  // namespace dualprox
