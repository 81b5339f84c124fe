#include "dualprox/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dualprox/baselines.hpp"

namespace dualprox {

const char* method_name(Method m) {
  switch (m) {
    case Method::S3L: return "s3l";
    case Method::DLL: return "dll";
    case Method::DC3: return "dc3";
    case Method::Penalty: return "penalty";
  }
  return "?";
}

Method method_from_name(const std::string& s) {
  if (s == "s3l") return Method::S3L;
  if (s == "dll") return Method::DLL;
  if (s == "dc3") return Method::DC3;
  if (s == "penalty") return Method::Penalty;
  throw ValidationError("unknown method '" + s + "' (expected s3l|dll|dc3|penalty)");
}

HeadKind head_for_method(Method m) {
  switch (m) {
    case Method::S3L:
    case Method::DLL: return HeadKind::DualY;
    case Method::DC3: return HeadKind::DualYZl;
    case Method::Penalty: return HeadKind::DualYZlZu;
  }
  return HeadKind::DualY;
}

namespace {

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

int MlpModel::output_dim() const {
  switch (head) {
    case HeadKind::DualY: return m;
    case HeadKind::DualYZl: return m + n;
    case HeadKind::DualYZlZu: return m + 2 * n;
  }
  return m;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t c = 0;
  for (size_t k = 0; k < W.size(); ++k) c += W[k].data.size() + bias[k].size();
  return c;
}

MlpModel MlpModel::create(int input_dim, int hidden_dim, int m, int n, HeadKind head,
                          std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || m < 1 || n < 0)
    throw ValidationError("bad model dimensions");
  MlpModel model;
  model.input_dim = input_dim;
  model.hidden_dim = hidden_dim;
  model.m = m;
  model.n = n;
  model.head = head;
  model.feat_mean.assign(input_dim, 0.0);
  model.feat_std.assign(input_dim, 1.0);

  const int dims[5] = {input_dim, hidden_dim, hidden_dim, hidden_dim, model.output_dim()};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 4; ++k) {
    const int fan_in = dims[k], fan_out = dims[k + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = dist(rng);
    model.W.push_back(std::move(w));
    model.bias.emplace_back(fan_out, 0.0);
  }
  return model;
}

Matrix mlp_forward(const MlpModel& model, const Matrix& features, ForwardCache* cache) {
  if (features.cols != model.input_dim) throw ValidationError("feature width mismatch");
  const int batch = features.rows;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.act.assign(1, Matrix(batch, model.input_dim));
  c.pre.clear();

  Matrix& x0 = c.act[0];
  for (int s = 0; s < batch; ++s) {
    const double* f = features.row(s);
    double* o = x0.row(s);
    for (int j = 0; j < model.input_dim; ++j)
      o[j] = (f[j] - model.feat_mean[j]) / model.feat_std[j];
  }

  for (int k = 0; k < 4; ++k) {
    const Matrix& in = c.act.back();
    Matrix pre(batch, model.W[k].rows);
    gemm_nt(in, model.W[k], pre);
#pragma omp parallel for schedule(static) if (batch > 1)
    for (int s = 0; s < batch; ++s) {
      double* p = pre.row(s);
      for (int o = 0; o < pre.cols; ++o) p[o] += model.bias[k][o];
    }
    if (k < 3) {
      Matrix act(batch, pre.cols);
#pragma omp parallel for schedule(static) if (batch > 1)
      for (int s = 0; s < batch; ++s) {
        const double* p = pre.row(s);
        double* a = act.row(s);
        for (int o = 0; o < pre.cols; ++o) a[o] = softplus(p[o]);
      }
      c.pre.push_back(std::move(pre));
      c.act.push_back(std::move(act));
    } else {
      c.pre.push_back(std::move(pre));
    }
  }

  // head: y block stays linear, multiplier blocks go through softplus
  const Matrix& pre_out = c.pre.back();
  Matrix out(batch, pre_out.cols);
#pragma omp parallel for schedule(static) if (batch > 1)
  for (int s = 0; s < batch; ++s) {
    const double* p = pre_out.row(s);
    double* o = out.row(s);
    for (int k = 0; k < model.m; ++k) o[k] = p[k];
    for (int k = model.m; k < pre_out.cols; ++k) o[k] = softplus(p[k]);
  }
  return out;
}

void ParamGrads::scale(double a) {
  for (auto& w : dW)
    for (double& v : w.data) v *= a;
  for (auto& b : db)
    for (double& v : b) v *= a;
}

ParamGrads mlp_backward(const MlpModel& model, const Matrix& upstream, const ForwardCache& cache) {
  if (cache.pre.size() != 4 || cache.act.size() != 4)
    throw ValidationError("forward cache missing or stale");
  const int batch = upstream.rows;
  if (upstream.cols != model.output_dim() || cache.act[0].rows != batch)
    throw ValidationError("upstream gradient shape mismatch");

  ParamGrads g;
  g.dW.resize(4);
  g.db.resize(4);

  // head activation derivative
  Matrix delta(batch, upstream.cols);
#pragma omp parallel for schedule(static) if (batch > 1)
  for (int s = 0; s < batch; ++s) {
    const double* up = upstream.row(s);
    const double* p = cache.pre[3].row(s);
    double* d = delta.row(s);
    for (int k = 0; k < model.m; ++k) d[k] = up[k];
    for (int k = model.m; k < upstream.cols; ++k) d[k] = up[k] * sigmoid(p[k]);
  }

  for (int k = 3; k >= 0; --k) {
    g.dW[k] = Matrix(model.W[k].rows, model.W[k].cols);
    gemm_tn(delta, cache.act[k], g.dW[k]);
    g.db[k].assign(model.W[k].rows, 0.0);
    for (int s = 0; s < batch; ++s) {
      const double* d = delta.row(s);
      for (int o = 0; o < delta.cols; ++o) g.db[k][o] += d[o];
    }
    if (k == 0) break;
    Matrix prev(batch, model.W[k].cols);
    gemm_nn(delta, model.W[k], prev);
#pragma omp parallel for schedule(static) if (batch > 1)
    for (int s = 0; s < batch; ++s) {
      const double* p = cache.pre[k - 1].row(s);
      double* d = prev.row(s);
      for (int o = 0; o < prev.cols; ++o) d[o] *= sigmoid(p[o]);
    }
    delta = std::move(prev);
  }
  return g;
}

AdamState AdamState::create(const MlpModel& model, double lr) {
  AdamState st;
  st.lr = lr;
  for (size_t k = 0; k < model.W.size(); ++k) {
    st.mW.emplace_back(model.W[k].rows, model.W[k].cols);
    st.vW.emplace_back(model.W[k].rows, model.W[k].cols);
    st.mb.emplace_back(model.bias[k].size(), 0.0);
    st.vb.emplace_back(model.bias[k].size(), 0.0);
  }
  return st;
}

void AdamState::step(MlpModel& model, const ParamGrads& g) {
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, step_count);
  const double bc2 = 1.0 - std::pow(beta2, step_count);
  for (size_t k = 0; k < model.W.size(); ++k) {
    double* w = model.W[k].data.data();
    double* mw = mW[k].data.data();
    double* vw = vW[k].data.data();
    const double* gw = g.dW[k].data.data();
    const size_t nw = model.W[k].data.size();
#pragma omp parallel for schedule(static) if (nw > 4095)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nw); ++i) {
      mw[i] = beta1 * mw[i] + (1.0 - beta1) * gw[i];
      vw[i] = beta2 * vw[i] + (1.0 - beta2) * gw[i] * gw[i];
      w[i] -= lr * (mw[i] / bc1) / (std::sqrt(vw[i] / bc2) + eps);
    }
    for (size_t i = 0; i < model.bias[k].size(); ++i) {
      mb[k][i] = beta1 * mb[k][i] + (1.0 - beta1) * g.db[k][i];
      vb[k][i] = beta2 * vb[k][i] + (1.0 - beta2) * g.db[k][i] * g.db[k][i];
      model.bias[k][i] -= lr * (mb[k][i] / bc1) / (std::sqrt(vb[k][i] / bc2) + eps);
    }
  }
}

namespace {

// Validation curve: re-complete from y alone and compare the resulting dual
// bound against the stored optimum.
void val_gstar(const MlpModel& model, const ParametricLpInstance& proto, const ValData& val,
               double& mean_out, double& max_out) {
  if (val.lstar.empty() || val.features.rows == 0) {
    mean_out = std::numeric_limits<double>::quiet_NaN();
    max_out = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const Matrix out = mlp_forward(model, val.features, nullptr);
  const int nv = val.features.rows;
  Vec gaps(nv);
#pragma omp parallel if (nv > 1)
  {
    Vec y(proto.m());
#pragma omp for schedule(static)
    for (int s = 0; s < nv; ++s) {
      for (int i = 0; i < proto.m(); ++i) y[i] = out(s, i);
      const CompletionOutput c = complete_unregularized(proto, y);
      const double bound = dot(val.rhs.row(s), y.data(), proto.m()) + c.xi;
      gaps[s] = 100.0 * std::abs(val.lstar[s] - bound) / std::abs(val.lstar[s]);
    }
  }
  double sum = 0.0, mx = 0.0;
  for (double gp : gaps) {
    sum += gp;
    mx = std::max(mx, gp);
  }
  mean_out = sum / nv;
  max_out = mx;
}

}  // namespace

TrainResult train(MlpModel& model, const ParametricLpInstance& proto, const TrainData& data,
                  const ValData& val, const TrainConfig& cfg) {
  TrainResult result;
  const int n_samples = data.features.rows;
  if (n_samples == 0) throw ValidationError("empty training set");
  if (data.rhs.rows != n_samples) throw ValidationError("features/rhs row counts differ");
  if (cfg.batch_size < 1 || cfg.epochs < 0) throw ValidationError("bad training config");
  if (!(cfg.mu_decay > 0.0 && cfg.mu_decay <= 1.0))
    throw ValidationError("mu_decay must be in (0, 1]");
  if (model.head != head_for_method(cfg.method))
    throw ValidationError("model head does not match training method");

  const int m = proto.m(), n = proto.n();

  // feature standardization stats, frozen now; constant features get std 1
  for (int j = 0; j < model.input_dim; ++j) {
    double mean = 0.0;
    for (int s = 0; s < n_samples; ++s) mean += data.features(s, j);
    mean /= n_samples;
    double var = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      const double d = data.features(s, j) - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / n_samples);
    model.feat_mean[j] = mean;
    model.feat_std[j] = sd > 1e-12 ? sd : 1.0;
  }

  AdamState adam = AdamState::create(model, cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);

  double mu = cfg.method == Method::S3L ? cfg.mu0 : 0.0;
  double penalty_running_mean = -1.0;  // <0: not yet initialized

  const int outdim = model.output_dim();
  Matrix fb, rb, upstream;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    long seen = 0;

    for (int start = 0; start < n_samples; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n_samples - start);
      fb = Matrix(bs, model.input_dim);
      rb = Matrix(bs, m);
      for (int s = 0; s < bs; ++s) {
        const int idx = order[start + s];
        std::copy_n(data.features.row(idx), model.input_dim, fb.row(s));
        std::copy_n(data.rhs.row(idx), m, rb.row(s));
      }

      ForwardCache cache;
      const Matrix out = mlp_forward(model, fb, &cache);
      upstream = Matrix(bs, outdim);
      double batch_loss = 0.0;

      if (cfg.method == Method::S3L || cfg.method == Method::DLL) {
        const Regularizer reg = (cfg.method == Method::S3L && mu > 0.0)
                                    ? Regularizer::log_barrier(mu)
                                    : Regularizer::none();
        Vec losses;
        Matrix grads;
        batch_loss_grad(proto, rb, out, reg, losses, grads);
        for (int s = 0; s < bs; ++s) batch_loss += losses[s];
        batch_loss /= bs;
        const double scale = -1.0 / bs;  // minimize -loss, mean over batch
        for (int s = 0; s < bs; ++s) {
          const double* gr = grads.row(s);
          double* up = upstream.row(s);
          for (int i = 0; i < m; ++i) up[i] = scale * gr[i];
        }
      } else if (cfg.method == Method::Penalty) {
        // weight tracks 100x the running mean |dual objective| unless pinned
        double weight = cfg.penalty_weight;
        std::vector<PenaltyGrads> grads(bs);
        std::vector<PenaltyLossValue> vals(bs);
        if (weight <= 0.0) {
          double mean_abs = 0.0;
          for (int s = 0; s < bs; ++s) {
            DualPoint dp;
            dp.y.assign(out.row(s), out.row(s) + m);
            dp.zl.assign(out.row(s) + m, out.row(s) + m + n);
            dp.zu.assign(out.row(s) + m + n, out.row(s) + m + 2 * n);
            const ParametricLpInstance inst = proto.with_rhs(Vec(rb.row(s), rb.row(s) + m));
            mean_abs += std::abs(dual_objective(inst, dp));
          }
          mean_abs /= bs;
          penalty_running_mean =
              penalty_running_mean < 0.0 ? mean_abs : 0.99 * penalty_running_mean + 0.01 * mean_abs;
          weight = 100.0 * penalty_running_mean;
        }
#pragma omp parallel for schedule(static) if (bs > 1)
        for (int s = 0; s < bs; ++s) {
          DualPoint dp;
          dp.y.assign(out.row(s), out.row(s) + m);
          dp.zl.assign(out.row(s) + m, out.row(s) + m + n);
          dp.zu.assign(out.row(s) + m + n, out.row(s) + m + 2 * n);
          const ParametricLpInstance inst = proto.with_rhs(Vec(rb.row(s), rb.row(s) + m));
          vals[s] = penalty_loss(inst, dp, weight, &grads[s]);
        }
        const double scale = -1.0 / bs;
        for (int s = 0; s < bs; ++s) {
          batch_loss += vals[s].total;
          double* up = upstream.row(s);
          for (int i = 0; i < m; ++i) up[i] = scale * grads[s].dy[i];
          for (int j = 0; j < n; ++j) {
            up[m + j] = scale * grads[s].dzl[j];
            up[m + n + j] = scale * grads[s].dzu[j];
          }
        }
        batch_loss /= bs;
      } else {  // DC3
        double weight = cfg.penalty_weight;
        Vec totals(bs);
        Matrix gy0(bs, m), gzl0(bs, n);
        std::vector<double> dual_objs(bs);
        // pass 1: corrected points and dual objectives (for the auto weight)
        std::vector<Dc3Trace> traces(bs);
#pragma omp parallel for schedule(static) if (bs > 1)
        for (int s = 0; s < bs; ++s) {
          Vec y(out.row(s), out.row(s) + m);
          Vec zl(out.row(s) + m, out.row(s) + m + n);
          const ParametricLpInstance inst = proto.with_rhs(Vec(rb.row(s), rb.row(s) + m));
          Vec zu = dc3_complete(inst, y, zl);
          traces[s] = dc3_correct(inst, y, zl, zu, cfg.dc3_steps, cfg.dc3_lr, cfg.dc3_momentum);
          DualPoint dp{traces[s].y, traces[s].zl, traces[s].zu};
          dual_objs[s] = dual_objective(inst, dp);
        }
        if (weight <= 0.0) {
          double mean_abs = 0.0;
          for (int s = 0; s < bs; ++s) mean_abs += std::abs(dual_objs[s]);
          mean_abs /= bs;
          penalty_running_mean =
              penalty_running_mean < 0.0 ? mean_abs : 0.99 * penalty_running_mean + 0.01 * mean_abs;
          weight = 100.0 * penalty_running_mean;
        }
#pragma omp parallel for schedule(static) if (bs > 1)
        for (int s = 0; s < bs; ++s) {
          const ParametricLpInstance inst = proto.with_rhs(Vec(rb.row(s), rb.row(s) + m));
          DualPoint dp{traces[s].y, traces[s].zl, traces[s].zu};
          PenaltyGrads pg;
          const PenaltyLossValue lv = penalty_loss(inst, dp, weight, &pg);
          totals[s] = lv.total;
          Vec dy0, dzl0;
          dc3_backward(inst, traces[s], pg.dy, pg.dzl, pg.dzu, dy0, dzl0);
          std::copy(dy0.begin(), dy0.end(), gy0.row(s));
          std::copy(dzl0.begin(), dzl0.end(), gzl0.row(s));
        }
        const double scale = -1.0 / bs;
        for (int s = 0; s < bs; ++s) {
          batch_loss += totals[s];
          double* up = upstream.row(s);
          for (int i = 0; i < m; ++i) up[i] = scale * gy0(s, i);
          for (int j = 0; j < n; ++j) up[m + j] = scale * gzl0(s, j);
        }
        batch_loss /= bs;
      }

      if (!std::isfinite(batch_loss)) {
        double max_z = 0.0;
        Vec z(n);
        for (int s = 0; s < bs; ++s) {
          reduced_costs(proto, out.row(s), z.data());
          max_z = std::max(max_z, inf_norm(z));
        }
        result.ok = false;
        result.abort_reason = "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(start / cfg.batch_size) + ", mu " +
                              std::to_string(mu) + ", max |z| " + std::to_string(max_z);
        return result;
      }

      epoch_loss += batch_loss * bs;
      seen += bs;

      if (cfg.learning_rate != 0.0) {
        ParamGrads grads = mlp_backward(model, upstream, cache);
        adam.step(model, grads);
      }
    }

    EpochStats st;
    st.epoch = epoch;
    st.mu = mu;
    st.train_loss = epoch_loss / seen;
    val_gstar(model, proto, val, st.val_gstar_mean, st.val_gstar_max);
    result.history.push_back(st);

    if (cfg.method == Method::S3L) mu = std::max(cfg.mu_floor, mu_schedule_step(mu, cfg.mu_decay));
  }

  result.ok = true;
  return result;
}

}  // namespace dualprox
