#include "dualprox/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace dualprox {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

using nlohmann::json;

namespace {

constexpr char kDataMagic[9] = "DPXDATA1";
constexpr char kCkptMagic[9] = "DPXCKPT1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

struct BinWriter {
  std::ofstream out;
  explicit BinWriter(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  }
  void bytes(const void* p, size_t len) { out.write(static_cast<const char*>(p), len); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void doubles(const double* p, size_t count) { bytes(p, count * sizeof(double)); }
  void doubles(const Vec& v) { doubles(v.data(), v.size()); }
};

struct BinReader {
  std::ifstream in;
  std::string path;
  explicit BinReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw ValidationError("cannot open '" + p + "'");
  }
  void bytes(void* p, size_t len) {
    in.read(static_cast<char*>(p), len);
    if (in.gcount() != static_cast<std::streamsize>(len))
      throw ValidationError("truncated file '" + path + "'");
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  void doubles(double* p, size_t count) { bytes(p, count * sizeof(double)); }
  void doubles(Vec& v) { doubles(v.data(), v.size()); }
};

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << content;
}

ParametricLpInstance Dataset::prototype() const {
  DemandSample base;
  base.beta = net.base_demand;
  return to_standard_form(net, ptdf, base);
}

Dataset generate_dataset(const std::string& case_text, int n_samples, double train_fraction,
                         std::uint64_t seed, bool with_oracle) {
  if (n_samples < 1) throw ValidationError("need at least one sample");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train fraction must be in (0, 1)");

  Dataset ds;
  ds.case_text = case_text;
  ds.sample_seed = seed;
  ds.split_seed = mix_seed(seed, 0x5b17u);
  ds.train_fraction = train_fraction;
  ds.net = parse_matpower_case(case_text);
  ds.ptdf = compute_ptdf(ds.net);

  const ParametricLpInstance proto = ds.prototype();
  ds.m = proto.m();
  ds.n = proto.n();

  ds.samples.resize(n_samples);
  std::vector<int> attempt(n_samples, 0);
  std::vector<char> done(n_samples, 0);

  for (int round = 0; round < 10; ++round) {
    bool all_done = true;
#pragma omp parallel for schedule(dynamic) if (n_samples > 1)
    for (int s = 0; s < n_samples; ++s) {
      if (done[s]) continue;
      DatasetSample& smp = ds.samples[s];
      const DemandSample d =
          sample_demand(ds.net, mix_seed(seed, static_cast<std::uint64_t>(s), attempt[s]));
      smp.beta = d.beta;
      if (!with_oracle) {
        done[s] = 1;
        continue;
      }
      const ParametricLpInstance inst = proto.with_rhs(rhs_for_demand(ds.net, ds.ptdf, d.beta));
      const SolveResult res = solve_lp(inst);
      if (res.status == SolveStatus::Optimal) {
        smp.has_oracle = true;
        smp.status = static_cast<std::uint8_t>(res.status);
        smp.lstar = res.primal_obj;
        smp.xstar = res.x;
        smp.ystar = res.y;
        done[s] = 1;
      } else {
        ++attempt[s];
      }
    }
    for (int s = 0; s < n_samples; ++s)
      if (!done[s]) all_done = false;
    if (all_done) break;
  }
  for (int s = 0; s < n_samples; ++s)
    if (!done[s])
      throw NumericalError("sample " + std::to_string(s) +
                           " failed to solve after 10 regeneration attempts");

  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(ds.split_seed);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = std::max(1, static_cast<int>(train_fraction * n_samples));
  ds.train_idx.assign(order.begin(), order.begin() + n_train);
  ds.test_idx.assign(order.begin() + n_train, order.end());
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  json h;
  h["format_version"] = 1;
  h["case_hash"] = hex64(fnv1a(ds.case_text));
  h["case_text"] = ds.case_text;
  h["n_samples"] = ds.samples.size();
  h["n_bus"] = ds.net.n_bus;
  h["m"] = ds.m;
  h["n"] = ds.n;
  h["sample_seed"] = hex64(ds.sample_seed);
  h["split_seed"] = hex64(ds.split_seed);
  h["train_fraction"] = ds.train_fraction;
  h["train_idx"] = ds.train_idx;
  h["test_idx"] = ds.test_idx;
  const std::string header = h.dump();

  BinWriter w(path);
  w.bytes(kDataMagic, 8);
  w.u64(header.size());
  w.bytes(header.data(), header.size());
  for (const auto& s : ds.samples) w.doubles(s.beta);
  for (const auto& s : ds.samples) {
    const std::uint8_t f = s.has_oracle ? 1 : 0;
    w.bytes(&f, 1);
    w.bytes(&s.status, 1);
  }
  for (const auto& s : ds.samples) w.doubles(&s.lstar, 1);
  for (const auto& s : ds.samples) {
    if (s.has_oracle) {
      w.doubles(s.xstar);
      w.doubles(s.ystar);
    } else {
      const Vec zero(ds.n + ds.m, 0.0);
      w.doubles(zero.data(), zero.size());
    }
  }
}

Dataset load_dataset(const std::string& path) {
  BinReader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::string(magic, 8) != kDataMagic)
    throw ValidationError("'" + path + "' is not a dataset file");
  const std::uint64_t hlen = r.u64();
  std::string header(hlen, '\0');
  r.bytes(header.data(), hlen);
  const json h = json::parse(header);
  if (h.at("format_version").get<int>() != 1)
    throw ValidationError("unsupported dataset format version");

  Dataset ds;
  ds.case_text = h.at("case_text").get<std::string>();
  if (hex64(fnv1a(ds.case_text)) != h.at("case_hash").get<std::string>())
    throw ValidationError("dataset case text does not match its fingerprint");
  ds.sample_seed = from_hex64(h.at("sample_seed").get<std::string>());
  ds.split_seed = from_hex64(h.at("split_seed").get<std::string>());
  ds.train_fraction = h.at("train_fraction").get<double>();
  ds.m = h.at("m").get<int>();
  ds.n = h.at("n").get<int>();
  ds.train_idx = h.at("train_idx").get<std::vector<int>>();
  ds.test_idx = h.at("test_idx").get<std::vector<int>>();
  ds.net = parse_matpower_case(ds.case_text);
  ds.ptdf = compute_ptdf(ds.net);

  const size_t count = h.at("n_samples").get<size_t>();
  const int n_bus = h.at("n_bus").get<int>();
  if (n_bus != ds.net.n_bus) throw ValidationError("dataset bus count mismatch");

  ds.samples.resize(count);
  for (auto& s : ds.samples) {
    s.beta.resize(n_bus);
    r.doubles(s.beta);
  }
  for (auto& s : ds.samples) {
    std::uint8_t f, st;
    r.bytes(&f, 1);
    r.bytes(&st, 1);
    s.has_oracle = f != 0;
    s.status = st;
  }
  for (auto& s : ds.samples) r.doubles(&s.lstar, 1);
  for (auto& s : ds.samples) {
    s.xstar.resize(ds.n);
    s.ystar.resize(ds.m);
    r.doubles(s.xstar);
    r.doubles(s.ystar);
    if (!s.has_oracle) {
      s.xstar.clear();
      s.ystar.clear();
    }
  }
  return ds;
}

void make_train_views(const Dataset& ds, double validation_fraction, TrainData& train_out,
                      ValData& val_out) {
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw ValidationError("validation fraction must be in [0, 1)");
  const int n_train_all = static_cast<int>(ds.train_idx.size());
  const int n_val = static_cast<int>(validation_fraction * n_train_all);
  const int n_train = n_train_all - n_val;
  if (n_train < 1) throw ValidationError("no training samples left after validation split");

  const int n_bus = ds.net.n_bus;
  train_out.features = Matrix(n_train, n_bus);
  train_out.rhs = Matrix(n_train, ds.m);
  for (int s = 0; s < n_train; ++s) {
    const auto& smp = ds.samples[ds.train_idx[s]];
    std::copy(smp.beta.begin(), smp.beta.end(), train_out.features.row(s));
    const Vec b = rhs_for_demand(ds.net, ds.ptdf, smp.beta);
    std::copy(b.begin(), b.end(), train_out.rhs.row(s));
  }

  val_out.features = Matrix(n_val, n_bus);
  val_out.rhs = Matrix(n_val, ds.m);
  val_out.lstar.clear();
  bool oracle_complete = n_val > 0;
  for (int s = 0; s < n_val; ++s) {
    const auto& smp = ds.samples[ds.train_idx[n_train + s]];
    std::copy(smp.beta.begin(), smp.beta.end(), val_out.features.row(s));
    const Vec b = rhs_for_demand(ds.net, ds.ptdf, smp.beta);
    std::copy(b.begin(), b.end(), val_out.rhs.row(s));
    if (!smp.has_oracle) oracle_complete = false;
  }
  if (oracle_complete) {
    val_out.lstar.resize(n_val);
    for (int s = 0; s < n_val; ++s) val_out.lstar[s] = ds.samples[ds.train_idx[n_train + s]].lstar;
  }
}

std::vector<EvalSample> make_eval_samples(const Dataset& ds, const std::vector<int>& idx) {
  std::vector<EvalSample> out;
  out.reserve(idx.size());
  for (int i : idx) {
    const auto& smp = ds.samples[i];
    if (!smp.has_oracle)
      throw ValidationError("sample " + std::to_string(i) +
                            " has no reference solution; regenerate the dataset with --with-oracle");
    EvalSample e;
    e.id = i;
    e.beta = smp.beta;
    e.rhs = rhs_for_demand(ds.net, ds.ptdf, smp.beta);
    e.lstar = smp.lstar;
    out.push_back(std::move(e));
  }
  return out;
}

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = hex64(cfg.seed);
  j["mu0"] = cfg.mu0;
  j["mu_decay"] = cfg.mu_decay;
  j["mu_floor"] = cfg.mu_floor;
  j["method"] = method_name(cfg.method);
  j["penalty_weight"] = cfg.penalty_weight;
  j["dc3_steps"] = cfg.dc3_steps;
  j["dc3_lr"] = cfg.dc3_lr;
  j["dc3_momentum"] = cfg.dc3_momentum;
  j["hidden_dim"] = cfg.hidden_dim;
  j["validation_fraction"] = cfg.validation_fraction;
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  TrainConfig cfg;
  if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
  if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("seed")) cfg.seed = from_hex64(j["seed"].get<std::string>());
  if (j.contains("mu0")) cfg.mu0 = j["mu0"].get<double>();
  if (j.contains("mu_decay")) cfg.mu_decay = j["mu_decay"].get<double>();
  if (j.contains("mu_floor")) cfg.mu_floor = j["mu_floor"].get<double>();
  if (j.contains("method")) cfg.method = method_from_name(j["method"].get<std::string>());
  if (j.contains("penalty_weight")) cfg.penalty_weight = j["penalty_weight"].get<double>();
  if (j.contains("dc3_steps")) cfg.dc3_steps = j["dc3_steps"].get<int>();
  if (j.contains("dc3_lr")) cfg.dc3_lr = j["dc3_lr"].get<double>();
  if (j.contains("dc3_momentum")) cfg.dc3_momentum = j["dc3_momentum"].get<double>();
  if (j.contains("hidden_dim")) cfg.hidden_dim = j["hidden_dim"].get<int>();
  if (j.contains("validation_fraction"))
    cfg.validation_fraction = j["validation_fraction"].get<double>();
  return cfg;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  const MlpModel& model = ck.model;
  json h;
  h["format_version"] = 1;
  h["input_dim"] = model.input_dim;
  h["hidden_dim"] = model.hidden_dim;
  h["m"] = model.m;
  h["n"] = model.n;
  h["head"] = static_cast<int>(model.head);
  h["config"] = json::parse(config_to_json(ck.cfg));
  const std::string header = h.dump();

  BinWriter w(path);
  w.bytes(kCkptMagic, 8);
  w.u64(header.size());
  w.bytes(header.data(), header.size());
  for (size_t k = 0; k < model.W.size(); ++k) {
    w.doubles(model.W[k].data.data(), model.W[k].data.size());
    w.doubles(model.bias[k]);
  }
  w.doubles(model.feat_mean);
  w.doubles(model.feat_std);
}

Checkpoint load_checkpoint(const std::string& path) {
  BinReader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::string(magic, 8) != kCkptMagic)
    throw ValidationError("'" + path + "' is not a checkpoint file");
  const std::uint64_t hlen = r.u64();
  std::string header(hlen, '\0');
  r.bytes(header.data(), hlen);
  const json h = json::parse(header);
  if (h.at("format_version").get<int>() != 1)
    throw ValidationError("unsupported checkpoint format version");

  Checkpoint ck;
  ck.cfg = config_from_json(h.at("config").dump());
  ck.model = MlpModel::create(h.at("input_dim").get<int>(), h.at("hidden_dim").get<int>(),
                              h.at("m").get<int>(), h.at("n").get<int>(),
                              static_cast<HeadKind>(h.at("head").get<int>()), 0);
  for (size_t k = 0; k < ck.model.W.size(); ++k) {
    r.doubles(ck.model.W[k].data.data(), ck.model.W[k].data.size());
    r.doubles(ck.model.bias[k]);
  }
  r.doubles(ck.model.feat_mean);
  r.doubles(ck.model.feat_std);
  return ck;
}

std::string manifest_json(const TrainConfig& cfg, const Dataset& ds,
                          const std::string& dataset_path, const TrainResult& result) {
  json j;
  j["format_version"] = 1;
  j["config"] = json::parse(config_to_json(cfg));
  j["dataset_path"] = dataset_path;
  j["dataset_hash"] = hex64(fnv1a(ds.case_text));
  j["n_train"] = ds.train_idx.size();
  j["n_test"] = ds.test_idx.size();
  j["ok"] = result.ok;
  if (!result.ok) j["abort_reason"] = result.abort_reason;
  json hist = json::array();
  for (const auto& e : result.history) {
    json row;
    row["epoch"] = e.epoch;
    row["mu"] = e.mu;
    row["train_loss"] = e.train_loss;
    if (std::isfinite(e.val_gstar_mean)) {
      row["val_gstar_mean"] = e.val_gstar_mean;
      row["val_gstar_max"] = e.val_gstar_max;
    }
    hist.push_back(row);
  }
  j["history"] = hist;
  return j.dump(2);
}

}  // namespace dualprox
