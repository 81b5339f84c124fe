#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualprox/bench.hpp"
#include "dualprox/io.hpp"
#include "dualprox/svgplot.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace dualprox;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void apply_worker_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("DUALPROX_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) omp_set_num_threads(t);
  }
#endif
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TrainConfig load_config(const std::string& config_path) {
  TrainConfig cfg;
  if (!config_path.empty()) cfg = config_from_json(read_text_file(config_path));
  return cfg;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& case_path, const std::string& out_path, int n_samples,
                 double split, std::uint64_t seed, bool with_oracle) {
  const std::string case_text = read_text_file(case_path);
  const Dataset ds = generate_dataset(case_text, n_samples, split, seed, with_oracle);
  save_dataset(ds, out_path);
  std::printf("wrote %s: %d samples (%zu train / %zu test), m=%d n=%d, oracle=%s\n",
              out_path.c_str(), n_samples, ds.train_idx.size(), ds.test_idx.size(), ds.m, ds.n,
              with_oracle ? "yes" : "no");
  return 0;
}

int train_one(const Dataset& ds, const std::string& dataset_path, TrainConfig cfg,
              const std::string& out_prefix) {
  const ParametricLpInstance proto = ds.prototype();
  TrainData tdata;
  ValData vdata;
  make_train_views(ds, cfg.validation_fraction, tdata, vdata);

  MlpModel model = MlpModel::create(ds.net.n_bus, cfg.hidden_dim, ds.m, ds.n,
                                    head_for_method(cfg.method), cfg.seed);

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult result = train(model, proto, tdata, vdata, cfg);
  const auto t1 = std::chrono::steady_clock::now();
  const double wall_s = std::chrono::duration<double>(t1 - t0).count();

  write_text_file(out_prefix + ".manifest.json", manifest_json(cfg, ds, dataset_path, result));
  {
    json t;
    t["wall_clock_s"] = wall_s;
    t["epochs"] = result.history.size();
    write_text_file(out_prefix + ".timings.json", t.dump(2));
  }
  if (!result.ok) {
    std::fprintf(stderr, "training aborted: %s\n", result.abort_reason.c_str());
    return kExitNumerical;
  }
  save_checkpoint({model, cfg}, out_prefix + ".ckpt");
  const auto& last = result.history.back();
  std::printf("%s: %zu epochs in %.1f s, final train loss %.6g", out_prefix.c_str(),
              result.history.size(), wall_s, last.train_loss);
  if (std::isfinite(last.val_gstar_mean))
    std::printf(", val gap mean %.4f%% max %.4f%%", last.val_gstar_mean, last.val_gstar_max);
  std::printf("\n");
  return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& method,
              const std::string& out_prefix, const std::string& config_path,
              const std::vector<std::uint64_t>& seeds, int epochs_override) {
  const Dataset ds = load_dataset(dataset_path);
  TrainConfig cfg = load_config(config_path);
  cfg.method = method_from_name(method);
  if (cfg.method == Method::DLL) cfg.mu0 = 0.0;
  if (epochs_override >= 0) cfg.epochs = epochs_override;

  int rc = 0;
  if (seeds.size() <= 1) {
    if (!seeds.empty()) cfg.seed = seeds[0];
    rc = train_one(ds, dataset_path, cfg, out_prefix);
  } else {
    for (std::uint64_t s : seeds) {
      cfg.seed = s;
      const int r =
          train_one(ds, dataset_path, cfg, out_prefix + ".seed" + std::to_string(s));
      rc = rc == 0 ? r : rc;
    }
  }
  return rc;
}

void write_metrics_csv(const std::string& path, const MetricsRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "sample_id,v_mean,v_sum,v_linf,dgap_pct,gstar_pct,lstar,dual_bound,excluded\n";
  for (const auto& s : rec.per_sample) {
    out << s.id << ',' << fmt_double(s.v_mean) << ',' << fmt_double(s.v_sum) << ','
        << fmt_double(s.v_linf) << ',' << fmt_double(s.dgap_pct) << ','
        << fmt_double(s.gstar_pct) << ',' << fmt_double(s.lstar) << ','
        << fmt_double(s.dual_bound) << ',' << (s.excluded ? 1 : 0) << '\n';
  }
  out << "summary," << fmt_double(rec.v_mean) << ",,," << fmt_double(rec.dgap_mean_pct) << ','
      << fmt_double(rec.gstar_mean_pct) << ",,," << rec.n_excluded << '\n';
}

// Summary table; column order mirrors the usual reporting convention.
void print_summary_header() {
  std::printf("%-28s %10s %10s %12s %10s\n", "checkpoint", "Gstar(%)", "Gmax(%)", "V", "dG(%)");
}

void print_summary_row(const std::string& name, const MetricsRecord& rec) {
  std::printf("%-28s %10.4f %10.4f %12.4e %10.4f\n", name.c_str(), rec.gstar_mean_pct,
              rec.gstar_max_pct, rec.v_mean, rec.dgap_mean_pct);
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset_path,
             const std::string& csv_out) {
  const Dataset ds = load_dataset(dataset_path);
  const ParametricLpInstance proto = ds.prototype();
  const std::vector<EvalSample> test = make_eval_samples(ds, ds.test_idx);

  std::vector<std::string> paths;
  if (fs::is_directory(ckpt_path)) {
    for (const auto& e : fs::directory_iterator(ckpt_path))
      if (e.path().extension() == ".ckpt") paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw ValidationError("no .ckpt files in '" + ckpt_path + "'");
  } else {
    paths.push_back(ckpt_path);
  }

  print_summary_header();
  double gs = 0, gm = 0, vm = 0, dg = 0;
  for (const auto& p : paths) {
    const Checkpoint ck = load_checkpoint(p);
    const MetricsRecord rec = evaluate_model(ck.model, proto, test, ck.cfg.method, ck.cfg);
    print_summary_row(fs::path(p).filename().string(), rec);
    gs += rec.gstar_mean_pct;
    gm += rec.gstar_max_pct;
    vm += rec.v_mean;
    dg += rec.dgap_mean_pct;
    if (!csv_out.empty()) {
      const std::string path =
          paths.size() == 1 ? csv_out
                            : csv_out + "." + fs::path(p).stem().string() + ".csv";
      write_metrics_csv(path, rec);
    }
  }
  if (paths.size() > 1) {
    const double k = static_cast<double>(paths.size());
    std::printf("%-28s %10.4f %10.4f %12.4e %10.4f\n", "mean", gs / k, gm / k, vm / k, dg / k);
  }
  return 0;
}

int cmd_bench_main(const std::string& ckpt_path, const std::string& dataset_path, int batch,
                   int runs, double mu) {
  const Dataset ds = load_dataset(dataset_path);
  const ParametricLpInstance proto = ds.prototype();
  std::vector<int> idx(ds.samples.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  // oracle values are not needed for timing; build eval samples directly
  std::vector<EvalSample> samples;
  samples.reserve(idx.size());
  for (int i : idx) {
    EvalSample e;
    e.id = i;
    e.beta = ds.samples[i].beta;
    e.rhs = ds.rhs(i);
    e.lstar = ds.samples[i].lstar;
    samples.push_back(std::move(e));
  }

  MlpModel model = ckpt_path.empty()
                       ? MlpModel::create(ds.net.n_bus, 128, ds.m, ds.n, HeadKind::DualY, 1)
                       : load_checkpoint(ckpt_path).model;
  const BenchReport rep = run_bench(model, proto, samples, batch, runs, mu);
  std::fputs(format_bench_report(rep).c_str(), stdout);
  return 0;
}

int cmd_plot(const std::vector<std::string>& manifest_paths, const std::string& out_prefix) {
  struct SeedHistory {
    std::string name;
    Vec epoch, mu, mean_g, max_g;
  };
  std::vector<SeedHistory> runs;
  size_t common = SIZE_MAX;
  for (const auto& p : manifest_paths) {
    const json j = json::parse(read_text_file(p));
    SeedHistory h;
    h.name = fs::path(p).filename().string();
    for (const auto& row : j.at("history")) {
      h.epoch.push_back(row.at("epoch").get<double>());
      h.mu.push_back(row.at("mu").get<double>());
      h.mean_g.push_back(row.value("val_gstar_mean", std::nan("")));
      h.max_g.push_back(row.value("val_gstar_max", std::nan("")));
    }
    common = std::min(common, h.epoch.size());
    runs.push_back(std::move(h));
  }
  if (runs.empty()) throw ValidationError("no manifests given");
  for (const auto& h : runs)
    if (h.epoch.size() != common)
      std::fprintf(stderr, "warning: truncating %s to the common %zu epochs\n", h.name.c_str(),
                   common);

  // long-format CSV, one row per (manifest, epoch)
  {
    std::ofstream csv(out_prefix + ".csv", std::ios::binary);
    csv << "manifest,epoch,mu,mean_gstar,max_gstar\n";
    for (const auto& h : runs)
      for (size_t e = 0; e < common; ++e)
        csv << h.name << ',' << h.epoch[e] << ',' << fmt_double(h.mu[e]) << ','
            << fmt_double(h.mean_g[e]) << ',' << fmt_double(h.max_g[e]) << '\n';
  }

  const auto band_series = [&](bool use_max) {
    PlotSeries s;
    s.label = use_max ? "max gap, seed band" : "mean gap, seed band";
    for (size_t e = 0; e < common; ++e) {
      double lo = 1e300, hi = -1e300, sum = 0.0;
      int cnt = 0;
      for (const auto& h : runs) {
        const double v = use_max ? h.max_g[e] : h.mean_g[e];
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++cnt;
      }
      if (cnt == 0) continue;
      s.x.push_back(static_cast<double>(e));
      s.y.push_back(sum / cnt);
      s.band_lo.push_back(lo);
      s.band_hi.push_back(hi);
    }
    return s;
  };

  const PlotSeries mean_s = band_series(false);
  const PlotSeries max_s = band_series(true);
  if (mean_s.x.empty()) {
    std::fprintf(stderr,
                 "warning: manifests carry no validation gap curves; CSV written, plots skipped\n");
    return 0;
  }
  write_text_file(out_prefix + ".mean.svg",
                  render_line_chart("Mean dual gap on validation set", "epoch", "gap (%)",
                                    {mean_s}));
  write_text_file(out_prefix + ".max.svg",
                  render_line_chart("Max dual gap on validation set", "epoch", "gap (%)",
                                    {max_s}));
  std::printf("wrote %s.csv, %s.mean.svg, %s.max.svg\n", out_prefix.c_str(), out_prefix.c_str(),
              out_prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_worker_env();
  CLI::App app{"dual optimization proxies for parametric bounded LPs"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "sample a parametric dataset from a case file");
  std::string case_path, out_path = "dataset.dpx";
  int n_samples = 4000;
  double split = 0.8;
  std::uint64_t seed = 0;
  bool with_oracle = false;
  gen->add_option("case", case_path, "MATPOWER case file")->required();
  gen->add_option("-o,--out", out_path, "output dataset path");
  gen->add_option("-n,--samples", n_samples, "number of samples");
  gen->add_option("--split", split, "train fraction");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_flag("--with-oracle", with_oracle, "solve every sample and store the optima");

  // train
  auto* tr = app.add_subcommand("train", "train a proxy on a dataset");
  std::string dataset_path, method = "s3l", out_prefix = "run", config_path;
  std::vector<std::uint64_t> seeds;
  int epochs_override = -1;
  tr->add_option("dataset", dataset_path, "dataset file")->required();
  tr->add_option("-m,--method", method, "s3l|dll|dc3|penalty");
  tr->add_option("-o,--out", out_prefix, "output prefix for checkpoint/manifest");
  tr->add_option("--config", config_path, "JSON config overriding defaults");
  tr->add_option("--seeds", seeds, "one or more seeds (multi-seed writes one run per seed)");
  tr->add_option("--epochs", epochs_override, "override epoch count");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate checkpoint(s) on the test split");
  std::string ckpt_path, eval_dataset, csv_out;
  ev->add_option("checkpoint", ckpt_path, "checkpoint file or directory of .ckpt files")
      ->required();
  ev->add_option("dataset", eval_dataset, "dataset file with oracle blocks")->required();
  ev->add_option("--csv", csv_out, "write per-sample metrics CSV here");

  // bench
  auto* be = app.add_subcommand("bench", "timing comparison against the reference solver");
  std::string bench_dataset, bench_ckpt;
  int batch = 1000, runs = 5;
  double bench_mu = 1.0;
  be->add_option("dataset", bench_dataset, "dataset file")->required();
  be->add_option("--checkpoint", bench_ckpt, "checkpoint (default: fresh model, same timing)");
  be->add_option("--batch", batch, "instances per timed batch");
  be->add_option("--runs", runs, "timed repetitions (median reported)");
  be->add_option("--mu", bench_mu, "barrier weight for the completion comparison");

  // plot
  auto* pl = app.add_subcommand("plot", "training-curve CSV + SVG from manifests");
  std::vector<std::string> manifests;
  std::string plot_prefix = "curves";
  pl->add_option("manifests", manifests, "manifest JSON files")->required();
  pl->add_option("-o,--out", plot_prefix, "output prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen_data(case_path, out_path, n_samples, split, seed, with_oracle);
    if (tr->parsed())
      return cmd_train(dataset_path, method, out_prefix, config_path, seeds, epochs_override);
    if (ev->parsed()) return cmd_eval(ckpt_path, eval_dataset, csv_out);
    if (be->parsed()) return cmd_bench_main(bench_ckpt, bench_dataset, batch, runs, bench_mu);
    if (pl->parsed()) return cmd_plot(manifests, plot_prefix);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return 0;
}
