#include <comnet/comnet.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace comnet;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

enum Exit
{
  ok = 0,
  usage = 2,
  numeric = 3,
  io_failure = 4
};

std::pair<Index, Index> parse_dims(std::string const &s, char const *what)
{
  std::size_t const x = s.find_first_of("xX");
  try {
    if (x == std::string::npos) {
      throw std::invalid_argument(s);
    }
    std::size_t used = 0;
    long const h = std::stol(s.substr(0, x), &used);
    if (used != x) {
      throw std::invalid_argument(s);
    }
    std::string const rest = s.substr(x + 1);
    long const w = std::stol(rest, &used);
    if (used != rest.size() || h < 1 || w < 1) {
      throw std::invalid_argument(s);
    }
    return {h, w};
  } catch (std::logic_error const &) {
    throw InvalidArgument(std::string(what) + " must look like HxW with positive integers, got '" + s + "'");
  }
}

std::vector<std::string> split(std::string const &s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

void write_text(fs::path const &path, std::string const &text)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

fs::path sibling(fs::path const &out, std::string const &suffix)
{
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

std::string percent(double fraction)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

Json summary_json(Summary const &s)
{
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(format_metric(v)); };
  return {{"mean", num(s.mean)}, {"sem", num(s.sem)}};
}

// Flag values; unset ones leave the config untouched.
struct Flags
{
  std::string config;
  std::optional<Index> coils, count, stages, epochs, channels, iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> size, acs, mode, data, test_data, mask, model, precision, comnet_model, dnn_model, tune_data;
  std::optional<double> accel, lr, tau;
  std::string out, in, method, methods = "zf,l1spirit", samples, modes;
};

ExperimentConfig resolve(Flags const &f)
{
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.coils) {
    c.phantom.coils = *f.coils;
  }
  if (f.count) {
    c.phantom.count = *f.count;
  }
  if (f.size) {
    std::tie(c.phantom.ny, c.phantom.nx) = parse_dims(*f.size, "--size");
  }
  if (f.acs) {
    std::tie(c.mask.acs_h, c.mask.acs_w) = parse_dims(*f.acs, "--acs");
  }
  if (f.accel) {
    c.mask.accel = *f.accel;
  }
  if (f.seed) {
    c.phantom.seed = *f.seed;
    c.mask.seed = *f.seed;
    c.train.seed = *f.seed;
  }
  if (f.mode) {
    c.train.mode = parse_mode(*f.mode);
  }
  if (f.stages) {
    c.train.stages = *f.stages;
  }
  if (f.epochs) {
    c.train.epochs = *f.epochs;
  }
  if (f.lr) {
    c.train.adam.lr = *f.lr;
  }
  if (f.channels) {
    c.train.channels = *f.channels;
  }
  if (f.precision) {
    if (*f.precision != "float" && *f.precision != "double") {
      throw InvalidArgument("--precision must be float or double");
    }
    c.train.precision = *f.precision == "float" ? Precision::Float : Precision::Double;
  }
  if (f.iterations) {
    c.l1spirit.iterations = *f.iterations;
  }
  if (f.tau) {
    c.l1spirit.tau = *f.tau;
  }
  if (f.data) {
    c.paths.data = *f.data;
  }
  if (f.test_data) {
    c.paths.test_data = *f.test_data;
  }
  if (f.mask) {
    c.paths.mask = *f.mask;
  }
  if (f.model) {
    c.paths.model = *f.model;
  }
  if (!f.samples.empty()) {
    c.sweep.samples.clear();
    for (auto const &s : split(f.samples)) {
      try {
        c.sweep.samples.push_back(std::stol(s));
      } catch (std::logic_error const &) {
        throw InvalidArgument("--samples must be a comma-separated list of integers");
      }
    }
  }
  if (!f.modes.empty()) {
    c.sweep.modes.clear();
    for (auto const &m : split(f.modes)) {
      c.sweep.modes.push_back(parse_mode(m));
    }
  }
  validate(c);
  return c;
}

SamplingMask mask_for(ExperimentConfig const &c, Index ny, Index nx)
{
  if (!c.paths.mask.empty()) {
    SamplingMask m = io::load_mask(c.paths.mask);
    require_mask_shape(ny, nx, m, "mask file");
    return m;
  }
  return generate_mask(ny, nx, c.mask.accel, c.mask.acs_h, c.mask.acs_w, c.mask.seed);
}

std::string require_path(std::string const &p, char const *flag)
{
  if (p.empty()) {
    throw InvalidArgument(std::string(flag) + " is required");
  }
  return p;
}

// ---- subcommands ----------------------------------------------------------

int cmd_phantom(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  fs::path const dir = require_path(f.out, "--out");
  fs::create_directories(dir);
  for (Index i = 0; i < c.phantom.count; ++i) {
    PhantomCase const pc =
      generate_phantom(c.phantom.coils, c.phantom.ny, c.phantom.nx, c.phantom.seed + static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "case_%04ld", static_cast<long>(i));
    io::save_kspace(dir / (std::string(name) + ".cks"), pc.kspace);
    io::save_sensitivities(dir / (std::string(name) + ".sens.cks"), pc.sensitivities);
  }
  std::cout << "wrote " << c.phantom.count << " phantom cases (" << c.phantom.coils << " coils, "
            << shape_string(c.phantom.ny, c.phantom.nx) << ") to " << dir.string() << "\n";
  return ok;
}

int cmd_mask(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  fs::path const out = require_path(f.out, "--out");
  SamplingMask const m = generate_mask(c.phantom.ny, c.phantom.nx, c.mask.accel, c.mask.acs_h, c.mask.acs_w, c.mask.seed);
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  io::save_mask(out, m);
  std::cout << "mask " << shape_string(m.rows(), m.cols()) << " R=" << m.acceleration << " sampled " << m.sampled()
            << " (" << percent(m.fraction()) << "%)\n";
  return ok;
}

int cmd_train(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  fs::path const out = require_path(f.out, "--out");
  fs::path const data = require_path(c.paths.data, "--data");
  auto const files = list_cases(data);
  MultiCoilKspace const first = io::load_kspace(files.front());
  SamplingMask const mask = mask_for(c, first.rows(), first.cols());
  std::vector<PreparedSlice> const slices = load_cases(data, mask, c.calibration);

  TrainConfig cfg = c.train;
  cfg.on_epoch = [&](Index e, double l) {
    if (e == 0 || (e + 1) % 10 == 0 || e + 1 == cfg.epochs) {
      std::cout << "epoch " << (e + 1) << "/" << cfg.epochs << " loss " << l << std::endl;
    }
  };
  fs::path const trace_path = sibling(out, ".loss.json");
  Json trace{{"mode", to_string(cfg.mode)}, {"epochs", cfg.epochs}, {"slices", slices.size()}};
  try {
    TrainResult const r = train_few_shot(slices, cfg);
    trace["status"] = "converged";
    trace["loss"] = r.loss_trace;
    if (out.has_parent_path()) {
      fs::create_directories(out.parent_path());
    }
    io::save_model(out, r.model);
    write_text(trace_path, trace.dump(2) + "\n");
  } catch (TrainingDiverged const &e) {
    trace["status"] = "diverged";
    std::vector<Json> loss;
    for (double v : e.trace()) {
      loss.push_back(std::isfinite(v) ? Json(v) : Json(format_metric(v)));
    }
    trace["loss"] = loss;
    trace["error"] = e.what();
    write_text(trace_path, trace.dump(2) + "\n");
    throw;
  }
  std::cout << "wrote " << out.string() << " and " << trace_path.string() << "\n";
  return ok;
}

double default_tau(ExperimentConfig const &c)
{
  // validated value on the phantom cohort when nothing else is given
  return c.l1spirit.tau.value_or(0.01);
}

int cmd_reconstruct(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  Method const method = parse_method(f.method);
  fs::path const out = require_path(f.out, "--out");
  std::optional<ComnetModel> model;
  if (method == Method::Dnn || method == Method::Comnet) {
    model = io::load_model(require_path(c.paths.model, "--model"));
  }
  MultiCoilKspace const k = io::load_kspace(require_path(f.in, "--in"));
  SamplingMask const mask = mask_for(c, k.rows(), k.cols());
  PreparedSlice const s = prepare_slice(k, mask, c.calibration, fs::path(f.in).stem().string());
  L1SpiritOptions l1 = c.l1_options();
  l1.tau = default_tau(c);
  Reconstruction const r = reconstruct(method, s, model ? &*model : nullptr, l1);
  double const violation = dc_violation(r.kspace, s.y, s.mask);
  bool const hard = model ? model->dc.hard : c.train.dc.hard;
  if (hard && violation > 1e-10) {
    throw NumericFailure("reconstruction violates hard data consistency (" + std::to_string(violation) + ")");
  }
  MultiCoilImage img(1, r.image.rows(), r.image.cols());
  img.coil(0) = r.image;
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  io::save_coil_array(out, img, Json{{"content", "image"}, {"method", to_string(method)}});
  std::cout << to_string(method) << ": wrote " << out.string() << " (data-consistency residual " << violation << ")\n";
  return ok;
}

int cmd_evaluate(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  fs::path const out = require_path(f.out, "--out");
  std::vector<Method> methods;
  for (auto const &m : split(f.methods)) {
    methods.push_back(parse_method(m));
  }
  if (methods.empty()) {
    throw InvalidArgument("--methods must name at least one method");
  }
  std::map<Method, ComnetModel> models;
  for (Method m : methods) {
    if (m == Method::Comnet || m == Method::Dnn) {
      auto const &flag = m == Method::Comnet ? f.comnet_model : f.dnn_model;
      std::string const path = flag ? *flag : c.paths.model;
      models[m] = io::load_model(require_path(path, m == Method::Comnet ? "--comnet-model" : "--dnn-model"));
    }
  }
  fs::path const data = require_path(c.paths.data, "--data");
  auto const files = list_cases(data);
  MultiCoilKspace const first = io::load_kspace(files.front());
  SamplingMask const mask = mask_for(c, first.rows(), first.cols());
  std::vector<PreparedSlice> const slices = load_cases(data, mask, c.calibration);

  L1SpiritOptions l1 = c.l1_options();
  l1.tau = default_tau(c);
  if (!c.l1spirit.tau && f.tune_data) {
    // tau chosen on a separate training directory, never on the evaluated cases
    l1.tau = select_tau(load_cases(*f.tune_data, mask, c.calibration), l1, c.l1spirit.tau_grid);
  }

  std::ostringstream csv;
  csv << csv_header << '\n';
  Json summary{{"schema_version", 1}, {"cases", slices.size()}, {"l1spirit_tau", l1.tau}, {"methods", Json::array()}};
  Index failures = 0;
  std::cout << "method      PSNR (dB)          SSIM (%)\n";
  for (Method m : methods) {
    ComnetModel const *model = models.count(m) ? &models.at(m) : nullptr;
    MetricReport const r =
      evaluate(slices, to_string(m), [&](PreparedSlice const &s) { return reconstruct(m, s, model, l1).image; });
    write_csv_rows(csv, r);
    failures += r.failures;
    summary["methods"].push_back({{"method", r.method},
                                  {"psnr_db", summary_json(r.psnr)},
                                  {"ssim", summary_json(r.ssim)},
                                  {"failures", r.failures}});
    char line[160];
    std::snprintf(line, sizeof line, "%-10s  %6.2f +- %-6.2f  %6.2f +- %-6.2f%s\n", r.method.c_str(), r.psnr.mean,
                  r.psnr.sem, 100.0 * r.ssim.mean, 100.0 * r.ssim.sem,
                  r.failures ? ("  (" + std::to_string(r.failures) + " failed)").c_str() : "");
    std::cout << line;
  }
  write_text(out, csv.str());
  write_text(sibling(out, ".json"), summary.dump(2) + "\n");
  if (failures > 0) {
    std::cerr << "error: " << failures << " slice reconstruction(s) failed\n";
    return numeric;
  }
  return ok;
}

int cmd_sweep(Flags const &f)
{
  ExperimentConfig const c = resolve(f);
  fs::path const out = require_path(f.out, "--out");
  Index const need = *std::max_element(c.sweep.samples.begin(), c.sweep.samples.end());
  std::vector<PreparedSlice> pool;
  std::vector<PreparedSlice> test;
  if (c.paths.data.empty() != c.paths.test_data.empty()) {
    throw InvalidArgument("--data and --test-data must be given together");
  }
  if (!c.paths.data.empty()) {
    MultiCoilKspace const first = io::load_kspace(list_cases(c.paths.data).front());
    SamplingMask const mask = mask_for(c, first.rows(), first.cols());
    pool = load_cases(c.paths.data, mask, c.calibration);
    test = load_cases(c.paths.test_data, mask, c.calibration);
  } else {
    SamplingMask const mask = mask_for(c, c.phantom.ny, c.phantom.nx);
    pool = prepare_cohort(phantom_cohort(c.phantom.coils, c.phantom.ny, c.phantom.nx, need, c.sweep.train_seed), mask,
                          c.calibration, "train");
    test = prepare_cohort(
      phantom_cohort(c.phantom.coils, c.phantom.ny, c.phantom.nx, c.sweep.test_count, c.sweep.test_seed), mask,
      c.calibration, "test");
  }
  if (need > static_cast<Index>(pool.size())) {
    throw InvalidArgument("sweep needs " + std::to_string(need) + " training cases, data has " +
                          std::to_string(pool.size()));
  }
  SweepOptions opt;
  opt.samples = c.sweep.samples;
  opt.modes = c.sweep.modes;
  opt.train = c.train;
  opt.l1 = c.l1_options();
  opt.tau_grid = c.l1spirit.tau ? std::vector<double>{*c.l1spirit.tau} : c.l1spirit.tau_grid;
  opt.on_row = [](SweepRow const &r) {
    char line[160];
    std::snprintf(line, sizeof line, "%-9s n=%-3ld PSNR %6.2f dB  SSIM %6.2f%%  (train %.0fs)\n", r.method.c_str(),
                  static_cast<long>(r.samples), r.psnr.mean, 100.0 * r.ssim.mean, r.train_seconds);
    std::cout << line << std::flush;
  };
  std::vector<SweepRow> const rows = run_sweep(pool, test, opt);
  std::ostringstream csv;
  csv << sweep_csv_header << '\n';
  for (SweepRow const &r : rows) {
    csv << r.method << ',' << r.samples << ',' << format_metric(r.psnr.mean) << ',' << format_metric(r.psnr.sem) << ','
        << format_metric(r.ssim.mean) << ',' << format_metric(r.ssim.sem) << '\n';
  }
  write_text(out, csv.str());
  std::cout << "wrote " << out.string() << "\n";
  return ok;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"COMNET parallel-MRI toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "ExperimentConfig JSON file (flags override it)");

  auto *phantom = app.add_subcommand("phantom", "generate synthetic multi-coil phantom cases");
  phantom->add_option("--coils", f.coils, "number of coils");
  phantom->add_option("--size", f.size, "image size HxW");
  phantom->add_option("--count", f.count, "number of cases");
  phantom->add_option("--seed", f.seed, "seed of the first case (case i uses seed + i)");
  phantom->add_option("--out", f.out, "output directory")->required();

  auto *mask = app.add_subcommand("mask", "generate a variable-density sampling mask");
  mask->add_option("--size", f.size, "mask size HxW");
  mask->add_option("--accel", f.accel, "acceleration factor R");
  mask->add_option("--acs", f.acs, "calibration block HxW");
  mask->add_option("--seed", f.seed, "random seed");
  mask->add_option("--out", f.out, "output .cmsk file")->required();

  auto *train = app.add_subcommand("train", "few-shot training of a COMNET or DNN model");
  train->add_option("--mode", f.mode, "comnet or dnn");
  train->add_option("--data", f.data, "directory of training cases");
  train->add_option("--mask", f.mask, "sampling mask file");
  train->add_option("--stages", f.stages, "number of unrolled stages P");
  train->add_option("--epochs", f.epochs, "training epochs");
  train->add_option("--lr", f.lr, "Adam learning rate");
  train->add_option("--seed", f.seed, "initialization and shuffling seed");
  train->add_option("--channels", f.channels, "hidden channels of the network branch");
  train->add_option("--precision", f.precision, "float or double GEMM precision during training");
  train->add_option("--out", f.out, "output .cmod file (loss trace goes next to it)")->required();

  auto *recon = app.add_subcommand("reconstruct", "reconstruct one undersampled case");
  recon->add_option("--method", f.method, "zf, l1spirit, dnn or comnet")->required();
  recon->add_option("--model", f.model, "trained .cmod (dnn and comnet)");
  recon->add_option("--in", f.in, "fully sampled case .cks")->required();
  recon->add_option("--mask", f.mask, "sampling mask file");
  recon->add_option("--tau", f.tau, "L1-SPIRiT wavelet threshold");
  recon->add_option("--iterations", f.iterations, "L1-SPIRiT iterations");
  recon->add_option("--out", f.out, "output image .cks")->required();

  auto *eval = app.add_subcommand("evaluate", "PSNR/SSIM of several methods over a case directory");
  eval->add_option("--methods", f.methods, "comma-separated methods");
  eval->add_option("--data", f.data, "directory of cases to score");
  eval->add_option("--mask", f.mask, "sampling mask file");
  eval->add_option("--comnet-model", f.comnet_model, "trained COMNET model");
  eval->add_option("--dnn-model", f.dnn_model, "trained DNN model");
  eval->add_option("--model", f.model, "model used when the per-method flag is absent");
  eval->add_option("--tau", f.tau, "L1-SPIRiT wavelet threshold");
  eval->add_option("--tune-data", f.tune_data, "training cases on which to select the L1-SPIRiT threshold");
  eval->add_option("--out", f.out, "output CSV (summary JSON goes next to it)")->required();

  auto *sweep = app.add_subcommand("sweep", "PSNR versus number of training samples");
  sweep->add_option("--samples", f.samples, "comma-separated sample counts");
  sweep->add_option("--mode", f.modes, "comma-separated modes (comnet,dnn)");
  sweep->add_option("--data", f.data, "training pool directory (default: generated phantoms)");
  sweep->add_option("--test-data", f.test_data, "held-out directory");
  sweep->add_option("--mask", f.mask, "sampling mask file");
  sweep->add_option("--epochs", f.epochs, "training epochs per model");
  sweep->add_option("--lr", f.lr, "Adam learning rate");
  sweep->add_option("--stages", f.stages, "number of unrolled stages P");
  sweep->add_option("--channels", f.channels, "hidden channels of the network branch");
  sweep->add_option("--seed", f.seed, "training seed");
  sweep->add_option("--out", f.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*phantom) {
      return cmd_phantom(f);
    }
    if (*mask) {
      return cmd_mask(f);
    }
    if (*train) {
      return cmd_train(f);
    }
    if (*recon) {
      return cmd_reconstruct(f);
    }
    if (*eval) {
      return cmd_evaluate(f);
    }
    if (*sweep) {
      return cmd_sweep(f);
    }
  } catch (InvalidArgument const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (MissingCalibration const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (IoError const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_failure;
  } catch (fs::filesystem_error const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_failure;
  } catch (Error const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return numeric;
  }
  return usage;
}
