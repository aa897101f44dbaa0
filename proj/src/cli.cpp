#include "seisint/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "seisint/catalog.hpp"
#include "seisint/checkpoint.hpp"
#include "seisint/config.hpp"
#include "seisint/error.hpp"
#include "seisint/io.hpp"
#include "seisint/metrics.hpp"
#include "seisint/model.hpp"
#include "seisint/random.hpp"
#include "seisint/render.hpp"
#include "seisint/synth.hpp"
#include "seisint/text.hpp"

namespace seisint::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nn::Executor make_executor(std::size_t threads) {
  return threads == 0 ? nn::Executor::hardware() : nn::Executor(threads);
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

/// Catalog events usable with `cfg`: above the magnitude floor with the
/// epicentre inside the grid.
std::vector<HypocenterEvent> usable_events(const RunConfig& cfg, const fs::path& data_dir,
                                           std::ostream& out) {
  const auto all = load_catalog(data_dir);
  auto events = filter_min_magnitude(all, cfg.data.min_magnitude);
  const std::size_t below = all.size() - events.size();
  std::erase_if(events, [&](const HypocenterEvent& e) { return !cfg.grid.contains(e.lat_deg, e.lon_deg); });
  const std::size_t outside = all.size() - below - events.size();
  out << "catalog: " << all.size() << " events";
  if (below) out << ", " << below << " below M" << cfg.data.min_magnitude;
  if (outside) out << ", " << outside << " with epicenter outside the grid";
  out << "; " << events.size() << " usable\n";
  return events;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  long long events = -1;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string config;
  AttenuationParams params;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.events < 1) throw UsageError("synth: --events must be >= 1");
  const auto cfg = config_or_default(a.config);
  const auto events = generate_catalog(static_cast<std::size_t>(a.events), a.params, a.seed, cfg.grid);
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir.string());
  std::ostringstream ev, obs;
  write_catalog(events, ev, obs);
  atomic_write_text(dir / "events.csv", ev.str());
  atomic_write_text(dir / "observations.csv", obs.str());
  std::size_t n_obs = 0;
  for (const auto& e : events) n_obs += e.observations.size();
  out << "wrote " << events.size() << " events and " << n_obs << " observations to " << dir.string() << "\n";
  return kOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  bool dry_run = false;
  std::size_t threads = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto cfg = config_or_default(a.config);
  const auto events = usable_events(cfg, a.data, out);
  const auto split = split_dataset(events, cfg.data.train_fraction, cfg.data.split_seed);
  out << "split: " << split.train.size() << " train / " << split.test.size() << " test (seed "
      << cfg.data.split_seed << ")\n";
  if (a.dry_run) {
    out << "dry run: configuration and data are valid\n";
    return kOk;
  }
  if (a.out.empty()) throw UsageError("train: --out is required unless --dry-run is given");

  const auto exec = make_executor(a.threads);
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.metadata.train_events = split.train.size();
  ckpt.metadata.test_events = split.test.size();

  ckpt.classifier = make_classifier<float>(cfg.features, cfg.grid, random::derive_seed(cfg.training.seed, 0));
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto log = [&](const char* what) {
    return [&out, &seconds, what](std::size_t epoch, double loss) {
      out << what << " epoch " << epoch + 1 << " loss " << text::format_real(loss) << " ("
          << std::lround(seconds()) << " s)\n"
          << std::flush;
    };
  };
  ckpt.metadata.classifier_losses =
      train_classifier(split.train, ckpt.classifier, cfg.features, cfg.grid, cfg.training, exec,
                       log("classifier"))
          .epoch_losses;
  ckpt.regressor = make_regressor<float>(cfg.features, cfg.model, cfg.grid,
                                         random::derive_seed(cfg.training.seed, 1));
  ckpt.metadata.regressor_losses =
      train_regressor(split.train, ckpt.regressor, cfg.features, cfg.grid, cfg.training, exec,
                      log("regressor"))
          .epoch_losses;
  save_checkpoint(a.out, ckpt);
  out << "wrote checkpoint " << a.out << "\n";
  return kOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string json_out;
  std::size_t threads = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.ckpt);
  const auto& cfg = ckpt.config;
  const auto events = usable_events(cfg, a.data, out);
  std::vector<HypocenterEvent> selected;
  if (a.split == "all") {
    selected = events;
  } else {
    auto split = split_dataset(events, cfg.data.train_fraction, cfg.data.split_seed);
    selected = a.split == "train" ? std::move(split.train) : std::move(split.test);
  }
  if (selected.empty()) throw ValidationError("eval: no events in split '" + a.split + "'");

  const auto exec = make_executor(a.threads);
  std::vector<Grid> regression, classification, hybrid;
  std::vector<IntensityGrid> observed;
  for (const auto& ev : selected) {
    observed.push_back(rasterize(ev, cfg.grid));
    Grid reg = regressor_predict(ev, ckpt.regressor, cfg.features, cfg.grid, exec);
    Grid felt = binarize_felt(classifier_predict(ev, ckpt.classifier, cfg.features, cfg.grid, exec),
                              cfg.hybrid.felt_threshold);
    hybrid.push_back(hybrid_combine(reg, felt, cfg.hybrid.alpha));
    Grid cls(felt.n_cells);
    for (std::size_t i = 0; i < cls.size(); ++i) cls.values[i] = kCatalogFloor * felt.values[i];
    classification.push_back(std::move(cls));
    regression.push_back(std::move(reg));
  }

  const auto reg_report = evaluate(regression, observed);
  const auto cls_report = evaluate(classification, observed);
  const auto hyb_report = evaluate(hybrid, observed);
  out << "events evaluated: " << selected.size() << " (split " << a.split << ")\n";
  out << report_summary("Regression", reg_report) << "\n";
  out << report_summary("Classification (*)", cls_report) << "\n";
  out << report_summary("Regression + Classification", hyb_report) << "\n";
  out << "(*) classifier intensity is 0.5 * felt label, so its MSE and r are indicative only\n";

  nlohmann::json j = {
      {"split", a.split},
      {"events", selected.size()},
      {"regression", nlohmann::json::parse(report_json(reg_report))},
      {"classification", nlohmann::json::parse(report_json(cls_report))},
      {"hybrid", nlohmann::json::parse(report_json(hyb_report))},
  };
  j["classification"]["caveat"] = "intensity taken as 0.5 * felt label";
  const std::string text = canonical_json(j);
  out << text;
  if (!a.json_out.empty()) atomic_write_text(a.json_out, text);
  return kOk;
}

// --- predict / render --------------------------------------------------------

struct PredictArgs {
  std::string ckpt;
  double lat = 0, lon = 0, depth = 0, mag = 0;
  std::string out;
  std::size_t threads = 0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.ckpt);
  const auto& cfg = ckpt.config;
  HypocenterEvent ev;
  ev.event_id = "predict";
  ev.lat_deg = a.lat;
  ev.lon_deg = a.lon;
  ev.depth_km = a.depth;
  ev.magnitude = a.mag;
  if (!cfg.grid.contains(a.lat, a.lon)) {
    throw OutOfBoundsError("epicenter (" + text::format_real(a.lat) + ", " + text::format_real(a.lon) +
                           ") is outside the grid");
  }
  const auto grid = hybrid_predict(ev, ckpt.regressor, ckpt.classifier, cfg.hybrid, cfg.features,
                                   cfg.grid, make_executor(a.threads));
  atomic_write_text(a.out, grid_to_csv(grid));
  out << "wrote " << grid.n_cells << "x" << grid.n_cells << " grid to " << a.out << "\n";
  return kOk;
}

struct RenderArgs {
  std::string grid;
  std::string out;
  bool classes = false;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
  std::ifstream in(a.grid);
  if (!in) throw ValidationError("cannot open grid " + a.grid);
  const auto grid = grid_from_csv(in, a.grid);
  const auto pgm = render_pgm(grid, a.classes);
  atomic_write(a.out, std::span<const char>(pgm));
  out << "wrote " << a.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seismic intensity distribution predictor"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default run configuration and exit");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic catalog");
  synth_cmd->add_option("--events", synth.events, "Number of events")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--config", synth.config, "Run config (grid section is used)");
  synth_cmd->add_option("--noise-sd", synth.params.noise_sd, "Noise standard deviation");
  synth_cmd->add_option("--stations", synth.params.station_density, "Stations in the network");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train classifier and regressor");
  train_cmd->add_option("--config", train.config, "Run config JSON (defaults if omitted)");
  train_cmd->add_option("--data", train.data, "Directory with events.csv and observations.csv")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint path");
  train_cmd->add_flag("--dry-run", train.dry_run, "Validate config and data only");
  train_cmd->add_option("--threads", train.threads, "Worker threads (0 = all)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", eval.ckpt, "Checkpoint path")->required();
  eval_cmd->add_option("--data", eval.data, "Catalog directory")->required();
  eval_cmd->add_option("--split", eval.split, "test, train or all")
      ->check(CLI::IsMember({"test", "train", "all"}));
  eval_cmd->add_option("--json-out", eval.json_out, "Also write the JSON report here");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = all)");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict one intensity map");
  predict_cmd->add_option("--ckpt", predict.ckpt, "Checkpoint path")->required();
  predict_cmd->add_option("--lat", predict.lat, "Epicenter latitude (deg N)")->required();
  predict_cmd->add_option("--lon", predict.lon, "Epicenter longitude (deg E)")->required();
  predict_cmd->add_option("--depth", predict.depth, "Depth (km)")->required();
  predict_cmd->add_option("--mag", predict.mag, "JMA magnitude")->required();
  predict_cmd->add_option("--out", predict.out, "Output grid CSV")->required();
  predict_cmd->add_option("--threads", predict.threads, "Worker threads (0 = all)");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render a grid CSV as a PGM image");
  render_cmd->add_option("--grid", render.grid, "Grid CSV")->required();
  render_cmd->add_option("--out", render.out, "Output PGM")->required();
  render_cmd->add_flag("--classes", render.classes, "Shade by JMA class instead of intensity");

  std::vector<std::string> argv_store{"seisint"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (print_config) {
      out << canonical_json(to_json(RunConfig{}));
      return kOk;
    }
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (predict_cmd->parsed()) return cmd_predict(predict, out);
    if (render_cmd->parsed()) return cmd_render(render, out);
    err << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace seisint::cli
