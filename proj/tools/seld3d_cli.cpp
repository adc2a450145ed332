#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seld3d/augment.hpp"
#include "seld3d/codec.hpp"
#include "seld3d/errors.hpp"
#include "seld3d/features.hpp"
#include "seld3d/keyvalue.hpp"
#include "seld3d/metrics.hpp"
#include "seld3d/scenegen.hpp"
#include "seld3d/tensor_store.hpp"
#include "seld3d/threading.hpp"
#include "seld3d/toynet.hpp"
#include "seld3d/training.hpp"

namespace fs = std::filesystem;
using namespace seld3d;

namespace {

std::string clip_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%03zu", i);
  return buf;
}

struct SimulateArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t n_clips = 20;
  int n_classes = 3;
  std::size_t n_events = 4;
  double duration_s = 10.0;
  bool diffuse_noise = false;
};

int cmd_simulate(const SimulateArgs& a) {
  fs::create_directories(a.out);
  SceneGenConfig gen;
  gen.n_classes = a.n_classes;
  gen.n_events = a.n_events;
  gen.duration_s = a.duration_s;
  gen.diffuse_noise = a.diffuse_noise;

  std::vector<std::uint64_t> clip_seeds(a.n_clips);
  std::mt19937_64 root(a.seed);
  for (auto& s : clip_seeds) s = root();

  parallel_for(a.n_clips, [&](std::size_t i) {
    const SceneSpec spec = random_scene(clip_seeds[i], gen);
    const std::string stem = clip_stem(i);
    save_scene_spec(fs::path(a.out) / (stem + "_scene.txt"), spec);
    save_foa_wav(fs::path(a.out) / (stem + ".wav"), render_audio(spec));
    tensor_store::save(fs::path(a.out) / (stem + "_visual.tnsr"), render_visual(spec));
    write_label_csv(fs::path(a.out) / (stem + "_labels.csv"), render_labels(spec));
  });

  KeyValueFile manifest;
  manifest.set_uint64("seed", a.seed);
  manifest.set_int("n_clips", static_cast<long long>(a.n_clips));
  manifest.set_int("n_classes", a.n_classes);
  manifest.set_double("duration_s", a.duration_s);
  for (std::size_t i = 0; i < a.n_clips; ++i) {
    manifest.set("clip" + std::to_string(i), clip_stem(i));
  }
  manifest.save(fs::path(a.out) / "manifest.txt");
  std::printf("wrote %zu clips to %s\n", a.n_clips, a.out.c_str());
  return 0;
}

struct FeaturesArgs {
  std::string in, out;
  int n_mels = 64;
};

int cmd_features(const FeaturesArgs& a) {
  MelConfig mel;
  mel.n_mels = a.n_mels;
  const FoaClip clip = load_foa_wav(a.in);
  const TensorD feats = compute_audio_features(clip, StftConfig{}, mel);
  tensor_store::save(a.out, feats);
  std::printf("features %zux%zux%zu -> %s\n", feats.dim(0), feats.dim(1), feats.dim(2),
              a.out.c_str());
  return 0;
}

struct AugmentArgs {
  std::string in, labels, visual, frame, out;
  int transform = 0;
};

int cmd_augment(const AugmentArgs& a) {
  const SpatialTransform t = canonical_transform(a.transform);
  fs::create_directories(a.out);
  const std::string suffix = "_t" + std::to_string(a.transform);

  const FoaClip clip = load_foa_wav(a.in);
  const fs::path in_path(a.in);
  save_foa_wav(fs::path(a.out) / (in_path.stem().string() + suffix + ".wav"),
               acs_audio(clip, t));
  if (!a.labels.empty()) {
    const fs::path p(a.labels);
    write_label_csv(fs::path(a.out) / (p.stem().string() + suffix + ".csv"),
                    acs_labels(read_label_csv(a.labels), t));
  }
  if (!a.visual.empty()) {
    const fs::path p(a.visual);
    tensor_store::save(fs::path(a.out) / (p.stem().string() + suffix + ".tnsr"),
                       avps_visual_features(tensor_store::load_as<double>(a.visual), t));
  }
  if (!a.frame.empty()) {
    const fs::path p(a.frame);
    write_ppm(fs::path(a.out) / (p.stem().string() + suffix + ".ppm"),
              avps_frame(read_ppm(a.frame), t));
  }
  std::printf("applied transform %d\n", a.transform);
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int epochs = -1;
  double sed_threshold = -1.0;
};

std::array<int, 4> parse_widths(const std::string& s) {
  std::array<int, 4> widths{};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    std::size_t next = s.find(',', pos);
    const std::string tok = s.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      widths[i] = std::stoi(tok);
    } catch (const std::exception&) {
      throw ConfigError("widths must be four comma-separated integers: " + s);
    }
    if (next == std::string::npos && i < 3) {
      throw ConfigError("widths must have four entries: " + s);
    }
    pos = next + 1;
  }
  return widths;
}

std::vector<ClipSample> load_dataset(const fs::path& data_dir, int n_classes,
                                     const MelConfig& mel) {
  const KeyValueFile manifest = KeyValueFile::parse_file(data_dir / "manifest.txt");
  const auto n_clips = static_cast<std::size_t>(manifest.get_int("n_clips"));
  std::vector<ClipSample> clips(n_clips);
  parallel_for(n_clips, [&](std::size_t i) {
    const std::string stem = manifest.get("clip" + std::to_string(i));
    ClipSample& s = clips[i];
    const FoaClip clip = load_foa_wav(data_dir / (stem + ".wav"));
    s.audio_feats = compute_audio_features(clip, StftConfig{}, mel);
    s.visual_feats = tensor_store::load_as<double>(data_dir / (stem + "_visual.tnsr"));
    s.labels = read_label_csv(data_dir / (stem + "_labels.csv"));
    encode_labels(s.labels, s.visual_feats.dim(0), n_classes, s.activity, s.targets);
  });
  return clips;
}

int cmd_train(const TrainArgs& a) {
  const KeyValueFile cfg_file = KeyValueFile::parse_file(a.config);

  ToyNetConfig net_cfg;
  net_cfg.n_classes = static_cast<int>(cfg_file.get_int_or("n_classes", 3));
  net_cfg.stage_channels = parse_widths(cfg_file.get_or("widths", "8,8,8,8"));
  net_cfg.n_mels = static_cast<int>(cfg_file.get_int_or("n_mels", 64));
  net_cfg.attention_dim = static_cast<int>(cfg_file.get_int_or("attention_dim", 16));
  net_cfg.context_width = static_cast<int>(cfg_file.get_int_or("context_width", 32));
  net_cfg.head_hidden = static_cast<int>(cfg_file.get_int_or("head_hidden", 32));
  net_cfg.use_attention = cfg_file.get_bool_or("use_attention", true);
  net_cfg.seed = a.seed_set ? a.seed : cfg_file.get_uint64("seed");

  TrainConfig train_cfg;
  train_cfg.epochs = a.epochs > 0 ? a.epochs
                                  : static_cast<int>(cfg_file.get_int_or("epochs", 200));
  train_cfg.peak_lr = cfg_file.get_double_or("peak_lr", 5e-4);
  const double sed_threshold =
      a.sed_threshold >= 0.0 ? a.sed_threshold
                             : cfg_file.get_double_or("sed_threshold", 0.5);

  MelConfig mel;
  mel.n_mels = net_cfg.n_mels;
  const fs::path data_dir(cfg_file.get("data_dir"));
  const std::vector<ClipSample> clips =
      load_dataset(data_dir, net_cfg.n_classes, mel);

  ToyNet net = make_toynet(net_cfg);
  const std::vector<StepLog> log = train_on_clips(net, clips, train_cfg);

  fs::create_directories(a.out);
  std::ofstream log_file(fs::path(a.out) / "train_log.csv");
  log_file << "step,lr,total,sed,sce\n";
  for (const StepLog& l : log) {
    log_file << l.step << ',' << format_double(l.lr) << ','
             << format_double(l.loss.total) << ',' << format_double(l.loss.sed_loss)
             << ',' << format_double(l.loss.sce_loss) << '\n';
  }
  log_file.close();

  save_checkpoint(fs::path(a.out) / "checkpoint", net);

  // Training-set predictions and scores; frame indices get a per-clip offset
  // so every clip lands in one CSV.
  LabelSequence all_pred, all_ref;
  SeldEvaluator eval(static_cast<std::size_t>(net_cfg.n_classes));
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::size_t offset = i * clips[i].visual_feats.dim(0);
    LabelSequence pred = predict_labels(net, clips[i].audio_feats,
                                        clips[i].visual_feats, sed_threshold);
    eval.add_labels(pred, clips[i].labels);
    for (FrameEvents f : pred) {
      f.frame_index += offset;
      all_pred.push_back(std::move(f));
    }
    for (FrameEvents f : clips[i].labels) {
      f.frame_index += offset;
      all_ref.push_back(std::move(f));
    }
  }
  write_label_csv(fs::path(a.out) / "predictions.csv", all_pred);
  write_label_csv(fs::path(a.out) / "references.csv", all_ref);

  const SeldScores scores = eval.scores();
  std::ofstream report(fs::path(a.out) / "report.txt");
  report << format_score_report(scores);
  report.close();
  std::ofstream report_csv(fs::path(a.out) / "report.csv");
  report_csv << format_score_csv(scores);
  report_csv.close();

  char doae[32] = "none";
  char rde[32] = "none";
  if (scores.doae_deg) std::snprintf(doae, sizeof(doae), "%.2f", *scores.doae_deg);
  if (scores.rde) std::snprintf(rde, sizeof(rde), "%.3f", *scores.rde);
  std::printf("F20/1=%.3f DOAE=%s RDE=%s final_loss=%.6f\n", scores.f, doae, rde,
              log.empty() ? 0.0 : log.back().loss.total);
  return 0;
}

struct EvalArgs {
  std::string pred, ref, out;
};

int cmd_eval(const EvalArgs& a) {
  const LabelSequence pred = read_label_csv(a.pred);
  const LabelSequence ref = read_label_csv(a.ref);
  const SeldScores scores = evaluate_labels(pred, ref);

  char doae[32] = "none";
  char rde[32] = "none";
  if (scores.doae_deg) std::snprintf(doae, sizeof(doae), "%.2f", *scores.doae_deg);
  if (scores.rde) std::snprintf(rde, sizeof(rde), "%.3f", *scores.rde);
  std::printf("F20/1=%.3f DOAE=%s RDE=%s\n", scores.f, doae, rde);

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    std::ofstream report(fs::path(a.out) / "report.txt");
    report << format_score_report(scores);
    std::ofstream csv(fs::path(a.out) / "report.csv");
    csv << format_score_csv(scores);
  }
  return 0;
}

struct CodecArgs {
  std::size_t frames = 1000;
  std::uint64_t seed = 0;
  int n_classes = 13;
};

int cmd_codec(const CodecArgs& a) {
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> az(-180.0, 180.0);
  std::uniform_real_distribution<double> el(-90.0, 90.0);
  std::uniform_real_distribution<double> dist(0.1, 10.0);
  std::uniform_int_distribution<int> count(0, std::min(a.n_classes, 3));

  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < a.frames; ++i) {
    FrameEvents frame;
    frame.frame_index = i;
    const int n = count(rng);
    for (int e = 0; e < n; ++e) {
      LabeledEvent ev;
      ev.class_id = (e * 7 + static_cast<int>(rng() % 3)) % a.n_classes;
      ev.direction = {wrap_azimuth_deg(az(rng)), el(rng)};
      ev.distance_m = dist(rng);
      bool dup = false;
      for (const LabeledEvent& prev : frame.entries) dup |= prev.class_id == ev.class_id;
      if (!dup) frame.entries.push_back(ev);
    }
    const EncodedFrame enc = encode(frame, static_cast<std::size_t>(a.n_classes));
    ModelFrameOutput out;
    out.sed = enc.activity;
    out.sce = enc.targets;
    const FrameEvents dec = decode(out, frame.frame_index);

    if (dec.entries.size() != frame.entries.size()) {
      ++mismatches;
      continue;
    }
    auto sorted = frame.entries;
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledEvent& x, const LabeledEvent& y) {
                return x.class_id < y.class_id;
              });
    for (std::size_t e = 0; e < sorted.size(); ++e) {
      const double ang = angular_distance_deg(sph_to_cart(sorted[e].direction),
                                              sph_to_cart(dec.entries[e].direction));
      const double rel = std::abs(sorted[e].distance_m - dec.entries[e].distance_m) /
                         sorted[e].distance_m;
      if (sorted[e].class_id != dec.entries[e].class_id || ang > 1e-9 || rel > 1e-12) {
        ++mismatches;
      }
    }
  }
  std::printf("codec round-trip: %zu frames, %zu mismatches\n", a.frames, mismatches);
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale 3D sound event localization and detection toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--seed", sim.seed, "generator seed")->required();
  simulate->add_option("--clips", sim.n_clips, "number of clips");
  simulate->add_option("--classes", sim.n_classes, "number of classes");
  simulate->add_option("--events", sim.n_events, "events per clip");
  simulate->add_option("--duration", sim.duration_s, "clip length in seconds");
  simulate->add_flag("--noise", sim.diffuse_noise, "add diffuse background noise");

  FeaturesArgs feat;
  CLI::App* features = app.add_subcommand("features", "audio features from a FOA wav");
  features->add_option("--in", feat.in, "input 4-channel wav")->required();
  features->add_option("--out", feat.out, "output tensor file")->required();
  features->add_option("--mels", feat.n_mels, "mel band count");

  AugmentArgs aug;
  CLI::App* augment = app.add_subcommand("augment", "apply a spatial transform");
  augment->add_option("--in", aug.in, "input 4-channel wav")->required();
  augment->add_option("--transform", aug.transform, "canonical transform id 0-7")
      ->required();
  augment->add_option("--out", aug.out, "output directory")->required();
  augment->add_option("--labels", aug.labels, "label csv to transform");
  augment->add_option("--visual", aug.visual, "visual feature tensor to transform");
  augment->add_option("--frame", aug.frame, "equirectangular ppm to transform");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "train on a simulated dataset");
  train->add_option("--config", tr.config, "key=value run config")->required();
  train->add_option("--out", tr.out, "output directory")->required();
  auto* seed_opt = train->add_option("--seed", tr.seed, "override config seed");
  train->add_option("--epochs", tr.epochs, "override config epochs");
  train->add_option("--sed-threshold", tr.sed_threshold, "override decode threshold");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against references");
  eval_cmd->add_option("--pred", ev.pred, "prediction csv")->required();
  eval_cmd->add_option("--ref", ev.ref, "reference csv")->required();
  eval_cmd->add_option("--out", ev.out, "report output directory");

  CodecArgs cd;
  CLI::App* codec_cmd = app.add_subcommand("codec", "output codec round-trip check");
  codec_cmd->add_option("--frames", cd.frames, "random frames to test");
  codec_cmd->add_option("--seed", cd.seed, "rng seed");
  codec_cmd->add_option("--classes", cd.n_classes, "class count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*features) return cmd_features(feat);
    if (*augment) return cmd_augment(aug);
    if (*train) {
      tr.seed_set = seed_opt->count() > 0;
      return cmd_train(tr);
    }
    if (*eval_cmd) return cmd_eval(ev);
    if (*codec_cmd) return cmd_codec(cd);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
