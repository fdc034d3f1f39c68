#pragma once

// `semaug` command-line front end. Every subcommand is file-in/file-out so
// the stages can be chained and an external summarizer or feature
// extractor can slot in between them.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "semaug.hpp"

namespace semaug::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

// Config-file reader for `--config something.json`. Top-level keys are
// global options; nested objects address subcommands, e.g.
// {"seed": 7, "train": {"epochs": 20}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("invalid JSON config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("JSON config must be an object");
    return flatten(j, "", {});
  }

 private:
  static std::vector<CLI::ConfigItem> flatten(const nlohmann::json& j, const std::string& name,
                                              std::vector<std::string> prefix) {
    std::vector<CLI::ConfigItem> out;
    if (j.is_object()) {
      if (!name.empty()) prefix.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = flatten(*it, it.key(), prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    auto scalar = [&](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
      if (v.is_number()) return v.dump();
      throw CLI::ConversionError("unsupported value for config key " + name);
    };
    if (j.is_array()) {
      for (const auto& v : j) item.inputs.push_back(scalar(v));
    } else {
      item.inputs.push_back(scalar(j));
    }
    out.push_back(std::move(item));
    return out;
  }
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool force = false;
  std::string log_level = "info";
};

// I/O helpers.
inline void require_input(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("input not found: " + p.string());
}

class OutputGuard {
 public:
  explicit OutputGuard(bool force) : force_(force) {}

  // Refuses to clobber an existing file unless --force was given.
  void claim(const fs::path& p) const {
    if (!force_ && fs::exists(p))
      throw ValidationError("output " + p.string() + " exists; pass --force to overwrite");
    if (p.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(p.parent_path(), ec);
      if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    }
  }

  void write(const fs::path& p, const std::string& text) const {
    claim(p);
    detail::write_file(p, text);
  }

 private:
  bool force_;
};

inline std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

inline nlohmann::json read_json_file(const fs::path& p) {
  require_input(p);
  try {
    return nlohmann::json::parse(detail::read_text_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

inline DatasetSplit load_split(const fs::path& p) {
  const auto j = read_json_file(p);
  DatasetSplit s;
  try {
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(p.string() + ": bad split file: " + e.what());
  }
  return s;
}

inline std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

inline FrameSelectionSpec frame_selection(const std::string& mode, std::size_t k) {
  if (mode == "middle") return {FrameSelection::middle, 3};
  if (mode == "uniform") return {FrameSelection::uniform, k};
  throw ValidationError("unknown frame sampling '" + mode + "'");
}

// Maps {"video_id", <field>} JSON lines to a per-video string.
inline std::map<std::string, std::string> load_video_texts(const fs::path& p, std::initializer_list<const char*> fields) {
  require_input(p);
  std::map<std::string, std::string> out;
  detail::for_each_json_line(p, [&](std::size_t line_no, const nlohmann::json& j) {
    const std::string where = p.string() + ":" + std::to_string(line_no);
    const auto id = detail::required_field<std::string>(j, "video_id", where);
    for (const char* f : fields) {
      if (j.contains(f)) {
        if (!out.emplace(id, detail::required_field<std::string>(j, f, where)).second)
          throw ValidationError(where + ": duplicate entry for video " + id);
        return;
      }
    }
    throw ParseError(where + ": missing field \"" + std::string(*fields.begin()) + "\"");
  });
  return out;
}

// Concatenated gold annotations per video, in segment order.
inline std::map<std::string, std::string> reference_from_manifest(const std::vector<SegmentRecord>& records) {
  std::map<std::string, std::vector<const SegmentRecord*>> by_video;
  for (const auto& r : records) by_video[r.video_id].push_back(&r);
  std::map<std::string, std::string> out;
  for (auto& [vid, segs] : by_video) {
    std::stable_sort(segs.begin(), segs.end(),
                     [](const SegmentRecord* a, const SegmentRecord* b) { return a->start_sec < b->start_sec; });
    std::string text;
    for (const auto* s : segs) text += (text.empty() ? "" : ". ") + s->annotation;
    out[vid] = text;
  }
  return out;
}

class App {
 public:
  explicit App(std::ostream& out) : out_(out) { build(); }

  int run(std::vector<std::string> args) {
    // CLI11 wants argv order reversed when given a vector.
    std::reverse(args.begin(), args.end());
    select_config_format(args);
    try {
      app_.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
      out_ << app_.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app_.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      spdlog::error("{}", e.what());
      std::cerr << app_.help();
      return kValidation;
    }
    try {
      spdlog::set_level(spdlog::level::from_str(global_.log_level));
      action_();
      return kOk;
    } catch (const IoError& e) {
      spdlog::error("{}", e.what());
      return kIo;
    } catch (const Error& e) {
      spdlog::error("{}", e.what());
      return kValidation;
    } catch (const std::filesystem::filesystem_error& e) {
      spdlog::error("{}", e.what());
      return kIo;
    }
  }

 private:
  void select_config_format(const std::vector<std::string>& reversed) {
    for (std::size_t i = 0; i < reversed.size(); ++i) {
      const std::string& a = reversed[i];
      std::string value;
      if (a.rfind("--config=", 0) == 0) value = a.substr(9);
      else if (a == "--config" && i > 0) value = reversed[i - 1];
      if (!value.empty() && fs::path(value).extension() == ".json") app_.config_formatter(std::make_shared<JsonConfig>());
    }
  }

  OutputGuard guard() const { return OutputGuard(global_.force); }

  void build() {
    app_.description("Concept retrieval and semantic-augmentation toolkit for instructional video segments");
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.set_config("--config", "", "TOML or JSON file with option values");
    app_.add_option("--seed", global_.seed, "Seed for every stochastic step");
    app_.add_flag("--force", global_.force, "Overwrite existing outputs");
    app_.add_option("--log-level", global_.log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    add_split();
    add_gen_synth();
    add_sample_frames();
    add_batch_plan();
    add_train();
    add_eval_retrieval();
    add_prompts();
    add_score();
    add_report();
  }

  // ---- split ----
  struct SplitOpts {
    std::string manifest, out;
    double train = 0.67, val = 0.08, test = 0.25;
  } split_;

  void add_split() {
    auto* c = app_.add_subcommand("split", "Partition videos into train/val/test");
    c->add_option("--manifest", split_.manifest, "Segment manifest (JSON Lines)")->required();
    c->add_option("--out", split_.out, "Output split file (JSON)")->required();
    c->add_option("--train-frac", split_.train);
    c->add_option("--val-frac", split_.val);
    c->add_option("--test-frac", split_.test);
    c->callback([this] { action_ = [this] { run_split(); }; });
  }

  void run_split() {
    require_input(split_.manifest);
    const auto records = load_manifest(split_.manifest);
    SplitSpec spec{split_.train, split_.val, split_.test, global_.seed};
    const auto s = split_dataset(records, spec);
    for (const auto& w : s.warnings) spdlog::warn("{}", w);
    ojson j;
    j["seed"] = global_.seed;
    j["fractions"] = {spec.train_frac, spec.val_frac, spec.test_frac};
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    guard().write(split_.out, dump_json(j));
    spdlog::info("split {} videos: train {} / val {} / test {}", s.train.size() + s.val.size() + s.test.size(),
                 s.train.size(), s.val.size(), s.test.size());
  }

  // ---- gen-synth ----
  std::string synth_dir_;
  SynthConfig synth_;

  void add_gen_synth() {
    auto* c = app_.add_subcommand("gen-synth", "Write a synthetic concept-plus-noise corpus");
    c->add_option("--out-dir", synth_dir_, "Output directory")->required();
    c->add_option("--concepts", synth_.concepts);
    c->add_option("--dim", synth_.dim);
    c->add_option("--segments-per-concept", synth_.segments_per_concept);
    c->add_option("--segments-per-video", synth_.segments_per_video);
    c->add_option("--concept-norm", synth_.concept_norm);
    c->add_option("--frame-noise", synth_.frame_noise);
    c->add_option("--text-noise", synth_.text_noise);
    c->add_option("--min-frames", synth_.min_frames);
    c->add_option("--max-frames", synth_.max_frames);
    c->add_flag("--all-frames", synth_.all_frames, "Emit every frame, not only the middle three");
    c->callback([this] { action_ = [this] { run_gen_synth(); }; });
  }

  void run_gen_synth() {
    SynthConfig cfg = synth_;
    cfg.seed = global_.seed;
    const auto corpus = generate_synthetic_corpus(cfg);
    const fs::path dir(synth_dir_);
    const auto g = guard();
    for (const char* name : {"manifest.jsonl", "transcripts.jsonl", "frames.semb", "frames.semb.idx.jsonl",
                             "texts.semb", "texts.semb.idx.jsonl"})
      g.claim(dir / name);
    write_manifest(corpus.records, dir / "manifest.jsonl");
    write_transcripts(corpus.transcripts, dir / "transcripts.jsonl");
    write_embedding_table(corpus.frames, dir / "frames.semb");
    write_embedding_table(corpus.texts, dir / "texts.semb");
    spdlog::info("wrote {} segments over {} videos to {}", corpus.records.size(), corpus.transcripts.size(),
                 dir.string());
  }

  // ---- sample-frames ----
  struct SampleOpts {
    std::string manifest, out, sampling = "middle";
    std::size_t k = 3;
  } sample_;

  void add_sample_frames() {
    auto* c = app_.add_subcommand("sample-frames", "List the frame indices to embed for every segment");
    c->add_option("--manifest", sample_.manifest)->required();
    c->add_option("--out", sample_.out)->required();
    c->add_option("--sampling", sample_.sampling, "middle|uniform")->check(CLI::IsMember({"middle", "uniform"}));
    c->add_option("--k", sample_.k, "Frames per segment for uniform sampling");
    c->callback([this] { action_ = [this] { run_sample_frames(); }; });
  }

  void run_sample_frames() {
    require_input(sample_.manifest);
    const auto records = load_manifest(sample_.manifest);
    const auto sel = frame_selection(sample_.sampling, sample_.k);
    std::string text;
    for (const auto& r : records) {
      ojson j;
      j["video_id"] = r.video_id;
      j["segment_id"] = r.segment_id;
      j["frames"] = sel.indices(static_cast<std::size_t>(r.frame_count));
      text += j.dump() + "\n";
    }
    guard().write(sample_.out, text);
  }

  // ---- shared training/eval inputs ----
  struct CorpusOpts {
    std::string manifest, frames, texts, split, sampling = "middle";
    std::size_t k = 3;
  };

  static void add_corpus_options(CLI::App* c, CorpusOpts& o, bool texts) {
    c->add_option("--manifest", o.manifest, "Segment manifest (JSON Lines)")->required();
    c->add_option("--frames", o.frames, "Frame embedding table (SEMB)")->required();
    if (texts) c->add_option("--texts", o.texts, "Annotation-text embedding table (SEMB)")->required();
    c->add_option("--split", o.split, "Split file from `split`")->required();
    c->add_option("--sampling", o.sampling, "middle|uniform")->check(CLI::IsMember({"middle", "uniform"}));
    c->add_option("--k", o.k, "Frames per segment for uniform sampling");
  }

  struct LoadedCorpus {
    std::vector<SegmentRecord> records;
    EmbeddingTable frames, texts;
    DatasetSplit split;
  };

  static LoadedCorpus load_corpus(const CorpusOpts& o, bool texts) {
    for (const auto& p : {o.manifest, o.frames, o.split}) require_input(p);
    LoadedCorpus c;
    c.records = load_manifest(o.manifest);
    c.frames = read_embedding_table(o.frames);
    if (texts) {
      require_input(o.texts);
      c.texts = read_embedding_table(o.texts);
    }
    c.split = load_split(o.split);
    return c;
  }

  // ---- batch-plan ----
  struct PlanOpts {
    CorpusOpts corpus;
    std::string subset = "train", out, batching = "kmeans";
    std::size_t batch_size = 16, clusters = 0, restarts = 10, epoch = 0;
  } plan_;

  void add_batch_plan() {
    auto* c = app_.add_subcommand("batch-plan", "Write the batch plan training would use for one epoch");
    add_corpus_options(c, plan_.corpus, false);
    c->add_option("--subset", plan_.subset, "train|val|test")->check(CLI::IsMember({"train", "val", "test"}));
    c->add_option("--batching", plan_.batching)->check(CLI::IsMember({"kmeans", "random"}));
    c->add_option("--batch-size", plan_.batch_size);
    c->add_option("--clusters", plan_.clusters, "k-means cluster count (0: batch size)");
    c->add_option("--restarts", plan_.restarts, "k-means restarts");
    c->add_option("--epoch", plan_.epoch, "Epoch whose plan to emit");
    c->add_option("--out", plan_.out, "Output plan (JSON Lines)")->required();
    c->callback([this] { action_ = [this] { run_batch_plan(); }; });
  }

  void run_batch_plan() {
    const auto corpus = load_corpus(plan_.corpus, false);
    const auto videos = as_set(corpus.split.subset(plan_.subset));
    std::vector<std::size_t> manifest_rows;
    std::vector<SegmentRecord> subset;
    for (std::size_t i = 0; i < corpus.records.size(); ++i)
      if (videos.contains(corpus.records[i].video_id)) {
        manifest_rows.push_back(i);
        subset.push_back(corpus.records[i]);
      }
    if (subset.empty()) throw ValidationError("subset '" + plan_.subset + "' has no segments");
    // Frames only: reuse the frame table as a text stand-in.
    EmbeddingTable no_text;
    no_text.dim = corpus.frames.dim;
    no_text.rows.resize(static_cast<Eigen::Index>(subset.size()), static_cast<Eigen::Index>(no_text.dim));
    no_text.rows.setZero();
    for (const auto& r : subset) no_text.index.push_back({r.video_id, r.segment_id, kTextFrame});
    const auto samples = build_samples<double>(subset, corpus.frames, no_text, nullptr,
                                               frame_selection(plan_.corpus.sampling, plan_.corpus.k));
    const Matrix<double> temporal = temporal_features(samples);

    TrainConfig cfg;
    cfg.seed = global_.seed;
    cfg.batch_size = plan_.batch_size;
    cfg.clusters = plan_.clusters;
    cfg.kmeans_restarts = plan_.restarts;
    cfg.batching = parse_batching_mode(plan_.batching);
    const BatchPlanner planner(temporal, cfg);
    BatchPlan plan = planner.plan(plan_.epoch);
    const double diversity = plan_mean_pairwise_distance(temporal, plan);
    for (auto& b : plan.batches)
      for (auto& r : b.rows) r = manifest_rows[r];
    guard().write(plan_.out, plan.to_jsonl());
    out_ << "batches " << plan.batches.size() << " rows " << plan.row_count() << " mean_pairwise_distance "
         << diversity << "\n";
  }

  // ---- train ----
  struct TrainOpts {
    CorpusOpts corpus;
    std::string out_dir, batching = "kmeans", head = "perceiver";
    TrainConfig cfg;
  } train_;

  void add_train() {
    auto* c = app_.add_subcommand("train", "Train the image and text heads contrastively");
    add_corpus_options(c, train_.corpus, true);
    auto& cfg = train_.cfg;
    c->add_option("--out-dir", train_.out_dir, "Directory for model.ckpt and train_report.json")->required();
    c->add_option("--epochs", cfg.epochs);
    c->add_option("--lr", cfg.learning_rate);
    c->add_option("--batch-size", cfg.batch_size);
    c->add_option("--clusters", cfg.clusters, "k-means cluster count (0: batch size)");
    c->add_option("--restarts", cfg.kmeans_restarts, "k-means restarts");
    c->add_option("--temperature", cfg.temperature, "Initial softmax temperature");
    c->add_flag("--learn-temperature", cfg.temperature_learnable);
    c->add_option("--batching", train_.batching)->check(CLI::IsMember({"kmeans", "random"}));
    c->add_option("--head", train_.head)->check(CLI::IsMember({"perceiver", "learnable_pool", "frozen_mean"}));
    c->add_option("--latents", cfg.latents);
    c->add_option("--head-dim", cfg.head_dim, "Attention dim (0: input dim)");
    c->add_option("--embed-dim", cfg.embed_dim, "Shared embedding dim (0: text dim)");
    c->callback([this] { action_ = [this] { run_train(); }; });
  }

  void run_train() {
    const auto corpus = load_corpus(train_.corpus, true);
    TrainConfig cfg = train_.cfg;
    cfg.seed = global_.seed;
    cfg.batching = parse_batching_mode(train_.batching);
    cfg.mode = parse_head_mode(train_.head);
    const fs::path dir(train_.out_dir);
    const auto g = guard();
    g.claim(dir / "model.ckpt");
    g.claim(dir / "train_report.json");

    const auto sel = frame_selection(train_.corpus.sampling, train_.corpus.k);
    const auto train_videos = as_set(corpus.split.train);
    const auto val_videos = as_set(corpus.split.val);
    const auto train_samples = build_samples<double>(corpus.records, corpus.frames, corpus.texts, &train_videos, sel);
    const auto val_samples = build_samples<double>(corpus.records, corpus.frames, corpus.texts, &val_videos, sel);
    if (train_samples.empty()) throw ValidationError("training split has no segments");
    spdlog::info("training {} head on {} segments ({} validation)", to_string(cfg.mode), train_samples.size(),
                 val_samples.size());

    TrainResult result = train(train_samples, val_samples, cfg);
    result.report.checkpoint = "model.ckpt";
    save_checkpoint({result.model, cfg.seed, result.report.steps}, dir / "model.ckpt");
    detail::write_file(dir / "train_report.json", dump_json(result.report.to_json()));
    spdlog::info("loss {:.4f} -> {:.4f} over {} steps", result.report.epoch_loss.front(),
                 result.report.epoch_loss.back(), result.report.steps);
  }

  // ---- eval-retrieval ----
  struct EvalOpts {
    CorpusOpts corpus;
    std::string checkpoint, subset = "test", out, predictions;
  } eval_;

  void add_eval_retrieval() {
    auto* c = app_.add_subcommand("eval-retrieval", "Top-1/Top-3 concept retrieval on a split");
    add_corpus_options(c, eval_.corpus, true);
    c->add_option("--checkpoint", eval_.checkpoint, "Model checkpoint; omit for the frozen mean-pool baseline");
    c->add_option("--subset", eval_.subset, "train|val|test")->check(CLI::IsMember({"train", "val", "test"}));
    c->add_option("--out", eval_.out, "Retrieval result (JSON)")->required();
    c->add_option("--predictions", eval_.predictions, "Per-segment predicted concepts (JSON Lines)");
    c->callback([this] { action_ = [this] { run_eval(); }; });
  }

  void run_eval() {
    const auto corpus = load_corpus(eval_.corpus, true);
    const auto g = guard();
    g.claim(eval_.out);
    if (!eval_.predictions.empty()) g.claim(eval_.predictions);
    const auto videos = as_set(corpus.split.subset(eval_.subset));
    const auto samples = build_samples<double>(corpus.records, corpus.frames, corpus.texts, &videos,
                                               frame_selection(eval_.corpus.sampling, eval_.corpus.k));
    if (samples.empty()) throw ValidationError("subset '" + eval_.subset + "' has no segments");

    ContrastiveModel<double> model;
    std::string head;
    if (eval_.checkpoint.empty()) {
      HeadConfig img{corpus.frames.dim, 0, 0, 0, HeadMode::frozen_mean};
      HeadConfig txt{corpus.texts.dim, 0, 0, 0, HeadMode::frozen_mean};
      model = init_model<double>(img, txt, kDefaultTemperature, false, 0);
      head = "frozen_mean";
    } else {
      require_input(eval_.checkpoint);
      model = load_checkpoint(eval_.checkpoint).model;
      head = std::string(to_string(model.image.config.mode));
    }
    const auto ev = evaluate_concept_retrieval(model, samples);
    ojson j;
    j["subset"] = eval_.subset;
    j["head"] = head;
    j["top1"] = ev.result.top1;
    j["top3"] = ev.result.top3;
    j["query_count"] = ev.result.query_count;
    j["candidate_count"] = ev.result.candidate_count;
    detail::write_file(eval_.out, dump_json(j));
    if (!eval_.predictions.empty()) {
      std::string text;
      for (const auto& p : ev.predictions) {
        ojson pj;
        pj["video_id"] = p.video_id;
        pj["segment_id"] = p.segment_id;
        pj["start_sec"] = p.start_sec;
        pj["predicted"] = p.predicted;
        pj["annotation"] = p.annotation;
        text += pj.dump() + "\n";
      }
      detail::write_file(eval_.predictions, text);
    }
    out_ << "top1 " << ev.result.top1 << " top3 " << ev.result.top3 << " (" << ev.result.query_count
         << " queries, " << ev.result.candidate_count << " candidates)\n";
  }

  // ---- prompts ----
  struct PromptOpts {
    std::string transcripts, predictions, out;
    bool no_concepts = false;
  } prompt_;

  void add_prompts() {
    auto* c = app_.add_subcommand("prompts", "Build summarizer inputs from predicted concepts and transcripts");
    c->add_option("--transcripts", prompt_.transcripts, "Transcripts (JSON Lines)")->required();
    c->add_option("--predictions", prompt_.predictions, "Predictions from eval-retrieval")->required();
    c->add_option("--out", prompt_.out, "Prompts (JSON Lines)")->required();
    c->add_flag("--no-concepts", prompt_.no_concepts, "Transcript only (no augmentation)");
    c->callback([this] { action_ = [this] { run_prompts(); }; });
  }

  void run_prompts() {
    const auto transcripts = load_video_texts(prompt_.transcripts, {"transcript"});
    require_input(prompt_.predictions);
    std::vector<std::string> order;
    std::map<std::string, std::vector<TimedConcept>> concepts;
    detail::for_each_json_line(prompt_.predictions, [&](std::size_t line_no, const nlohmann::json& j) {
      const std::string where = prompt_.predictions + ":" + std::to_string(line_no);
      const auto vid = detail::required_field<std::string>(j, "video_id", where);
      if (!concepts.contains(vid)) order.push_back(vid);
      concepts[vid].push_back({detail::required_field<double>(j, "start_sec", where),
                               detail::required_field<std::string>(j, "predicted", where)});
    });
    std::string text;
    for (const auto& vid : order) {
      const auto it = transcripts.find(vid);
      if (it == transcripts.end()) throw ValidationError("no transcript for video " + vid);
      const auto in = assemble_augmented_input(vid, std::span<const TimedConcept>(concepts[vid]), it->second,
                                               !prompt_.no_concepts);
      for (const auto& w : in.warnings) spdlog::warn("{}", w);
      ojson j;
      j["video_id"] = vid;
      j["prompt"] = in.rendered;
      text += j.dump() + "\n";
    }
    guard().write(prompt_.out, text);
  }

  // ---- score ----
  struct ScoreOpts {
    std::string pred, ref, ref_manifest, out, table, label = "model";
  } score_;

  void add_score() {
    auto* c = app_.add_subcommand("score", "ROUGE-1/2/L of summaries against references");
    c->add_option("--pred", score_.pred, "Predicted summaries {video_id, summary} (JSON Lines)")->required();
    auto* ref = c->add_option("--ref", score_.ref, "Reference summaries {video_id, summary} (JSON Lines)");
    auto* man = c->add_option("--ref-manifest", score_.ref_manifest,
                              "Use each video's concatenated gold annotations as its reference");
    ref->excludes(man);
    c->add_option("--out", score_.out, "Score report (JSON)");
    c->add_option("--table", score_.table, "Also write the text table here");
    c->add_option("--label", score_.label, "Row label in the table");
    c->callback([this] { action_ = [this] { run_score(); }; });
  }

  void run_score() {
    // Prompt files are accepted as predictions (identity summarizer).
    const auto preds = load_video_texts(score_.pred, {"summary", "prompt"});
    std::map<std::string, std::string> refs;
    if (!score_.ref.empty()) {
      refs = load_video_texts(score_.ref, {"summary"});
    } else if (!score_.ref_manifest.empty()) {
      require_input(score_.ref_manifest);
      refs = reference_from_manifest(load_manifest(score_.ref_manifest));
    } else {
      throw ValidationError("score needs --ref or --ref-manifest");
    }
    std::vector<SummaryPair> pairs;
    for (const auto& [vid, text] : preds) {
      const auto it = refs.find(vid);
      if (it == refs.end()) throw ValidationError("no reference summary for video " + vid);
      pairs.push_back({text, it->second});
    }
    const auto corpus = score_summary_corpus(pairs);
    const std::string table = format_rouge_table({{score_.label, corpus}});
    const auto g = guard();
    if (!score_.out.empty()) g.write(score_.out, dump_json(corpus.to_json()));
    if (!score_.table.empty()) g.write(score_.table, table);
    out_ << table;
  }

  // ---- report ----
  struct ReportOpts {
    std::string train, retrieval, rouge, out;
  } report_;

  void add_report() {
    auto* c = app_.add_subcommand("report", "Summarize training, retrieval and ROUGE outputs as text");
    c->add_option("--train", report_.train, "train_report.json");
    c->add_option("--retrieval", report_.retrieval, "eval-retrieval output");
    c->add_option("--rouge", report_.rouge, "score output");
    c->add_option("--out", report_.out, "Write the report here instead of stdout");
    c->callback([this] { action_ = [this] { run_report(); }; });
  }

  void run_report() {
    if (report_.train.empty() && report_.retrieval.empty() && report_.rouge.empty())
      throw ValidationError("report needs at least one of --train, --retrieval, --rouge");
    std::ostringstream r;
    r.setf(std::ios::fixed);
    r.precision(4);
    if (!report_.train.empty()) {
      const auto j = read_json_file(report_.train);
      const auto loss = j.at("epoch_loss").get<std::vector<double>>();
      r << "training\n";
      r << "  head        " << j.at("config").at("mode").get<std::string>() << "\n";
      r << "  batching    " << j.at("config").at("batching").get<std::string>() << "\n";
      r << "  epochs      " << loss.size() << " (" << j.at("steps").get<std::uint64_t>() << " steps)\n";
      if (!loss.empty()) r << "  loss        " << loss.front() << " -> " << loss.back() << "\n";
      const auto top1 = j.at("val_top1").get<std::vector<double>>();
      const auto top3 = j.at("val_top3").get<std::vector<double>>();
      if (!top1.empty()) r << "  val top1/3  " << top1.back() << " / " << top3.back() << "\n";
    }
    if (!report_.retrieval.empty()) {
      const auto j = read_json_file(report_.retrieval);
      r << "retrieval (" << j.at("subset").get<std::string>() << ", " << j.at("head").get<std::string>() << ")\n";
      r << "  top1        " << j.at("top1").get<double>() << "\n";
      r << "  top3        " << j.at("top3").get<double>() << "\n";
      r << "  queries     " << j.at("query_count").get<std::size_t>() << ", candidates "
        << j.at("candidate_count").get<std::size_t>() << "\n";
    }
    if (!report_.rouge.empty()) {
      const auto j = read_json_file(report_.rouge);
      CorpusRouge c;
      c.r1.variant = RougeVariant::R1;
      c.r2.variant = RougeVariant::R2;
      c.rl.variant = RougeVariant::RL;
      auto get = [&](const char* key, RougeScore& s) {
        s.precision = j.at(key).at("p").get<double>();
        s.recall = j.at(key).at("r").get<double>();
        s.f1 = j.at(key).at("f").get<double>();
      };
      get("R1", c.r1);
      get("R2", c.r2);
      get("RL", c.rl);
      r << "rouge (" << j.at("pairs").get<std::size_t>() << " pairs)\n" << format_rouge_table({{"summary", c}});
    }
    if (report_.out.empty()) {
      out_ << r.str();
    } else {
      guard().write(report_.out, r.str());
    }
  }

  std::ostream& out_;
  CLI::App app_{"", "semaug"};
  GlobalOptions global_;
  std::function<void()> action_;
};

// Runs one command line (without the program name). Exit codes: 0 success,
// 1 validation or usage error, 2 I/O error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout) {
  App app(out);
  return app.run(args);
}

}  // namespace semaug::cli
