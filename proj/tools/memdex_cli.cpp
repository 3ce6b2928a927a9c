// memdex command-line front end.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "memdex/ann_index.hpp"
#include "memdex/binarizer.hpp"
#include "memdex/error.hpp"
#include "memdex/fusion.hpp"
#include "memdex/io.hpp"
#include "memdex/parallel.hpp"
#include "memdex/synth.hpp"

using namespace memdex;

namespace {

ScoreMode parse_mode(const std::string& s) {
  if (s == "shallow") return ScoreMode::kShallow;
  if (s == "deep") return ScoreMode::kDeep;
  if (s == "fused") return ScoreMode::kFused;
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + s + "' (shallow|deep|fused)");
}

Protocol parse_protocol(const std::string& s) {
  if (s == "family") return Protocol::kFamily;
  if (s == "group") return Protocol::kGroup;
  fail(ErrorCode::kInvalidArgument, "unknown protocol '" + s + "' (family|group)");
}

LabelKind parse_label(const std::string& s) {
  if (s == "subject") return LabelKind::kSubject;
  if (s == "family") return LabelKind::kInstance;
  if (s == "group") return LabelKind::kGroup;
  fail(ErrorCode::kInvalidArgument, "unknown label '" + s + "' (subject|family|group)");
}

std::size_t parse_k_trunc(const std::string& s) {
  if (s == "all") return kAllNeighbors;
  std::size_t pos = 0;
  long long v = -1;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
  }
  if (pos != s.size() || v < 1) fail(ErrorCode::kInvalidArgument, "--k-trunc must be >= 1 or 'all'");
  return static_cast<std::size_t>(v);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_file_atomic(out, text);
  }
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct ScoreOpts {
  std::string manifest, out = "-", mode = "fused", protocol = "family", k_trunc = "64";
  std::string thresholds, index, mu = "all";
  double alpha = 0.5;
  bool binarized = false, exact = false;
};

ScoringConfig scoring_config(const ScoreOpts& o) {
  ScoringConfig cfg;
  cfg.mode = parse_mode(o.mode);
  cfg.fusion.alpha = o.alpha;
  cfg.shallow.k_trunc = parse_k_trunc(o.k_trunc);
  if (o.exact) {
    cfg.index_mode = SearchMode::kExact;
    cfg.shallow.dnn_mode = SearchMode::kExact;
  }
  if (o.mu == "class") cfg.deep.mu_mode = MuMode::kPerClass;
  else if (o.mu != "all") fail(ErrorCode::kInvalidArgument, "--mu must be all or class");
  cfg.binarized = o.binarized;
  if (!o.thresholds.empty()) cfg.thresholds = io::read_thresholds(o.thresholds);
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"memdex: keypoint + deep-vector likelihood scoring and evaluation"};
  app.require_subcommand(1);

  // synth
  SynthConfig sc;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus (manifest.csv, keypoints/, vectors.txt)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", sc.seed);
  synth->add_option("--families", sc.n_families);
  synth->add_option("--members-min", sc.members_min);
  synth->add_option("--members-max", sc.members_max);
  synth->add_option("--keypoints", sc.keypoints_per_subject);
  synth->add_option("--d-kp", sc.d_kp);
  synth->add_option("--d-dv", sc.d_dv);
  synth->add_option("--groups", sc.n_groups);
  synth->add_option("--family-signal", sc.family_signal);
  synth->add_option("--group-signal", sc.group_signal);
  synth->add_option("--complementarity", sc.modality_complementarity);

  // index
  std::string index_manifest, index_out;
  bool index_exact = false;
  ApproxParams ap;
  auto* index = app.add_subcommand("index", "Build and save a keypoint index over a dataset");
  index->add_option("--manifest", index_manifest)->required()->check(CLI::ExistingFile);
  index->add_option("--out", index_out)->required();
  index->add_flag("--exact", index_exact, "Linear-scan index (no forest)");
  index->add_option("--trees", ap.trees);
  index->add_option("--leaf-size", ap.leaf_size);
  index->add_option("--checks", ap.max_checked_leaves, "Max leaves checked per query");
  index->add_option("--seed", ap.seed);

  // binarize fit | apply
  auto* binarize = app.add_subcommand("binarize", "Fit or apply per-element thresholds");
  binarize->require_subcommand(1);
  std::string bf_manifest, bf_out, bf_label = "family";
  auto* bfit = binarize->add_subcommand("fit", "Fit thresholds on a dataset's deep vectors");
  bfit->add_option("--manifest", bf_manifest)->required()->check(CLI::ExistingFile);
  bfit->add_option("--out", bf_out)->required();
  bfit->add_option("--label", bf_label, "Class label: subject|family|group");
  std::string ba_manifest, ba_thresholds, ba_out;
  auto* bapply = binarize->add_subcommand("apply", "Write a copy of a dataset with binarized vectors");
  bapply->add_option("--manifest", ba_manifest)->required()->check(CLI::ExistingFile);
  bapply->add_option("--thresholds", ba_thresholds)->required()->check(CLI::ExistingFile);
  bapply->add_option("--out", ba_out, "Output directory")->required();

  // split
  std::string sp_manifest, sp_cal, sp_eval;
  double sp_fraction = 0.5;
  std::uint64_t sp_seed = 1;
  auto* split = app.add_subcommand("split", "Split whole families into calibration and evaluation sets");
  split->add_option("--manifest", sp_manifest)->required()->check(CLI::ExistingFile);
  split->add_option("--calibration", sp_cal, "Output directory")->required();
  split->add_option("--evaluation", sp_eval, "Output directory")->required();
  split->add_option("--fraction", sp_fraction);
  split->add_option("--seed", sp_seed);

  // score
  ScoreOpts so;
  auto* score = app.add_subcommand("score", "All-pairs score matrix");
  score->add_option("--manifest", so.manifest)->required()->check(CLI::ExistingFile);
  score->add_option("--out", so.out, "Score matrix CSV (default stdout)");
  score->add_option("--mode", so.mode, "shallow|deep|fused");
  score->add_option("--protocol", so.protocol, "family|group");
  score->add_option("--alpha", so.alpha, "Shallow weight in the fused score")->check(CLI::Range(0.0, 1.0));
  score->add_option("--k-trunc", so.k_trunc, "Neighbors per keypoint, or 'all'");
  score->add_option("--mu", so.mu, "Deep bandwidth: all|class");
  score->add_flag("--exact", so.exact, "Exact neighbor search");
  score->add_flag("--binarized", so.binarized, "Binarize deep vectors before scoring");
  score->add_option("--thresholds", so.thresholds, "Threshold file")->check(CLI::ExistingFile);
  score->add_option("--index", so.index, "Prebuilt keypoint index")->check(CLI::ExistingFile);

  // eval
  std::string ev_manifest, ev_scores, ev_out, ev_mode = "fused";
  std::optional<double> ev_alpha;
  bool ev_directed = false;
  auto* eval = app.add_subcommand("eval", "ROC curve and AUC of a score matrix");
  eval->add_option("--manifest", ev_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--scores", ev_scores)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", ev_out, "ROC CSV");
  eval->add_option("--mode", ev_mode, "shallow|deep|fused");
  eval->add_option("--alpha", ev_alpha, "Override the matrix's fusion weight")->check(CLI::Range(0.0, 1.0));
  eval->add_flag("--directed", ev_directed, "Family protocol: one sample per ordered pair");

  // alpha-sweep
  std::string sw_manifest, sw_scores, sw_out;
  double sw_step = 0.05;
  auto* sweep = app.add_subcommand("alpha-sweep", "AUC over a grid of fusion weights");
  sweep->add_option("--manifest", sw_manifest)->required()->check(CLI::ExistingFile);
  sweep->add_option("--scores", sw_scores)->required()->check(CLI::ExistingFile);
  sweep->add_option("--step", sw_step);
  sweep->add_option("--out", sw_out, "alpha,auc CSV");

  // diag-independence
  std::string di_scores;
  auto* diag = app.add_subcommand("diag-independence", "Correlation of shallow and deep scores");
  diag->add_option("--scores", di_scores)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  apply_worker_limit();

  if (*synth) {
    const auto manifest = io::write_dataset(generate_synthetic(sc), synth_out);
    std::cerr << "wrote " << manifest.string() << "\n";
  } else if (*index) {
    const Dataset ds = io::load_dataset(index_manifest);
    const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints,
                                            index_exact ? SearchMode::kExact : SearchMode::kApproximate, ap);
    idx.save(index_out);
    std::cerr << "indexed " << idx.size() << " keypoints, " << idx.owners().size() << " subjects\n";
  } else if (*bfit) {
    const Dataset ds = io::load_dataset(bf_manifest);
    const auto table = fit_thresholds(DatasetView(ds), parse_label(bf_label));
    io::write_file_atomic(bf_out, io::format_thresholds(table));
    std::size_t degenerate = 0;
    for (auto d : table.degenerate) degenerate += d;
    std::cerr << "fitted " << table.dim() << " thresholds (" << degenerate << " degenerate)\n";
  } else if (*bapply) {
    const Dataset ds = io::load_dataset(ba_manifest);
    const auto manifest = io::write_dataset(binarize_dataset(ds, io::read_thresholds(ba_thresholds)), ba_out);
    std::cerr << "wrote " << manifest.string() << "\n";
  } else if (*split) {
    const Dataset ds = io::load_dataset(sp_manifest);
    const auto parts = split_calibration(ds, sp_fraction, sp_seed);
    io::write_dataset(parts.calibration, sp_cal);
    io::write_dataset(parts.evaluation, sp_eval);
    std::cerr << "calibration " << parts.calibration.size() << " subjects, evaluation "
              << parts.evaluation.size() << " subjects\n";
  } else if (*score) {
    const Dataset ds = io::load_dataset(so.manifest);
    const ScoringConfig cfg = scoring_config(so);
    std::optional<DescriptorIndex> idx;
    if (!so.index.empty()) idx = DescriptorIndex::load(so.index);
    const auto sm = all_pairs_scores(ds, cfg, parse_protocol(so.protocol), idx ? &*idx : nullptr);
    emit(so.out, io::format_score_matrix(sm));
  } else if (*eval) {
    const Dataset ds = io::load_dataset(ev_manifest);
    const auto sm = io::read_score_matrix(ev_scores);
    const FusionParams p{ev_alpha.value_or(sm.alpha)};
    const ScoreMode mode = parse_mode(ev_mode);
    const RocCurve roc = sm.protocol == Protocol::kFamily
                             ? family_roc(sm, ds, mode, p,
                                          ev_directed ? PairScoring::kDirected : PairScoring::kSymmetrized)
                             : group_roc(sm, ds, mode, p);
    if (!ev_out.empty()) io::write_file_atomic(ev_out, io::format_roc(roc));
    std::cout << "auc=" << io::format_real(roc.auc) << " pos=" << roc.positives
              << " neg=" << roc.negatives << "\n";
  } else if (*sweep) {
    const Dataset ds = io::load_dataset(sw_manifest);
    const auto result = alpha_sweep(io::read_score_matrix(sw_scores), ds, sw_step);
    std::ostringstream csv;
    csv << "alpha,auc\n";
    for (const auto& [a, auc] : result.points) csv << io::format_real(a) << ',' << io::format_real(auc) << '\n';
    if (!sw_out.empty()) io::write_file_atomic(sw_out, csv.str());
    std::cout << "best_alpha=" << fixed(result.best_alpha, 4) << " best_auc=" << fixed(result.best_auc) << "\n";
  } else if (*diag) {
    const double r = independence_diagnostic(io::read_score_matrix(di_scores));
    std::cout << "pearson_r=" << fixed(r) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "memdex: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "memdex: error: " << e.what() << "\n";
    return 2;
  }
}
