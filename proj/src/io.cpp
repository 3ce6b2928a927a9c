#include "memdex/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "memdex/error.hpp"

namespace memdex::io {

namespace fs = std::filesystem;

namespace {

struct LineReader {
  explicit LineReader(const fs::path& p) : path(p.string()), in(p) {
    if (!in) fail(ErrorCode::kMissingFile, "cannot open " + path);
  }

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    return true;
  }

  [[noreturn]] void error(ErrorCode code, const std::string& msg) const {
    fail(code, path + ":" + std::to_string(line_no) + ": " + msg);
  }

  std::string path;
  std::ifstream in;
  std::size_t line_no = 0;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double parse_real(const LineReader& r, std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    r.error(ErrorCode::kParse, "malformed number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) r.error(ErrorCode::kNonFinite, "non-finite value '" + std::string(tok) + "'");
  return v;
}

std::size_t parse_count(const LineReader& r, std::string_view tok) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    r.error(ErrorCode::kParse, "malformed count '" + std::string(tok) + "'");
  }
  return v;
}

constexpr std::string_view kManifestHeader =
    "subject_id,family_id,group_label,keypoint_file,vector_file";
constexpr std::string_view kScoreHeader = "query_id,candidate_id,shallow,deep,fused,valid";
constexpr std::string_view kRocHeader = "threshold,fpr,tpr";

std::string keypoint_file_name(const std::string& subject_id) {
  return "keypoints/" + subject_id + ".kp";
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kMissingFile, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::kMissingFile, "failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<Keypoint> read_keypoints(const fs::path& path, std::size_t d_kp) {
  LineReader r(path);
  std::string line;
  if (!r.next(line)) r.error(ErrorCode::kParse, "empty keypoint file");
  const auto head = split_ws(line);
  if (head.size() != 3 || head[0] != "KEYPOINTS") {
    r.error(ErrorCode::kParse, "expected 'KEYPOINTS <count> <D_kp>'");
  }
  const std::size_t count = parse_count(r, head[1]);
  const std::size_t dim = parse_count(r, head[2]);
  if (dim != d_kp) {
    r.error(ErrorCode::kDimensionMismatch, "file declares D_kp=" + std::to_string(dim) +
                                               ", manifest declares " + std::to_string(d_kp));
  }
  std::vector<Keypoint> kps;
  kps.reserve(count);
  while (r.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 4 + d_kp) {
      r.error(ErrorCode::kDimensionMismatch, "keypoint line has " + std::to_string(tok.size() - std::min<std::size_t>(tok.size(), 4)) +
                                                 " descriptor values, expected " + std::to_string(d_kp));
    }
    Keypoint kp;
    for (int i = 0; i < 3; ++i) kp.position[i] = parse_real(r, tok[i]);
    kp.scale = parse_real(r, tok[3]);
    if (!(kp.scale > 0.0)) r.error(ErrorCode::kParse, "keypoint scale must be positive");
    kp.descriptor.resize(d_kp);
    for (std::size_t d = 0; d < d_kp; ++d) kp.descriptor[d] = parse_real(r, tok[4 + d]);
    kps.push_back(std::move(kp));
  }
  if (kps.size() != count) {
    r.error(ErrorCode::kParse, "header declares " + std::to_string(count) + " keypoints, found " +
                                   std::to_string(kps.size()));
  }
  return kps;
}

std::string format_keypoints(std::span<const Keypoint> kps, std::size_t d_kp) {
  std::string out = "KEYPOINTS " + std::to_string(kps.size()) + " " + std::to_string(d_kp) + "\n";
  for (const Keypoint& kp : kps) {
    for (double x : kp.position) out += format_real(x) + " ";
    out += format_real(kp.scale);
    for (double d : kp.descriptor) out += " " + format_real(d);
    out += "\n";
  }
  return out;
}

VectorFile read_vectors(const fs::path& path) {
  LineReader r(path);
  std::string line;
  if (!r.next(line)) r.error(ErrorCode::kParse, "empty vector file");
  const auto head = split_ws(line);
  if ((head.size() != 3 && head.size() != 4) || head[0] != "VECTORS" ||
      (head.size() == 4 && head[3] != "binary")) {
    r.error(ErrorCode::kParse, "expected 'VECTORS <count> <D_dv> [binary]'");
  }
  VectorFile vf;
  const std::size_t count = parse_count(r, head[1]);
  vf.dim = parse_count(r, head[2]);
  vf.binary = head.size() == 4;
  std::set<std::string, std::less<>> seen;
  while (r.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 1 + vf.dim) {
      r.error(ErrorCode::kDimensionMismatch,
              "vector for '" + std::string(tok[0]) + "' has " + std::to_string(tok.size() - 1) +
                  " values, expected " + std::to_string(vf.dim));
    }
    std::string id(tok[0]);
    if (!seen.insert(id).second) r.error(ErrorCode::kDuplicateId, "duplicate vector for " + id);
    std::vector<double> values(vf.dim);
    for (std::size_t d = 0; d < vf.dim; ++d) {
      if (vf.binary && tok[1 + d] != "0" && tok[1 + d] != "1") {
        r.error(ErrorCode::kParse, "binary vector for " + id + " has token '" +
                                       std::string(tok[1 + d]) + "'");
      }
      values[d] = parse_real(r, tok[1 + d]);
    }
    vf.rows.emplace_back(std::move(id), DeepVector::from_values(std::move(values), vf.binary));
  }
  if (vf.rows.size() != count) {
    r.error(ErrorCode::kParse, "header declares " + std::to_string(count) + " vectors, found " +
                                   std::to_string(vf.rows.size()));
  }
  return vf;
}

std::string format_vectors(const VectorFile& vf) {
  std::string out = "VECTORS " + std::to_string(vf.rows.size()) + " " + std::to_string(vf.dim) +
                    (vf.binary ? " binary" : "") + "\n";
  for (const auto& [id, v] : vf.rows) {
    out += id;
    if (v.is_binary()) {
      for (std::size_t i = 0; i < v.dim(); ++i) out += v.bit(i) ? " 1" : " 0";
    } else {
      for (double x : v.values()) out += " " + format_real(x);
    }
    out += "\n";
  }
  return out;
}

Dataset load_dataset(const fs::path& manifest_path) {
  LineReader r(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::size_t d_kp = kDefaultKeypointDim;
  std::size_t d_dv = 0;
  std::string line;
  bool header = false;
  while (!header && r.next(line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto tok = split_ws(std::string_view(line).substr(1));
      for (auto t : tok) {
        if (t.starts_with("d_kp=")) d_kp = parse_count(r, t.substr(5));
        else if (t.starts_with("d_dv=")) d_dv = parse_count(r, t.substr(5));
      }
      continue;
    }
    if (line != kManifestHeader) {
      r.error(ErrorCode::kParse, "expected manifest header '" + std::string(kManifestHeader) + "'");
    }
    header = true;
  }
  if (!header) r.error(ErrorCode::kParse, "manifest has no header");
  if (d_kp == 0) r.error(ErrorCode::kParse, "d_kp must be positive");

  std::map<fs::path, VectorFile> vector_files;
  std::vector<SubjectRecord> subjects;
  std::set<std::string, std::less<>> ids;
  while (r.next(line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) r.error(ErrorCode::kParse, "expected 5 comma-separated fields");
    SubjectRecord s;
    s.subject_id = std::string(f[0]);
    s.instance_label = std::string(f[1]);
    s.group_label = std::string(f[2]);
    if (s.subject_id.empty() || s.instance_label.empty() || s.group_label.empty()) {
      r.error(ErrorCode::kParse, "subject_id, family_id and group_label must be non-empty");
    }
    if (!ids.insert(s.subject_id).second) {
      r.error(ErrorCode::kDuplicateId, "duplicate subject_id " + s.subject_id);
    }
    try {
      if (!f[3].empty()) s.keypoints = read_keypoints(base / fs::path(std::string(f[3])), d_kp);
      if (!f[4].empty()) {
        const fs::path vp = base / fs::path(std::string(f[4]));
        auto it = vector_files.find(vp);
        if (it == vector_files.end()) it = vector_files.emplace(vp, read_vectors(vp)).first;
        const VectorFile& vf = it->second;
        if (d_dv == 0) d_dv = vf.dim;
        if (vf.dim != d_dv) {
          fail(ErrorCode::kDimensionMismatch, vp.string() + ": declares D_dv=" +
                                                  std::to_string(vf.dim) + ", expected " +
                                                  std::to_string(d_dv));
        }
        for (const auto& [id, v] : vf.rows) {
          if (id == s.subject_id) s.deep_vector = v;
        }
        if (!s.deep_vector) {
          fail(ErrorCode::kMissingModality, vp.string() + ": no vector for subject " + s.subject_id);
        }
      }
    } catch (const Error& e) {
      fail(e.code(), "subject " + s.subject_id + " (" + r.path + ":" + std::to_string(r.line_no) +
                         "): " + e.what());
    }
    subjects.push_back(std::move(s));
  }
  return Dataset(std::move(subjects), d_kp, d_dv);
}

fs::path write_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir / "keypoints");
  std::string manifest = "# d_kp=" + std::to_string(ds.d_kp()) + "\n";
  if (ds.d_dv() > 0) manifest += "# d_dv=" + std::to_string(ds.d_dv()) + "\n";
  manifest += std::string(kManifestHeader) + "\n";

  VectorFile vf;
  vf.dim = ds.d_dv();
  for (const auto& s : ds.subjects()) {
    if (s.deep_vector) {
      vf.binary = s.deep_vector->is_binary();
      vf.rows.emplace_back(s.subject_id, *s.deep_vector);
    }
  }
  for (const auto& s : ds.subjects()) {
    const std::string kp_file = keypoint_file_name(s.subject_id);
    write_file_atomic(dir / kp_file, format_keypoints(s.keypoints, ds.d_kp()));
    manifest += s.subject_id + "," + s.instance_label + "," + s.group_label + "," + kp_file + "," +
                (s.deep_vector ? "vectors.txt" : "") + "\n";
  }
  if (!vf.rows.empty()) write_file_atomic(dir / "vectors.txt", format_vectors(vf));
  const fs::path manifest_path = dir / "manifest.csv";
  write_file_atomic(manifest_path, manifest);
  return manifest_path;
}

ThresholdTable read_thresholds(const fs::path& path) {
  LineReader r(path);
  std::string line;
  if (!r.next(line)) r.error(ErrorCode::kParse, "empty threshold file");
  const auto head = split_ws(line);
  if (head.size() != 2 || head[0] != "THRESHOLDS") r.error(ErrorCode::kParse, "expected 'THRESHOLDS <D_dv>'");
  const std::size_t dim = parse_count(r, head[1]);
  ThresholdTable t;
  t.taus.resize(dim);
  t.gains.resize(dim);
  t.degenerate.resize(dim);
  std::vector<bool> seen(dim, false);
  std::size_t rows = 0;
  while (r.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 4) r.error(ErrorCode::kParse, "expected '<index> <tau> <gain_bits> <0|1>'");
    const std::size_t i = parse_count(r, tok[0]);
    if (i >= dim || seen[i]) r.error(ErrorCode::kParse, "bad or repeated element index");
    seen[i] = true;
    t.taus[i] = parse_real(r, tok[1]);
    t.gains[i] = parse_real(r, tok[2]);
    if (tok[3] != "0" && tok[3] != "1") r.error(ErrorCode::kParse, "degenerate flag must be 0 or 1");
    t.degenerate[i] = tok[3] == "1";
    if (t.gains[i] < 0.0 || t.gains[i] > 1.0) r.error(ErrorCode::kParse, "gain outside [0, 1] bits");
    ++rows;
  }
  if (rows != dim) r.error(ErrorCode::kParse, "expected " + std::to_string(dim) + " elements");
  return t;
}

std::string format_thresholds(const ThresholdTable& table) {
  std::string out = "THRESHOLDS " + std::to_string(table.dim()) + "\n";
  for (std::size_t i = 0; i < table.dim(); ++i) {
    out += std::to_string(i) + " " + format_real(table.taus[i]) + " " +
           format_real(table.gains[i]) + " " + (table.degenerate[i] ? "1" : "0") + "\n";
  }
  return out;
}

std::string format_score_matrix(const ScoreMatrix& sm) {
  std::string out = "# protocol=" + std::string(to_string(sm.protocol)) +
                    " alpha=" + format_real(sm.alpha) + "\n";
  out += std::string(kScoreHeader) + "\n";
  const FusionParams p{sm.alpha};
  for (std::size_t r = 0; r < sm.rows(); ++r) {
    for (std::size_t c = 0; c < sm.cols(); ++c) {
      const std::size_t i = sm.at(r, c);
      const bool valid = sm.valid[i] != 0;
      out += sm.query_ids[r] + "," + sm.candidate_ids[c] + ",";
      out += (valid && sm.has_shallow ? format_real(sm.shallow[i]) : "") + ",";
      out += (valid && sm.has_deep ? format_real(sm.deep[i]) : "") + ",";
      out += (valid && sm.has_shallow && sm.has_deep ? format_real(fuse(sm.shallow[i], sm.deep[i], p))
                                                     : "");
      out += valid ? ",1\n" : ",0\n";
    }
  }
  return out;
}

ScoreMatrix read_score_matrix(const fs::path& path) {
  LineReader r(path);
  ScoreMatrix sm;
  std::string line;
  bool header = false;
  while (!header && r.next(line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (auto t : split_ws(std::string_view(line).substr(1))) {
        if (t == "protocol=family") sm.protocol = Protocol::kFamily;
        else if (t == "protocol=group") sm.protocol = Protocol::kGroup;
        else if (t.starts_with("alpha=")) sm.alpha = parse_real(r, t.substr(6));
      }
      continue;
    }
    if (line != kScoreHeader) r.error(ErrorCode::kParse, "expected header '" + std::string(kScoreHeader) + "'");
    header = true;
  }
  if (!header) r.error(ErrorCode::kParse, "score matrix has no header");

  struct Cell {
    std::size_t row, col;
    std::optional<double> shallow, deep;
    bool valid;
  };
  std::vector<Cell> cells;
  std::map<std::string, std::size_t> row_of, col_of;
  while (r.next(line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) r.error(ErrorCode::kParse, "expected 6 comma-separated fields");
    Cell cell{};
    const std::string q(f[0]), c(f[1]);
    auto [rit, rnew] = row_of.emplace(q, sm.query_ids.size());
    if (rnew) sm.query_ids.push_back(q);
    auto [cit, cnew] = col_of.emplace(c, sm.candidate_ids.size());
    if (cnew) sm.candidate_ids.push_back(c);
    cell.row = rit->second;
    cell.col = cit->second;
    if (f[5] != "0" && f[5] != "1") r.error(ErrorCode::kParse, "valid flag must be 0 or 1");
    cell.valid = f[5] == "1";
    if (!f[2].empty()) cell.shallow = parse_real(r, f[2]);
    if (!f[3].empty()) cell.deep = parse_real(r, f[3]);
    if (cell.valid) {
      sm.has_shallow = sm.has_shallow || cell.shallow.has_value();
      sm.has_deep = sm.has_deep || cell.deep.has_value();
    }
    cells.push_back(cell);
  }
  const std::size_t n = sm.rows() * sm.cols();
  if (cells.size() != n) r.error(ErrorCode::kParse, "score matrix is not a complete query x candidate grid");
  sm.shallow.assign(n, 0.0);
  sm.deep.assign(n, 0.0);
  sm.valid.assign(n, 0);
  std::vector<bool> filled(n, false);
  for (const Cell& c : cells) {
    const std::size_t i = sm.at(c.row, c.col);
    if (filled[i]) r.error(ErrorCode::kParse, "duplicate cell " + sm.query_ids[c.row] + "," + sm.candidate_ids[c.col]);
    filled[i] = true;
    sm.valid[i] = c.valid;
    if (c.valid && ((sm.has_shallow && !c.shallow) || (sm.has_deep && !c.deep))) {
      r.error(ErrorCode::kMissingModality,
              "cell " + sm.query_ids[c.row] + "," + sm.candidate_ids[c.col] + " lacks a score");
    }
    sm.shallow[i] = c.shallow.value_or(0.0);
    sm.deep[i] = c.deep.value_or(0.0);
  }
  return sm;
}

std::string format_roc(const RocCurve& roc) {
  std::string out = "# auc=" + format_real(roc.auc) + " pos=" + std::to_string(roc.positives) +
                    " neg=" + std::to_string(roc.negatives) + "\n";
  out += std::string(kRocHeader) + "\n";
  for (const RocPoint& p : roc.points) {
    out += (std::isinf(p.threshold) ? std::string("inf") : format_real(p.threshold)) + "," +
           format_real(p.fpr) + "," + format_real(p.tpr) + "\n";
  }
  return out;
}

RocCurve read_roc(const fs::path& path) {
  LineReader r(path);
  RocCurve roc;
  std::string line;
  if (!r.next(line) || !line.starts_with("# ")) r.error(ErrorCode::kParse, "expected '# auc=...' line");
  for (auto t : split_ws(std::string_view(line).substr(2))) {
    if (t.starts_with("auc=")) roc.auc = parse_real(r, t.substr(4));
    else if (t.starts_with("pos=")) roc.positives = parse_count(r, t.substr(4));
    else if (t.starts_with("neg=")) roc.negatives = parse_count(r, t.substr(4));
  }
  if (!r.next(line) || line != kRocHeader) r.error(ErrorCode::kParse, "expected ROC header");
  while (r.next(line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) r.error(ErrorCode::kParse, "expected 3 comma-separated fields");
    const double threshold =
        f[0] == "inf" ? std::numeric_limits<double>::infinity() : parse_real(r, f[0]);
    roc.points.push_back({threshold, parse_real(r, f[1]), parse_real(r, f[2])});
  }
  return roc;
}

}  // namespace memdex::io
