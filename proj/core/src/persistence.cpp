// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/persistence.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kggan/error.hpp"
#include "kggan/hash.hpp"

namespace kggan {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kDatasetMagic[4] = {'K', 'G', 'D', 'S'};
constexpr char kCheckpointMagic[4] = {'K', 'G', 'C', 'K'};

void ensure_parent(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  require(!ec, ErrorKind::kIo, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
}

std::string number(double x) { return fmt::format("{:.17g}", x); }

double parse_double(const std::string& token, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double x = std::stod(token, &used);
    if (used == token.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kIo, path.string() + ": malformed number '" + token + "'");
}

long long parse_int(const std::string& token, const fs::path& path) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(token, &used);
    if (used == token.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kIo, path.string() + ": malformed integer '" + token + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

// Non-comment, non-empty lines.
std::vector<std::string> data_lines(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  Reader(std::string_view bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  template <typename T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, std::size_t n) {
    require(n <= bytes_.size() - pos_, ErrorKind::kIo, path_.string() + ": truncated file");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

FlowerShape parse_shape(const std::string& text, const fs::path& path) {
  for (FlowerShape s : {FlowerShape::kDisk, FlowerShape::kRing, FlowerShape::kCross, FlowerShape::kPetals}) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorKind::kIo, path.string() + ": unknown shape '" + text + "'");
}

void put_tensor(Checkpoint& c, std::string name, const Tensor& t) { c.tensors.emplace_back(std::move(name), t); }

void copy_into(Tensor& dst, const Tensor& src, const std::string& name) {
  require(dst.shape() == src.shape(), ErrorKind::kDimension,
          "checkpoint tensor " + name + " has shape " + shape_string(src.shape()) + ", expected " +
              shape_string(dst.shape()));
  std::copy(src.data().begin(), src.data().end(), dst.data().begin());
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const fs::path& path) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const std::string& f : split(text, ',')) out.push_back(static_cast<std::size_t>(parse_int(f, path)));
  return out;
}

void put_optimizer(Checkpoint& c, const std::string& prefix, const OptimizerState& opt) {
  c.metadata[prefix + ".steps"] = std::to_string(opt.step_count);
  c.metadata[prefix + ".count"] = std::to_string(opt.first_moment.size());
  for (std::size_t i = 0; i < opt.first_moment.size(); ++i) {
    put_tensor(c, prefix + ".m" + std::to_string(i), Tensor::vector(opt.first_moment[i]));
    put_tensor(c, prefix + ".v" + std::to_string(i), Tensor::vector(opt.second_moment[i]));
  }
}

OptimizerState get_optimizer(const Checkpoint& c, const std::string& prefix, const AdamConfig& adam) {
  OptimizerState opt;
  opt.config = adam;
  opt.step_count = static_cast<std::uint64_t>(parse_int(c.meta(prefix + ".steps"), prefix));
  const auto count = static_cast<std::size_t>(parse_int(c.meta(prefix + ".count"), prefix));
  for (std::size_t i = 0; i < count; ++i) {
    opt.first_moment.push_back(c.tensor(prefix + ".m" + std::to_string(i)).storage());
    opt.second_moment.push_back(c.tensor(prefix + ".v" + std::to_string(i)).storage());
  }
  return opt;
}

}  // namespace

std::string ArtifactHeader::line() const {
  return fmt::format("# kggan {} config_hash={:016x} seed={}", kind, config_hash, seed);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorKind::kIo, "cannot read " + path.string());
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& contents) {
  ensure_parent(path);
  // Write to a sibling and rename so a crash never leaves a torn file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    require(out.good(), ErrorKind::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorKind::kIo, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// ---- dataset ---------------------------------------------------------------

void write_image_blob(const fs::path& path, std::span<const Sample> samples, std::size_t image_size) {
  Writer w;
  w.put_bytes(kDatasetMagic, 4);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(samples.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image_size));
  const std::size_t pixels = 3 * image_size * image_size;
  for (const Sample& s : samples) {
    require(s.image.size() == pixels, ErrorKind::kDimension, "image blob: sample has the wrong size");
    for (double x : s.image.data()) w.put<float>(static_cast<float>(x));
  }
  write_text_file(path, w.bytes());
}

std::vector<Tensor> read_image_blob(const fs::path& path, std::size_t& image_size) {
  const std::string bytes = read_text_file(path);
  Reader r(bytes, path);
  char magic[4];
  r.get_bytes(magic, 4);
  require(std::memcmp(magic, kDatasetMagic, 4) == 0, ErrorKind::kIo, path.string() + ": not an image blob");
  const auto version = r.get<std::uint32_t>();
  require(version == kDatasetVersion, ErrorKind::kIo,
          path.string() + ": unsupported blob version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  const auto side = r.get<std::uint32_t>();
  require(side > 0, ErrorKind::kIo, path.string() + ": zero image size");
  image_size = side;
  const std::size_t pixels = 3ULL * side * side;
  require(r.remaining() == count * pixels * sizeof(float), ErrorKind::kIo,
          path.string() + ": payload size does not match header");
  std::vector<Tensor> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t({3, side, side});
    for (std::size_t k = 0; k < pixels; ++k) t[k] = r.get<float>();
    images.push_back(std::move(t));
  }
  return images;
}

void write_descriptions(const fs::path& path, std::span<const CategorySpec> categories, const ArtifactHeader& header) {
  std::string out = header.line() + "\n";
  for (const CategorySpec& c : categories) {
    out += "#category " + std::to_string(c.id) + "\n";
    for (const std::string& d : c.descriptions) {
      require(d.find('\n') == std::string::npos && !d.empty() && d[0] != '#', ErrorKind::kContract,
              "description cannot be stored on one line: " + d);
      out += d + "\n";
    }
  }
  write_text_file(path, out);
}

std::map<int, std::vector<std::string>> read_descriptions(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::map<int, std::vector<std::string>> out;
  std::string line;
  const std::string marker = "#category ";
  int current = 0;
  bool have = false;
  while (std::getline(in, line)) {
    if (line.rfind(marker, 0) == 0) {
      current = static_cast<int>(parse_int(line.substr(marker.size()), path));
      out[current];
      have = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    require(have, ErrorKind::kIo, path.string() + ": description before any category marker");
    out[current].push_back(line);
  }
  return out;
}

void write_embeddings(const fs::path& path, const EmbeddingTable& embeddings, const ArtifactHeader& header) {
  std::string out = header.line() + "\n";
  for (const auto& [id, e] : embeddings) {
    out += std::to_string(id);
    for (double x : e.vector) out += " " + number(x);
    out += "\n";
  }
  write_text_file(path, out);
}

EmbeddingTable read_embeddings(const fs::path& path) {
  EmbeddingTable table;
  std::size_t dim = 0;
  for (const std::string& line : data_lines(path)) {
    const auto tokens = split_ws(line);
    require(tokens.size() >= 2, ErrorKind::kIo, path.string() + ": embedding row without values");
    const int id = static_cast<int>(parse_int(tokens[0], path));
    SemanticEmbedding e{id, {}};
    for (std::size_t i = 1; i < tokens.size(); ++i) e.vector.push_back(parse_double(tokens[i], path));
    if (dim == 0) dim = e.vector.size();
    require(e.vector.size() == dim, ErrorKind::kIo, path.string() + ": embedding rows differ in length");
    require(table.emplace(id, std::move(e)).second, ErrorKind::kIo,
            path.string() + ": duplicate category " + std::to_string(id));
  }
  return table;
}

void write_split(const fs::path& path, const SplitPlan& split, const ArtifactHeader& header) {
  std::string out = header.line() + "\nseed " + std::to_string(split.seed) + "\nseen";
  for (int id : split.seen_ids) out += " " + std::to_string(id);
  out += "\nunseen";
  for (int id : split.unseen_ids) out += " " + std::to_string(id);
  out += "\n";
  write_text_file(path, out);
}

SplitPlan read_split(const fs::path& path) {
  SplitPlan split;
  for (const std::string& line : data_lines(path)) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "seed") {
      require(tokens.size() == 2, ErrorKind::kIo, path.string() + ": malformed seed line");
      split.seed = static_cast<std::uint64_t>(std::stoull(tokens[1]));
      continue;
    }
    std::set<int>* target = tokens[0] == "seen" ? &split.seen_ids : tokens[0] == "unseen" ? &split.unseen_ids : nullptr;
    require(target != nullptr, ErrorKind::kIo, path.string() + ": unknown line '" + line + "'");
    for (std::size_t i = 1; i < tokens.size(); ++i) target->insert(static_cast<int>(parse_int(tokens[i], path)));
  }
  for (int id : split.seen_ids) {
    require(!split.unseen_ids.contains(id), ErrorKind::kIo,
            path.string() + ": category " + std::to_string(id) + " is both seen and unseen");
  }
  return split;
}

void write_dataset(const fs::path& dir, const Dataset& dataset, const ArtifactHeader& header) {
  write_image_blob(dir / "images.bin", dataset.samples, dataset.image_size);

  std::string manifest = header.line() + "\noffset,category_id\n";
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    manifest += std::to_string(i) + "," + std::to_string(dataset.samples[i].category_id) + "\n";
  }
  write_text_file(dir / "manifest.csv", manifest);

  std::string cats = header.line() + "\nid,r,g,b,shape,texture_freq\n";
  for (const CategorySpec& c : dataset.categories) {
    cats += fmt::format("{},{},{},{},{},{}\n", c.id, number(c.base_color[0]), number(c.base_color[1]),
                        number(c.base_color[2]), to_string(c.shape), number(c.texture_freq));
  }
  write_text_file(dir / "categories.csv", cats);
  write_descriptions(dir / "descriptions.txt", dataset.categories, header);
}

Dataset read_dataset(const fs::path& dir) {
  Dataset ds;
  const fs::path cats_path = dir / "categories.csv";
  const auto cat_lines = data_lines(cats_path);
  require(!cat_lines.empty() && cat_lines[0] == "id,r,g,b,shape,texture_freq", ErrorKind::kIo,
          cats_path.string() + ": missing column header");
  for (std::size_t i = 1; i < cat_lines.size(); ++i) {
    const auto f = split(cat_lines[i], ',');
    require(f.size() == 6, ErrorKind::kIo, cats_path.string() + ": expected 6 fields");
    CategorySpec c;
    c.id = static_cast<int>(parse_int(f[0], cats_path));
    c.base_color = {parse_double(f[1], cats_path), parse_double(f[2], cats_path), parse_double(f[3], cats_path)};
    c.shape = parse_shape(f[4], cats_path);
    c.texture_freq = parse_double(f[5], cats_path);
    ds.categories.push_back(std::move(c));
  }
  const auto descriptions = read_descriptions(dir / "descriptions.txt");
  for (CategorySpec& c : ds.categories) {
    auto it = descriptions.find(c.id);
    if (it != descriptions.end()) c.descriptions = it->second;
  }

  std::vector<Tensor> images = read_image_blob(dir / "images.bin", ds.image_size);
  const fs::path manifest_path = dir / "manifest.csv";
  const auto rows = data_lines(manifest_path);
  require(!rows.empty() && rows[0] == "offset,category_id", ErrorKind::kIo,
          manifest_path.string() + ": missing column header");
  require(rows.size() - 1 == images.size(), ErrorKind::kIo,
          manifest_path.string() + ": row count does not match images.bin");
  std::set<int> known;
  for (const CategorySpec& c : ds.categories) known.insert(c.id);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    require(f.size() == 2, ErrorKind::kIo, manifest_path.string() + ": expected 2 fields");
    const auto offset = static_cast<std::size_t>(parse_int(f[0], manifest_path));
    require(offset < images.size(), ErrorKind::kIo, manifest_path.string() + ": offset out of range");
    const int id = static_cast<int>(parse_int(f[1], manifest_path));
    require(known.contains(id), ErrorKind::kIo,
            manifest_path.string() + ": unknown category " + std::to_string(id));
    ds.samples.push_back(Sample{images[offset], id});
  }
  return ds;
}

// ---- checkpoints -----------------------------------------------------------

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  fail(ErrorKind::kIo, "checkpoint has no tensor '" + name + "'");
}

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = metadata.find(key);
  require(it != metadata.end(), ErrorKind::kIo, "checkpoint has no metadata key '" + key + "'");
  return it->second;
}

void write_checkpoint(const fs::path& path, const Checkpoint& c) {
  Writer w;
  w.put_bytes(kCheckpointMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.kind));
  w.put<std::uint32_t>(c.condition_mode);
  w.put<std::uint64_t>(c.config_hash);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  }
  std::string meta;
  for (const auto& [k, v] : c.metadata) {
    require(k.find_first_of("=\n") == std::string::npos && v.find('\n') == std::string::npos, ErrorKind::kContract,
            "checkpoint metadata entry '" + k + "' cannot be encoded");
    meta += k + "=" + v + "\n";
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.put_bytes(meta.data(), meta.size());
  for (const auto& entry : c.tensors) {
    const Tensor& t = entry.second;
    w.put_bytes(t.data().data(), t.size() * sizeof(double));
  }
  w.put<std::uint64_t>(fnv1a64(w.bytes()));
  write_text_file(path, w.bytes());
}

Checkpoint read_checkpoint(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  require(bytes.size() >= 8 + 4, ErrorKind::kIo, path.string() + ": truncated checkpoint");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), 8);
  require(fnv1a64(body) == stored, ErrorKind::kIo, path.string() + ": checksum mismatch (file is corrupt)");

  Reader r(body, path);
  char magic[4];
  r.get_bytes(magic, 4);
  require(std::memcmp(magic, kCheckpointMagic, 4) == 0, ErrorKind::kIo, path.string() + ": not a checkpoint");
  const auto version = r.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorKind::kIo,
          path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  const auto kind = r.get<std::uint32_t>();
  require(kind == 1 || kind == 2, ErrorKind::kIo, path.string() + ": unknown checkpoint kind");
  c.kind = static_cast<CheckpointKind>(kind);
  c.condition_mode = r.get<std::uint32_t>();
  c.config_hash = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  std::vector<std::pair<std::string, Shape>> headers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    std::string name(name_len, '\0');
    r.get_bytes(name.data(), name_len);
    const auto rank = r.get<std::uint32_t>();
    require(rank <= 8, ErrorKind::kIo, path.string() + ": implausible tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    headers.emplace_back(std::move(name), std::move(shape));
  }
  const auto meta_len = r.get<std::uint32_t>();
  std::string meta(meta_len, '\0');
  r.get_bytes(meta.data(), meta_len);
  std::istringstream meta_in(meta);
  std::string line;
  while (std::getline(meta_in, line)) {
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kIo, path.string() + ": malformed metadata line");
    c.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (auto& [name, shape] : headers) {
    Tensor t(shape);
    r.get_bytes(t.data().data(), t.size() * sizeof(double));
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  require(r.remaining() == 0, ErrorKind::kIo, path.string() + ": trailing bytes after tensor data");
  return c;
}

Checkpoint regressor_checkpoint(const RegressorModel& model, std::uint64_t config_hash) {
  Checkpoint c;
  c.kind = CheckpointKind::kRegressor;
  c.config_hash = config_hash;
  const auto& layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    put_tensor(c, "layer" + std::to_string(i) + ".weight", layers[i].weight);
    put_tensor(c, "layer" + std::to_string(i) + ".bias", layers[i].bias);
  }
  c.metadata["image_size"] = std::to_string(model.image_size());
  c.metadata["frozen"] = model.frozen() ? "1" : "0";
  std::string history;
  for (double x : model.training_loss_history()) history += (history.empty() ? "" : " ") + number(x);
  c.metadata["loss_history"] = history;
  return c;
}

RegressorModel regressor_from_checkpoint(const Checkpoint& c) {
  require(c.kind == CheckpointKind::kRegressor, ErrorKind::kIo, "checkpoint does not hold an embedder");
  const auto image_size = static_cast<std::size_t>(parse_int(c.meta("image_size"), "checkpoint"));
  const Tensor& w0 = c.tensor("layer0.weight");
  const Tensor& w1 = c.tensor("layer1.weight");
  const Tensor& w2 = c.tensor("layer2.weight");
  require(w0.rank() == 2 && w1.rank() == 2 && w2.rank() == 2, ErrorKind::kIo, "embedder weights must be matrices");
  Rng scratch(0);
  RegressorModel model(image_size, w2.dim(1), w0.dim(1), w1.dim(1), scratch);
  auto& layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    copy_into(layers[i].weight, c.tensor(prefix + ".weight"), prefix + ".weight");
    copy_into(layers[i].bias, c.tensor(prefix + ".bias"), prefix + ".bias");
  }
  for (const std::string& tok : split_ws(c.meta("loss_history"))) {
    model.mutable_loss_history().push_back(parse_double(tok, "checkpoint"));
  }
  if (c.meta("frozen") == "1") model.freeze();
  return model;
}

Checkpoint gan_checkpoint(const GanModel& model, const TrainerSnapshot& snapshot, std::uint64_t config_hash) {
  Checkpoint c;
  c.kind = CheckpointKind::kGan;
  c.condition_mode = static_cast<std::uint32_t>(model.condition_mode);
  c.config_hash = config_hash;
  GanModel& m = const_cast<GanModel&>(model);  // parameter lists only hand out pointers
  for (ParameterList list : {m.generator_parameters(), m.discriminator_parameters()}) {
    for (std::size_t i = 0; i < list.names.size(); ++i) put_tensor(c, list.names[i], *list.tensors[i]);
  }
  for (std::size_t i = 0; i < model.spectral.size(); ++i) {
    const SpectralState& s = model.spectral[i];
    put_tensor(c, "spectral" + std::to_string(i) + ".u", Tensor::vector(s.u));
    put_tensor(c, "spectral" + std::to_string(i) + ".v", Tensor::vector(s.v));
    c.metadata["spectral" + std::to_string(i) + ".sigma"] = number(s.sigma_estimate);
    c.metadata["spectral" + std::to_string(i) + ".degenerate"] = s.degenerate ? "1" : "0";
  }
  c.metadata["arch.image_size"] = std::to_string(model.arch.image_size);
  c.metadata["arch.z_dim"] = std::to_string(model.arch.z_dim);
  c.metadata["arch.condition_dim"] = std::to_string(model.arch.condition_dim);
  c.metadata["arch.generator_hidden"] = join_sizes(model.arch.generator_hidden);
  c.metadata["arch.discriminator_hidden"] = join_sizes(model.arch.discriminator_hidden);
  c.metadata["iteration"] = std::to_string(snapshot.iteration);
  c.metadata["rng.data"] = snapshot.data_rng;
  c.metadata["rng.knowledge"] = snapshot.knowledge_rng;
  put_optimizer(c, "opt.generator", snapshot.generator_opt);
  put_optimizer(c, "opt.discriminator", snapshot.discriminator_opt);
  return c;
}

GanModel gan_from_checkpoint(const Checkpoint& c) {
  require(c.kind == CheckpointKind::kGan, ErrorKind::kIo, "checkpoint does not hold a GAN");
  require(c.condition_mode <= 1, ErrorKind::kIo, "checkpoint has an unknown condition mode");
  const fs::path where = "checkpoint";
  GanArchitecture arch;
  arch.image_size = static_cast<std::size_t>(parse_int(c.meta("arch.image_size"), where));
  arch.z_dim = static_cast<std::size_t>(parse_int(c.meta("arch.z_dim"), where));
  arch.condition_dim = static_cast<std::size_t>(parse_int(c.meta("arch.condition_dim"), where));
  arch.generator_hidden = parse_sizes(c.meta("arch.generator_hidden"), where);
  arch.discriminator_hidden = parse_sizes(c.meta("arch.discriminator_hidden"), where);
  GanModel m = GanModel::create(arch, static_cast<ConditionMode>(c.condition_mode), 0);
  for (ParameterList list : {m.generator_parameters(), m.discriminator_parameters()}) {
    for (std::size_t i = 0; i < list.names.size(); ++i) {
      copy_into(*list.tensors[i], c.tensor(list.names[i]), list.names[i]);
    }
  }
  for (std::size_t i = 0; i < m.spectral.size(); ++i) {
    SpectralState& s = m.spectral[i];
    const std::string prefix = "spectral" + std::to_string(i);
    const Tensor& u = c.tensor(prefix + ".u");
    const Tensor& v = c.tensor(prefix + ".v");
    require(u.size() == s.u.size() && v.size() == s.v.size(), ErrorKind::kDimension,
            "checkpoint spectral state " + prefix + " does not match the architecture");
    s.u = u.storage();
    s.v = v.storage();
    s.sigma_estimate = parse_double(c.meta(prefix + ".sigma"), where);
    s.degenerate = c.meta(prefix + ".degenerate") == "1";
  }
  return m;
}

TrainerSnapshot snapshot_from_checkpoint(const Checkpoint& c, const AdamConfig& generator_adam,
                                         const AdamConfig& discriminator_adam) {
  TrainerSnapshot s;
  s.iteration = static_cast<std::size_t>(parse_int(c.meta("iteration"), "checkpoint"));
  s.data_rng = c.meta("rng.data");
  s.knowledge_rng = c.meta("rng.knowledge");
  s.generator_opt = get_optimizer(c, "opt.generator", generator_adam);
  s.discriminator_opt = get_optimizer(c, "opt.discriminator", discriminator_adam);
  return s;
}

// ---- metric log and images -------------------------------------------------

void write_metric_log(const fs::path& path, std::span<const MetricRow> rows, const ArtifactHeader& header) {
  std::string out = header.line() + "\niteration,L_D,L_G,L_se_seen,L_se_unseen\n";
  for (const MetricRow& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.iteration, number(r.d_loss), number(r.g_loss), number(r.se_seen),
                       number(r.se_unseen));
  }
  write_text_file(path, out);
}

std::vector<MetricRow> read_metric_log(const fs::path& path) {
  const auto lines = data_lines(path);
  require(!lines.empty() && lines[0] == "iteration,L_D,L_G,L_se_seen,L_se_unseen", ErrorKind::kIo,
          path.string() + ": missing column header");
  std::vector<MetricRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    require(f.size() == 5, ErrorKind::kIo, path.string() + ": expected 5 fields");
    rows.push_back(MetricRow{static_cast<std::size_t>(parse_int(f[0], path)), parse_double(f[1], path),
                             parse_double(f[2], path), parse_double(f[3], path), parse_double(f[4], path)});
  }
  return rows;
}

void write_ppm_grid(const fs::path& path, std::span<const Tensor> images, std::size_t columns) {
  require(!images.empty() && columns > 0, ErrorKind::kContract, "image grid needs images and columns");
  const std::size_t side = images[0].dim(1);
  const std::size_t cols = std::min(columns, images.size());
  const std::size_t rows = (images.size() + cols - 1) / cols;
  const std::size_t width = cols * side;
  const std::size_t height = rows * side;
  std::string pixels(width * height * 3, '\0');
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Tensor& img = images[n];
    require(img.rank() == 3 && img.dim(0) == 3 && img.dim(1) == side && img.dim(2) == side, ErrorKind::kDimension,
            "image grid: images must share shape [3, H, H]");
    const std::size_t ox = (n % cols) * side;
    const std::size_t oy = (n / cols) * side;
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double v = std::clamp((img[(ch * side + y) * side + x] + 1.0) * 0.5, 0.0, 1.0);
          pixels[((oy + y) * width + ox + x) * 3 + ch] = static_cast<char>(std::lround(v * 255.0));
        }
      }
    }
  }
  write_text_file(path, fmt::format("P6\n{} {}\n255\n", width, height) + pixels);
}

}  // namespace kggan
