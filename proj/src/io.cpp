#include "aas/io.hpp"

#include "aas/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace aas::io
{

using nlohmann::json;

namespace
{

constexpr char kMagic[4] = {'A', 'A', 'S', 'E'};

void put_u32(std::string& out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
  {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint32_t get_u32(const std::string& in, std::size_t offset)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
  {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

std::unordered_map<std::string_view, std::size_t> id_index(const EmbeddingSet& set)
{
  std::unordered_map<std::string_view, std::size_t> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
  {
    out.emplace(set.ids()[i], i);
  }
  return out;
}

std::size_t lookup(const std::unordered_map<std::string_view, std::size_t>& index, const std::string& id)
{
  auto it = index.find(id);
  if (it == index.end())
  {
    throw ValidationError("unknown sample id '" + id + "'");
  }
  return it->second;
}

std::optional<std::vector<std::string>> optional_strings(const json& j, const char* key, std::size_t n)
{
  if (!j.contains(key) || j[key].is_null())
  {
    return std::nullopt;
  }
  auto v = j[key].get<std::vector<std::string>>();
  if (v.size() != n)
  {
    throw ValidationError(std::string("manifest field '") + key + "' has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(n));
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
  {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',')
  {
    out.emplace_back();
  }
  return out;
}

struct CsvRow
{
  std::string id;
  int cluster;
  bool outlier;
};

std::vector<CsvRow> parse_partition_csv(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
  {
    throw ValidationError("partition file is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,cluster,outlier")
  {
    throw ValidationError("partition header must be 'id,cluster,outlier'");
  }
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3)
    {
      throw ValidationError("partition line " + std::to_string(lineno) + ": expected 3 fields");
    }
    CsvRow row;
    row.id = cells[0];
    try
    {
      std::size_t used = 0;
      long v = std::stol(cells[1], &used);
      if (used != cells[1].size() || v < 0) throw std::invalid_argument("bad");
      row.cluster = static_cast<int>(v);
    }
    catch (const std::exception&)
    {
      throw ValidationError("partition line " + std::to_string(lineno) + ": cluster must be a non-negative integer");
    }
    if (cells[2] != "0" && cells[2] != "1")
    {
      throw ValidationError("partition line " + std::to_string(lineno) + ": outlier must be 0 or 1");
    }
    row.outlier = cells[2] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

void write_atomic(const fs::path& path, const std::string& contents)
{
  if (path.has_parent_path())
  {
    fs::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
    {
      throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
    {
      throw ValidationError("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_embeddings(const RowMatrixF& vectors)
{
  std::string out;
  out.reserve(12 + static_cast<std::size_t>(vectors.size()) * 4);
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(vectors.rows()));
  put_u32(out, static_cast<std::uint32_t>(vectors.cols()));
  for (Eigen::Index i = 0; i < vectors.size(); ++i)
  {
    put_u32(out, std::bit_cast<std::uint32_t>(vectors.data()[i]));
  }
  return out;
}

RowMatrixF decode_embeddings(const std::string& bytes)
{
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
  {
    throw ValidationError("embeddings file: bad magic (expected 'AASE')");
  }
  const std::uint64_t n = get_u32(bytes, 4);
  const std::uint64_t d = get_u32(bytes, 8);
  if (n == 0 || d == 0)
  {
    throw ValidationError("embeddings file: n and d must be positive");
  }
  const std::uint64_t expected = 12 + n * d * 4;
  if (bytes.size() != expected)
  {
    throw ValidationError("embeddings file: size " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(expected) + " (truncated or trailing data)");
  }
  RowMatrixF m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i)
  {
    m.data()[i] = std::bit_cast<float>(get_u32(bytes, 12 + static_cast<std::size_t>(i) * 4));
  }
  return m;
}

fs::path manifest_path(const fs::path& embeddings_path)
{
  auto p = embeddings_path;
  p += ".json";
  return p;
}

void save_embeddings(const fs::path& path, const EmbeddingSet& set)
{
  json manifest;
  manifest["ids"] = set.ids();
  manifest["image_uris"] = set.image_uris() ? json(*set.image_uris()) : json(nullptr);
  manifest["identities"] = set.identities() ? json(*set.identities()) : json(nullptr);
  write_atomic(path, encode_embeddings(set.vectors()));
  write_atomic(manifest_path(path), manifest.dump(2) + "\n");
}

EmbeddingSet load_embeddings(const fs::path& path)
{
  return load_embeddings(path, manifest_path(path));
}

EmbeddingSet load_embeddings(const fs::path& path, const fs::path& manifest)
{
  auto vectors = decode_embeddings(read_text(path));
  const auto n = static_cast<std::size_t>(vectors.rows());
  json j;
  try
  {
    j = json::parse(read_text(manifest));
  }
  catch (const json::exception& e)
  {
    throw ValidationError("manifest '" + manifest.string() + "': " + e.what());
  }
  if (!j.contains("ids") || !j["ids"].is_array())
  {
    throw ValidationError("manifest needs an 'ids' array");
  }
  auto ids = j["ids"].get<std::vector<std::string>>();
  if (ids.size() != n)
  {
    throw ValidationError("manifest has " + std::to_string(ids.size()) + " ids, matrix has " +
                          std::to_string(n) + " rows");
  }
  return EmbeddingSet(std::move(ids), std::move(vectors), optional_strings(j, "image_uris", n),
                      optional_strings(j, "identities", n));
}

std::string encode_constraints(const std::vector<Constraint>& constraints, const EmbeddingSet& set)
{
  std::string out;
  for (const auto& c : constraints)
  {
    json j;
    j["a"] = set.ids().at(c.pair.a());
    j["b"] = set.ids().at(c.pair.b());
    j["relation"] = to_string(c.relation);
    j["source"] = to_string(c.source);
    j["cycle"] = c.cycle;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Constraint> decode_constraints(const std::string& text, const EmbeddingSet& set)
{
  const auto index = id_index(set);
  std::vector<Constraint> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return "constraints line " + std::to_string(lineno) + ": "; };
    json j;
    try
    {
      j = json::parse(line);
      Constraint c;
      c.pair = PairKey(lookup(index, j.at("a").get<std::string>()), lookup(index, j.at("b").get<std::string>()));
      const auto rel = j.at("relation").get<std::string>();
      if (rel == "ml") c.relation = Relation::MustLink;
      else if (rel == "cl") c.relation = Relation::CannotLink;
      else throw ValidationError("relation must be 'ml' or 'cl'");
      const auto src = j.value("source", std::string("oracle"));
      if (src == "oracle") c.source = ConstraintSource::Oracle;
      else if (src == "seed") c.source = ConstraintSource::Seed;
      else if (src == "inferred") c.source = ConstraintSource::Inferred;
      else throw ValidationError("source must be oracle, seed or inferred");
      c.cycle = j.value("cycle", 0);
      if (c.cycle < 0) throw ValidationError("cycle must be non-negative");
      out.push_back(c);
    }
    catch (const json::exception& e)
    {
      throw ValidationError(where() + e.what());
    }
    catch (const ValidationError& e)
    {
      throw ValidationError(where() + e.what());
    }
  }
  return out;
}

ConstraintStore load_constraint_store(const fs::path& path, const EmbeddingSet& set)
{
  ConstraintStore store(set.size());
  for (const auto& c : decode_constraints(read_text(path), set))
  {
    store.add(c);
  }
  return store;
}

std::string encode_store(const ConstraintStore& store, const EmbeddingSet& set, bool include_inferred)
{
  auto out = encode_constraints(store.constraints(), set);
  if (include_inferred)
  {
    out += encode_constraints(store.inferred_constraints(), set);
  }
  return out;
}

std::string encode_partition(const Partition& part, const EmbeddingSet& set)
{
  if (part.size() != set.size())
  {
    throw ValidationError("partition size does not match embedding set");
  }
  std::string out = "id,cluster,outlier\n";
  for (std::size_t i = 0; i < part.size(); ++i)
  {
    out += set.ids()[i];
    out += ',';
    out += std::to_string(part.labels[i]);
    out += part.outliers[i] ? ",1\n" : ",0\n";
  }
  return out;
}

Partition decode_partition(const std::string& text, const EmbeddingSet& set, MethodTag tag)
{
  const auto rows = parse_partition_csv(text);
  if (rows.size() != set.size())
  {
    throw ValidationError("partition has " + std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(set.size()));
  }
  const auto index = id_index(set);
  std::vector<int> labels(set.size(), -1);
  std::vector<bool> outliers(set.size(), false);
  for (const auto& row : rows)
  {
    const auto i = lookup(index, row.id);
    if (labels[i] != -1)
    {
      throw ValidationError("partition lists id '" + row.id + "' twice");
    }
    labels[i] = row.cluster;
    outliers[i] = row.outlier;
  }
  return Partition(std::move(labels), std::move(outliers), tag);
}

Partition decode_partition(const std::string& text, std::vector<std::string>& ids_out)
{
  const auto rows = parse_partition_csv(text);
  ids_out.clear();
  std::vector<int> labels;
  std::vector<bool> outliers;
  for (const auto& row : rows)
  {
    ids_out.push_back(row.id);
    labels.push_back(row.cluster);
    outliers.push_back(row.outlier);
  }
  return Partition(std::move(labels), std::move(outliers), MethodTag::Refined);
}

namespace
{

const char* mode_name(SimilarityMode m) { return m == SimilarityMode::Cosine ? "cosine" : "k_reciprocal_jaccard"; }
const char* strategy_name(SamplingStrategy s) { return s == SamplingStrategy::Ambiguity ? "ambiguity" : "random"; }
const char* view_name(BaseView v) { return v == BaseView::Dbscan ? "dbscan" : "finch"; }

} // namespace

std::string encode_config(const RunConfig& config)
{
  nlohmann::ordered_json j;
  j["epsilon"] = config.epsilon;
  j["k_max"] = config.k_max;
  j["s_min"] = config.s_min;
  j["budget_fraction_per_cycle"] = config.budget_fraction_per_cycle;
  j["num_cycles"] = config.num_cycles;
  j["dbscan_eps"] = config.dbscan_eps;
  j["dbscan_min_samples"] = config.dbscan_min_samples;
  j["knn_k"] = config.knn_k;
  j["finch_level"] = config.finch_level;
  j["rng_seed"] = config.rng_seed;
  j["similarity_mode"] = mode_name(config.similarity_mode);
  j["strategy"] = strategy_name(config.strategy);
  j["base_view"] = view_name(config.base_view);
  j["beta"] = config.beta;
  j["dense_threshold"] = config.dense_threshold;
  return j.dump(2) + "\n";
}

RunConfig decode_config(const std::string& text, RunConfig base)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::exception& e)
  {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object())
  {
    throw ValidationError("config must be a JSON object");
  }
  try
  {
    for (const auto& [key, value] : j.items())
    {
      if (key == "epsilon") base.epsilon = value.get<double>();
      else if (key == "k_max") base.k_max = value.get<int>();
      else if (key == "s_min") base.s_min = value.get<double>();
      else if (key == "budget_fraction_per_cycle") base.budget_fraction_per_cycle = value.get<double>();
      else if (key == "num_cycles") base.num_cycles = value.get<int>();
      else if (key == "dbscan_eps") base.dbscan_eps = value.get<double>();
      else if (key == "dbscan_min_samples") base.dbscan_min_samples = value.get<int>();
      else if (key == "knn_k") base.knn_k = value.get<int>();
      else if (key == "finch_level") base.finch_level = value.get<int>();
      else if (key == "rng_seed") base.rng_seed = value.get<std::uint64_t>();
      else if (key == "dense_threshold") base.dense_threshold = value.get<std::size_t>();
      else if (key == "beta") base.beta = value.get<std::vector<double>>();
      else if (key == "similarity_mode")
      {
        const auto v = value.get<std::string>();
        if (v == "cosine") base.similarity_mode = SimilarityMode::Cosine;
        else if (v == "k_reciprocal_jaccard") base.similarity_mode = SimilarityMode::KReciprocalJaccard;
        else throw ValidationError("similarity_mode must be cosine or k_reciprocal_jaccard");
      }
      else if (key == "strategy")
      {
        const auto v = value.get<std::string>();
        if (v == "ambiguity") base.strategy = SamplingStrategy::Ambiguity;
        else if (v == "random") base.strategy = SamplingStrategy::UniformRandom;
        else throw ValidationError("strategy must be ambiguity or random");
      }
      else if (key == "base_view")
      {
        const auto v = value.get<std::string>();
        if (v == "dbscan") base.base_view = BaseView::Dbscan;
        else if (v == "finch") base.base_view = BaseView::Finch;
        else throw ValidationError("base_view must be dbscan or finch");
      }
      else throw ValidationError("unknown config key '" + key + "'");
    }
  }
  catch (const json::exception& e)
  {
    throw ValidationError(std::string("config: ") + e.what());
  }
  base.validate();
  return base;
}

} // namespace aas::io
