#pragma once

#include "aas/constraint_store.hpp"
#include "aas/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace aas::io
{

namespace fs = std::filesystem;

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_atomic(const fs::path& path, const std::string& contents);

std::string read_text(const fs::path& path);

/// Binary "AASE" matrix: magic, u32 n, u32 d, n*d float32, all little-endian.
std::string encode_embeddings(const RowMatrixF& vectors);
RowMatrixF decode_embeddings(const std::string& bytes);

/// Matrix file plus sidecar manifest at `<path>.json`.
void save_embeddings(const fs::path& path, const EmbeddingSet& set);
EmbeddingSet load_embeddings(const fs::path& path);
EmbeddingSet load_embeddings(const fs::path& path, const fs::path& manifest);
fs::path manifest_path(const fs::path& embeddings_path);

/// JSON Lines, one constraint per line, ids resolved against `set`.
std::string encode_constraints(const std::vector<Constraint>& constraints, const EmbeddingSet& set);
std::vector<Constraint> decode_constraints(const std::string& text, const EmbeddingSet& set);

/// Loads a constraints file into a fresh store over `set`.
ConstraintStore load_constraint_store(const fs::path& path, const EmbeddingSet& set);

/// Explicit constraints first (insertion order), then closure-derived pairs.
std::string encode_store(const ConstraintStore& store, const EmbeddingSet& set, bool include_inferred);

/// CSV "id,cluster,outlier".
std::string encode_partition(const Partition& part, const EmbeddingSet& set);
Partition decode_partition(const std::string& text, const EmbeddingSet& set, MethodTag tag = MethodTag::Refined);

/// Partition CSV without a matching embedding set; ids kept in file order.
Partition decode_partition(const std::string& text, std::vector<std::string>& ids_out);

/// RunConfig as a JSON object keyed by field name.
std::string encode_config(const RunConfig& config);

/// Overrides fields of `base` from a JSON object; unknown keys are rejected.
RunConfig decode_config(const std::string& text, RunConfig base = {});

} // namespace aas::io
