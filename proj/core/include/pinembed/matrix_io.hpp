#pragma once

// On-disk formats.
//
// A matrix directory holds
//   matrix.json   manifest: spec, group count, flags, M per norm descriptor
//   groups.tsv    one line per row group: lattice coords, direction entries
//                 as C99 hexfloats (%a), multiplicity
// A multiplicity table is written as
//   multiplicities.csv   coords..., m, m_prime
//   multiplicities.json  n, N, sigma, alpha, radius, N_prime, point_count,
//                        bound_satisfied, high_precision_floors
// JSON objects have sorted keys and shortest round-trip floats, so equal
// inputs produce equal bytes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "pinembed/embedding.hpp"
#include "pinembed/lattice.hpp"

namespace pinembed {

struct ReferenceSummary {
  double a = 0.0;
  double b = 0.0;
  std::string exactness;
};

struct MatrixBundle {
  RowGroupMatrix matrix;
  /// M = ||v|| keyed by norm descriptor.
  std::map<std::string, double> scaling_constants;
  ReferenceSummary reference;
};

std::string spec_to_json(const EmbeddingSpec& spec, int indent = 2);
EmbeddingSpec spec_from_json(const std::string& text);

void write_groups(std::ostream& out, const RowGroupMatrix& matrix);
inline constexpr std::uint64_t kDenseRowLimit = 100'000;

/// All N rows of T, one per line, tab-separated hexfloats, in group order.
/// Throws DomainError above kDenseRowLimit rows.
void write_dense(std::ostream& out, const RowGroupMatrix& matrix);

std::string matrix_manifest_json(const MatrixBundle& bundle);

/// Writes matrix.json and groups.tsv into `dir` (created if missing).
void write_matrix(const std::filesystem::path& dir, const MatrixBundle& bundle);
/// Throws DomainError on malformed or inconsistent files.
MatrixBundle read_matrix(const std::filesystem::path& dir);

void write_table_csv(std::ostream& out, const MultiplicityTable& table);
std::string table_header_json(const MultiplicityTable& table, bool bound_satisfied);
void write_table(const std::filesystem::path& dir, const MultiplicityTable& table, bool bound_satisfied);

}  // namespace pinembed
