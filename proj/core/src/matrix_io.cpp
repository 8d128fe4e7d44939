#include "pinembed/matrix_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pinembed/error.hpp"

namespace pinembed {

namespace {

using nlohmann::json;

constexpr const char* kMatrixFormat = "pinembed.row-groups";
constexpr int kFormatVersion = 1;

json spec_json(const EmbeddingSpec& spec) {
  return json{{"K", spec.K},
              {"N", spec.N},
              {"N_bound_satisfied", spec.N_bound_satisfied},
              {"alpha", spec.alpha},
              {"delta", spec.delta},
              {"dimension_condition", spec.dimension_condition},
              {"epsilon", spec.epsilon},
              {"log_N_lower_bound", spec.log_N_lower_bound},
              {"mode", to_string(spec.mode)},
              {"n", spec.n},
              {"radius", spec.radius()},
              {"sigma", spec.sigma}};
}

EmbeddingSpec spec_from(const json& j) {
  try {
    EmbeddingSpec spec;
    spec.K = j.at("K").get<double>();
    spec.N = j.at("N").get<std::uint64_t>();
    spec.N_bound_satisfied = j.at("N_bound_satisfied").get<bool>();
    spec.alpha = j.at("alpha").get<double>();
    spec.delta = j.at("delta").get<double>();
    spec.dimension_condition = j.at("dimension_condition").get<bool>();
    spec.epsilon = j.at("epsilon").get<double>();
    spec.log_N_lower_bound = j.at("log_N_lower_bound").get<double>();
    spec.mode = parse_mode(j.at("mode").get<std::string>());
    spec.n = j.at("n").get<int>();
    spec.sigma = j.at("sigma").get<double>();
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed spec JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << content;
}

}  // namespace

std::string spec_to_json(const EmbeddingSpec& spec, int indent) {
  return spec_json(spec).dump(indent) + "\n";
}

EmbeddingSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed spec JSON: ") + e.what());
  }
  // Accept either a bare spec or an object wrapping one under "spec".
  return spec_from(j.contains("spec") ? j.at("spec") : j);
}

void write_groups(std::ostream& out, const RowGroupMatrix& matrix) {
  const int n = matrix.spec().n;
  const int k = matrix.columns();
  out << '#';
  for (int j = 0; j < n; ++j) out << (j ? "\t" : "") << 'x' << j;
  for (int j = 0; j < k; ++j) out << "\td" << j;
  out << "\tmultiplicity\n";
  char buf[64];
  for (std::size_t g = 0; g < matrix.group_count(); ++g) {
    const auto x = matrix.lattice_point(g);
    for (int j = 0; j < n; ++j) out << (j ? "\t" : "") << x[j];
    for (double d : matrix.direction(g)) {
      std::snprintf(buf, sizeof buf, "%a", d);
      out << '\t' << buf;
    }
    out << '\t' << matrix.multiplicity(g) << '\n';
  }
}

void write_dense(std::ostream& out, const RowGroupMatrix& matrix) {
  if (matrix.rows() > kDenseRowLimit) {
    throw DomainError("dense export is limited to " + std::to_string(kDenseRowLimit) + " rows");
  }
  char buf[64];
  for (std::size_t g = 0; g < matrix.group_count(); ++g) {
    std::string line;
    for (double d : matrix.direction(g)) {
      std::snprintf(buf, sizeof buf, "%a", d);
      if (!line.empty()) line += '\t';
      line += buf;
    }
    line += '\n';
    for (std::uint64_t r = 0; r < matrix.multiplicity(g); ++r) out << line;
  }
}

std::string matrix_manifest_json(const MatrixBundle& bundle) {
  const auto& m = bundle.matrix;
  json M = json::object();
  for (const auto& [descriptor, value] : bundle.scaling_constants) M[descriptor] = value;
  json j{{"format", kMatrixFormat},
         {"version", kFormatVersion},
         {"spec", spec_json(m.spec())},
         {"group_count", m.group_count()},
         {"rows", m.rows()},
         {"columns", m.columns()},
         {"truncated", m.truncated()},
         {"groups_file", "groups.tsv"},
         {"M", M},
         {"reference",
          {{"a", bundle.reference.a}, {"b", bundle.reference.b}, {"exactness", bundle.reference.exactness}}}};
  return j.dump(2) + "\n";
}

void write_matrix(const std::filesystem::path& dir, const MatrixBundle& bundle) {
  std::filesystem::create_directories(dir);
  std::ostringstream groups;
  write_groups(groups, bundle.matrix);
  write_file(dir / "groups.tsv", groups.str());
  write_file(dir / "matrix.json", matrix_manifest_json(bundle));
}

MatrixBundle read_matrix(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "matrix.json"));
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed matrix.json: ") + e.what());
  }
  if (manifest.value("format", "") != kMatrixFormat) throw DomainError("not a pinembed matrix directory");
  const EmbeddingSpec spec = spec_from(manifest.at("spec"));
  const int n = spec.n;
  const int k = manifest.at("columns").get<int>();
  const bool truncated = manifest.at("truncated").get<bool>();
  const auto expected_groups = manifest.at("group_count").get<std::size_t>();

  std::ifstream in(dir / manifest.at("groups_file").get<std::string>());
  if (!in) throw DomainError("cannot open groups file in " + dir.string());
  PointList points(n);
  points.reserve(expected_groups);
  std::vector<double> directions;
  directions.reserve(expected_groups * k);
  std::vector<std::uint64_t> multiplicities;
  multiplicities.reserve(expected_groups);

  std::string line;
  std::vector<Coord> x(n);
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const char* p = line.c_str();
    char* end = nullptr;
    auto fail = [&] { throw DomainError("malformed groups line " + std::to_string(line_no)); };
    for (int j = 0; j < n; ++j) {
      const long v = std::strtol(p, &end, 10);
      if (end == p) fail();
      x[j] = static_cast<Coord>(v);
      p = end;
    }
    points.push_back(x);
    for (int j = 0; j < k; ++j) {
      const double d = std::strtod(p, &end);
      if (end == p) fail();
      directions.push_back(d);
      p = end;
    }
    const unsigned long long mult = std::strtoull(p, &end, 10);
    if (end == p) fail();
    multiplicities.push_back(mult);
  }
  if (multiplicities.size() != expected_groups) {
    throw DomainError("groups file has " + std::to_string(multiplicities.size()) + " groups, manifest says " +
                      std::to_string(expected_groups));
  }

  MatrixBundle bundle{RowGroupMatrix(spec, std::move(points), std::move(directions), std::move(multiplicities), k,
                                     truncated),
                      {},
                      {}};
  if (bundle.matrix.rows() != spec.N) throw DomainError("group multiplicities do not sum to N");
  for (const auto& [descriptor, value] : manifest.at("M").items()) {
    bundle.scaling_constants[descriptor] = value.get<double>();
  }
  const auto& ref = manifest.at("reference");
  bundle.reference = {ref.at("a").get<double>(), ref.at("b").get<double>(), ref.at("exactness").get<std::string>()};
  return bundle;
}

void write_table_csv(std::ostream& out, const MultiplicityTable& table) {
  const int n = table.dim();
  for (int j = 0; j < n; ++j) out << 'x' << j << ',';
  out << "m,m_prime\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (Coord c : table.points[i]) out << c << ',';
    out << table.m[i] << ',' << table.m_prime[i] << '\n';
  }
}

std::string table_header_json(const MultiplicityTable& table, bool bound_satisfied) {
  json j{{"n", table.dim()},
         {"N", table.N},
         {"N_prime", table.N_prime},
         {"sigma", table.sigma},
         {"alpha", table.alpha},
         {"radius", table.radius},
         {"point_count", table.size()},
         {"bound_satisfied", bound_satisfied},
         {"high_precision_floors", table.high_precision_floors}};
  return j.dump(2) + "\n";
}

void write_table(const std::filesystem::path& dir, const MultiplicityTable& table, bool bound_satisfied) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_table_csv(csv, table);
  write_file(dir / "multiplicities.csv", csv.str());
  write_file(dir / "multiplicities.json", table_header_json(table, bound_satisfied));
}

}  // namespace pinembed
