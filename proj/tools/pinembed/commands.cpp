#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "pinembed/embedding.hpp"
#include "pinembed/error.hpp"
#include "pinembed/matrix_io.hpp"
#include "pinembed/random.hpp"
#include "pinembed/spherical_dist.hpp"
#include "pinembed/verify.hpp"
#include "pinembed/version.hpp"
#include "render.hpp"

namespace pinembed::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Global {
  std::string threads;
  bool strict = false;
  std::string format = "json";
  std::string manifest;
  std::string from_manifest;
};

struct PlanFlags {
  double epsilon = 0.1;
  double K = 1.0;
  std::string mode = "paper";
  std::optional<int> n;
  std::optional<std::string> N;
  std::optional<double> sigma;
  std::optional<double> alpha;
  std::optional<double> radius;
  std::optional<double> delta;
};

struct BuildFlags {
  std::string spec_file;
  std::string out;
  std::vector<std::string> norms;
  int resolution = 4096;
  std::string profile = "auto";
  std::optional<int> truncate;
  double cap = 1e8;
  bool dense = false;
};

struct VerifyFlags {
  std::string matrix;
  std::string delta = "auto";
  int grid = 1000;
  std::uint64_t theta_seed = 1;
  std::size_t theta_count = 16;
  std::string csv;
};

struct DistortFlags {
  std::string matrix;
  std::string norm = "lp:2";
  std::uint64_t theta_seed = 1;
  std::size_t theta_count = 500;
  bool basis = false;
  std::optional<double> M;
  int resolution = 4096;
  std::optional<double> max_distortion;
};

struct TablesFlags {
  int n = 0;
  std::string range;
  double step = 0.01;
  std::string out;
};

struct RefcheckFlags {
  std::size_t count = 1000;
  std::uint64_t seed = 7;
  double tolerance = 1e-12;
};

// State one command run accumulates for its manifest.
struct Context {
  std::string command;
  unsigned threads = 1;
  bool strict = false;
  Format format = Format::json;
  std::ostringstream out;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json spec;
  json seeds = json::object();

  void emit(const json& value) { out << render(value, format); }
};

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t parse_count(const std::string& text) {
  // Accepts plain integers and exact scientific forms such as 1e9.
  std::size_t used = 0;
  try {
    if (text.find_first_of("eE.") == std::string::npos) {
      if (!text.empty() && text[0] == '-') throw DomainError("N must be positive");
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } else {
      const long double v = std::stold(text, &used);
      if (used == text.size() && v >= 0 && v == std::floor(v) && v < 18446744073709551616.0L) {
        return static_cast<std::uint64_t>(v);
      }
    }
  } catch (const std::logic_error&) {
  }
  throw DomainError("not a non-negative integer: " + text);
}

unsigned parse_threads(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    const char* env = std::getenv("PINEMBED_THREADS");
    text = env ? env : "1";
  }
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size() && v >= 0 && v <= 4096) return static_cast<unsigned>(v);
  } catch (const std::logic_error&) {
  }
  throw DomainError("thread count must be an integer in [0, 4096], got '" + text + "'");
}

json spec_json(const EmbeddingSpec& spec) { return json::parse(spec_to_json(spec)); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << text;
}

EmbeddingSpec spec_from_flags(const PlanFlags& f) {
  PlanOverrides o;
  o.n = f.n;
  if (f.N) o.N = parse_count(*f.N);
  o.sigma = f.sigma;
  o.alpha = f.alpha;
  o.radius = f.radius;
  o.delta = f.delta;
  return plan_parameters(f.epsilon, f.K, parse_mode(f.mode), o);
}

void add_plan_flags(CLI::App* cmd, PlanFlags& f) {
  cmd->add_option("--epsilon", f.epsilon, "Target accuracy in (0,1)")->capture_default_str();
  cmd->add_option("--K", f.K, "Basis constant of the target norm")->capture_default_str();
  cmd->add_option("--mode", f.mode, "paper | desk")->capture_default_str();
  cmd->add_option("--n", f.n, "Embedded dimension (default 6)");
  cmd->add_option("--N", f.N, "Ambient dimension (rows of T)");
  cmd->add_option("--sigma", f.sigma, "Cell scale (desk mode)");
  cmd->add_option("--alpha", f.alpha, "Truncation scale; radius = alpha*sqrt(n) (desk mode)");
  cmd->add_option("--radius", f.radius, "Truncation radius, alternative to --alpha (desk mode)");
  cmd->add_option("--delta", f.delta, "Band parameter (desk mode, default epsilon/1429)");
}

MatrixBundle load_matrix(Context& ctx, const std::string& dir) {
  if (dir.empty()) throw DomainError("--matrix is required");
  ctx.inputs.push_back(fs::path(dir) / "matrix.json");
  ctx.inputs.push_back(fs::path(dir) / "groups.tsv");
  MatrixBundle bundle = read_matrix(dir);
  ctx.spec = spec_json(bundle.matrix.spec());
  return bundle;
}

int cmd_plan(Context& ctx, const PlanFlags& f) {
  const EmbeddingSpec spec = spec_from_flags(f);
  ctx.spec = spec_json(spec);
  ctx.emit(ctx.spec);
  return kExitOk;
}

int cmd_build(Context& ctx, const PlanFlags& plan, BuildFlags f) {
  if (f.out.empty()) throw DomainError("--out is required");
  EmbeddingSpec spec;
  if (!f.spec_file.empty()) {
    ctx.inputs.push_back(f.spec_file);
    spec = spec_from_json(read_text(f.spec_file));
  } else {
    spec = spec_from_flags(plan);
  }
  ctx.spec = spec_json(spec);
  if (f.norms.empty()) f.norms.push_back("lp:2");
  std::vector<PermInvariantNorm> norms;
  for (const auto& d : f.norms) norms.push_back(PermInvariantNorm::parse(d));
  ProfilePath path = ProfilePath::automatic;
  if (f.profile == "entrywise") path = ProfilePath::entrywise;
  else if (f.profile == "quadrature") path = ProfilePath::quadrature;
  else if (f.profile != "auto") throw ConfigError("--profile must be auto, entrywise or quadrature");

  const EnumerationOptions options{f.cap, ctx.threads};
  const MultiplicityTable table = build_multiplicities(spec.n, spec.N, spec.sigma, spec.alpha, options);
  RowGroupMatrix matrix = build_matrix(spec, table);
  if (f.truncate) matrix = truncate_columns(matrix, *f.truncate);

  const ReferenceProfile profile = reference_profile(spec, f.resolution, path);
  MatrixBundle bundle{std::move(matrix), {}, {profile.a, profile.b, profile.exactness()}};
  for (const auto& norm : norms) bundle.scaling_constants[norm.descriptor()] = scaling_constant(profile, norm);

  const fs::path out(f.out);
  write_matrix(out, bundle);
  write_table(out, table, spec.N_bound_satisfied);
  for (const char* name : {"matrix.json", "groups.tsv", "multiplicities.csv", "multiplicities.json"}) {
    ctx.outputs.push_back(out / name);
  }
  if (f.dense) {
    std::ostringstream rows;
    write_dense(rows, bundle.matrix);
    write_text(out / "rows.tsv", rows.str());
    ctx.outputs.push_back(out / "rows.tsv");
  }

  json M = json::object();
  for (const auto& [d, v] : bundle.scaling_constants) M[d] = v;
  ctx.emit(json{{"M", M},
                {"N_prime", table.N_prime},
                {"columns", bundle.matrix.columns()},
                {"group_count", bundle.matrix.group_count()},
                {"high_precision_floors", table.high_precision_floors},
                {"out", f.out},
                {"reference",
                 {{"a", profile.a},
                  {"b", profile.b},
                  {"bucket_width_bound", profile.bucket_width_bound},
                  {"exactness", profile.exactness()}}},
                {"rows", bundle.matrix.rows()},
                {"spec", ctx.spec},
                {"truncated", bundle.matrix.truncated()}});
  return kExitOk;
}

int cmd_verify(Context& ctx, const VerifyFlags& f) {
  const MatrixBundle bundle = load_matrix(ctx, f.matrix);
  const RowGroupMatrix& matrix = bundle.matrix;
  if (matrix.truncated()) {
    throw DomainError("verify refuses truncated matrices: their rows are not on the sphere of radius sqrt(n)");
  }
  const bool automatic = f.delta == "auto";
  double fixed_delta = 0.0;
  if (!automatic) {
    std::size_t used = 0;
    try {
      fixed_delta = std::stod(f.delta, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != f.delta.size()) throw DomainError("--delta-eff must be 'auto' or a number");
  }
  const int n = matrix.spec().n;
  ctx.seeds["theta_seed"] = f.theta_seed;
  const auto thetas = sphere_sample(n, f.theta_count, f.theta_seed);

  std::ostringstream csv;
  csv << "theta,s,empirical,reference,deviation,band,regime,pass,boundary\n";
  json rows = json::array();
  bool all_pass = true;
  double worst_delta = 0.0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const EmpiricalProjection proj = project(matrix, thetas[i]);
    const double delta = automatic ? effective_delta(proj, n, f.grid) : fixed_delta;
    json row{{"index", i}, {"delta", number(delta)}};
    if (!std::isfinite(delta)) {
      all_pass = false;
      worst_delta = delta;
      row["pass"] = false;
      rows.push_back(row);
      continue;
    }
    worst_delta = std::max(worst_delta, delta);
    if (delta == 0.0) {
      // Exact agreement on the grid; no band is needed.
      row["pass"] = true;
      row["max_ratio"] = 0.0;
      row["failures"] = 0;
      rows.push_back(row);
      continue;
    }
    const QuantileBandReport report = quantile_band_report(proj, n, delta, f.grid);
    std::size_t failures = 0;
    for (const auto& r : report.rows) {
      failures += r.pass ? 0 : 1;
      csv << i << ',' << fmt(r.s) << ',' << fmt(r.empirical) << ',' << fmt(r.reference) << ','
          << fmt(r.deviation) << ',' << fmt(r.band) << ',' << to_string(r.regime) << ',' << (r.pass ? 1 : 0)
          << ',' << (r.boundary ? 1 : 0) << '\n';
    }
    all_pass = all_pass && report.pass;
    worst_ratio = std::max(worst_ratio, report.max_ratio);
    row["pass"] = report.pass;
    row["max_ratio"] = number(report.max_ratio);
    row["failures"] = failures;
    rows.push_back(row);
  }
  if (!f.csv.empty()) {
    write_text(f.csv, csv.str());
    ctx.outputs.push_back(f.csv);
  }
  json summary{{"delta_mode", automatic ? "auto" : "fixed"},
               {"grid", f.grid},
               {"n", n},
               {"pass", all_pass},
               {"theta_count", f.theta_count},
               {"theta_seed", f.theta_seed},
               {"thetas", rows}};
  if (automatic) {
    summary["delta_eff_max"] = number(worst_delta);
    summary["delta_nominal"] = matrix.spec().delta;
  } else {
    summary["delta"] = fixed_delta;
    summary["max_ratio"] = number(worst_ratio);
  }
  ctx.emit(summary);
  return ctx.strict && !all_pass ? kExitStrictFailure : kExitOk;
}

int cmd_distort(Context& ctx, const DistortFlags& f) {
  const MatrixBundle bundle = load_matrix(ctx, f.matrix);
  const RowGroupMatrix& matrix = bundle.matrix;
  const PermInvariantNorm norm = PermInvariantNorm::parse(f.norm);
  std::string M_source = "argument";
  double M = 0.0;
  if (f.M) {
    M = *f.M;
  } else if (auto it = bundle.scaling_constants.find(norm.descriptor()); it != bundle.scaling_constants.end()) {
    M = it->second;
    M_source = "matrix";
  } else {
    M = scaling_constant(reference_profile(matrix.spec(), f.resolution), norm);
    M_source = "computed";
  }

  std::vector<std::vector<double>> thetas;
  const int k = matrix.columns();
  if (f.basis) {
    for (int j = 0; j < k; ++j) {
      std::vector<double> e(k, 0.0);
      e[j] = 1.0;
      thetas.push_back(std::move(e));
    }
  } else {
    ctx.seeds["theta_seed"] = f.theta_seed;
    thetas = sphere_sample(k, f.theta_count, f.theta_seed);
  }
  const DistortionReport report = distortion_sweep(matrix, norm, thetas, M, ctx.threads);
  const double bound = f.max_distortion.value_or(matrix.spec().epsilon);
  const bool pass = report.distortion <= bound;
  ctx.emit(json{{"M", M},
                {"M_source", M_source},
                {"bound", bound},
                {"directions", f.basis ? "basis" : "sphere"},
                {"distortion", report.distortion},
                {"histogram", report.histogram},
                {"max_ratio", report.max_ratio},
                {"min_ratio", report.min_ratio},
                {"non_unit_input", report.non_unit_input},
                {"norm", norm.descriptor()},
                {"pass", pass},
                {"theta_count", thetas.size()}});
  return ctx.strict && !pass ? kExitStrictFailure : kExitOk;
}

int cmd_tables(Context& ctx, const TablesFlags& f) {
  if (f.n < 1) throw DomainError("--n must be >= 1");
  if (!(f.step > 0.0)) throw DomainError("--step must be positive");
  const SphericalMarginal marginal(f.n);
  double lo = -marginal.support_edge(), hi = marginal.support_edge();
  if (!f.range.empty()) {
    const auto colon = f.range.find(':');
    if (colon == std::string::npos) throw DomainError("--range must look like a:b");
    try {
      lo = std::stod(f.range.substr(0, colon));
      hi = std::stod(f.range.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw DomainError("--range must look like a:b");
    }
    if (!(lo <= hi)) throw DomainError("--range needs a <= b");
  }
  const auto count = static_cast<std::uint64_t>(std::floor((hi - lo) / f.step + 1e-9)) + 1;
  if (count > 100'000'000) throw DomainError("--range/--step would produce more than 1e8 rows");
  std::ostringstream csv;
  csv << "t,phi_n,Phi_n\n";
  for (std::uint64_t i = 0; i < count; ++i) {
    const double t = lo + static_cast<double>(i) * f.step;
    const Density d = marginal.phi(t);
    csv << fmt(t) << ',' << (d.unbounded ? "inf" : fmt(d.value)) << ',' << fmt(marginal.Phi(t)) << '\n';
  }
  if (f.out.empty()) {
    ctx.out << csv.str();
  } else {
    write_text(f.out, csv.str());
    ctx.outputs.push_back(f.out);
    ctx.emit(json{{"n", f.n}, {"out", f.out}, {"rows", count}});
  }
  return kExitOk;
}

int cmd_refcheck(Context& ctx, const RefcheckFlags& f) {
  if (f.count < 1) throw DomainError("--count must be >= 1");
  ctx.seeds["seed"] = f.seed;
  CounterRng rng(f.seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.count; ++i) {
    std::array<double, 4> x{};
    for (double& v : x) v = rng.normal();
    double l2 = 0.0;
    for (double v : x) l2 += v * v;
    l2 = std::sqrt(l2);
    double s4 = 0.0;
    for (double v : l4_reference_embedding(x)) s4 += v * v * v * v;
    const double l4 = std::pow(s4, 0.25);
    worst = std::max(worst, std::abs(l4 - l2) / l2);
  }
  const bool pass = worst <= f.tolerance;
  ctx.emit(json{{"count", f.count}, {"max_mismatch", worst}, {"pass", pass}, {"seed", f.seed}, {"tolerance", f.tolerance}});
  return ctx.strict && !pass ? kExitStrictFailure : kExitOk;
}

std::vector<std::string> strip_manifest_flags(const std::vector<std::string>& argv) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a == "--manifest" || a == "--from-manifest") {
      ++i;
      continue;
    }
    if (a.rfind("--manifest=", 0) == 0 || a.rfind("--from-manifest=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

int replay(const Global& g, const std::string& program, std::ostream& out, std::ostream& err) {
  const RunManifest recorded = read_manifest(g.from_manifest);
  if (recorded.argv.empty()) throw DomainError("run manifest has an empty argv");
  std::vector<std::string> args = strip_manifest_flags(recorded.argv);
  args[0] = program;
  const std::string target = g.manifest.empty() ? g.from_manifest + ".replay.json" : g.manifest;
  args.push_back("--manifest");
  args.push_back(target);
  const int code = run(args, out, err);
  const RunManifest now = read_manifest(target);
  std::size_t same = 0;
  for (const auto& [path, hash] : recorded.outputs) {
    auto it = now.outputs.find(path);
    if (it != now.outputs.end() && it->second == hash) {
      ++same;
    } else {
      err << "replay: output differs: " << path << '\n';
    }
  }
  const bool identical = same == recorded.outputs.size() && now.outputs.size() == recorded.outputs.size() &&
                         code == recorded.exit_code;
  err << "replay: " << same << "/" << recorded.outputs.size() << " outputs identical"
      << (code == recorded.exit_code ? "" : ", exit code differs") << '\n';
  return identical ? code : kExitStrictFailure;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explicit embeddings of l2^n into permutation-invariant normed spaces", "pinembed"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();
  Global g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores; default $PINEMBED_THREADS or 1)");
  app.add_flag("--strict", g.strict, "Exit 3 when a band or criterion fails");
  app.add_option("--format", g.format, "json | text")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--manifest", g.manifest, "Where to write the run manifest");
  app.add_option("--from-manifest", g.from_manifest, "Re-run a recorded command and compare output hashes");

  PlanFlags plan_flags, build_plan_flags;
  BuildFlags build_flags;
  VerifyFlags verify_flags;
  DistortFlags distort_flags;
  TablesFlags tables_flags;
  RefcheckFlags refcheck_flags;

  auto* plan = app.add_subcommand("plan", "Derive construction parameters and print the EmbeddingSpec");
  add_plan_flags(plan, plan_flags);

  auto* build = app.add_subcommand("build", "Build the row-group matrix, multiplicity table and M values");
  add_plan_flags(build, build_plan_flags);
  build->add_option("--spec", build_flags.spec_file, "Spec JSON file (instead of plan flags)");
  build->add_option("--out", build_flags.out, "Output directory")->required();
  build->add_option("--norm", build_flags.norms, "Norm descriptor for M (repeatable; default lp:2)");
  build->add_option("--resolution", build_flags.resolution, "Quadrature slices for large N")->capture_default_str();
  build->add_option("--profile", build_flags.profile, "auto | entrywise | quadrature")->capture_default_str();
  build->add_option("--truncate-columns", build_flags.truncate, "Keep the first k columns");
  build->add_option("--cap", build_flags.cap, "Refuse lattices with more estimated points")->capture_default_str();
  build->add_flag("--dense", build_flags.dense, "Also write all N rows to rows.tsv (N <= 1e5)");

  auto* verify = app.add_subcommand("verify", "Projected quantiles against the spherical marginal");
  verify->add_option("--matrix,matrix", verify_flags.matrix, "Matrix directory")->required();
  verify->add_option("--delta-eff", verify_flags.delta, "'auto' or a fixed delta")->capture_default_str();
  verify->add_option("--grid", verify_flags.grid, "Quantile grid size")->capture_default_str();
  verify->add_option("--theta-seed", verify_flags.theta_seed, "Seed for sampled directions")->capture_default_str();
  verify->add_option("--theta-count", verify_flags.theta_count, "Number of directions")->capture_default_str();
  verify->add_option("--csv", verify_flags.csv, "Write per-grid-point rows here");

  auto* distort = app.add_subcommand("distort", "Norm ratios ||T theta|| / M over directions");
  distort->add_option("--matrix,matrix", distort_flags.matrix, "Matrix directory")->required();
  distort->add_option("--norm", distort_flags.norm, "Norm descriptor")->capture_default_str();
  distort->add_option("--theta-seed", distort_flags.theta_seed, "Seed for sampled directions")->capture_default_str();
  distort->add_option("--theta-count", distort_flags.theta_count, "Number of directions")->capture_default_str();
  distort->add_flag("--basis", distort_flags.basis, "Use the standard basis instead of sampled directions");
  distort->add_option("--M", distort_flags.M, "Override the scaling constant");
  distort->add_option("--resolution", distort_flags.resolution, "Quadrature slices if M must be computed")
      ->capture_default_str();
  distort->add_option("--max-distortion", distort_flags.max_distortion, "Pass bound (default: spec epsilon)");

  auto* tables = app.add_subcommand("tables", "CSV of phi_n and Phi_n on a grid");
  tables->add_option("--n", tables_flags.n, "Dimension")->required();
  tables->add_option("--range", tables_flags.range, "a:b (default the full support)");
  tables->add_option("--step", tables_flags.step, "Grid step")->capture_default_str();
  tables->add_option("--out", tables_flags.out, "Write the CSV here instead of stdout");

  auto* refcheck = app.add_subcommand("refcheck", "Check the l2^4 -> l4^12 isometry identity");
  refcheck->add_option("--count", refcheck_flags.count, "Number of random inputs")->capture_default_str();
  refcheck->add_option("--seed", refcheck_flags.seed, "Seed")->capture_default_str();
  refcheck->add_option("--tolerance", refcheck_flags.tolerance, "Relative tolerance")->capture_default_str();

  app.require_subcommand(0, 1);

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!g.from_manifest.empty()) return replay(g, argv.empty() ? "pinembed" : argv[0], out, err);
    if (app.get_subcommands().empty()) {
      err << app.help();
      return kExitUsage;
    }

    Context ctx;
    ctx.threads = parse_threads(g.threads);
    ctx.strict = g.strict;
    ctx.format = g.format == "text" ? Format::text : Format::json;
    const CLI::App* sub = app.get_subcommands().front();
    ctx.command = sub->get_name();

    const auto start = std::chrono::steady_clock::now();
    int code = kExitOk;
    if (sub == plan) code = cmd_plan(ctx, plan_flags);
    else if (sub == build) code = cmd_build(ctx, build_plan_flags, build_flags);
    else if (sub == verify) code = cmd_verify(ctx, verify_flags);
    else if (sub == distort) code = cmd_distort(ctx, distort_flags);
    else if (sub == tables) code = cmd_tables(ctx, tables_flags);
    else if (sub == refcheck) code = cmd_refcheck(ctx, refcheck_flags);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string printed = ctx.out.str();
    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.command = ctx.command;
    manifest.argv = argv;
    manifest.spec = ctx.spec;
    manifest.seeds = ctx.seeds;
    for (const auto& p : ctx.inputs) manifest.inputs[p.generic_string()] = sha256_file(p);
    for (const auto& p : ctx.outputs) manifest.outputs[p.generic_string()] = sha256_file(p);
    manifest.outputs[kStdoutKey] = sha256_hex(printed);
    manifest.wall_seconds = seconds;
    manifest.exit_code = code;
    fs::path where = g.manifest;
    if (where.empty()) {
      where = ctx.command == "build" ? fs::path(build_flags.out) / "manifest.json"
                                     : fs::path(ctx.command + ".manifest.json");
    }
    write_manifest(where, manifest);

    out << printed;
    out.flush();
    return code;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace pinembed::cli
