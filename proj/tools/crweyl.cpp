#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "crweyl/acceptance.hpp"
#include "crweyl/report.hpp"

using namespace crweyl;
using json = nlohmann::ordered_json;
using CR = CComplex<Real>;

namespace {

struct Options {
  std::string surface, rho, point, pointSeed, direction = "radial", backend = "float", format = "json", scale, grid;
  int nvars = 0, wIndex = 0;
  unsigned precision = 0;
  std::vector<std::string> show, only;
  double tolOnSurface = -1, tolFrame = -1, tolLevi = -1, tolFefferman = -1, tolMatrix = -1, tolRoute = -1;
  unsigned jobs = 0;
};

struct Target {
  Hypersurface surface;
  std::string descriptor;
  InvariantScale scale;
  std::optional<CatalogEntry> entry;
};

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::UsageError, "catalog-cli", msg); }

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  }
  return out;
}

Target resolve_target(const Options& o) {
  if (!o.surface.empty() && !o.rho.empty()) usage("--surface and --rho are exclusive");
  if (!o.surface.empty()) {
    CatalogEntry e = catalog_build(o.surface);
    return {e.surface, e.descriptor(), e.scale, e};
  }
  if (o.rho.empty()) usage("one of --surface or --rho is required");
  if (o.nvars < 2) usage("--rho needs --nvars N with N >= 2");
  if (o.wIndex < 0 || o.wIndex > o.nvars) usage("--w-index must lie in 1.." + std::to_string(o.nvars));
  ScalarField f = ScalarField::polynomial(poly_parse(o.rho, o.nvars));
  if (field_is_real(f) == Tri::False) throw Error(ErrorCode::NotReal, "jetring", "the defining function is not real");
  return {Hypersurface(f, o.nvars - 1, o.wIndex - 1), "rho:" + o.rho, InvariantScale::PseudoEinstein, std::nullopt};
}

Backend backend_of(const Options& o) {
  if (o.backend == "float") return Backend::Float;
  if (o.backend == "exact") return Backend::Exact;
  usage("--backend must be exact or float");
}

ReportOptions report_options(const Options& o, const Target& t) {
  ReportOptions r;
  r.backend = backend_of(o);
  r.show = split_list(o.show);
  if (o.scale.empty()) r.scale = t.scale;
  else if (o.scale == "pe" || o.scale == "pseudo-einstein") r.scale = InvariantScale::PseudoEinstein;
  else if (o.scale == "given") r.scale = InvariantScale::Given;
  else usage("--scale must be pe or given");
  if (o.tolOnSurface >= 0) r.cfg.onSurfaceTol = o.tolOnSurface;
  if (o.tolFrame >= 0) r.cfg.frameTol = o.tolFrame;
  if (o.tolLevi >= 0) r.cfg.leviTol = o.tolLevi;
  if (o.tolFefferman >= 0) r.cfg.fefferTol = o.tolFefferman;
  if (o.tolMatrix >= 0) r.cfg.matrixTol = o.tolMatrix;
  if (o.tolRoute >= 0) r.routeTol = o.tolRoute;
  return r;
}

InvariantReport report_at(const Target& t, const Options& o, const ReportOptions& ro, const std::string& point,
                          const std::string& seed) {
  if (!point.empty() && !seed.empty()) usage("--point and --point-seed are exclusive");
  if (ro.backend == Backend::Exact) {
    if (!seed.empty())
      throw Error(ErrorCode::BackendUnsupported, "catalog-cli", "Newton placement is float only; pass an exact --point");
    if (!point.empty()) return compute_report(t.surface, t.descriptor, parse_point_exact(point), ro);
    if (t.entry && t.entry->sample.exact) return compute_report(t.surface, t.descriptor, *t.entry->sample.exact, ro);
    throw Error(ErrorCode::BackendUnsupported, "catalog-cli", "no exact sample point; pass --point");
  }
  if (!point.empty()) return compute_report(t.surface, t.descriptor, parse_point(point), ro);
  if (!seed.empty())
    return compute_report(t.surface, t.descriptor, point_place(t.surface, parse_point(seed), parse_ray(o.direction)).coords, ro);
  if (t.entry) return compute_report(t.surface, t.descriptor, sample_point(*t.entry), ro);
  usage("--point or --point-seed is required for --rho");
}

int run_eval(const Options& o) {
  Target t = resolve_target(o);
  InvariantReport r = report_at(t, o, report_options(o, t), o.point, o.pointSeed);
  if (o.format == "json") std::cout << report_to_json(r).dump(2) << '\n';
  else if (o.format == "csv") std::cout << report_to_csv(r);
  else usage("--format must be json or csv");
  return 0;
}

// ---- scan ----

struct GridAxis {
  std::string name;
  double lo, hi;
  int count;
};

std::vector<GridAxis> parse_grid(const std::string& spec) {
  auto bad = [&](const std::string& why) { return Error(ErrorCode::BadGridSpec, "catalog-cli", "grid '" + spec + "': " + why); };
  std::vector<GridAxis> axes;
  for (const auto& part : split_list({spec})) {
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) throw bad("expected NAME=LO:HI:COUNT");
    GridAxis a{part.substr(0, eq), 0, 0, 0};
    const std::string range = part.substr(eq + 1);
    const auto c1 = range.find(':'), c2 = range.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw bad("expected NAME=LO:HI:COUNT");
    try {
      std::size_t used = 0;
      a.lo = std::stod(range.substr(0, c1), &used);
      if (used != c1) throw bad("bad lower bound");
      a.hi = std::stod(range.substr(c1 + 1, c2 - c1 - 1), &used);
      if (used != c2 - c1 - 1) throw bad("bad upper bound");
      a.count = std::stoi(range.substr(c2 + 1), &used);
      if (used != range.size() - c2 - 1) throw bad("bad count");
    } catch (const std::logic_error&) {
      throw bad("bad number");
    }
    if (a.count < 1) throw bad("count must be positive");
    for (const auto& b : axes)
      if (b.name == a.name) throw bad("axis '" + a.name + "' repeated");
    axes.push_back(a);
  }
  if (axes.empty()) throw bad("no axes");
  return axes;
}

std::string substitute(std::string tmpl, const std::vector<GridAxis>& axes, const std::vector<double>& values) {
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const std::string key = "{" + axes[k].name + "}";
    char buf[40];
    *std::to_chars(buf, buf + sizeof buf - 1, values[k]).ptr = '\0';
    for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key)) tmpl.replace(pos, key.size(), buf);
  }
  for (const char* pat : {"+-", "-+"})
    for (auto pos = tmpl.find(pat); pos != std::string::npos; pos = tmpl.find(pat)) tmpl.replace(pos, 2, "-");
  for (auto pos = tmpl.find("--"); pos != std::string::npos; pos = tmpl.find("--")) tmpl.replace(pos, 2, "+");
  return tmpl;
}

std::string csv_field(const InvariantReport& r, const std::string& key) {
  const ReportValue* v = r.find(key);
  if (!v) return "";
  if (report_value(*v).im == 0) return v->re;
  return v->re + (v->im[0] == '-' ? "" : "+") + v->im + "i";
}

int run_scan(const Options& o) {
  if (o.grid.empty()) throw Error(ErrorCode::BadGridSpec, "catalog-cli", "--grid NAME=LO:HI:COUNT[,...] is required");
  const auto axes = parse_grid(o.grid);
  const std::string& tmpl = o.point.empty() ? o.pointSeed : o.point;
  if (tmpl.empty()) usage("scan needs a --point or --point-seed template with {NAME} placeholders");
  if (!o.point.empty() && !o.pointSeed.empty()) usage("--point and --point-seed are exclusive");
  for (const auto& a : axes)
    if (tmpl.find("{" + a.name + "}") == std::string::npos)
      throw Error(ErrorCode::BadGridSpec, "catalog-cli", "axis '" + a.name + "' does not occur in the point template");
  if (o.format != "csv" && o.format != "json") usage("--format must be json or csv");

  Target t = resolve_target(o);
  ReportOptions ro = report_options(o, t);
  if (!ro.show.empty()) usage("scan reports a fixed column set; drop --show");
  ro.show = {"normS2", "residuals"};
  if (t.surface.n() == 2 && !(ro.backend == Backend::Exact && ro.scale == InvariantScale::PseudoEinstein))
    ro.show.insert(ro.show.end(), {"X", "Iprime"});

  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(a.count);
  auto values_of = [&](std::size_t row) {
    std::vector<double> v(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& a = axes[k];
      const int i = static_cast<int>(row % a.count);
      row /= a.count;
      v[k] = a.count == 1 ? a.lo : a.lo + (a.hi - a.lo) * i / (a.count - 1);
    }
    return v;
  };

  struct Row {
    std::optional<InvariantReport> report;
    std::string status = "ok", message;
  };
  std::vector<Row> rows(total);
  std::atomic<std::size_t> next{0};
  const unsigned bits = real_precision_bits();
  auto worker = [&] {
    set_real_precision_bits(bits);
    for (std::size_t i = next++; i < total; i = next++) {
      const std::string p = substitute(tmpl, axes, values_of(i));
      try {
        rows[i].report = report_at(t, o, ro, o.point.empty() ? "" : p, o.point.empty() ? p : "");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::UsageError) throw;
        rows[i].status = error_code_name(e.code());
        rows[i].message = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs ? o.jobs : std::thread::hardware_concurrency(), total));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const std::vector<std::string> cols = {"norm_s2", "abs_x", "i_prime", "on_surface_residual", "xi_residual",
                                         "characteristic_residual"};
  const int N = t.surface.ambient();
  if (o.format == "csv") {
    std::cout << "index";
    for (const auto& a : axes) std::cout << ',' << a.name;
    for (int j = 1; j <= N; ++j) std::cout << ",z" << j << "_re,z" << j << "_im";
    for (const auto& c : cols) std::cout << ',' << c;
    std::cout << ",status,message\n";
  }
  for (std::size_t i = 0; i < total; ++i) {
    const auto v = values_of(i);
    const Row& row = rows[i];
    if (o.format == "csv") {
      std::cout << i;
      for (double x : v) std::cout << ',' << x;
      for (int j = 0; j < N; ++j) {
        if (row.report) std::cout << ',' << row.report->point[j].re << ',' << row.report->point[j].im;
        else std::cout << ",,";
      }
      for (const auto& c : cols) std::cout << ',' << (row.report ? csv_field(*row.report, c) : "");
      std::string msg = row.message;
      for (auto& ch : msg)
        if (ch == '"') ch = '\'';
      std::cout << ',' << row.status << ",\"" << msg << "\"\n";
    } else {
      json j;
      j["index"] = i;
      for (std::size_t k = 0; k < axes.size(); ++k) j["grid"][axes[k].name] = v[k];
      j["status"] = row.status;
      if (row.report) j["report"] = report_to_json(*row.report);
      else j["message"] = row.message;
      std::cout << j.dump() << '\n';
    }
  }
  return 0;
}

int run_verify(const Options& o) {
  const Backend b = backend_of(o);
  std::vector<AcceptanceCheck> checks;
  if (b == Backend::Float) checks = acceptance_checks();
  else
    for (auto& c : acceptance_checks())
      if (std::find(c.tags.begin(), c.tags.end(), "rational") != c.tags.end()) checks.push_back(std::move(c));
  for (auto& c : catalog_fact_checks(b)) checks.push_back(std::move(c));
  checks = filter_checks(std::move(checks), split_list(o.only));
  int failed = 0;
  for (const auto& c : checks) {
    CheckResult r = run_check(c);
    failed += !r.pass;
    json j;
    if (r.id) j["id"] = r.id;
    j["name"] = r.name;
    j["tags"] = r.tags;
    j["pass"] = r.pass;
    j["seconds"] = r.seconds;
    j["detail"] = r.detail;
    std::cout << j.dump() << std::endl;
  }
  std::cout << json{{"checks", checks.size()}, {"failed", failed}, {"pass", failed == 0}}.dump() << '\n';
  return failed == 0 ? 0 : 1;
}

void add_target_options(CLI::App* app, Options& o) {
  app->add_option("--surface", o.surface, "catalog surface NAME or NAME:k=v,...");
  app->add_option("--rho", o.rho, "polynomial defining function in z1..zN, conj(zj)");
  app->add_option("--nvars", o.nvars, "number of ambient variables for --rho");
  app->add_option("--w-index", o.wIndex, "transverse variable for --rho (1-based, default last)");
  app->add_option("--direction", o.direction, "ray for --point-seed: radial, w or a complex vector");
  app->add_option("--backend", o.backend, "float or exact");
  app->add_option("--format", o.format, "json or csv");
  app->add_option("--scale", o.scale, "pe (volume-normalized) or given");
  app->add_option("--tol-on-surface", o.tolOnSurface);
  app->add_option("--tol-frame", o.tolFrame);
  app->add_option("--tol-levi", o.tolLevi);
  app->add_option("--tol-fefferman", o.tolFefferman);
  app->add_option("--tol-matrix", o.tolMatrix);
  app->add_option("--tol-route", o.tolRoute, "allowed disagreement of the two X routes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CR and pseudohermitian invariants of real hypersurfaces"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--precision", o.precision, "MPFR precision in bits (default: CRWEYL_PRECISION or 128)");

  auto* eval = app.add_subcommand("eval", "invariants at one point");
  add_target_options(eval, o);
  eval->add_option("--point", o.point, "point on the surface, comma-separated a+bi literals");
  eval->add_option("--point-seed", o.pointSeed, "seed projected onto the surface along --direction");
  eval->add_option("--show", o.show, "quantity groups (comma-separated)");

  auto* scan = app.add_subcommand("scan", "invariants over a parametric point grid (CSV)");
  add_target_options(scan, o);
  scan->add_option("--point", o.point, "point template with {NAME} placeholders");
  scan->add_option("--point-seed", o.pointSeed, "seed template with {NAME} placeholders");
  scan->add_option("--grid", o.grid, "NAME=LO:HI:COUNT[,NAME=LO:HI:COUNT]");
  scan->add_option("--jobs", o.jobs, "worker threads (default: hardware concurrency)");
  scan->add_option("--show", o.show);
  o.format = "json";

  auto* verify = app.add_subcommand("verify", "run the acceptance suite and catalog facts");
  verify->add_option("--only", o.only, "check ids, names or tags (comma-separated)");
  verify->add_option("--backend", o.backend, "float or exact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    unsigned bits = o.precision;
    if (!bits)
      if (const char* env = std::getenv("CRWEYL_PRECISION")) {
        try {
          bits = static_cast<unsigned>(std::stoul(env));
        } catch (const std::logic_error&) {
          usage("CRWEYL_PRECISION must be a bit count");
        }
      }
    if (bits) {
      if (bits < 32 || bits > 65536) usage("precision must lie in 32..65536 bits");
      set_real_precision_bits(bits);
    }
    if (scan->parsed()) {
      if (scan->count("--format") == 0) o.format = "csv";
      return run_scan(o);
    }
    if (eval->parsed()) return run_eval(o);
    return run_verify(o);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UsageError) {
      std::cerr << "crweyl: " << e.what() << '\n';
      return 3;
    }
    std::cout << json{{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}, {"module", e.module()}}}}.dump()
              << '\n';
    return 2;
  }
}
