#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "crweyl/acceptance.hpp"
#include "crweyl/invariants.hpp"
#include "crweyl/report.hpp"

using namespace crweyl;
using json = nlohmann::ordered_json;

namespace {

using CR = CComplex<Real>;
using CQ = GaussRational;

struct Run {
  int status;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(CRWEYL_CLI) + " " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f);
  std::string out;
  std::array<char, 4096> buf;
  for (std::size_t k; (k = fread(buf.data(), 1, buf.size(), f)) > 0;) out.append(buf.data(), k);
  const int st = pclose(f);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      else if (c == ',' && !quoted) {
        row.push_back(cell);
        cell.clear();
      } else cell += c;
    }
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  FAIL("missing column " << name);
  return 0;
}

double d(const std::string& s) { return to_double(report_value({s, "0"}).re); }

double rho_at(const Hypersurface& s, const std::vector<CR>& p) { return abs_d(field_eval(s.rho(), p)); }

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("every catalog entry builds a real surface with its sample point on it") {
    CHECK(catalog_names() == std::vector<std::string>{"ellipsoid", "ellipsoid-rev", "normal-form", "pluriharmonic", "sphere", "tube"});
    for (const auto& name : catalog_names()) {
      CAPTURE(name);
      CatalogEntry e = catalog_build(name);
      CHECK(field_is_real(e.surface.rho()) != Tri::False);
      CHECK(rho_at(e.surface, sample_point(e)) < 1e-30);
      CHECK_FALSE(e.knownFacts.empty());
      CHECK(catalog_build(e.descriptor()).descriptor() == e.descriptor());
    }
  }

  TEST_CASE("catalog parameters") {
    CHECK(catalog_build("sphere:n=3").surface.n() == 3);
    CHECK(catalog_build("ellipsoid-rev:a=0.25").params.at("a") == Rational(1, 4));
    CHECK_THROWS_WITH_AS(catalog_build("cube"), doctest::Contains("unknown surface"), Error);
    for (const char* bad : {"ellipsoid-rev:a=1", "sphere:n=0", "sphere:m=2", "tube:n=x", "sphere:n"}) {
      CAPTURE(bad);
      try {
        catalog_build(bad);
        FAIL("accepted");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadParameter);
      }
    }
  }

  TEST_CASE("normal-form coefficients are hermitian-symmetric and tracefree") {
    auto c = normal_form_coefficients(2, 7);
    auto at = [&](int a, int b, int g, int s) { return c[((a * 2 + b) * 2 + g) * 2 + s]; };
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int g = 0; g < 2; ++g)
          for (int s = 0; s < 2; ++s) {
            CHECK(at(a, b, g, s) == at(g, b, a, s));
            CHECK(at(a, b, g, s) == at(a, s, g, b));
            CHECK(at(a, b, g, s) == conj(at(b, a, s, g)));
          }
    for (int g = 0; g < 2; ++g)
      for (int s = 0; s < 2; ++s) CHECK(at(0, 0, g, s) + at(1, 1, g, s) == CQ());
    CHECK(normal_form_coefficients(2, 7) == c);
    CHECK_FALSE(normal_form_coefficients(2, 8) == c);
  }

  TEST_CASE("point_place") {
    auto sphere = catalog_build("sphere").surface;
    auto p = point_place(sphere, {CR(), CR(), CR(Real(2))}, {RayKind::Radial, {}});
    CHECK(abs_d(CR(p.coords[2] - CR(Real(1)))) < 1e-35);
    CHECK(abs_d(p.coords[0]) == 0);

    auto e = catalog_build("ellipsoid-rev").surface;
    const CR r(sqrt(Real(Rational(1, 2))));
    auto q = point_place(e, {r, CR(), CR(Real(0), Real(2))}, {RayKind::W, {}});
    CHECK(abs_d(CR(q.coords[2] - CR(Real(0), Real(1)))) < 1e-35);
    CHECK(abs_d(CR(q.coords[0] - r)) == 0);
    CHECK(q.residual < 1e-35);

    std::vector<CR> miss{CR(Real(2)), CR(), CR(Real(2))};
    CHECK_THROWS_AS(point_place(sphere, miss, {RayKind::Vector, parse_point("0,1,0")}), Error);
    try {
      point_place(sphere, miss, {RayKind::Vector, parse_point("0,1,0")});
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::NoConvergence);
    }
  }

  TEST_CASE("point literals") {
    auto p = parse_point("1/2+3/4i, -i, sqrt(1/2), 0.25-2i, (1/3)*sqrt(2)i");
    REQUIRE(p.size() == 5);
    CHECK(p[0].re == Real(0.5));
    CHECK(p[0].im == Real(0.75));
    CHECK(p[1].im == Real(-1));
    CHECK(abs(p[2].re * p[2].re - Real(0.5)) < Real(1e-35));
    CHECK(p[3].re == Real(0.25));
    CHECK(p[3].im == Real(-2));
    CHECK(abs(p[4].im * p[4].im * 9 - 2) < Real(1e-35));

    auto x = parse_point_exact("1/3, 2/3i, -1/2+i");
    CHECK(x == std::vector<CQ>{CQ(Rational(1, 3)), CQ(Rational(0), Rational(2, 3)), CQ(Rational(-1, 2), Rational(1))});
    CHECK(parse_point_exact("0.25") == std::vector<CQ>{CQ(Rational(1, 4))});
    try {
      parse_point_exact("sqrt(2)");
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BackendUnsupported);
    }
    CHECK_THROWS_AS(parse_point("1+"), Error);
    CHECK_THROWS_AS(parse_point("abc"), Error);
    CHECK(parse_ray("w").kind == RayKind::W);
    CHECK(parse_ray("radial").kind == RayKind::Radial);
    CHECK(parse_ray("1,0,i").v.size() == 3);
  }

  TEST_CASE("report JSON round-trips") {
    for (const char* name : {"sphere", "tube", "normal-form"}) {
      CAPTURE(name);
      CatalogEntry e = catalog_build(name);
      ReportOptions o;
      o.backend = Backend::Exact;
      o.scale = InvariantScale::Given;
      InvariantReport r = compute_report(e.surface, e.descriptor(), *e.sample.exact, o);
      CHECK(report_from_json(json::parse(report_to_json(r).dump())) == r);
    }
    CatalogEntry e = catalog_build("ellipsoid-rev");
    InvariantReport r = compute_report(e.surface, e.descriptor(), sample_point(e), ReportOptions{});
    const InvariantReport back = report_from_json(json::parse(report_to_json(r).dump()));
    CHECK(back == r);
    // full precision survives the decimal strings
    for (const auto& [k, v] : r.quantities) {
      CAPTURE(k);
      CHECK(report_value(back.find(k) ? *back.find(k) : ReportValue{}) == report_value(v));
    }
  }

  TEST_CASE("report contents on the tube") {
    CatalogEntry e = catalog_build("tube");
    ReportOptions o;
    o.backend = Backend::Exact;
    o.scale = InvariantScale::Given;
    InvariantReport r = compute_report(e.surface, e.descriptor(), *e.sample.exact, o);
    REQUIRE(r.find("rscal"));
    CHECK(r.find("rscal")->re == "2");
    CHECK(r.find("norm_s2")->re == "2/3");
    CHECK(r.find("i_prime")->re == "1/9");
    CHECK(r.find("S_{1 1bar 2 2bar}"));
    CHECK(r.find("h_{1 1bar}"));
    CHECK(r.find("X_{1}"));
    CHECK(r.backend == "exact");
    CHECK(r.scale == "given");

    o.show = {"Iprime"};
    o.scale = InvariantScale::PseudoEinstein;
    try {
      compute_report(e.surface, e.descriptor(), *e.sample.exact, o);
      FAIL("accepted");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::BackendUnsupported);
    }
    o.show = {"bogus"};
    CHECK_THROWS_AS(compute_report(e.surface, e.descriptor(), *e.sample.exact, o), Error);
  }

  TEST_CASE("golden reports") {
    struct G {
      const char* file;
      const char* surface;
      Backend backend;
    };
    for (const G& g : {G{"sphere.exact.json", "sphere", Backend::Exact}, G{"tube.exact.json", "tube", Backend::Exact},
                       G{"normal-form.exact.json", "normal-form", Backend::Exact},
                       G{"tube.float.json", "tube", Backend::Float},
                       G{"ellipsoid-rev.float.json", "ellipsoid-rev", Backend::Float}}) {
      CAPTURE(g.file);
      std::ifstream in(std::string(CRWEYL_GOLDEN_DIR) + "/" + g.file);
      REQUIRE(in);
      const InvariantReport want = report_from_json(json::parse(in));
      CatalogEntry e = catalog_build(g.surface);
      ReportOptions o;
      o.backend = g.backend;
      o.scale = e.scale;
      InvariantReport got = g.backend == Backend::Exact ? compute_report(e.surface, e.descriptor(), *e.sample.exact, o)
                                                        : compute_report(e.surface, e.descriptor(), sample_point(e), o);
      CHECK(got.surface == want.surface);
      CHECK(got.backend == want.backend);
      CHECK(got.scale == want.scale);
      CHECK(got.tolerances == want.tolerances);
      REQUIRE(got.quantities.size() == want.quantities.size());
      for (std::size_t k = 0; k < got.quantities.size(); ++k) {
        CAPTURE(want.quantities[k].first);
        CHECK(got.quantities[k].first == want.quantities[k].first);
        if (g.backend == Backend::Exact) CHECK(got.quantities[k].second == want.quantities[k].second);
        else {
          const CR a = report_value(got.quantities[k].second), b = report_value(want.quantities[k].second);
          CHECK(abs_d(CR(a - b)) <= 1e-30 * std::max(1.0, abs_d(b)));
        }
      }
    }
  }

  TEST_CASE("catalog facts hold at the sample points") {
    for (Backend b : {Backend::Float, Backend::Exact})
      for (const auto& c : catalog_fact_checks(b)) {
        CheckResult r = run_check(c);
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.pass);
      }
  }

  TEST_CASE("filtering checks") {
    auto all = acceptance_checks();
    REQUIRE(all.size() == 15);
    for (int k = 0; k < 15; ++k) CHECK(all[k].id == k + 1);
    CHECK(filter_checks(all, {}).size() == 15);
    auto g = filter_checks(all, {"gauss"});
    REQUIRE(g.size() == 1);
    CHECK(g[0].id == 9);
    CHECK(filter_checks(all, {"7", "normal-form"}).size() == 2);
    CHECK(filter_checks(all, {"ellipsoid"}).size() == 3);
    CHECK(filter_checks(all, {"nothing"}).empty());
  }
}

TEST_SUITE("cli") {
  TEST_CASE("eval on the sphere") {
    Run r = cli("eval --surface sphere:n=2 --point \"0,0,1\" --show S,normS2");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["surface"] == "sphere:n=2");
    int s = 0;
    for (const auto& [k, v] : j["quantities"].items()) {
      CHECK(d(v["re"].get<std::string>()) == 0);
      CHECK(d(v["im"].get<std::string>()) == 0);
      s += k.rfind("S_{", 0) == 0;
    }
    CHECK(s == 16);
    CHECK(j["quantities"].contains("norm_s2"));
  }

  TEST_CASE("eval I' on the tube from a seed") {
    Run r = cli("eval --surface tube:n=2 --point-seed \"1,0,0.2\" --show Iprime");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(d(j["quantities"]["i_prime"]["re"].get<std::string>()) - 1.0 / 9) < 1e-30);
  }

  TEST_CASE("eval X on E(1/2) agrees with the library") {
    Run r = cli("eval --surface ellipsoid-rev:a=1/2 --point \"sqrt(1/2),0,1i\" --show X");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(d(j["quantities"]["X_{1}"]["re"].get<std::string>()) - 6.72014e-3) < 1e-8);
    CHECK(std::abs(d(j["quantities"]["X_{2}"]["re"].get<std::string>())) < 1e-30);
    CHECK(d(j["quantities"]["x_route_residual"]["re"].get<std::string>()) < 1e-30);
  }

  TEST_CASE("eval exact backend and csv") {
    Run r = cli("eval --surface tube --backend exact --show normS2,Rscal --format csv");
    REQUIRE(r.status == 0);
    CHECK(r.out == "key,re,im\n\"rscal\",2,0\n\"norm_s2\",2/3,0\n");
  }

  TEST_CASE("custom rho") {
    Run r = cli("eval --rho \"z1*conj(z1)+z2*conj(z2)+z3*conj(z3)-1\" --nvars 3 --point \"0,0,1\" --show Rscal --backend exact --format csv");
    REQUIRE(r.status == 0);
    CHECK(r.out == "key,re,im\n\"rscal\",6,0\n");
    CHECK(cli("eval --rho \"z1+z2+z3\" --nvars 3 --point \"0,0,0\"").status == 2);
  }

  TEST_CASE("precision flag and environment") {
    json a = json::parse(cli("eval --surface sphere --show J").out);
    CHECK(a["precision"] == 128);
    json b = json::parse(cli("--precision 200 eval --surface sphere --show J").out);
    CHECK(b["precision"] == 200);
    json c = json::parse(cli("eval --surface sphere --show J").out);
    CHECK(c["precision"] == 128);
    const std::string cmd = std::string("CRWEYL_PRECISION=256 ") + CRWEYL_CLI + " eval --surface sphere --show J";
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f);
    std::string out;
    std::array<char, 4096> buf;
    for (std::size_t k; (k = fread(buf.data(), 1, buf.size(), f)) > 0;) out.append(buf.data(), k);
    pclose(f);
    CHECK(json::parse(out)["precision"] == 256);
  }

  TEST_CASE("exit codes and error objects") {
    Run off = cli("eval --surface sphere --point \"0,0,2\"");
    CHECK(off.status == 2);
    json e = json::parse(off.out)["error"];
    CHECK(e["code"] == "OffSurface");
    CHECK(e["module"] == "frame");
    CHECK_FALSE(e["message"].get<std::string>().empty());

    CHECK(json::parse(cli("eval --surface cube").out)["error"]["code"] == "UnknownSurface");
    CHECK(json::parse(cli("eval --surface sphere:n=3 --show X").out)["error"]["code"] == "WrongDimension");
    CHECK(json::parse(cli("eval --surface ellipsoid-rev --backend exact").out)["error"]["code"] == "BackendUnsupported");
    CHECK(json::parse(cli("scan --surface sphere --point-seed \"{t},0,1\" --grid \"t=0:1\"").out)["error"]["code"] ==
          "BadGridSpec");
    CHECK(json::parse(cli("scan --surface sphere --point-seed \"0,0,1\" --grid \"t=0:1:3\"").out)["error"]["code"] ==
          "BadGridSpec");

    CHECK(cli("eval --surface sphere --bogus").status == 3);
    CHECK(cli("eval --surface sphere --show zzz").status == 3);
    CHECK(cli("eval").status == 3);
    CHECK(cli("").status == 3);
    CHECK(cli("eval --surface sphere --backend quad").status == 3);
    CHECK(cli("--help").status == 0);
  }

  TEST_CASE("sphere scan") {
    Run r = cli("scan --surface sphere --point-seed \"{x},{y},1\" --grid \"x=-0.5:0.5:3,y=0:0.4:2\"");
    REQUIRE(r.status == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 7);
    const auto& h = rows[0];
    const std::size_t s2 = column(h, "norm_s2"), st = column(h, "status"), x = column(h, "x"), y = column(h, "y");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(rows[k][st] == "ok");
      CHECK(d(rows[k][s2]) == 0);
      CHECK(rows[k][0] == std::to_string(k - 1));
    }
    // row-major: the last axis varies fastest
    CHECK(d(rows[1][x]) == -0.5);
    CHECK(d(rows[2][y]) == 0.4);
    CHECK(d(rows[3][x]) == 0);
  }

  TEST_CASE("E(1/2) scan along w = is matches the closed-form |S|^2") {
    Run r = cli("scan --surface ellipsoid-rev:a=1/2 --point-seed \"0.7,0,{s}i\" --direction \"1,0,0\" --grid \"s=0:1.2:7\"");
    REQUIRE(r.status == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 8);
    const auto& h = rows[0];
    const std::size_t s2 = column(h, "norm_s2"), st = column(h, "status"), z1 = column(h, "z1_re"), s = column(h, "s");
    // s = 0 puts the point where rho_w = 0: flagged, not dropped
    CHECK(rows[1][st] == "FrameDegenerate");
    CHECK(rows[1][s2].empty());
    for (std::size_t k = 2; k < rows.size(); ++k) {
      CAPTURE(k);
      REQUIRE(rows[k][st] == "ok");
      const double x = d(rows[k][z1]), sv = d(rows[k][s]);
      const double z2 = x * x, rw2 = sv * sv / 4;  // rho_w = -is + a is
      const double want = std::pow(0.5, 4) * std::pow(z2, 4) / (6 * std::pow(z2 + rw2, 6));
      CHECK(std::abs(d(rows[k][s2]) - want) < 1e-12 * want);
    }
  }

  TEST_CASE("tube scan has a constant |S|^2 column") {
    Run r = cli("scan --surface tube --point-seed \"1,{t},0.2+{u}i\" --grid \"t=-1:1:3,u=0:2:2\"");
    REQUIRE(r.status == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 7);
    const std::size_t s2 = column(rows[0], "norm_s2");
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::abs(d(rows[k][s2]) - 2.0 / 3) < 1e-30);
  }

  TEST_CASE("scan output does not depend on the worker count") {
    const std::string args = "scan --surface pluriharmonic --point-seed \"{t},0.3,1\" --grid \"t=0:0.5:4\" --jobs ";
    Run one = cli(args + "1"), three = cli(args + "3");
    REQUIRE(one.status == 0);
    CHECK(one.out == three.out);
  }

  TEST_CASE("verify filters and reports JSON lines") {
    Run r = cli("verify --only gauss");
    CHECK(r.status == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    json first = json::parse(line);
    CHECK(first["id"] == 9);
    CHECK(first["pass"] == true);
    std::getline(in, line);
    json summary = json::parse(line);
    CHECK(summary["checks"] == 1);
    CHECK(summary["failed"] == 0);

    Run facts = cli("verify --backend exact --only catalog");
    CHECK(facts.status == 0);
    CHECK(facts.out.find("\"pass\":false") == std::string::npos);
  }
}
