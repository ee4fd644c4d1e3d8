#include "crweyl/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "crweyl/invariants.hpp"

namespace crweyl {

namespace {

using CR = CComplex<Real>;
using json = nlohmann::ordered_json;

const std::vector<std::string> kInvariantGroups = {"X", "Iprime", "divX"};

std::string canonical_group(const std::string& g) {
  static const std::vector<std::pair<std::string, std::string>> aliases = {
      {"rscal", "Rscal"}, {"norm_s2", "normS2"}, {"s_power", "Spower"}, {"i_prime", "Iprime"},
      {"div_x", "divX"}, {"ric", "Ric"}, {"fefferman_j", "J"}};
  for (const auto& [a, c] : aliases)
    if (g == a) return c;
  for (const auto& k : report_groups())
    if (g == k) return k;
  throw Error(ErrorCode::UsageError, "catalog-cli", "unknown quantity '" + g + "' for --show");
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class R>
ReportValue fmt(const CComplex<R>& z) {
  return {to_string(z.re), to_string(z.im)};
}

ReportValue fmt(double x) { return {fmt_double(x), "0"}; }

template <class R>
double rel_diff(const Tensor<R>& a, const Tensor<R>& b) {
  double m = 0, s = 1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s = std::max(s, abs_d(a.data()[k].value()));
    m = std::max(m, abs_d(CComplex<R>(a.data()[k].value() - b.data()[k].value())));
  }
  return m / s;
}

template <class R>
bool unit_hessian(const FrameContext<R>& ctx) {
  for (int j = 0; j < ctx.N(); ++j)
    for (int k = 0; k < ctx.N(); ++k)
      if (abs_d(CComplex<R>(ctx.hess(j, k).value() - CComplex<R>(R(j == k ? 1 : 0)))) > 1e-30) return false;
  return true;
}

class Builder {
 public:
  explicit Builder(InvariantReport& r) : r_(r) {}
  template <class R>
  void tensor(const std::string& name, const Tensor<R>& t) {
    for (const auto& idx : t.indices()) put(tensor_label(name, t.kinds(), idx), fmt(t.value(idx)));
  }
  void put(const std::string& key, ReportValue v) { r_.quantities.push_back({key, std::move(v)}); }

 private:
  InvariantReport& r_;
};

template <class R>
InvariantReport build(const Hypersurface& s, const std::string& descriptor, const std::vector<CComplex<R>>& coords,
                      const ReportOptions& opt) {
  std::vector<std::string> groups;
  for (const auto& g : opt.show) groups.push_back(canonical_group(g));
  const bool explicitShow = !groups.empty();
  if (!explicitShow) groups = report_groups();
  auto wants = [&](const std::string& g) { return std::find(groups.begin(), groups.end(), g) != groups.end(); };

  const int n = s.n();
  const bool pe = opt.scale == InvariantScale::PseudoEinstein;
  bool inv = false;
  for (const auto& g : kInvariantGroups) inv = inv || wants(g);
  if (inv && n != 2) {
    if (explicitShow) throw Error(ErrorCode::WrongDimension, "invariants", "X, I' and div X are defined for n = 2 only");
    inv = false;
  }
  if (inv && pe && is_exact_v<R>) {
    if (explicitShow)
      throw Error(ErrorCode::BackendUnsupported, "invariants",
                  "the volume-normalized scale needs fractional powers; use the float backend or --scale given");
    inv = false;
  }

  FrameConfig cfg = opt.cfg;
  if (inv && !pe) cfg.derivOrder = std::max(cfg.derivOrder, 2);
  auto ctx = context_build<R>(s, coords, cfg);

  InvariantReport r;
  r.surface = descriptor;
  for (const auto& c : ctx.point().coords) r.point.push_back(fmt(c));
  r.backend = is_exact_v<R> ? "exact" : "float";
  r.precision = is_exact_v<R> ? 0 : real_precision_bits();
  r.scale = pe ? "pseudo-einstein" : "given";
  r.tolerances = {{"on_surface", cfg.onSurfaceTol}, {"frame", cfg.frameTol},     {"levi", cfg.leviTol},
                  {"fefferman", cfg.fefferTol},    {"matrix", cfg.matrixTol},   {"route", opt.routeTol}};
  Builder b(r);

  auto conn = connection(ctx);
  auto pack = curvature_general(ctx);
  auto g = metric(ctx);

  if (wants("h"))
    b.tensor("h", Tensor<R>::build(n, {IndexKind::lower(false), IndexKind::lower(true)}, ctx.id(),
                                   [&](const std::vector<int>& x) { return ctx.h(x[0], x[1]); }));
  if (wants("A")) b.tensor("A", pack.A);
  if (wants("Ric")) b.tensor("Ric", pack.Ric);
  if (wants("Rscal")) b.put("rscal", fmt(pack.Rscal.value()));
  if (wants("S")) b.tensor("S", pack.S4);
  if (wants("normS2")) b.put("norm_s2", fmt(norm2(pack.S4, g).value()));
  if (wants("Spower") && n >= 2) b.put("s_power", fmt(cmw_power_scalar(pack.S4, n + 1, g)));
  if (wants("J")) b.put("fefferman_j", fmt(ctx.fefferman().value()));

  if (inv) {
    if constexpr (!is_exact_v<R>) {
      if (pe) {
        PEScale sc = pe_scale(ctx);
        Tensor<Real> xa = x_alpha_direct(sc.ctxTilde, sc.conn, sc.pack);
        auto xb = x_alpha_transform(sc);
        double route = 0;
        for (int a = 0; a < n; ++a) {
          const CR d = xa.value({a}) - xb[a];
          route = std::max(route, abs_d(d) / std::max(1.0, abs_d(xa.value({a}))));
        }
        if (route > opt.routeTol)
          throw Error(ErrorCode::RouteDisagreement, "invariants", "X: direct and transformation-law routes disagree");
        b.put("norm_s2_pe", fmt(norm2(sc.pack.S4, metric(sc.ctxTilde)).value()));
        if (wants("X")) {
          b.tensor("X", xa);
          CR x2;
          for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c) x2 += sc.ctxTilde.hinv(a, c).value() * xa.value({a}) * conj(xa.value({c}));
          b.put("abs_x", fmt(CR(sqrt(x2.re))));
          b.put("x_route_residual", fmt(route));
        }
        if (wants("Iprime")) b.put("i_prime", fmt(CR(i_prime(sc))));
        if (wants("divX")) b.put("div_x", fmt(CR(div_x(sc))));
        b.put("j_residual", fmt(sc.jResidual));
        b.put("pe_defect", fmt(sc.peDefect));
      }
    }
    if (!pe) {
      Tensor<R> x = x_alpha_direct(ctx, conn, pack);
      if (wants("X")) {
        b.tensor("X", x);
        CComplex<R> x2;
        for (int a = 0; a < n; ++a)
          for (int c = 0; c < n; ++c) x2 += ctx.hinv(a, c).value() * x.value({a}) * conj(x.value({c}));
        b.put("norm_x2", fmt(x2));
        b.put("abs_x", fmt(std::sqrt(std::max(0.0, to_double(x2.re)))));
      }
      if (wants("Iprime")) b.put("i_prime", fmt(i_prime_at(ctx)));
      if (wants("divX")) {
        auto d = nabla(x, DirKind::Anti, ctx, conn);
        b.put("div_x", fmt(CComplex<R>(contract(raise(d, 1, g), 0, 1).value({}).re)));
      }
      b.put("pe_defect", fmt(pseudo_einstein_defect(pack, ctx)));
    }
  }

  if (wants("residuals")) {
    b.put("on_surface_residual", fmt(ctx.point().residual));
    b.put("xi_residual", fmt(xi_residual(ctx)));
    b.put("characteristic_residual", fmt(characteristic_residual(ctx)));
    if (ctx.hessian_invertible()) {
      auto gr = gauss_check(ctx);
      b.put("gauss_curvature_residual", fmt(gr.curvature));
      b.put("gauss_torsion_residual", fmt(gr.torsion));
    }
    if (unit_hessian(ctx)) {
      auto u = curvature_unit_hessian(ctx);
      double m = std::max({rel_diff(u.R4, pack.R4), rel_diff(u.S4, pack.S4), rel_diff(u.Ric, pack.Ric), rel_diff(u.A, pack.A)});
      b.put("unit_hessian_route_residual", fmt(m));
    }
  }
  return r;
}

}  // namespace

const ReportValue* InvariantReport::find(const std::string& key) const {
  for (const auto& [k, v] : quantities)
    if (k == key) return &v;
  return nullptr;
}

const std::vector<std::string>& report_groups() {
  static const std::vector<std::string> g = {"h", "A", "Ric", "Rscal", "S", "normS2", "Spower",
                                             "J", "X", "Iprime", "divX", "residuals"};
  return g;
}

InvariantReport compute_report(const Hypersurface& s, const std::string& descriptor, const std::vector<CR>& point,
                               const ReportOptions& opt) {
  if (opt.backend == Backend::Exact)
    throw Error(ErrorCode::BackendUnsupported, "catalog-cli", "the exact backend needs a rational point");
  return build<Real>(s, descriptor, point, opt);
}

InvariantReport compute_report(const Hypersurface& s, const std::string& descriptor,
                               const std::vector<GaussRational>& point, const ReportOptions& opt) {
  if (opt.backend == Backend::Exact) return build<Rational>(s, descriptor, point, opt);
  std::vector<CR> p;
  for (const auto& c : point) p.push_back(convert<Real>(c));
  return build<Real>(s, descriptor, p, opt);
}

json report_to_json(const InvariantReport& r) {
  auto val = [](const ReportValue& v) { return json{{"re", v.re}, {"im", v.im}}; };
  json j;
  j["surface"] = r.surface;
  j["point"] = json::array();
  for (const auto& p : r.point) j["point"].push_back(val(p));
  j["backend"] = r.backend;
  j["precision"] = r.precision;
  j["scale"] = r.scale;
  j["tolerances"] = json::object();
  for (const auto& [k, v] : r.tolerances) j["tolerances"][k] = v;
  j["quantities"] = json::object();
  for (const auto& [k, v] : r.quantities) j["quantities"][k] = val(v);
  return j;
}

InvariantReport report_from_json(const json& j) {
  auto val = [](const json& v) { return ReportValue{v.at("re").get<std::string>(), v.at("im").get<std::string>()}; };
  InvariantReport r;
  r.surface = j.at("surface").get<std::string>();
  for (const auto& p : j.at("point")) r.point.push_back(val(p));
  r.backend = j.at("backend").get<std::string>();
  r.precision = j.at("precision").get<unsigned>();
  r.scale = j.at("scale").get<std::string>();
  for (const auto& [k, v] : j.at("tolerances").items()) r.tolerances.push_back({k, v.get<double>()});
  for (const auto& [k, v] : j.at("quantities").items()) r.quantities.push_back({k, val(v)});
  return r;
}

std::string report_to_csv(const InvariantReport& r) {
  std::ostringstream o;
  o << "key,re,im\n";
  for (const auto& [k, v] : r.quantities) o << '"' << k << "\"," << v.re << ',' << v.im << '\n';
  return o.str();
}

CComplex<Real> report_value(const ReportValue& v) {
  auto one = [](const std::string& s) {
    if (s.find('/') != std::string::npos) return from_rational<Real>(parse_rational(s));
    return Real(s);
  };
  return CR(one(v.re), one(v.im));
}

}  // namespace crweyl
