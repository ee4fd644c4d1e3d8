#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crweyl/frame.hpp"

namespace crweyl {

enum class InvariantScale { PseudoEinstein, Given };

// A closed form or constant expected for one report key at points of the surface.
struct KnownFact {
  std::string key;
  std::function<CComplex<Real>(const std::vector<CComplex<Real>>&)> value;
  double tol = 1e-9;
  bool relative = false;
  std::string source;
  // compared bit-exactly under the exact backend
  std::optional<GaussRational> exact;
};

enum class RayKind { Radial, W, Vector };

// p(t) = seed + t v with v = seed (radial), v = w-component of seed (scale w) or an explicit vector
struct RaySpec {
  RayKind kind = RayKind::Radial;
  std::vector<CComplex<Real>> v;
};

struct SamplePoint {
  std::optional<std::vector<GaussRational>> exact;
  std::vector<CComplex<Real>> seed;
  RaySpec ray;
};

struct CatalogEntry {
  std::string name;
  std::map<std::string, Rational> params;
  Hypersurface surface;
  SamplePoint sample;
  InvariantScale scale = InvariantScale::PseudoEinstein;
  std::vector<KnownFact> knownFacts;
  std::string descriptor() const;
};

std::vector<std::string> catalog_names();

// "NAME" or "NAME:k=v,k=v"; values are rationals or decimals
CatalogEntry catalog_build(const std::string& spec);

// Real-tracefree quartic coefficients c_{a bbar g dbar} (n = 2) drawn from the seed, and the
// normal-form surface Im w - |z|^2 + 1/4 sum c z zbar z zbar built from them.
std::vector<GaussRational> normal_form_coefficients(int n, unsigned seed);
Hypersurface normal_form_surface(int n, const std::vector<GaussRational>& c);

// Newton (with a bisection fallback on a sign change) along the ray; NoConvergence otherwise.
SurfacePoint<Real> point_place(const Hypersurface& s, const std::vector<CComplex<Real>>& seed, const RaySpec& ray,
                               int maxIter = 50);

// "a+bi" style complex literals separated by commas; a, b rationals, decimals or sqrt(q)
std::vector<CComplex<Real>> parse_point(const std::string& text);
// Exact variant; throws BackendUnsupported for sqrt or when a literal is not rational.
std::vector<GaussRational> parse_point_exact(const std::string& text);

RaySpec parse_ray(const std::string& text);

}  // namespace crweyl
