#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "monoflow/errors.hpp"
#include "monoflow/lp.hpp"

namespace monoflow {

class ConvexSet;

struct WholeSpace {
  Eigen::Index dim;
};

struct Singleton {
  Vector point;
};

// {x : G x <= h}
struct Polyhedron {
  Matrix G;
  Vector h;
};

struct Ball {
  Vector center;
  double radius;
};

struct Box {
  Vector lo;
  Vector hi;
};

struct Intersection {
  std::vector<ConvexSet> parts;
};

// cone{ sum_i lambda_i g_i : lambda >= 0 }, apex at the origin
struct PolyhedralCone {
  Eigen::Index dim;
  std::vector<Vector> generators;
};

// conv(vertices) + cone(rays); vertices nonempty.  This is the
// generator-form counterpart of Polyhedron and is what subdifferentials
// and operator values (shifted cones, hulls of gradients) come back as.
struct VPolyhedron {
  std::vector<Vector> vertices;
  std::vector<Vector> rays;
};

struct LinearMinimum {
  double value;
  Vector argmin;
};

class ConvexSet {
 public:
  using Rep = std::variant<WholeSpace, Singleton, Polyhedron, Ball, Box,
                           Intersection, PolyhedralCone, VPolyhedron>;

  // Factories validate dimensions and nonemptiness where decidable.
  static ConvexSet whole_space(Eigen::Index dim);
  static ConvexSet singleton(Vector point);
  static ConvexSet polyhedron(Matrix G, Vector h);
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet box(Vector lo, Vector hi);
  static ConvexSet intersection(std::vector<ConvexSet> parts);
  static ConvexSet cone(Eigen::Index dim, std::vector<Vector> generators);
  static ConvexSet vpolyhedron(std::vector<Vector> vertices,
                               std::vector<Vector> rays = {});

  Eigen::Index dim() const;
  const Rep& rep() const { return *rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }
  const char* variant_name() const;

  bool contains(const Vector& x, double tol = 1e-9) const;
  // x interior with the given clearance (false for sets with empty interior)
  bool strictly_contains(const Vector& x, double margin = 1e-12) const;
  bool contains_ball(const Vector& center, double radius) const;

  Vector project(const Vector& x) const;
  double distance(const Vector& x) const;

  // Normal cone at a member point; Singleton{0} at interior points,
  // PointNotInSet otherwise.
  ConvexSet normal_cone(const Vector& x) const;
  bool tangent_cone_contains(const Vector& x, const Vector& d) const;

  // min <c, x> over the set; lexicographically smallest argmin on ties.
  LinearMinimum linear_minimize(const Vector& c) const;

  ConvexSet recession_cone() const;
  ConvexSet polar() const;

  // sup_{x in S} <d, x>; +inf when unbounded in direction d
  double support(const Vector& d) const;
  bool is_bounded() const;

 private:
  explicit ConvexSet(Rep rep);
  std::shared_ptr<const Rep> rep_;
};

// Exact projection onto conv(vertices) + cone(rays) by support enumeration
// with a variational certificate.  Generator count is capped (desk scale).
Vector project_generated(const std::vector<Vector>& vertices,
                         const std::vector<Vector>& rays, const Vector& x);

// Generators of a cone-valued set: empty list for Singleton{0}, the
// generator list for PolyhedralCone; nullopt for anything else.
std::optional<std::vector<Vector>> cone_generators(const ConvexSet& s);

// Relative-interior membership: boundary activity is allowed only on
// constraints that are constant over the whole set (affine-hull rows).
bool rint_contains(const ConvexSet& s, const Vector& y);

// Vertex/ray generator form of a polyhedral-representable set; throws
// NotRepresentable for variants without one (balls, raw inequality forms)
// and for boxes past desk scale (> 12 free coordinates).
struct GeneratorForm {
  std::vector<Vector> vertices;
  std::vector<Vector> rays;
};
GeneratorForm generator_form(const ConvexSet& s);

// Componentwise extent; unbounded directions are clamped to +-8 (desk scale)
std::pair<Vector, Vector> bounding_box(const ConvexSet& s);

}  // namespace monoflow
