#pragma once

#include <cstddef>
#include <vector>

namespace lindstab {

// Lattice coordinates. Sites outside the extent are allowed on open axes:
// they stand for sites of the enclosing Z^D (used for outer boundaries).
using Site = std::vector<int>;

struct Geometry {
  int dim = 1;
  std::vector<int> extent;
  std::vector<bool> periodic;

  Geometry() = default;
  Geometry(std::vector<int> extent, std::vector<bool> periodic);

  static Geometry chain(int n, bool periodic = false);
  static Geometry box(std::vector<int> extent, bool periodic = false);

  std::size_t site_count() const;
  bool in_range(const Site& x) const;
  // Reduces periodic coordinates modulo the extent; open axes untouched.
  Site wrap(Site x) const;
  std::vector<Site> all_sites() const;

  bool operator==(const Geometry&) const = default;
};

enum class Shape { empty, ball, union_of_balls, general };

// Sorted, duplicate-free set of sites.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Site> sites, Shape shape = Shape::general);

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  Shape shape() const { return shape_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }

  bool contains(const Site& x) const;
  // Position of x in canonical order, or -1.
  long index_of(const Site& x) const;
  bool subset_of(const Region& other) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  bool operator==(const Region& o) const { return sites_ == o.sites_; }

 private:
  std::vector<Site> sites_;
  Shape shape_ = Shape::empty;
};

Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_difference(const Region& a, const Region& b);
Region full_region(const Geometry& g);
Region interval(int lo, int hi);

// ℓ∞ distance with per-axis wraparound on periodic axes.
int distance(const Geometry& g, const Site& a, const Site& b);
int distance(const Geometry& g, const Region& a, const Region& b);

Region ball(const Geometry& g, const Site& center, int radius);

// Connected components under ℓ∞ adjacency.
std::vector<Region> components(const Geometry& g, const Region& a);

// A(s); when the s-fattened components of A touch or overlap the result is
// the smallest ball containing the fattened set, clipped to the geometry.
Region grow(const Geometry& g, const Region& a, int s);

// {x ∈ Λ : dist(x, Λ^c) ≤ d}, with Λ^c taken in Z^D on open axes.
Region boundary_layer(const Geometry& g, const Region& lambda, int d);

// {y ∉ Λ : dist(y, Λ) ≤ r}; may contain sites beyond the extent on open axes.
Region outer_boundary(const Geometry& g, const Region& lambda, int r);

// Depth of a site inside Λ: dist(x, Λ^c).
int depth(const Geometry& g, const Region& lambda, const Site& x);

}  // namespace lindstab
