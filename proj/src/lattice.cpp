#include "lindstab/lattice.hpp"

#include "lindstab/common.hpp"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <numeric>

namespace lindstab {

namespace {

template <class F>
void for_each_offset(int dim, int r, F&& f) {
  Site off(dim, -r);
  while (true) {
    f(off);
    int k = dim - 1;
    while (k >= 0 && off[k] == r) {
      off[k] = -r;
      --k;
    }
    if (k < 0) return;
    ++off[k];
  }
}

int mod(int a, int n) {
  int m = a % n;
  return m < 0 ? m + n : m;
}

}  // namespace

Geometry::Geometry(std::vector<int> ext, std::vector<bool> per)
    : dim(int(ext.size())), extent(std::move(ext)), periodic(std::move(per)) {
  if (dim < 1) throw DomainError("geometry needs at least one axis");
  if (periodic.size() != extent.size()) throw DomainError("periodic flags must match extent");
  for (int e : extent)
    if (e < 1) throw DomainError("extent must be positive");
}

Geometry Geometry::chain(int n, bool per) { return Geometry({n}, {per}); }

Geometry Geometry::box(std::vector<int> ext, bool per) {
  std::vector<bool> p(ext.size(), per);
  return Geometry(std::move(ext), std::move(p));
}

std::size_t Geometry::site_count() const {
  std::size_t n = 1;
  for (int e : extent) n *= std::size_t(e);
  return n;
}

bool Geometry::in_range(const Site& x) const {
  if (int(x.size()) != dim) return false;
  for (int k = 0; k < dim; ++k)
    if (x[k] < 0 || x[k] >= extent[k]) return false;
  return true;
}

Site Geometry::wrap(Site x) const {
  for (int k = 0; k < dim; ++k)
    if (periodic[k]) x[k] = mod(x[k], extent[k]);
  return x;
}

std::vector<Site> Geometry::all_sites() const {
  std::vector<Site> out;
  out.reserve(site_count());
  Site x(dim, 0);
  while (true) {
    out.push_back(x);
    int k = dim - 1;
    while (k >= 0 && x[k] == extent[k] - 1) {
      x[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++x[k];
  }
  return out;
}

Region::Region(std::vector<Site> sites, Shape shape) : sites_(std::move(sites)), shape_(shape) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  if (sites_.empty()) shape_ = Shape::empty;
}

bool Region::contains(const Site& x) const {
  return std::binary_search(sites_.begin(), sites_.end(), x);
}

long Region::index_of(const Site& x) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), x);
  if (it == sites_.end() || *it != x) return -1;
  return long(it - sites_.begin());
}

bool Region::subset_of(const Region& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

Region region_union(const Region& a, const Region& b) {
  std::vector<Site> s(a.sites());
  s.insert(s.end(), b.begin(), b.end());
  return Region(std::move(s));
}

Region region_intersection(const Region& a, const Region& b) {
  std::vector<Site> s;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(s));
  return Region(std::move(s));
}

Region region_difference(const Region& a, const Region& b) {
  std::vector<Site> s;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(s));
  return Region(std::move(s));
}

Region full_region(const Geometry& g) { return Region(g.all_sites(), Shape::general); }

Region interval(int lo, int hi) {
  std::vector<Site> s;
  for (int x = lo; x <= hi; ++x) s.push_back({x});
  return Region(std::move(s), Shape::ball);
}

int distance(const Geometry& g, const Site& a, const Site& b) {
  int d = 0;
  for (int k = 0; k < g.dim; ++k) {
    int delta = std::abs(a[k] - b[k]);
    if (g.periodic[k]) {
      delta %= g.extent[k];
      delta = std::min(delta, g.extent[k] - delta);
    }
    d = std::max(d, delta);
  }
  return d;
}

int distance(const Geometry& g, const Region& a, const Region& b) {
  if (a.empty() || b.empty()) throw DomainError("distance of an empty region");
  int best = INT_MAX;
  for (const Site& x : a)
    for (const Site& y : b) {
      best = std::min(best, distance(g, x, y));
      if (best == 0) return 0;
    }
  return best;
}

Region ball(const Geometry& g, const Site& center, int radius) {
  if (!g.in_range(center)) throw DomainError("ball center out of range");
  if (radius < 0) throw DomainError("negative radius");
  std::vector<Site> out;
  for_each_offset(g.dim, radius, [&](const Site& off) {
    Site y(g.dim);
    for (int k = 0; k < g.dim; ++k) {
      y[k] = center[k] + off[k];
      if (g.periodic[k]) {
        y[k] = mod(y[k], g.extent[k]);
      } else if (y[k] < 0 || y[k] >= g.extent[k]) {
        return;
      }
    }
    out.push_back(std::move(y));
  });
  return Region(std::move(out), Shape::ball);
}

std::vector<Region> components(const Geometry& g, const Region& a) {
  std::vector<int> label(a.size(), -1);
  std::vector<Region> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (label[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    std::vector<Site> comp;
    label[i] = int(out.size());
    while (!stack.empty()) {
      std::size_t j = stack.back();
      stack.pop_back();
      comp.push_back(a[j]);
      for (std::size_t k = 0; k < a.size(); ++k)
        if (label[k] < 0 && distance(g, a[j], a[k]) <= 1) {
          label[k] = label[i];
          stack.push_back(k);
        }
    }
    out.emplace_back(std::move(comp), Shape::general);
  }
  return out;
}

namespace {

Region fatten(const Geometry& g, const Region& a, int s) {
  std::vector<Site> out;
  for (const Site& x : a) {
    Region b = ball(g, x, s);
    out.insert(out.end(), b.begin(), b.end());
  }
  return Region(std::move(out));
}

// Center and half-width of the smallest covering interval of one axis.
std::pair<int, int> covering_interval(const Geometry& g, const Region& a, int axis) {
  std::vector<int> c;
  for (const Site& x : a) c.push_back(x[axis]);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  int lo = c.front(), span = c.back() - c.front();
  if (g.periodic[axis] && c.size() > 1) {
    // the covering arc is the complement of the largest cyclic gap
    const int L = g.extent[axis];
    int best_gap = c.front() + L - c.back();
    lo = c.front();
    for (std::size_t i = 1; i < c.size(); ++i) {
      int gap = c[i] - c[i - 1];
      if (gap > best_gap) {
        best_gap = gap;
        lo = c[i];
      }
    }
    span = L - best_gap;
  }
  int center = lo + span / 2;
  if (g.periodic[axis]) center = mod(center, g.extent[axis]);
  return {center, (span + 1) / 2};
}

}  // namespace

Region grow(const Geometry& g, const Region& a, int s) {
  if (s < 0) throw DomainError("negative growth");
  for (const Site& x : a)
    if (!g.in_range(x)) throw DomainError("region not inside geometry");
  if (a.empty() || s == 0) return a;
  std::vector<Region> comps = components(g, a);
  bool merge = false;
  for (std::size_t i = 0; i < comps.size() && !merge; ++i)
    for (std::size_t j = i + 1; j < comps.size() && !merge; ++j)
      if (distance(g, comps[i], comps[j]) <= 2 * s + 1) merge = true;
  if (!merge) {
    Region out = fatten(g, a, s);
    return Region(out.sites(), comps.size() == 1 ? Shape::general : Shape::union_of_balls);
  }
  Site center(g.dim);
  int r0 = 0;
  for (int k = 0; k < g.dim; ++k) {
    auto [c, h] = covering_interval(g, a, k);
    center[k] = c;
    r0 = std::max(r0, h);
  }
  return ball(g, center, r0 + s);
}

Region boundary_layer(const Geometry& g, const Region& lambda, int d) {
  std::vector<Site> out;
  for (const Site& x : lambda)
    if (depth(g, lambda, x) <= d) out.push_back(x);
  return Region(std::move(out));
}

int depth(const Geometry& g, const Region& lambda, const Site& x) {
  int max_extent = *std::max_element(g.extent.begin(), g.extent.end());
  for (int d = 1; d <= max_extent; ++d) {
    bool found = false;
    for_each_offset(g.dim, d, [&](const Site& off) {
      if (found) return;
      Site y(g.dim);
      for (int k = 0; k < g.dim; ++k) {
        y[k] = x[k] + off[k];
        if (g.periodic[k]) {
          y[k] = mod(y[k], g.extent[k]);
        } else if (y[k] < 0 || y[k] >= g.extent[k]) {
          found = true;
          return;
        }
      }
      if (!lambda.contains(y)) found = true;
    });
    if (found) return d;
  }
  return INT_MAX;
}

Region outer_boundary(const Geometry& g, const Region& lambda, int r) {
  std::vector<Site> out;
  for (const Site& x : lambda)
    for_each_offset(g.dim, r, [&](const Site& off) {
      Site y(g.dim);
      for (int k = 0; k < g.dim; ++k) y[k] = x[k] + off[k];
      y = g.wrap(std::move(y));
      if (!lambda.contains(y)) out.push_back(std::move(y));
    });
  return Region(std::move(out));
}

}  // namespace lindstab
