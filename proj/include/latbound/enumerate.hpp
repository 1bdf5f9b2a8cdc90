#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"
#include "latbound/norms.hpp"

namespace latbound {

inline constexpr std::uint64_t kDefaultNodeBudget = 100'000'000;
inline constexpr std::uint64_t kDefaultGridBudget = 10'000'000;

/// Relative slack when deciding ||x||_p <= r, so that points on the sphere
/// are not lost to the last bit of rounding.
inline constexpr double kBoundaryRelTol = 1e-12;
/// Minimizers within this relative distance of the minimum count as ties.
inline constexpr double kTieRelTol = 1e-9;

/// Fincke-Pohst enumeration of { lambda : ||lambda + shift||_2 <= radius } on the
/// cached reduced basis. Buffers are reused between runs; not thread-safe,
/// use one enumerator per thread.
class BallEnumerator {
 public:
  explicit BallEnumerator(const Lattice& lattice)
      : lattice_(&lattice),
        n_(lattice.dim()),
        coords_(static_cast<std::size_t>(n_)),
        points_(static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_)),
        shift_coeff_(static_cast<std::size_t>(n_)) {}

  std::uint64_t nodes() const { return nodes_; }
  void reset_nodes() { nodes_ = 0; }
  void set_budget(std::uint64_t budget) { budget_ = budget; }

  /// Calls visit(reduced_coords, x) with x = lambda + shift for every lattice
  /// vector within l2 distance `radius`. Reduced coordinates refer to
  /// lattice.reduced_basis().
  template <class Visitor>
  void run(std::span<const double> shift, double radius, Visitor&& visit) {
    const auto& gso = lattice_->reduced_gso();
    r2_ = radius * radius * (1.0 + 1e-10) + 1e-300;
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int k = 0; k < n_; ++k) s += shift[k] * gso.ortho(j, k);
      shift_coeff_[j] = s / gso.sqnorms(j);
    }
    double* top = point_row(n_);
    for (int k = 0; k < n_; ++k) top[k] = shift[k];
    recurse(n_ - 1, 0.0, visit);
  }

  /// Original-basis coordinates of a reduced coordinate vector.
  IntVector to_input_coords(std::span<const std::int64_t> reduced) const {
    const auto& u = lattice_->reduction_transform();
    IntVector c = IntVector::Zero(n_);
    for (int i = 0; i < n_; ++i)
      if (reduced[i] != 0) c += reduced[i] * u.row(i).transpose();
    return c;
  }

 private:
  double* point_row(int level) { return points_.data() + static_cast<std::size_t>(level) * n_; }

  template <class Visitor>
  void recurse(int j, double partial_sq, Visitor& visit) {
    const auto& gso = lattice_->reduced_gso();
    const auto& basis = lattice_->reduced_basis();
    double center = -shift_coeff_[j];
    for (int i = j + 1; i < n_; ++i) center -= static_cast<double>(coords_[i]) * gso.mu(i, j);
    const double rem = r2_ - partial_sq;
    if (rem < 0.0) return;
    const double width = std::sqrt(rem / gso.sqnorms(j));
    const auto lo = static_cast<std::int64_t>(std::ceil(center - width));
    const auto hi = static_cast<std::int64_t>(std::floor(center + width));
    const double* above = point_row(j + 1);
    double* here = point_row(j);
    for (std::int64_t c = lo; c <= hi; ++c) {
      if (++nodes_ > budget_)
        throw BudgetExceeded("enumeration node budget exceeded (" + std::to_string(budget_) + " nodes)",
                             found_);
      const double d = static_cast<double>(c) - center;
      const double sq = partial_sq + gso.sqnorms(j) * d * d;
      if (sq > r2_) continue;
      coords_[j] = c;
      for (int k = 0; k < n_; ++k) here[k] = above[k] + static_cast<double>(c) * basis(j, k);
      if (j == 0) {
        ++found_;
        visit(std::span<const std::int64_t>(coords_.data(), coords_.size()),
              std::span<const double>(here, static_cast<std::size_t>(n_)));
      } else {
        recurse(j - 1, sq, visit);
      }
    }
    coords_[j] = 0;
  }

  const Lattice* lattice_;
  int n_;
  std::vector<std::int64_t> coords_;
  std::vector<double> points_;
  std::vector<double> shift_coeff_;
  double r2_ = 0.0;
  std::uint64_t nodes_ = 0;
  std::uint64_t found_ = 0;
  std::uint64_t budget_ = kDefaultNodeBudget;
};

namespace detail {

inline void check_vector_dim(const Lattice& lattice, const Vector& v, const char* what) {
  if (v.size() != lattice.dim())
    throw DomainError(std::string(what) + " has length " + std::to_string(v.size()) +
                      ", expected " + std::to_string(lattice.dim()));
}

inline bool lex_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline void sort_points(std::vector<LatticePoint>& pts) {
  std::sort(pts.begin(), pts.end(),
            [](const LatticePoint& a, const LatticePoint& b) { return lex_less(a.coords, b.coords); });
}

}  // namespace detail

/// Every lambda with ||lambda + v||_p <= r, sorted by input-basis coordinates.
inline std::vector<LatticePoint> enumerate_in_ball(const Lattice& lattice, const Vector& v, double r,
                                                   double p,
                                                   std::uint64_t node_budget = kDefaultNodeBudget) {
  detail::check_vector_dim(lattice, v, "shift vector");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("enumeration radius must be finite and >= 0");
  if (!valid_norm_exponent(p)) throw DomainError("norm exponent p must be positive");
  const int n = lattice.dim();
  BallEnumerator en(lattice);
  en.set_budget(node_budget);
  std::vector<LatticePoint> out;
  const double limit = r * (1.0 + kBoundaryRelTol);
  en.run(std::span<const double>(v.data(), static_cast<std::size_t>(n)), r * l2_over_lp_factor(n, p),
         [&](std::span<const std::int64_t> red, std::span<const double> x) {
           if (lp_norm(x, p) > limit) return;
           IntVector c = en.to_input_coords(red);
           Vector e = lattice.embed(c);
           out.push_back({std::move(c), std::move(e)});
         });
  detail::sort_points(out);
  return out;
}

struct ShortestVectorResult {
  double sigma = 0.0;
  std::vector<LatticePoint> minimizers;  // all nonzero vectors tied with the minimum (both signs)
};

inline ShortestVectorResult shortest_vector(const Lattice& lattice, double p,
                                            std::uint64_t node_budget = kDefaultNodeBudget) {
  if (!valid_norm_exponent(p)) throw DomainError("norm exponent p must be positive");
  const int n = lattice.dim();
  const auto& red = lattice.reduced_basis();
  double bound = kInf;
  for (int i = 0; i < n; ++i) bound = std::min(bound, lp_norm(Vector(red.row(i).transpose()), p));

  BallEnumerator en(lattice);
  en.set_budget(node_budget);
  const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
  struct Candidate {
    std::vector<std::int64_t> reduced;
    double norm;
  };
  std::vector<Candidate> cands;
  double best = kInf;
  en.run(zero, bound * (1.0 + kTieRelTol) * l2_over_lp_factor(n, p),
         [&](std::span<const std::int64_t> c, std::span<const double> x) {
           bool nonzero = false;
           for (auto ci : c) nonzero |= (ci != 0);
           if (!nonzero) return;
           const double nrm = lp_norm(x, p);
           if (nrm > best * (1.0 + kTieRelTol)) return;
           best = std::min(best, nrm);
           cands.push_back({{c.begin(), c.end()}, nrm});
         });
  ShortestVectorResult res;
  res.sigma = best;
  for (const auto& cand : cands) {
    if (cand.norm > best * (1.0 + kTieRelTol)) continue;
    IntVector ic = en.to_input_coords(cand.reduced);
    Vector e = lattice.embed(ic);
    res.minimizers.push_back({std::move(ic), std::move(e)});
  }
  detail::sort_points(res.minimizers);
  return res;
}

/// Babai nearest-plane approximation to the lattice vector closest to target,
/// returned as a point of the lattice (embedding only).
inline Vector babai_nearest_plane(const Lattice& lattice, const Vector& target) {
  const auto& gso = lattice.reduced_gso();
  const auto& b = lattice.reduced_basis();
  Vector rest = target;
  Vector point = Vector::Zero(target.size());
  for (int j = lattice.dim() - 1; j >= 0; --j) {
    const double c = std::nearbyint(rest.dot(gso.ortho.row(j).transpose()) / gso.sqnorms(j));
    rest -= c * b.row(j).transpose();
    point += c * b.row(j).transpose();
  }
  return point;
}

/// Exact min over lambda of ||lambda - target||_p. Reuses the enumerator passed in.
inline double closest_distance(BallEnumerator& en, const Lattice& lattice, const Vector& target, double p) {
  const int n = lattice.dim();
  const Vector start = babai_nearest_plane(lattice, target);
  double best = lp_norm(Vector(start - target), p);
  if (best == 0.0) return 0.0;
  const Vector shift = -target;
  // The Babai point lies inside this ball, so the search is never empty.
  en.run(std::span<const double>(shift.data(), static_cast<std::size_t>(n)), best * l2_over_lp_factor(n, p),
         [&](std::span<const std::int64_t>, std::span<const double> x) { best = std::min(best, lp_norm(x, p)); });
  return best;
}

inline double closest_distance(const Lattice& lattice, const Vector& target, double p,
                               std::uint64_t node_budget = kDefaultNodeBudget) {
  detail::check_vector_dim(lattice, target, "target vector");
  BallEnumerator en(lattice);
  en.set_budget(node_budget);
  return closest_distance(en, lattice, target, p);
}

struct CoveringBracket {
  double lower = 0.0;
  double upper = 0.0;
  Vector deepest_sample;  // grid point attaining `lower`
  std::uint64_t samples = 0;
};

/// Bracket on the l_p covering radius (p >= 1). Samples a resolution^n grid of
/// the reduced fundamental parallelepiped; every point of space is within half
/// a cell diagonal of some grid point, and the distance function is
/// 1-Lipschitz, which gives the upper end.
inline CoveringBracket covering_radius_estimate(const Lattice& lattice, double p, int resolution,
                                                std::uint64_t grid_budget = kDefaultGridBudget,
                                                std::uint64_t node_budget = kDefaultNodeBudget) {
  if (!(p >= 1.0)) throw DomainError("covering radius bracket requires p >= 1 (triangle inequality)");
  if (resolution < 2) throw DomainError("resolution must be >= 2");
  const int n = lattice.dim();
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= resolution;
  if (total > static_cast<double>(grid_budget))
    throw BudgetExceeded("covering grid of " + std::to_string(static_cast<long double>(total)) +
                             " samples exceeds grid budget",
                         0);
  const auto& b = lattice.reduced_basis();

  double half_diag = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector d = Vector::Zero(n);
    for (int i = 0; i < n; ++i) d += ((mask >> i) & 1 ? 1.0 : -1.0) * b.row(i).transpose();
    half_diag = std::max(half_diag, lp_norm(d, p));
  }
  half_diag /= 2.0 * resolution;

  BallEnumerator en(lattice);
  en.set_budget(node_budget);
  CoveringBracket out;
  out.deepest_sample = Vector::Zero(n);
  std::vector<int> k(static_cast<std::size_t>(n), 0);
  const auto count = static_cast<std::uint64_t>(total);
  for (std::uint64_t s = 0; s < count; ++s) {
    Vector v = Vector::Zero(n);
    for (int i = 0; i < n; ++i) v += (static_cast<double>(k[i]) / resolution) * b.row(i).transpose();
    const double d = closest_distance(en, lattice, v, p);
    if (d > out.lower) {
      out.lower = d;
      out.deepest_sample = v;
    }
    for (int i = 0; i < n; ++i) {
      if (++k[i] < resolution) break;
      k[i] = 0;
    }
  }
  out.samples = count;
  out.upper = out.lower + half_diag;
  return out;
}

}  // namespace latbound
