#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "json.hpp"

namespace ooro {

/// Boolean directed adjacency: `occludes(i, j)` is true iff instance i occludes j.
/// The diagonal is always false; mutual pairs are legal.
class OcclusionRelations {
 public:
  using Adjacency = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

  OcclusionRelations() = default;
  explicit OcclusionRelations(std::size_t n)
      : adj_(Adjacency::Zero(Eigen::Index(n), Eigen::Index(n))) {}

  std::size_t n() const noexcept { return std::size_t(adj_.rows()); }
  bool occludes(std::size_t i, std::size_t j) const;
  const Adjacency& adjacency() const noexcept { return adj_; }

  /// Throws IndexOutOfRange or SelfOcclusion. Idempotent.
  void set_occludes(std::size_t i, std::size_t j);

  /// Keeps only the listed instances, in the given order.
  OcclusionRelations subset(const std::vector<std::size_t>& keep) const;

  friend bool operator==(const OcclusionRelations& a, const OcclusionRelations& b) {
    return a.n() == b.n() && (a.adj_ == b.adj_).all();
  }

 private:
  Adjacency adj_;
};

/// Entries in {-1, 0, 1, 2}: 1 row occludes column, -1 the reverse, 2 mutual.
using SignedOrderMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

inline OcclusionRelations relations_new(std::size_t n) { return OcclusionRelations(n); }

/// Value-returning form of OcclusionRelations::set_occludes.
OcclusionRelations set_occludes(OcclusionRelations r, std::size_t i, std::size_t j);

SignedOrderMatrix to_signed(const OcclusionRelations& r);

/// Throws InconsistentMatrix unless `m` is square with a zero diagonal and
/// antisymmetric 1/-1 entries and symmetric 2 entries.
OcclusionRelations from_signed(const SignedOrderMatrix& m);

bool is_all_zero(const OcclusionRelations& r);

/// {"n": int, "m": [[int]]}
nlohmann::json signed_to_json(const SignedOrderMatrix& m);
SignedOrderMatrix signed_from_json(const nlohmann::json& j);

}  // namespace ooro
