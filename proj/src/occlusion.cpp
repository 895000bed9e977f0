#include "ooro/occlusion.hpp"

#include <string>

#include "ooro/error.hpp"

namespace ooro {

namespace {

void check_index(std::size_t i, std::size_t n) {
  if (i >= n) {
    throw Error(ErrorKind::IndexOutOfRange,
                "index " + std::to_string(i) + " outside 0.." + std::to_string(n));
  }
}

}  // namespace

bool OcclusionRelations::occludes(std::size_t i, std::size_t j) const {
  check_index(i, n());
  check_index(j, n());
  return adj_(Eigen::Index(i), Eigen::Index(j));
}

void OcclusionRelations::set_occludes(std::size_t i, std::size_t j) {
  check_index(i, n());
  check_index(j, n());
  if (i == j) throw Error(ErrorKind::SelfOcclusion, "instance " + std::to_string(i));
  adj_(Eigen::Index(i), Eigen::Index(j)) = true;
}

OcclusionRelations OcclusionRelations::subset(const std::vector<std::size_t>& keep) const {
  OcclusionRelations out(keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) {
      if (occludes(keep[a], keep[b])) out.adj_(Eigen::Index(a), Eigen::Index(b)) = true;
    }
  }
  return out;
}

OcclusionRelations set_occludes(OcclusionRelations r, std::size_t i, std::size_t j) {
  r.set_occludes(i, j);
  return r;
}

SignedOrderMatrix to_signed(const OcclusionRelations& r) {
  const auto& a = r.adjacency();
  const auto forward = (a && !a.transpose()).cast<int>();
  const auto backward = (a.transpose() && !a).cast<int>();
  const auto mutual = (a && a.transpose()).cast<int>();
  return (forward - backward + 2 * mutual).matrix();
}

OcclusionRelations from_signed(const SignedOrderMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::InconsistentMatrix, "matrix is not square");
  }
  const Eigen::Index n = m.rows();
  OcclusionRelations r{std::size_t(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m(i, i) != 0) {
      throw Error(ErrorKind::InconsistentMatrix, "nonzero diagonal at " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const int v = m(i, j);
      const int opposite = m(j, i);
      const bool ok = (v == 0 && opposite == 0) || (v == 1 && opposite == -1) ||
                      (v == -1 && opposite == 1) || (v == 2 && opposite == 2);
      if (!ok) {
        throw Error(ErrorKind::InconsistentMatrix,
                    "entries (" + std::to_string(i) + "," + std::to_string(j) + ")=" +
                        std::to_string(v) + " and (" + std::to_string(j) + "," +
                        std::to_string(i) + ")=" + std::to_string(opposite));
      }
      if (v == 1 || v == 2) r.set_occludes(std::size_t(i), std::size_t(j));
    }
  }
  return r;
}

bool is_all_zero(const OcclusionRelations& r) { return !r.adjacency().any(); }

nlohmann::json signed_to_json(const SignedOrderMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"n", m.rows()}, {"m", std::move(rows)}};
}

SignedOrderMatrix signed_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto& rows = j.at("m");
    if (n < 0 || Eigen::Index(rows.size()) != n) {
      throw Error(ErrorKind::InconsistentMatrix, "row count does not match n");
    }
    SignedOrderMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows.at(std::size_t(i));
      if (Eigen::Index(row.size()) != n) {
        throw Error(ErrorKind::InconsistentMatrix, "row " + std::to_string(i) + " has wrong length");
      }
      for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row.at(std::size_t(k)).get<int>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InconsistentMatrix, e.what());
  }
}

}  // namespace ooro
