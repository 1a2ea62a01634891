#pragma once

// Normalized margin and numeric checks of the two augmentation theorems.
//
// For a query q, a target text vector v1 and a competitor v2,
//
//     mu(q, v1, v2) = <q, v1 - v2> / (|q| * |v1 - v2|).
//
// Theorem 1: if some generated vector v1' of the target is at least as
// query-aligned as v1 (relevance enhancement), no generated vector of the
// competitor is more aligned than v2 (irrelevance consistency), and v1, v2
// decompose into generated parts plus mutually orthogonal noise, then
// mu(q, v1', v2) >= mu(q, v1, v2) and mu(q, v1', v2_j) >= mu(q, v1, v2) for all j.
//
// Theorem 2: with the target's generated set split into QA and event vectors,
// the best vector of the union dominates every per-type margin.
//
// The checkers refuse instances that do not meet the hypotheses
// (PreconditionError) instead of reporting counterexamples.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "qaea/error.hpp"

namespace qaea::theory {

template <typename DerivedQ, typename Derived1, typename Derived2>
typename DerivedQ::Scalar normalized_margin(const Eigen::MatrixBase<DerivedQ>& query,
                                            const Eigen::MatrixBase<Derived1>& v1,
                                            const Eigen::MatrixBase<Derived2>& v2) {
  using Scalar = typename DerivedQ::Scalar;
  if (query.size() != v1.size() || v1.size() != v2.size())
    throw ArgumentError("normalized margin of vectors with different dimensions");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> diff = v1 - v2;
  const Scalar diff_norm = diff.norm();
  if (diff_norm == Scalar(0)) throw ArgumentError("normalized margin undefined for v1 == v2");
  const Scalar query_norm = query.norm();
  if (query_norm == Scalar(0)) throw ArgumentError("normalized margin undefined for a zero query");
  return query.dot(diff) / (query_norm * diff_norm);
}

using Vector = Eigen::VectorXd;

/// Vectors of one target/competitor pair.
///
/// target = target_generated[target_chosen] + target_noise, and
/// competitor = sum(competitor_generated) + competitor_noise, with all
/// generated vectors and both noise vectors mutually orthogonal. The first
/// `target_qa_count` target vectors are QA vectors, the rest event vectors.
struct SyntheticInstance {
  Vector query;
  std::vector<Vector> target_generated;
  std::vector<Vector> competitor_generated;
  Vector target_noise;
  Vector competitor_noise;
  Vector target;
  Vector competitor;
  std::size_t target_chosen = 0;
  std::size_t target_qa_count = 0;

  Eigen::Index dimension() const { return query.size(); }
};

struct InstanceConfig {
  std::size_t n_target_generated = 3;
  std::size_t n_competitor_generated = 3;
  /// Lower bound on <q, v1> - <q, v2>.
  double relevance_gap = 0.1;
  /// Norm scale of the two noise vectors; 0 yields v1 == chosen generated vector.
  double noise_scale = 1.0;
  /// QA vectors among the target's generated set; the rest are events.
  std::size_t n_target_qa = 0;
  /// Build a target noise direction aligned with the query so that every
  /// generated target vector is less aligned than v1.
  bool violate_relevance_enhancement = false;
};

/// Random instance on a random orthonormal frame of dimension d. Requires
/// d >= n_target_generated + n_competitor_generated + 2.
SyntheticInstance build_instance(std::uint64_t seed, Eigen::Index dimension, const InstanceConfig& config);

struct ConditionReport {
  bool relevance_enhancement = false;    // some generated target vector >= v1 in query alignment
  bool irrelevance_consistency = false;  // no generated competitor vector beats v2
  bool orthogonality = false;            // generated vectors and noise mutually orthogonal
  bool decomposition = false;            // v1, v2 equal their generated parts plus noise
  bool target_most_relevant = false;     // <q, v1> >= <q, v2>
  bool equal_norms = true;               // Theorem 2 only: generated target vectors share one norm
  double worst_inner_product = 0.0;      // largest |<a, b>| among pairs required orthogonal

  bool all() const {
    return relevance_enhancement && irrelevance_consistency && orthogonality && decomposition &&
           target_most_relevant && equal_norms;
  }
};

/// Orthogonality tolerance, relative to the product of the two norms.
inline constexpr double kOrthogonalityTolerance = 1e-12;
/// Slack allowed on every inequality.
inline constexpr double kInequalitySlack = 1e-9;

ConditionReport check_conditions(const SyntheticInstance& instance);

/// Index of the target generated vector with the largest <q, .> (first on ties).
std::size_t best_target_index(const SyntheticInstance& instance, std::size_t begin = 0,
                              std::size_t end = static_cast<std::size_t>(-1));

struct MarginComparison {
  std::size_t chosen = 0;          // index into target_generated
  double baseline = 0.0;           // mu(q, v1, v2)
  double chosen_vs_competitor = 0.0;                 // mu(q, v1', v2)
  std::vector<double> chosen_vs_competitor_generated;  // mu(q, v1', v2_j)
  std::vector<double> per_type;    // Theorem 2: mu(q, x, v2) for every target generated x
  double worst_slack = 0.0;        // min over asserted inequalities of (lhs - rhs)
  bool holds = false;
  // Proof steps of Theorem 1.
  bool denominator_bound = false;  // |v1 - v2|^2 >= |v1' - v2_j|^2 and >= |v1' - v2|^2
  bool numerator_bound = false;    // <q, v1' - v2_j> >= <q, v1> - <q, v2>, same for v2
};

/// Margins of Theorem 1 without checking its hypotheses.
MarginComparison theorem1_margins(const SyntheticInstance& instance);

/// Throws PreconditionError unless check_conditions(instance).all().
MarginComparison verify_theorem1(const SyntheticInstance& instance);

/// Theorem 2 hypotheses: relevance enhancement over the union, irrelevance
/// consistency, orthogonality between distinct QA and event vectors, generated
/// target vectors of equal norm and orthogonal to v2.
ConditionReport check_theorem2_conditions(const SyntheticInstance& instance);

MarginComparison verify_theorem2(const SyntheticInstance& instance);

struct SweepResult {
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;
};

/// Random condition-satisfying instances, d drawn up to max_dim.
SweepResult sweep_theorem1(std::size_t instances, std::uint64_t seed, Eigen::Index max_dim = 64);
SweepResult sweep_theorem2(std::size_t instances, std::uint64_t seed, Eigen::Index max_dim = 64);

}  // namespace qaea::theory
