#include "qaea/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

namespace qaea::theory {

namespace {

double relative_inner(const Vector& a, const Vector& b) {
  const double scale = a.norm() * b.norm();
  if (scale == 0.0) return 0.0;
  return std::abs(a.dot(b)) / scale;
}

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

// Worst relative inner product over every pair that must be orthogonal.
// Identical vectors are skipped when allow_duplicates is set.
double worst_orthogonality(const SyntheticInstance& inst, bool allow_duplicates) {
  std::vector<const Vector*> generated;
  for (const auto& v : inst.target_generated) generated.push_back(&v);
  for (const auto& v : inst.competitor_generated) generated.push_back(&v);

  double worst = 0.0;
  for (std::size_t i = 0; i < generated.size(); ++i)
    for (std::size_t j = i + 1; j < generated.size(); ++j) {
      if (allow_duplicates && same_vector(*generated[i], *generated[j])) continue;
      worst = std::max(worst, relative_inner(*generated[i], *generated[j]));
    }
  for (const Vector* noise : {&inst.target_noise, &inst.competitor_noise})
    for (const Vector* g : generated) worst = std::max(worst, relative_inner(*noise, *g));
  worst = std::max(worst, relative_inner(inst.target_noise, inst.competitor_noise));
  return worst;
}

bool close(const Vector& a, const Vector& b) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() <= 1e-12 * scale;
}

void check_shapes(const SyntheticInstance& inst) {
  const Eigen::Index d = inst.dimension();
  if (d == 0) throw ArgumentError("instance has no dimension");
  if (inst.target_generated.empty() || inst.competitor_generated.empty())
    throw ArgumentError("instance needs generated vectors for both texts");
  if (inst.target_chosen >= inst.target_generated.size()) throw ArgumentError("chosen target index out of range");
  if (inst.target_qa_count > inst.target_generated.size()) throw ArgumentError("qa count exceeds generated vectors");
  auto check = [d](const Vector& v) {
    if (v.size() != d) throw ArgumentError("instance vectors differ in dimension");
  };
  for (const auto& v : inst.target_generated) check(v);
  for (const auto& v : inst.competitor_generated) check(v);
  for (const Vector* v : {&inst.target_noise, &inst.competitor_noise, &inst.target, &inst.competitor}) check(*v);
}

ConditionReport common_conditions(const SyntheticInstance& inst, bool allow_duplicates) {
  check_shapes(inst);
  ConditionReport r;
  const Vector& q = inst.query;
  const double q_v1 = q.dot(inst.target);
  const double q_v2 = q.dot(inst.competitor);

  r.relevance_enhancement = std::any_of(inst.target_generated.begin(), inst.target_generated.end(),
                                        [&](const Vector& x) { return q.dot(x) >= q_v1; });
  r.irrelevance_consistency = std::all_of(inst.competitor_generated.begin(), inst.competitor_generated.end(),
                                          [&](const Vector& x) { return q.dot(x) <= q_v2; });
  r.worst_inner_product = worst_orthogonality(inst, allow_duplicates);
  r.orthogonality = r.worst_inner_product <= kOrthogonalityTolerance;

  Vector competitor_sum = inst.competitor_noise;
  for (const auto& v : inst.competitor_generated) competitor_sum += v;
  r.decomposition = close(inst.target, inst.target_generated[inst.target_chosen] + inst.target_noise) &&
                    close(inst.competitor, competitor_sum);
  r.target_most_relevant = q_v1 >= q_v2;
  return r;
}

void require(const ConditionReport& r, const char* theorem) {
  if (r.all()) return;
  std::string unmet;
  auto note = [&](bool ok, const char* name) {
    if (ok) return;
    if (!unmet.empty()) unmet += ", ";
    unmet += name;
  };
  note(r.relevance_enhancement, "relevance enhancement");
  note(r.irrelevance_consistency, "irrelevance consistency");
  note(r.orthogonality, "orthogonality");
  note(r.decomposition, "decomposition");
  note(r.target_most_relevant, "target most relevant");
  note(r.equal_norms, "equal generated norms");
  throw PreconditionError(std::string(theorem) + " hypotheses unmet: " + unmet);
}

}  // namespace

SyntheticInstance build_instance(std::uint64_t seed, Eigen::Index dimension, const InstanceConfig& config) {
  const std::size_t n1 = config.n_target_generated;
  const std::size_t n2 = config.n_competitor_generated;
  if (n1 == 0 || n2 == 0) throw ArgumentError("both texts need at least one generated vector");
  if (config.n_target_qa > n1) throw ArgumentError("n_target_qa exceeds n_target_generated");
  if (config.noise_scale < 0.0) throw ArgumentError("noise_scale must be non-negative");
  if (config.violate_relevance_enhancement && config.noise_scale == 0.0)
    throw ArgumentError("violating relevance enhancement needs target noise");
  const auto axes = static_cast<Eigen::Index>(n1 + n2 + 2);
  if (dimension < axes)
    throw ArgumentError("dimension " + std::to_string(dimension) + " too small for " + std::to_string(axes) +
                        " orthogonal directions");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Orthonormal columns for the generated vectors and both noises, plus one
  // more for the part of the query outside their span.
  const Eigen::Index cols = std::min(dimension, axes + 1);
  Eigen::MatrixXd gaussian(dimension, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < dimension; ++r) gaussian(r, c) = normal(rng);
  const Eigen::MatrixXd frame = gaussian.householderQr().householderQ() * Eigen::MatrixXd::Identity(dimension, cols);

  auto axis = [&](std::size_t i) -> Vector { return frame.col(static_cast<Eigen::Index>(i)); };
  const std::size_t noise1_axis = n1 + n2;
  const std::size_t noise2_axis = n1 + n2 + 1;

  SyntheticInstance inst;
  inst.target_qa_count = config.n_target_qa;
  inst.target_chosen = static_cast<std::size_t>(rng() % n1);
  for (std::size_t j = 0; j < n1; ++j) inst.target_generated.push_back(axis(j));
  for (std::size_t j = 0; j < n2; ++j) inst.competitor_generated.push_back(axis(n1 + j));
  const double noise1_norm = config.noise_scale * (0.5 + unit(rng));
  const double noise2_norm = config.noise_scale * (0.5 + unit(rng));
  inst.target_noise = noise1_norm * axis(noise1_axis);
  inst.competitor_noise = noise2_norm * axis(noise2_axis);

  // Query coordinates along the frame. Competitor coordinates are
  // non-negative so no single competitor vector beats the whole competitor.
  Eigen::VectorXd coef(cols);
  for (std::size_t j = 0; j < n1; ++j) coef(static_cast<Eigen::Index>(j)) = 2.0 * unit(rng) - 1.0;
  for (std::size_t j = 0; j < n2; ++j) coef(static_cast<Eigen::Index>(n1 + j)) = unit(rng);
  coef(static_cast<Eigen::Index>(noise2_axis)) = unit(rng);
  coef(static_cast<Eigen::Index>(noise1_axis)) =
      config.violate_relevance_enhancement ? 0.5 + unit(rng) : -unit(rng);
  if (cols > axes) coef(axes) = normal(rng);

  double q_v2 = coef(static_cast<Eigen::Index>(noise2_axis)) * noise2_norm;
  for (std::size_t j = 0; j < n2; ++j) q_v2 += coef(static_cast<Eigen::Index>(n1 + j));
  const double q_noise1 = coef(static_cast<Eigen::Index>(noise1_axis)) * noise1_norm;
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n1; ++j)
    if (j != inst.target_chosen) best_other = std::max(best_other, coef(static_cast<Eigen::Index>(j)));
  // The chosen vector is the most query-aligned generated vector and v1 leads v2 by the gap.
  coef(static_cast<Eigen::Index>(inst.target_chosen)) =
      std::max(best_other, q_v2 - q_noise1 + config.relevance_gap) + unit(rng);

  inst.query = frame * coef;
  inst.target = inst.target_generated[inst.target_chosen] + inst.target_noise;
  inst.competitor = inst.competitor_noise;
  for (const auto& v : inst.competitor_generated) inst.competitor += v;
  return inst;
}

ConditionReport check_conditions(const SyntheticInstance& instance) {
  return common_conditions(instance, false);
}

std::size_t best_target_index(const SyntheticInstance& instance, std::size_t begin, std::size_t end) {
  end = std::min(end, instance.target_generated.size());
  if (begin >= end) throw ArgumentError("empty range of target vectors");
  std::size_t best = begin;
  double best_score = instance.query.dot(instance.target_generated[begin]);
  for (std::size_t i = begin + 1; i < end; ++i) {
    const double s = instance.query.dot(instance.target_generated[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

MarginComparison theorem1_margins(const SyntheticInstance& inst) {
  check_shapes(inst);
  const Vector& q = inst.query;
  const Vector& v1 = inst.target;
  const Vector& v2 = inst.competitor;
  const Vector& chosen = inst.target_generated[inst.target_chosen];

  MarginComparison m;
  m.chosen = inst.target_chosen;
  m.baseline = normalized_margin(q, v1, v2);
  m.chosen_vs_competitor = normalized_margin(q, chosen, v2);
  m.worst_slack = m.chosen_vs_competitor - m.baseline;

  const double base_numerator = q.dot(v1) - q.dot(v2);
  const double base_denominator = (v1 - v2).squaredNorm();
  m.numerator_bound = q.dot(chosen) - q.dot(v2) >= base_numerator - kInequalitySlack;
  m.denominator_bound = (chosen - v2).squaredNorm() <= base_denominator + kInequalitySlack;
  for (const auto& vj : inst.competitor_generated) {
    const double mu = normalized_margin(q, chosen, vj);
    m.chosen_vs_competitor_generated.push_back(mu);
    m.worst_slack = std::min(m.worst_slack, mu - m.baseline);
    m.numerator_bound = m.numerator_bound && q.dot(chosen) - q.dot(vj) >= base_numerator - kInequalitySlack;
    m.denominator_bound = m.denominator_bound && (chosen - vj).squaredNorm() <= base_denominator + kInequalitySlack;
  }
  m.holds = m.worst_slack >= -kInequalitySlack;
  return m;
}

MarginComparison verify_theorem1(const SyntheticInstance& instance) {
  require(check_conditions(instance), "Theorem 1");
  return theorem1_margins(instance);
}

ConditionReport check_theorem2_conditions(const SyntheticInstance& instance) {
  ConditionReport r = common_conditions(instance, true);
  const double norm0 = instance.target_generated.front().norm();
  for (const auto& x : instance.target_generated) {
    if (std::abs(x.norm() - norm0) > 1e-12 * std::max(1.0, norm0)) r.equal_norms = false;
    const double inner = relative_inner(x, instance.competitor);
    r.worst_inner_product = std::max(r.worst_inner_product, inner);
  }
  r.orthogonality = r.worst_inner_product <= kOrthogonalityTolerance;
  return r;
}

MarginComparison verify_theorem2(const SyntheticInstance& instance) {
  require(check_theorem2_conditions(instance), "Theorem 2");
  const Vector& q = instance.query;
  const Vector& v2 = instance.competitor;

  MarginComparison m;
  m.chosen = best_target_index(instance);
  m.baseline = normalized_margin(q, instance.target, v2);
  m.chosen_vs_competitor = normalized_margin(q, instance.target_generated[m.chosen], v2);
  m.worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& x : instance.target_generated) {
    const double mu = normalized_margin(q, x, v2);
    m.per_type.push_back(mu);
    m.worst_slack = std::min(m.worst_slack, m.chosen_vs_competitor - mu);
  }
  m.holds = m.worst_slack >= -kInequalitySlack;
  return m;
}

namespace {

template <typename Verify>
SweepResult sweep(std::size_t instances, std::uint64_t seed, Eigen::Index max_dim, bool split_types, Verify verify) {
  std::mt19937_64 rng(seed);
  SweepResult out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    InstanceConfig config;
    config.n_target_generated = 1 + rng() % 6;
    config.n_competitor_generated = 1 + rng() % 6;
    config.n_target_qa = split_types ? rng() % (config.n_target_generated + 1) : 0;
    config.relevance_gap = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    config.noise_scale = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const auto min_dim = static_cast<Eigen::Index>(config.n_target_generated + config.n_competitor_generated + 2);
    if (max_dim < min_dim) throw ArgumentError("max_dim too small for the sweep");
    const Eigen::Index d = min_dim + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(max_dim - min_dim + 1));

    const MarginComparison m = verify(build_instance(rng(), d, config));
    ++out.instances;
    out.violations += m.holds ? 0 : 1;
    out.worst_slack = std::min(out.worst_slack, m.worst_slack);
  }
  if (out.instances == 0) out.worst_slack = 0.0;
  return out;
}

}  // namespace

SweepResult sweep_theorem1(std::size_t instances, std::uint64_t seed, Eigen::Index max_dim) {
  return sweep(instances, seed, max_dim, false, [](const SyntheticInstance& s) { return verify_theorem1(s); });
}

SweepResult sweep_theorem2(std::size_t instances, std::uint64_t seed, Eigen::Index max_dim) {
  return sweep(instances, seed, max_dim, true, [](const SyntheticInstance& s) { return verify_theorem2(s); });
}

}  // namespace qaea::theory
