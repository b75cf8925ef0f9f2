#include "core/lda.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace rwpattern {

namespace {

Eigen::VectorXd class_mean(const std::vector<Eigen::VectorXd>& vectors) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(vectors.front().size());
  for (const auto& x : vectors) mean += x;
  return mean / static_cast<double>(vectors.size());
}

Eigen::MatrixXd population_covariance(const std::vector<Eigen::VectorXd>& vectors,
                                      const Eigen::VectorXd& mean) {
  const auto m = mean.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (const auto& x : vectors) {
    Eigen::VectorXd d = x - mean;
    cov.noalias() += d * d.transpose();
  }
  return cov / static_cast<double>(vectors.size());
}

}  // namespace

LdaModel fit_lda(const std::vector<Eigen::VectorXd>& class1,
                 const std::vector<Eigen::VectorXd>& class2, double ridge_scale) {
  if (class1.empty() || class2.empty())
    fail(Errc::single_class_corpus, "both classes must be nonempty");
  if (ridge_scale < 0) fail(Errc::invalid_argument, "ridge_scale must be >= 0");

  const auto m = class1.front().size();
  for (const auto& x : class1)
    if (x.size() != m) fail(Errc::dimension_mismatch, "class 1 vectors differ in dimension");
  for (const auto& x : class2)
    if (x.size() != m) fail(Errc::dimension_mismatch, "class 2 vectors differ in dimension");

  LdaModel model;
  model.mu1 = class_mean(class1);
  model.mu2 = class_mean(class2);
  Eigen::VectorXd gap = model.mu1 - model.mu2;
  if (gap.norm() == 0.0)
    fail(Errc::degenerate_classes, "class means coincide; direction undefined");

  model.sigma_sum = population_covariance(class1, model.mu1) +
                    population_covariance(class2, model.mu2);

  double diag_mean = model.sigma_sum.trace() / static_cast<double>(m);
  double base = diag_mean > 0.0 ? diag_mean : 1.0;
  model.ridge = ridge_scale * base;
  model.sigma_sum.diagonal().array() += model.ridge;

  Eigen::VectorXd solved = model.sigma_sum.ldlt().solve(gap);
  if (!solved.allFinite())
    fail(Errc::singular_projection, "sigma sum is singular; use a positive ridge_scale");
  double norm = solved.norm();
  if (norm == 0.0) fail(Errc::singular_projection, "solved direction has zero norm");
  model.v = solved / norm;
  if (model.v.dot(gap) < 0.0) model.v = -model.v;
  return model;
}

double lda_objective(const Eigen::VectorXd& v, const LdaModel& model) {
  if (v.size() != model.mu1.size()) fail(Errc::dimension_mismatch, "v has wrong dimension");
  double denom = v.dot(model.sigma_sum * v);
  if (!(denom > 1e-300)) fail(Errc::singular_projection, "projected variance is not positive");
  double num = v.dot(model.mu1 - model.mu2);
  return num * num / denom;
}

RankedFeatureList lda_rank(const LdaModel& model, const std::vector<std::string>& vocabulary) {
  if (static_cast<size_t>(model.v.size()) != vocabulary.size())
    fail(Errc::dimension_mismatch, "vocabulary size does not match model dimension");
  RankedFeatureList list;
  list.method = RankMethod::lda;
  list.entries.reserve(vocabulary.size());
  for (size_t i = 0; i < vocabulary.size(); ++i)
    list.entries.push_back({vocabulary[i], std::abs(model.v[static_cast<Eigen::Index>(i)]), 0, false});
  sort_and_rank(list.entries);
  return list;
}

LdaModel fit_lda_matrix(const TermMatrix& matrix, double ridge_scale) {
  std::vector<Eigen::VectorXd> infected, normal;
  for (size_t i = 0; i < matrix.num_docs(); ++i) {
    auto row = matrix.dense_row(i);
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
    (matrix.documents[i].label == Label::infected ? infected : normal).push_back(std::move(x));
  }
  if (infected.empty() || normal.empty())
    fail(Errc::single_class_corpus, "need at least one document of each label");
  return fit_lda(infected, normal, ridge_scale);
}

}  // namespace rwpattern
