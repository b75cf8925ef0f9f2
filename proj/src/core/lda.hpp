#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/ranking.hpp"

namespace rwpattern {

/// Fitted two-class linear discriminant. sigma_sum holds the matrix the
/// direction was solved against, i.e. the summed class covariances plus the
/// effective ridge on the diagonal.
struct LdaModel {
  Eigen::VectorXd v;          // unit direction, sign fixed so v . (mu1 - mu2) >= 0
  Eigen::VectorXd mu1, mu2;   // class means (1 = infected, 2 = normal)
  Eigen::MatrixXd sigma_sum;  // Sigma1 + Sigma2 + ridge * I
  double ridge = 0.0;         // effective ridge added to the diagonal
};

/// Fit the discriminant direction v proportional to sigma_sum^-1 (mu1 - mu2).
/// Class covariances use population normalization (1/n). The effective ridge
/// is ridge_scale times the mean diagonal of Sigma1 + Sigma2 (falling back to
/// ridge_scale itself when that trace is zero, so a positive scale always
/// regularizes).
LdaModel fit_lda(const std::vector<Eigen::VectorXd>& class1,
                 const std::vector<Eigen::VectorXd>& class2, double ridge_scale);

/// Separation objective [v^T (mu1 - mu2)]^2 / [v^T sigma_sum v] evaluated
/// against the model's stats. Throws SINGULAR_PROJECTION when the denominator
/// is not positive.
double lda_objective(const Eigen::VectorXd& v, const LdaModel& model);

/// Rank features by |v_i|, dense ranks, display ties by vocabulary index.
RankedFeatureList lda_rank(const LdaModel& model, const std::vector<std::string>& vocabulary);

/// Convenience: infected rows form class 1, normal rows class 2.
/// Throws SINGLE_CLASS_CORPUS when a class is missing.
LdaModel fit_lda_matrix(const TermMatrix& matrix, double ridge_scale);

}  // namespace rwpattern
