#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gomp/models.hpp"

namespace gomp {

// sign(z) * max(|z| - g, 0)
double soft_threshold(double z, double g);

// Regularization path for one of the three penalized objectives. The
// objectives carry no 1/n or 1/2 normalization, so the coordinate updates
// threshold at lambda/2 for the squared-error loss and at lambda for the
// (1/2)-weighted IRLS quadratics of the likelihood losses.
struct LambdaPath {
    Family family = Family::Linear;
    std::vector<double> lambdas;    // strictly decreasing
    std::vector<double> intercepts; // per lambda; 0 for Cox
    Eigen::MatrixXd coefficients;   // lambdas.size() x design columns
    std::vector<int> col_feature;   // design column -> feature index
    std::vector<int> support_sizes; // distinct features with a nonzero coefficient
    bool truncated = false;         // path cut short by separation
    int n_lambda() const { return static_cast<int>(lambdas.size()); }
};

// Geometric grid from lambda_max down to ratio*lambda_max.
std::vector<double> lambda_grid(double lambda_max, int count, double ratio);

// Cyclic coordinate descent with warm starts, active-set iteration, and a
// full KKT sweep before accepting convergence at each lambda. Features are
// expected standardized (see `standardize`); categorical features enter as
// individually penalized dummy columns.
LambdaPath lasso_linear(const Dataset& d, std::vector<double> lambdas = {}, int n_lambda = 100);
LambdaPath lasso_logistic(const Dataset& d, std::vector<double> lambdas = {}, int n_lambda = 100);
LambdaPath lasso_cox(const Dataset& d, std::vector<double> lambdas = {}, int n_lambda = 100);

LambdaPath lasso_path(Family family, const Dataset& d, std::vector<double> lambdas = {},
                      int n_lambda = 100);

// Path index whose feature-level support size is closest to target;
// ties resolve to the sparser (larger lambda) point.
int match_support_size(const LambdaPath& path, int target);

// Linear predictor (plus intercept where present) of path point `index`
// on a design built with the same column layout.
Eigen::VectorXd path_linear_predictor(const LambdaPath& path, const Eigen::MatrixXd& X,
                                      int index);

}  // namespace gomp
