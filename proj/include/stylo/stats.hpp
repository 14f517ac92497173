#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stylo {

struct PanelRow {
    std::string author_id;
    std::string category;
    int post_llm = 0;
    double length = 0.0;
    double y = 0.0;
};

struct RegressionResult {
    double beta = 0.0;
    double gamma = 0.0;
    double se_beta_hc3 = 0.0;
    double t_beta = 0.0;
    double p_beta = 1.0;
    std::size_t n_obs = 0;
    std::size_t n_authors = 0;
    std::size_t df = 0;
    double r2_within = 0.0;
    /// Category dummies kept after absorption by the author effects.
    std::vector<std::string> category_columns;
};

/// y = beta*post + gamma*length + category dummies + author effect + e.
/// Author effects are absorbed by within-author demeaning; category dummies
/// (reference = lexicographically first) are demeaned the same way, and any
/// that the author effects absorb are dropped. Throws DataError when post_llm
/// never varies within an author or the design is otherwise unidentified.
RegressionResult fe_regress(const std::vector<PanelRow>& rows);

/// HC3 standard error of coefficient `coef` for design X and OLS residuals e.
/// Throws InputError on rank deficiency or when a leverage reaches 1 - 1e-12.
double hc3_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, Eigen::Index coef);

struct HolmResult {
    std::vector<bool> reject;
    std::vector<double> adjusted;
};

/// Step-down Holm procedure; outputs follow input order.
HolmResult holm_bonferroni(const std::vector<double>& pvals, double alpha = 0.05);

struct Correlation {
    double r = 0.0;
    double p = 1.0;
};

/// Pearson correlation of x and y after regressing both on [1, controls].
/// nullopt when either residual vector has no variance.
std::optional<Correlation> partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& controls);

/// Cohen's d with pooled sample SD; nullopt when either group has < 2 values
/// or the pooled SD is zero.
std::optional<double> cohens_d(const std::vector<double>& a, const std::vector<double>& b);

/// Two-sided p-value of a t statistic.
double t_test_p(double t, double df);

} // namespace stylo
