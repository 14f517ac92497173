#include "stylo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "stylo/common.hpp"

namespace stylo {

double t_test_p(double t, double df) {
    if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double hc3_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, Eigen::Index coef) {
    const Eigen::Index n = X.rows(), k = X.cols();
    if (e.size() != n) throw InputError("hc3_se: residual length does not match design rows");
    if (coef < 0 || coef >= k) throw InputError("hc3_se: coefficient index out of range");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) throw InputError("hc3_se: design matrix is rank deficient");

    // X P = Q R, so (X'X)^-1 = P R^-1 R^-T P' and X (X'X)^-1 = Q_thin R^-T P'.
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    const Eigen::MatrixXd B = Q * Rinv.transpose() * qr.colsPermutation().transpose();

    double var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = Q.row(i).squaredNorm();
        if (h >= 1.0 - 1e-12) throw InputError(fmt::format("hc3_se: leverage of row {} is {} (>= 1 - 1e-12)", i, h));
        const double w = e(i) / (1.0 - h);
        var += B(i, coef) * B(i, coef) * w * w;
    }
    return std::sqrt(var);
}

RegressionResult fe_regress(const std::vector<PanelRow>& rows) {
    const std::size_t n = rows.size();
    std::map<std::string, std::vector<std::size_t>> by_author;
    std::set<std::string> categories;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        if (r.post_llm != 0 && r.post_llm != 1) throw DataError(fmt::format("panel row {}: post_llm must be 0 or 1", i));
        if (!std::isfinite(r.length) || !std::isfinite(r.y)) throw DataError(fmt::format("panel row {}: non-finite value", i));
        by_author[r.author_id].push_back(i);
        categories.insert(r.category);
    }
    if (by_author.size() < 2) throw DataError("fe_regress needs at least two authors");

    bool identified = false;
    for (const auto& [a, idx] : by_author) {
        const int first = rows[idx.front()].post_llm;
        if (std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return rows[i].post_llm != first; })) {
            identified = true;
            break;
        }
    }
    if (!identified) throw DataError("fe_regress: post_llm never varies within an author; beta is not identified");

    const std::vector<std::string> cats(categories.begin(), categories.end());
    // Raw columns: post, length, then one dummy per non-reference category.
    const std::size_t raw_k = 2 + (cats.empty() ? 0 : cats.size() - 1);
    Eigen::MatrixXd Xraw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(raw_k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        Xraw(ii, 0) = rows[i].post_llm;
        Xraw(ii, 1) = rows[i].length;
        for (std::size_t c = 1; c < cats.size(); ++c)
            Xraw(ii, static_cast<Eigen::Index>(c + 1)) = rows[i].category == cats[c] ? 1.0 : 0.0;
        y(ii) = rows[i].y;
    }
    for (const auto& [a, idx] : by_author) {
        Eigen::RowVectorXd xm = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(raw_k));
        double ym = 0.0;
        for (auto i : idx) {
            xm += Xraw.row(static_cast<Eigen::Index>(i));
            ym += y(static_cast<Eigen::Index>(i));
        }
        xm /= static_cast<double>(idx.size());
        ym /= static_cast<double>(idx.size());
        for (auto i : idx) {
            Xraw.row(static_cast<Eigen::Index>(i)) -= xm;
            y(static_cast<Eigen::Index>(i)) -= ym;
        }
    }

    // Keep post and length unconditionally; add dummies only while they raise the rank.
    std::vector<Eigen::Index> keep{0, 1};
    auto rank_of = [&](const std::vector<Eigen::Index>& cols) {
        Eigen::MatrixXd M(Xraw.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) M.col(static_cast<Eigen::Index>(j)) = Xraw.col(cols[j]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
        qr.setThreshold(1e-10);
        return static_cast<std::size_t>(qr.rank());
    };
    if (rank_of(keep) < 2) throw DataError("fe_regress: post_llm and length are collinear after demeaning");
    RegressionResult res;
    for (std::size_t c = 1; c < cats.size(); ++c) {
        auto trial = keep;
        trial.push_back(static_cast<Eigen::Index>(c + 1));
        if (rank_of(trial) == trial.size()) {
            keep = std::move(trial);
            res.category_columns.push_back(cats[c]);
        }
    }

    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), k);
    for (Eigen::Index j = 0; j < k; ++j) X.col(j) = Xraw.col(keep[static_cast<std::size_t>(j)]);

    res.n_obs = n;
    res.n_authors = by_author.size();
    const auto used = static_cast<std::size_t>(k) + res.n_authors;
    if (n <= used) throw DataError(fmt::format("fe_regress: {} observations leave no residual degrees of freedom", n));
    res.df = n - used;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::VectorXd b = qr.solve(y);
    const Eigen::VectorXd e = y - X * b;
    res.beta = b(0);
    res.gamma = b(1);
    res.se_beta_hc3 = hc3_se(X, e, 0);
    if (res.se_beta_hc3 > 0.0) {
        res.t_beta = res.beta / res.se_beta_hc3;
    } else {
        res.t_beta = res.beta == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), res.beta);
    }
    res.p_beta = res.se_beta_hc3 > 0.0 || res.beta != 0.0 ? t_test_p(res.t_beta, static_cast<double>(res.df)) : 1.0;
    const double sst = y.squaredNorm();
    res.r2_within = sst > 0.0 ? 1.0 - e.squaredNorm() / sst : 0.0;
    return res;
}

HolmResult holm_bonferroni(const std::vector<double>& pvals, double alpha) {
    const std::size_t m = pvals.size();
    for (std::size_t i = 0; i < m; ++i)
        if (!(pvals[i] >= 0.0 && pvals[i] <= 1.0)) throw InputError(fmt::format("holm_bonferroni: p-value {} out of [0,1]", i));
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });

    HolmResult out{std::vector<bool>(m, false), std::vector<double>(m, 1.0)};
    bool stopped = false;
    double running = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = order[r];
        const double factor = static_cast<double>(m - r);
        if (!stopped && pvals[i] <= alpha / factor) out.reject[i] = true;
        else stopped = true;
        running = std::max(running, std::min(1.0, factor * pvals[i]));
        out.adjusted[i] = running;
    }
    return out;
}

std::optional<Correlation> partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& controls) {
    const Eigen::Index n = x.size();
    if (y.size() != n || (controls.cols() > 0 && controls.rows() != n))
        throw InputError("partial_correlation: length mismatch");
    const Eigen::Index c = controls.cols();
    if (n < c + 3) throw InputError("partial_correlation needs at least controls + 3 observations");

    Eigen::MatrixXd Z(n, c + 1);
    Z.col(0).setOnes();
    if (c > 0) Z.rightCols(c) = controls;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    const Eigen::VectorXd rx = x - Z * qr.solve(x);
    const Eigen::VectorXd ry = y - Z * qr.solve(y);
    const double sxx = rx.squaredNorm(), syy = ry.squaredNorm();
    const double scale = std::max({1.0, x.squaredNorm(), y.squaredNorm()});
    if (sxx <= 1e-24 * scale || syy <= 1e-24 * scale) return std::nullopt;

    Correlation out;
    out.r = std::clamp(rx.dot(ry) / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - c - 2);
    if (std::abs(out.r) >= 1.0) {
        out.p = 0.0;
    } else {
        out.p = t_test_p(out.r * std::sqrt(df / (1.0 - out.r * out.r)), df);
    }
    return out;
}

std::optional<double> cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    const double sa = *sample_sd(a), sb = *sample_sd(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1) * sa * sa + (nb - 1) * sb * sb) / (na + nb - 2));
    if (!(pooled > 0.0)) return std::nullopt;
    return (*mean_of(a) - *mean_of(b)) / pooled;
}

} // namespace stylo
