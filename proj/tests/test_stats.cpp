#include <doctest.h>

#include <cmath>
#include <map>

#include "stylo/common.hpp"
#include "stylo/rng.hpp"
#include "stylo/stats.hpp"

using namespace stylo;

namespace {

const std::vector<std::string> kCats = {"Gaming", "Other", "Social", "Tech"};

std::vector<PanelRow> planted_panel(std::uint64_t seed, double noise_sd = 0.01) {
    Rng rng(seed);
    std::vector<PanelRow> rows;
    for (int a = 0; a < 50; ++a) {
        const double effect = rng.normal(0.0, 3.0);
        for (int k = 0; k < 20; ++k) {
            PanelRow r;
            r.author_id = "a" + std::to_string(a);
            r.category = kCats[rng.index(kCats.size())];
            r.post_llm = k >= 10 ? 1 : 0;
            r.length = rng.uniform(5.0, 60.0);
            r.y = 2.0 * r.post_llm + 0.5 * r.length + effect + rng.normal(0.0, noise_sd);
            rows.push_back(r);
        }
    }
    return rows;
}

// Sandwich with explicit inverses: (X'X)^-1 X' diag(e^2/(1-h)^2) X (X'X)^-1.
double hc3_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, Eigen::Index c) {
    const Eigen::MatrixXd inv = (X.transpose() * X).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        const double h = xi.dot(inv * xi);
        const double w = e(i) / (1.0 - h);
        meat += w * w * xi * xi.transpose();
    }
    return std::sqrt((inv * meat * inv)(c, c));
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd dx = x.array() - x.mean();
    const Eigen::VectorXd dy = y.array() - y.mean();
    return dx.dot(dy) / std::sqrt(dx.squaredNorm() * dy.squaredNorm());
}

} // namespace

TEST_CASE("fixed-effects regression recovers the planted effect") {
    const auto r = fe_regress(planted_panel(42));
    CHECK(r.beta >= 1.9);
    CHECK(r.beta <= 2.1);
    CHECK(r.gamma == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.n_obs == 1000);
    CHECK(r.n_authors == 50);
    CHECK(r.df == 1000 - (2 + r.category_columns.size()) - 50);
    CHECK(r.p_beta < 1e-10);
    CHECK(r.r2_within > 0.99);
}

TEST_CASE("author effects are absorbed") {
    auto rows = planted_panel(7, 0.5);
    const auto base = fe_regress(rows);
    std::map<std::string, double> shift;
    Rng rng(3);
    for (auto& row : rows) {
        if (!shift.count(row.author_id)) shift[row.author_id] = rng.normal(0.0, 100.0);
        row.y += shift[row.author_id];
    }
    const auto moved = fe_regress(rows);
    CHECK(moved.beta == doctest::Approx(base.beta).epsilon(1e-9));
    CHECK(moved.se_beta_hc3 == doctest::Approx(base.se_beta_hc3).epsilon(1e-9));

    for (auto& row : rows) row.y = shift[row.author_id];
    CHECK(std::abs(fe_regress(rows).beta) < 1e-9);
}

TEST_CASE("regression identification errors") {
    auto rows = planted_panel(1);
    for (auto& r : rows) r.post_llm = 0;
    CHECK_THROWS_AS(fe_regress(rows), DataError);
    const auto all = planted_panel(1);
    const std::vector<PanelRow> one(all.begin(), all.begin() + 20);
    CHECK_THROWS_AS(fe_regress(one), DataError);
}

TEST_CASE("category dummies constant within author are dropped") {
    auto rows = planted_panel(11);
    for (auto& r : rows) r.category = kCats[static_cast<std::size_t>(std::stoi(r.author_id.substr(1))) % 4];
    const auto r = fe_regress(rows);
    CHECK(r.category_columns.empty());
    CHECK(r.beta == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("HC3 hand case and oracle") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
    Eigen::VectorXd e(3);
    e << 1, -1, 0;
    CHECK(hc3_se(X, e, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(std::abs(hc3_se(X, e, 0) - 0.7071) < 1e-4);
    CHECK(hc3_se(X, Eigen::VectorXd::Zero(3), 0) == 0.0);

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.index(40));
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(4));
        Eigen::MatrixXd A(n, k);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) A(i, j) = rng.normal();
            r(i) = rng.normal(0.0, 1.0 + std::abs(A(i, 0)));
        }
        for (Eigen::Index c = 0; c < k; ++c) CHECK(hc3_se(A, r, c) == doctest::Approx(hc3_oracle(A, r, c)).epsilon(1e-9));
    }

    Eigen::MatrixXd dup(3, 2);
    dup << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(hc3_se(dup, e, 0), InputError);

    Eigen::MatrixXd lever(3, 2);
    lever << 1, 0, 0, 1, 0, 1;  // row 0 alone determines its coefficient
    try {
        hc3_se(lever, e, 0);
        FAIL("expected leverage error");
    } catch (const InputError& err) {
        CHECK(std::string(err.what()).find("row 0") != std::string::npos);
    }
}

TEST_CASE("HC3 is close to classical SE under homoskedasticity") {
    Rng rng(2024);
    const Eigen::Index n = 5000;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rng.normal();
        y(i) = 1.0 + 3.0 * X(i, 1) + rng.normal();
    }
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd e = y - X * b;
    const double s2 = e.squaredNorm() / static_cast<double>(n - 2);
    const double classical = std::sqrt(s2 * (X.transpose() * X).inverse()(1, 1));
    CHECK(std::abs(hc3_se(X, e, 1) / classical - 1.0) < 0.10);
}

TEST_CASE("Holm step-down") {
    const auto h = holm_bonferroni({0.01, 0.04, 0.03}, 0.05);
    CHECK(h.reject == std::vector<bool>{true, false, false});
    CHECK(h.adjusted[0] == doctest::Approx(0.03));
    CHECK(h.adjusted[1] == doctest::Approx(0.06));
    CHECK(h.adjusted[2] == doctest::Approx(0.06));

    const auto ones = holm_bonferroni({1.0, 1.0, 1.0});
    CHECK(ones.reject == std::vector<bool>{false, false, false});
    CHECK(ones.adjusted == std::vector<double>{1.0, 1.0, 1.0});

    CHECK(holm_bonferroni({0.04}).reject == std::vector<bool>{true});
    CHECK(holm_bonferroni({}).reject.empty());
    CHECK_THROWS_AS(holm_bonferroni({0.5, 1.2}), InputError);
    CHECK_THROWS_AS(holm_bonferroni({-0.1}), InputError);
}

TEST_CASE("partial correlation") {
    Rng rng(31);
    const Eigen::Index n = 10000;
    Eigen::VectorXd x(n), y(n), z(n);
    Eigen::MatrixXd controls(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i) = rng.normal();
        x(i) = 2.0 * z(i) + rng.normal();
        y(i) = -1.5 * z(i) + rng.normal();
        controls(i, 0) = z(i);
    }
    const auto plain = partial_correlation(x, y, Eigen::MatrixXd(n, 0));
    REQUIRE(plain.has_value());
    CHECK(plain->r == doctest::Approx(pearson(x, y)).epsilon(1e-12));
    CHECK(plain->r < -0.5);

    const auto part = partial_correlation(x, y, controls);
    REQUIRE(part.has_value());
    CHECK(std::abs(part->r) < 0.05);

    const auto self = partial_correlation(x, x, controls);
    CHECK(self->r == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_FALSE(partial_correlation(z, y, controls).has_value());
}

TEST_CASE("effect sizes and t-test p-values") {
    CHECK(*cohens_d({3, 4, 5}, {1, 2, 3}) == doctest::Approx(2.0));
    CHECK_FALSE(cohens_d({1}, {1, 2}).has_value());
    CHECK_FALSE(cohens_d({2, 2}, {2, 2}).has_value());
    CHECK(t_test_p(0.0, 10) == doctest::Approx(1.0));
    CHECK(t_test_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(t_test_p(-2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-6));
}
