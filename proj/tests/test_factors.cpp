#include "metalcast/errors.hpp"
#include "metalcast/factors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace metalcast;
using metalcast::testing::jacobi_eigen;
using metalcast::testing::random_matrix;

namespace {

std::vector<std::string> names(Eigen::Index n) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) ids.push_back("V" + std::to_string(i));
    return ids;
}

StandardizedPanel random_panel(std::mt19937_64& rng, Eigen::Index T, Eigen::Index N) {
    // A couple of common drivers so the leading eigenvalues are separated.
    Eigen::MatrixXd f = random_matrix(rng, T, 2);
    Eigen::MatrixXd load = random_matrix(rng, 2, N);
    Eigen::MatrixXd x = f * load + 0.5 * random_matrix(rng, T, N);
    return standardize_panel(x, names(N));
}

}  // namespace

TEST(Standardize, DirectMoments) {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd raw = random_matrix(rng, 60, 10) * 3.0;
    raw.col(4).array() += 7.0;
    auto p = standardize_panel(raw, names(10));
    for (Eigen::Index j = 0; j < 10; ++j) {
        double m = 0.0, v = 0.0;
        for (Eigen::Index t = 0; t < 60; ++t) m += p.x(t, j);
        m /= 60.0;
        for (Eigen::Index t = 0; t < 60; ++t) v += (p.x(t, j) - m) * (p.x(t, j) - m);
        EXPECT_NEAR(m, 0.0, 1e-10);
        EXPECT_NEAR(std::sqrt(v / 60.0), 1.0, 1e-10);
    }
    auto again = standardize_panel(p.x, p.ids);
    EXPECT_LT((again.x - p.x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, ExclusionAndDegenerateColumns) {
    std::mt19937_64 rng(2);
    Eigen::MatrixXd raw = random_matrix(rng, 30, 4);
    auto p = standardize_panel(raw, {"A", "B", "C", "D"}, {"B"});
    EXPECT_EQ(p.ids, (std::vector<std::string>{"A", "C", "D"}));
    EXPECT_EQ(p.excluded_ids, (std::vector<std::string>{"B"}));
    EXPECT_EQ(p.x.cols(), 3);

    raw.col(2).setConstant(4.0);
    try {
        (void)standardize_panel(raw, {"A", "B", "C", "D"});
        FAIL() << "expected DegenerateColumnError";
    } catch (const DegenerateColumnError& e) {
        EXPECT_NE(std::string(e.what()).find("C"), std::string::npos);
    }
    // Excluding the constant column makes the panel valid again.
    EXPECT_NO_THROW((void)standardize_panel(raw, {"A", "B", "C", "D"}, {"C"}));
}

TEST(Pca, LoadingNormalizationOnRandomPanels) {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index N = 3 + rep % 12;
        const int r = 1 + rep % 3;
        auto panel = random_panel(rng, 40 + rep, N);
        auto fm = extract_factors(panel, r);
        Eigen::MatrixXd gram = fm.loadings * fm.loadings.transpose() / static_cast<double>(N);
        EXPECT_LT((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-8);
        for (int k = 1; k < r; ++k) EXPECT_GE(fm.eigenvalues(k - 1), fm.eigenvalues(k));
        EXPECT_GE(fm.eigenvalues(r - 1), 0.0);
        // F = x L' / N row by row.
        Eigen::MatrixXd f = panel.x * fm.loadings.transpose() / static_cast<double>(N);
        EXPECT_LT((f - fm.factors).cwiseAbs().maxCoeff(), 1e-10);
        // With L = sqrt(N) V each score has variance lambda_k / N.
        const double score_var = (fm.factors.array().square().colwise().sum() / panel.x.rows()).sum();
        EXPECT_NEAR(score_var * static_cast<double>(N), fm.variance_explained(), 1e-8);
    }
}

TEST(Pca, MatchesJacobiEigenOracle) {
    std::mt19937_64 rng(4);
    auto panel = random_panel(rng, 120, 15);
    auto fm = extract_factors(panel, 2);
    Eigen::MatrixXd cov = panel.x.transpose() * panel.x / 120.0;
    auto [values, vectors] = jacobi_eigen(cov);
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(fm.eigenvalues(k), values(k), 1e-8);
        Eigen::VectorXd lk = fm.loadings.row(k).transpose() / std::sqrt(15.0);
        const double sign = lk.dot(vectors.col(k)) >= 0 ? 1.0 : -1.0;
        EXPECT_LT((lk - sign * vectors.col(k)).cwiseAbs().maxCoeff(), 1e-8);
    }
    EXPECT_NEAR(fm.total_variance, cov.trace(), 1e-10);
}

TEST(Pca, RankOnePanel) {
    std::mt19937_64 rng(5);
    Eigen::VectorXd u = random_matrix(rng, 50, 1);
    Eigen::VectorXd v = random_matrix(rng, 8, 1);
    auto panel = standardize_panel(u * v.transpose(), names(8));
    auto fm = extract_factors(panel, 2);
    EXPECT_LT(std::abs(fm.eigenvalues(1)), 1e-10);
    EXPECT_NEAR(fm.variance_share(), 1.0, 1e-10);
}

TEST(Pca, FullRankReconstruction) {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        auto panel = random_panel(rng, 40, 6);
        for (bool divide : {true, false}) {
            auto fm = extract_factors(panel, 6, FactorOptions{divide});
            EXPECT_LT((fm.reconstruct() - panel.x).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(Pca, SignConventionAndDeterminism) {
    std::mt19937_64 rng(7);
    auto panel = random_panel(rng, 80, 9);
    auto a = extract_factors(panel, 2);
    auto b = extract_factors(panel, 2);
    EXPECT_EQ(a.loadings, b.loadings);
    EXPECT_EQ(a.factors, b.factors);
    for (int k = 0; k < 2; ++k) {
        Eigen::Index idx = 0;
        a.loadings.row(k).cwiseAbs().maxCoeff(&idx);
        EXPECT_GT(a.loadings(k, idx), 0.0);
    }
    EXPECT_THROW(extract_factors(panel, 10), DimensionError);
    EXPECT_THROW(extract_factors(panel, 0), DimensionError);
}

TEST(Pca, FactorCsvDump) {
    std::mt19937_64 rng(8);
    auto panel = random_panel(rng, 3, 4);
    auto fm = extract_factors(panel, 2);
    auto csv = factors_to_csv(fm, {{2020, 1}, {2020, 2}, {2020, 3}});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "date,factor_1,factor_2");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_THROW(factors_to_csv(fm, {{2020, 1}}), DimensionError);
}
