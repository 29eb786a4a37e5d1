#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rgt/data.hpp"

using namespace rgt;

namespace {

const std::string kFixtures = RGT_FIXTURES;

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("rgt_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST(GenDisc, PointsInsideRadius) {
  const Dataset d = gen_disc(300, 2.5, 1);
  EXPECT_EQ(d.size(), 300);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_LE(d.x.rowwise().norm().maxCoeff(), 2.5);
  const Dataset one = gen_disc(1, 1.0, 9);
  EXPECT_LE(one.x.row(0).norm(), 1.0);
  EXPECT_THROW(gen_disc(0, 1.0, 1), DomainError);
  EXPECT_THROW(gen_disc(5, 0.0, 1), DomainError);
}

TEST(GenDisc, MomentsMatchUniformDisc) {
  const double r = 2.0;
  const Dataset d = gen_disc(100000, r, 3);
  const double sd_mean = r / 2.0 / std::sqrt(1e5);
  const Eigen::RowVectorXd mean = d.x.colwise().mean();
  EXPECT_LT(std::abs(mean[0]), 3 * sd_mean);
  EXPECT_LT(std::abs(mean[1]), 3 * sd_mean);
  const Eigen::MatrixXd c = d.x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / 1e5;
  EXPECT_NEAR(cov(0, 0), r * r / 4, 0.02 * r * r / 4);
  EXPECT_NEAR(cov(1, 1), r * r / 4, 0.02 * r * r / 4);
}

TEST(GenGmm, CovarianceOfSingleComponent) {
  const Dataset d = gen_gmm(100000, {{0.0, 0.0}}, 1.0, 4);
  const Eigen::RowVectorXd mean = d.x.colwise().mean();
  const Eigen::MatrixXd c = d.x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / 1e5;
  EXPECT_LT((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 0.05);
}

TEST(GenGmm, DeterministicPerSeed) {
  const std::vector<std::vector<double>> means{{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
  const Dataset a = gen_gmm(4, means, 0.5, 17);
  const Dataset b = gen_gmm(4, means, 0.5, 17);
  EXPECT_TRUE((a.x.array() == b.x.array()).all());
  EXPECT_FALSE((a.x.array() == gen_gmm(4, means, 0.5, 18).x.array()).all());
  EXPECT_TRUE((gen_disc(50, 1.0, 2).x.array() == gen_disc(50, 1.0, 2).x.array()).all());
}

TEST(GenGmm, VanishingVarianceSitsOnMeans) {
  const std::vector<std::vector<double>> means{{5, 5}, {-5, 5}, {-5, -5}, {5, -5}};
  const Dataset d = gen_gmm(200, means, 1e-12, 6);
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    double best = 1e300;
    for (const auto& m : means) best = std::min(best, std::hypot(d.x(k, 0) - m[0], d.x(k, 1) - m[1]));
    EXPECT_LT(best, 1e-5);
  }
  EXPECT_THROW(gen_gmm(3, {}, 1.0, 1), DomainError);
  EXPECT_THROW(gen_gmm(3, {{0, 0}}, 0.0, 1), DomainError);
}

TEST(GenFourClusters, CentredAtCorners) {
  const Dataset d = gen_four_clusters(4000, 5.0, 0.5, 8);
  int quadrants[4] = {};
  for (Eigen::Index k = 0; k < d.size(); ++k) ++quadrants[(d.x(k, 0) > 0) + 2 * (d.x(k, 1) > 0)];
  for (int q : quadrants) EXPECT_NEAR(q, 1000, 120);
}

TEST(LoadDelimited, IrisSetosa) {
  const Dataset d = load_delimited(kFixtures + "/iris.csv", {true, -1, "setosa"});
  EXPECT_EQ(d.size(), 50);
  EXPECT_EQ(d.dim(), 4);
  EXPECT_DOUBLE_EQ(d.x(0, 0), 5.1);
  EXPECT_EQ(d.name, "setosa");
}

TEST(LoadDelimited, MajorityLabelByDefault) {
  const Dataset d = load_delimited(kFixtures + "/sample.csv", {true, -1, std::nullopt});
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.name, "inlier");
}

TEST(LoadDelimited, MalformedRowNamesLine) {
  try {
    load_delimited(kFixtures + "/malformed.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("oops"), std::string::npos);
  }
}

TEST(LoadDelimited, WhitespaceAndErrors) {
  const auto ws = temp_file("ws.txt", "1 2 0\n3 4 0\n\n5\t6 1\n");
  const Dataset d = load_delimited(ws, {false, 2, "0"});
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.x(1, 1), 4.0);
  EXPECT_THROW(load_delimited(ws, {false, 2, "7"}), EmptySelection);
  EXPECT_THROW(load_delimited(temp_file("ragged.txt", "1,2,a\n1,a\n")), ParseError);
  EXPECT_THROW(load_delimited(temp_file("blank.txt", "")), EmptySelection);
  EXPECT_THROW(load_delimited(kFixtures + "/missing.csv"), DataError);
}

TEST(LoadSparse, DensifiesRows) {
  const Dataset d = load_sparse_indexed(kFixtures + "/sample.svm", "-1");
  ASSERT_EQ(d.size(), 2);
  ASSERT_EQ(d.dim(), 5);
  const double first[] = {0, 0, 1, 0, 0.5};
  const double second[] = {0.25, -1, 0, 0, 0};
  for (int c = 0; c < 5; ++c) {
    EXPECT_EQ(d.x(0, c), first[c]);
    EXPECT_EQ(d.x(1, c), second[c]);
  }
  const Dataset pos = load_sparse_indexed(kFixtures + "/sample.svm", "+1");
  EXPECT_EQ(pos.size(), 1);
  EXPECT_EQ(pos.x(0, 3), 2.0);
  EXPECT_EQ(load_sparse_indexed(kFixtures + "/sample.svm").size(), 2);
  EXPECT_EQ(load_sparse_indexed(kFixtures + "/sample.svm", "-1", 123).dim(), 123);
}

TEST(LoadSparse, Errors) {
  try {
    load_sparse_indexed(temp_file("zero.svm", "1 1:2\n1 0:1\n"));
    FAIL() << "expected IndexError";
  } catch (const IndexError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_sparse_indexed(temp_file("neg.svm", "1 -3:1\n")), IndexError);
  EXPECT_THROW(load_sparse_indexed(temp_file("empty.svm", "")), EmptySelection);
  EXPECT_THROW(load_sparse_indexed(temp_file("bad.svm", "1 2:x\n")), ParseError);
  EXPECT_THROW(load_sparse_indexed(temp_file("nocolon.svm", "1 2\n")), ParseError);
}

TEST(Standardize, ZeroMeanUnitVariance) {
  Dataset d = load_delimited(kFixtures + "/iris.csv", {true, -1, "setosa"});
  d = standardize(d);
  const Eigen::RowVectorXd mean = d.x.colwise().mean();
  for (Eigen::Index c = 0; c < d.dim(); ++c) {
    EXPECT_NEAR(mean[c], 0.0, 1e-13);
    EXPECT_NEAR(d.x.col(c).squaredNorm() / d.size(), 1.0, 1e-12);
  }
}
