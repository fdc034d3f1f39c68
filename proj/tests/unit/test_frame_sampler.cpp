#include <gtest/gtest.h>

#include "semaug/frame_sampler.hpp"

using namespace semaug;

TEST(MiddleFrames, TenFrames) { EXPECT_EQ(middle_frame_indices(10), (FrameTriple{{4, 5, 6}})); }
TEST(MiddleFrames, ThreeFrames) { EXPECT_EQ(middle_frame_indices(3), (FrameTriple{{0, 1, 2}})); }
TEST(MiddleFrames, SevenFrames) { EXPECT_EQ(middle_frame_indices(7), (FrameTriple{{2, 3, 4}})); }

TEST(MiddleFrames, TooFewFrames) {
  EXPECT_THROW(middle_frame_indices(2), DomainError);
  EXPECT_THROW(middle_frame_indices(0), DomainError);
}

TEST(MiddleFrames, ConsecutiveInRangeAroundMiddle) {
  for (std::size_t n = 3; n < 500; ++n) {
    const auto t = middle_frame_indices(n).indices;
    EXPECT_EQ(t[1], t[0] + 1);
    EXPECT_EQ(t[2], t[1] + 1);
    EXPECT_LT(t[2], n);
    EXPECT_EQ(t[1], n / 2) << n;
  }
}

TEST(UniformFrames, TenPickThree) { EXPECT_EQ(uniform_sample_indices(10, 3), (std::vector<std::size_t>{0, 4, 9})); }
TEST(UniformFrames, AllFrames) { EXPECT_EQ(uniform_sample_indices(5, 5), (std::vector<std::size_t>{0, 1, 2, 3, 4})); }
TEST(UniformFrames, SingleMiddle) { EXPECT_EQ(uniform_sample_indices(9, 1), (std::vector<std::size_t>{4})); }

TEST(UniformFrames, TooManyRequested) {
  EXPECT_THROW(uniform_sample_indices(4, 5), DomainError);
  EXPECT_THROW(uniform_sample_indices(4, 0), DomainError);
}

TEST(UniformFrames, EndpointsAndStrictlyIncreasing) {
  for (std::size_t n = 2; n < 60; ++n)
    for (std::size_t k = 2; k <= n; ++k) {
      const auto idx = uniform_sample_indices(n, k);
      EXPECT_EQ(idx.front(), 0u);
      EXPECT_EQ(idx.back(), n - 1);
      EXPECT_EQ(idx.size(), k) << n << " " << k;
      for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LT(idx[i - 1], idx[i]);
    }
}

TEST(TemporalConcat, ScalarFrames) {
  Vector<double> a(1), b(1), c(1);
  a << 1;
  b << 2;
  c << 3;
  const Vector<double> out = temporal_concat<double>(a, b, c);
  EXPECT_EQ(out, (Vector<double>(3) << 1, 2, 3).finished());
  EXPECT_NE(temporal_concat<double>(c, b, a), out);
}

TEST(TemporalConcat, ZeroFrames) {
  const Vector<double> z = Vector<double>::Zero(4);
  const Vector<double> out = temporal_concat<double>(z, z, z);
  EXPECT_EQ(out.size(), 12);
  EXPECT_TRUE(out.isZero(0));
}

TEST(TemporalConcat, MiddleSliceRecoversMiddleFrame) {
  const Vector<double> a = Vector<double>::Random(6), b = Vector<double>::Random(6), c = Vector<double>::Random(6);
  const Vector<double> out = temporal_concat<double>(a, b, c);
  EXPECT_EQ(Vector<double>(out.segment(6, 6)), b);
}

TEST(TemporalConcat, DimensionMismatchNamesFrame) {
  try {
    temporal_concat<double>(Vector<double>::Zero(3), Vector<double>::Zero(3), Vector<double>::Zero(2));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos) << e.what();
  }
}

TEST(TemporalConcat, MatrixFlattensRows) {
  Matrix<double> m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(temporal_concat<double>(m), (Vector<double>(6) << 1, 2, 3, 4, 5, 6).finished());
}
