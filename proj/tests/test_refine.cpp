#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "osmroad/morphology.hpp"
#include "osmroad/refine.hpp"
#include "support/refine_fixtures.hpp"

using namespace osmroad;
using namespace osmroad::test_support;

namespace {

RgbImage uniform_image(int w, int h, Rgb c = {120, 120, 120}) { return RgbImage(w, h, c); }

// Number of 4-connected pieces summed over labels (independent flood fill).
int count_pieces(const Grid<std::int32_t>& labels) {
  Grid<std::uint8_t> seen(labels.width(), labels.height(), 0);
  int pieces = 0;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (seen(x, y)) continue;
      ++pieces;
      std::vector<std::pair<int, int>> st{{x, y}};
      seen(x, y) = 1;
      while (!st.empty()) {
        auto [px, py] = st.back();
        st.pop_back();
        const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& o : d) {
          const int nx = px + o[0], ny = py + o[1];
          if (labels.contains(nx, ny) && !seen(nx, ny) && labels(nx, ny) == labels(px, py)) {
            seen(nx, ny) = 1;
            st.push_back({nx, ny});
          }
        }
      }
    }
  }
  return pieces;
}

}  // namespace

// --- Morphology --------------------------------------------------------------------------

TEST(Morphology, DiscDilationOfSinglePixel) {
  BinaryGrid g(11, 11, 0);
  g(5, 5) = 1;
  const auto d = dilate(g, 2);
  int count = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      const bool in = (x - 5) * (x - 5) + (y - 5) * (y - 5) <= 4;
      EXPECT_EQ(d(x, y), in ? 1 : 0);
      count += d(x, y);
    }
  EXPECT_EQ(count, 13);
  EXPECT_EQ(erode(d, 2)(5, 5), 1);
  EXPECT_EQ(erode(d, 2)(5, 4), 0);
}

TEST(Morphology, ClosingBridgesSmallGap) {
  BinaryGrid g(30, 10, 0);
  for (int y = 2; y < 8; ++y)
    for (int x = 0; x < 30; ++x)
      if (x < 13 || x > 15) g(x, y) = 1;
  const auto c = close(g, 3);
  for (int x = 13; x <= 15; ++x) EXPECT_EQ(c(x, 5), 1);
  EXPECT_EQ(c(20, 0), 0);
}

TEST(Morphology, ErosionIgnoresImageBorder) {
  BinaryGrid g(8, 8, 1);
  EXPECT_EQ(erode(g, 3), g);
}

TEST(Morphology, ConnectivityAndLargest) {
  BinaryGrid g(5, 5, 0);
  g(0, 0) = 1;
  g(1, 1) = 1;  // diagonal neighbour
  g(4, 4) = 1;
  g(4, 3) = 1;
  EXPECT_EQ(label_components(g, Connectivity::four).sizes.size(), 3u);
  EXPECT_EQ(label_components(g, Connectivity::eight).sizes.size(), 2u);
  // Two components of size 2 under 8-connectivity: the first in scan order wins.
  const auto l = largest_component(g, Connectivity::eight);
  EXPECT_EQ(l(0, 0), 1);
  EXPECT_EQ(l(4, 4), 0);
}

TEST(Morphology, ComponentsTouchingRect) {
  BinaryGrid g(6, 3, 0);
  g(0, 0) = g(1, 0) = 1;
  g(4, 2) = g(5, 2) = g(5, 1) = 1;
  const auto t = components_touching(g, {0, 0, 1, 1});
  EXPECT_EQ(t(1, 0), 1);
  EXPECT_EQ(t(5, 2), 0);
}

// --- Superpixels ----------------------------------------------------------------------------

TEST(Superpixels, SingleSegment) {
  const auto sp = superpixels(textured_image(40, 30, 1), {1, 10.0, 10});
  EXPECT_EQ(sp.count, 1);
  for (auto l : sp.labels.values()) EXPECT_EQ(l, 0);
}

TEST(Superpixels, UniformImageQuadrisection) {
  const int w = 120, h = 80;
  const auto sp = superpixels(uniform_image(w, h), {4, 10.0, 10});
  ASSERT_EQ(sp.count, 4);
  std::vector<std::size_t> sizes(4, 0);
  for (auto l : sp.labels.values()) sizes[static_cast<std::size_t>(l)]++;
  const double quarter = w * h / 4.0;
  for (auto s : sizes) {
    EXPECT_GE(s, 0.8 * quarter);
    EXPECT_LE(s, 1.2 * quarter);
  }
  // Spatial-only k-means from the 2x2 grid converges to the quadrants.
  EXPECT_EQ(sp.labels(0, 0), sp.labels(w / 2 - 1, h / 2 - 1));
  EXPECT_NE(sp.labels(0, 0), sp.labels(w - 1, 0));
  EXPECT_NE(sp.labels(0, 0), sp.labels(0, h - 1));
}

TEST(Superpixels, KittiSizedFrame) {
  const auto img = textured_image(1242, 375, 2);
  const auto sp = superpixels(img, {800, 10.0, 10});
  const double mean = static_cast<double>(img.size()) / sp.count;
  EXPECT_NEAR(mean, 375.0 * 1242.0 / 800.0, 0.15 * 582.0);
  std::set<std::int32_t> seen(sp.labels.values().begin(), sp.labels.values().end());
  EXPECT_EQ(static_cast<int>(seen.size()), sp.count);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), sp.count - 1);
  EXPECT_EQ(count_pieces(sp.labels), sp.count);
}

TEST(Superpixels, SegmentsAreFourConnected) {
  for (unsigned seed : {3u, 4u, 5u}) {
    const auto sp = superpixels(textured_image(160, 90, seed), {60, 10.0, 10});
    EXPECT_EQ(count_pieces(sp.labels), sp.count);
  }
}

TEST(Superpixels, TooManySegments) {
  try {
    superpixels(uniform_image(4, 4), {17, 10.0, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::k_too_large);
  }
}

TEST(Superpixels, Deterministic) {
  const auto img = textured_image(100, 60, 9);
  const auto a = superpixels(img, {40, 10.0, 10});
  const auto b = superpixels(img, {40, 10.0, 10});
  EXPECT_EQ(a.labels, b.labels);
}

// --- Relabel -----------------------------------------------------------------------------------

TEST(Relabel, AllZeros) {
  const auto sp = column_segments(20, 5, {0, 10});
  RoadMask init(20, 5);
  EXPECT_EQ(relabel(sp, init), init);
}

TEST(Relabel, ExactHalfIsNonRoad) {
  const auto sp = column_segments(20, 5, {0, 10});
  RoadMask init(20, 5);
  paint(init, sp, 0, 25);  // 25 of 50
  paint(init, sp, 1, 26);  // 26 of 50
  const auto out = relabel(sp, init);
  for (int y = 0; y < 5; ++y) {
    EXPECT_EQ(out(3, y), 0.0);
    EXPECT_EQ(out(15, y), 1.0);
  }
}

TEST(Relabel, LargerOfTwoDisjointRoadSegmentsSurvives) {
  // Segments: 0 = cols [0,12), 1 = cols [12,22), 2 = cols [22,30); fractions 0.9/0.4/0.6.
  const int w = 30, h = 10;
  const auto sp = column_segments(w, h, {0, 12, 22});
  RoadMask init(w, h);
  paint(init, sp, 0, 108);  // 0.9 of 120
  paint(init, sp, 1, 40);   // 0.4 of 100
  paint(init, sp, 2, 48);   // 0.6 of 80
  const auto out = relabel(sp, init);
  EXPECT_EQ(out, relabel_oracle(sp, init));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) EXPECT_EQ(out(x, y), x < 12 ? 1.0 : 0.0);
  }
}

TEST(Relabel, MatchesOracleOnRandomFixtures) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto img = textured_image(64, 40, 100 + static_cast<unsigned>(trial));
    const auto sp = superpixels(img, {24, 10.0, 5});
    RoadMask init(64, 40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> frac(static_cast<std::size_t>(sp.count));
    for (auto& f : frac) f = u(rng) < 0.2 ? 0.5 : u(rng);
    for (std::size_t i = 0; i < init.values.size(); ++i) {
      init.values[i] = u(rng) < frac[static_cast<std::size_t>(sp.labels[i])] ? 1.0 : 0.0;
    }
    const auto out = relabel(sp, init);
    ASSERT_EQ(out, relabel_oracle(sp, init)) << trial;

    // Properties: subset of >50% segments, one component, idempotent.
    const auto counts = segment_counts(sp, init);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (out.values[i] > 0.5) {
        const auto l = static_cast<std::size_t>(sp.labels[i]);
        ASSERT_GT(2 * counts.road[l], counts.total[l]);
      }
    }
    EXPECT_LE(label_components(to_binary(out), Connectivity::eight).sizes.size(), 1u);
    EXPECT_EQ(relabel(sp, out), out);
  }
}

TEST(Relabel, BoundaryOverflowShrinksArea) {
  // True road = left 20 columns; the mask overflows by 3 columns into a segment that is
  // mostly non-road, so relabeling trims the overflow.
  const auto sp = column_segments(40, 10, {0, 20});
  RoadMask init(40, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 23; ++x) init(x, y) = 1.0;
  const auto out = relabel(sp, init);
  EXPECT_LE(out.count_positive(), init.count_positive());
  EXPECT_EQ(out.count_positive(), 200u);
}

TEST(Relabel, ShapeMismatch) {
  const auto sp = column_segments(20, 5, {0});
  EXPECT_THROW(relabel(sp, RoadMask(21, 5)), Error);
}
