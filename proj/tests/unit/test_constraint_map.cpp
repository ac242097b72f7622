#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "raceline/constraint_map.hpp"
#include "raceline/errors.hpp"

using namespace raceline;

namespace {

ConstraintMap small_map(double m = 1.0) {
  MapParams p;
  p.m_init = m;
  return ConstraintMap(Vec2(-2.0, -1.0), 0.25, 16, 12, p);
}

}  // namespace

TEST(ScaleAt, IdentityWhenMapIsOne) {
  const ConstraintMap map = small_map();
  const AccelLimits lim = scale_at(map, Vec2(0.3, 0.7), 3.0, 4.0);
  EXPECT_DOUBLE_EQ(lim.a_par_max, 3.0);
  EXPECT_DOUBLE_EQ(lim.a_perp_max, 4.0);
}

TEST(ScaleAt, HalfMap) {
  const ConstraintMap map = small_map(0.5);
  EXPECT_DOUBLE_EQ(scale_at(map, Vec2(0.1, 0.1), 3.0, 8.0).a_perp_max, 4.0);
}

TEST(ScaleAt, CellCenterReturnsCellValue) {
  ConstraintMap map = small_map();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(0.1, 1.9);
  for (int ix = 0; ix < map.nx(); ++ix)
    for (int iy = 0; iy < map.ny(); ++iy) map.set_m(ix, iy, m(rng));
  for (int ix = 0; ix < map.nx(); ++ix)
    for (int iy = 0; iy < map.ny(); ++iy)
      EXPECT_NEAR(map.scale(map.cell_center(ix, iy)), map.m(ix, iy), 1e-14);
}

TEST(ScaleAt, BilinearBetweenCenters) {
  ConstraintMap map = small_map();
  map.set_m(4, 4, 0.2);
  map.set_m(5, 4, 0.6);
  map.set_m(4, 5, 1.0);
  map.set_m(5, 5, 1.4);
  const Vec2 c = 0.5 * (map.cell_center(4, 4) + map.cell_center(5, 5));
  EXPECT_NEAR(map.scale(c), 0.8, 1e-14);
  const Vec2 q = map.cell_center(4, 4) + Vec2(0.25 * 0.25, 0.0);
  EXPECT_NEAR(map.scale(q), 0.3, 1e-14);
}

TEST(ScaleAt, OutsideExtentThrows) {
  const ConstraintMap map = small_map();
  EXPECT_THROW(scale_at(map, Vec2(10.0, 0.0), 3.0, 4.0), OutOfExtentError);
  EXPECT_THROW(map.cell_of(Vec2(-2.1, 0.0)), OutOfExtentError);
}

TEST(ConstraintMap, CoveringBox) {
  const ConstraintMap map =
      ConstraintMap::covering({Vec2(0, 0), Vec2(1.1, 0.5)}, 0.25, MapParams{});
  EXPECT_TRUE(map.contains(Vec2(1.1, 0.5)));
  EXPECT_EQ(map.nx(), 5);
  EXPECT_EQ(map.ny(), 2);
}

TEST(ConstraintMap, SetClampsToBounds) {
  ConstraintMap map = small_map();
  map.set_m(0, 0, 5.0);
  map.set_m(1, 0, -1.0);
  EXPECT_EQ(map.m(0, 0), map.params().m_max);
  EXPECT_EQ(map.m(1, 0), map.params().m_min);
}

TEST(Modulate, Examples) {
  FeedbackConfig cfg;
  cfg.e_th = 0.1;
  cfg.w_plus = 0.2;
  cfg.w_minus = -0.5;
  EXPECT_NEAR(modulate_error(0.05, cfg), 0.01, 1e-15);
  EXPECT_NEAR(modulate_error(0.1, cfg), -0.05, 1e-15);
  EXPECT_EQ(modulate_error(0.0, cfg), 0.0);
  cfg.w_plus = 7.0;
  EXPECT_EQ(modulate_error(0.0, cfg), 0.0);
}

TEST(FeedbackConfig, RejectsWrongSigns) {
  FeedbackConfig cfg;
  cfg.w_plus = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FeedbackConfig{};
  cfg.w_minus = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FeedbackConfig{};
  cfg.e_th = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Kalman, Example) {
  const double q = 0.01;
  const CellUpdate u = kalman_update_cell(0.7, 1.0, 0.2, 1.0, q, 0.05, 2.0);
  EXPECT_DOUBLE_EQ(u.gain, 0.5);
  EXPECT_NEAR(u.m, 0.8, 1e-15);
  EXPECT_NEAR(u.v, 0.5 + q, 1e-15);
}

TEST(Kalman, ZeroErrorShrinksVariance) {
  const CellUpdate u = kalman_update_cell(0.7, 1.0, 0.0, 0.5, 0.01, 0.05, 2.0);
  EXPECT_EQ(u.m, 0.7);
  EXPECT_LT(u.v, 1.0);
}

TEST(Kalman, GainInOpenUnitIntervalAndVarianceAboveQ) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(1e-6, 10.0);
  std::uniform_real_distribution<double> err(-3.0, 3.0);
  for (int k = 0; k < 10000; ++k) {
    const double q = pos(rng) * 0.1;
    const CellUpdate u = kalman_update_cell(1.0, pos(rng), err(rng), pos(rng), q, 0.05, 2.0);
    EXPECT_GT(u.gain, 0.0);
    EXPECT_LT(u.gain, 1.0);
    EXPECT_GT(u.v, q);
    EXPECT_GE(u.m, 0.05);
    EXPECT_LE(u.m, 2.0);
  }
}

TEST(Kalman, ClampsM) {
  EXPECT_EQ(kalman_update_cell(1.9, 1.0, 5.0, 0.5, 0.01, 0.05, 2.0).m, 2.0);
  EXPECT_EQ(kalman_update_cell(0.1, 1.0, -5.0, 0.5, 0.01, 0.05, 2.0).m, 0.05);
}

TEST(Kalman, FixedPointMatchesIteration) {
  for (const auto [r, q] : {std::pair{0.5, 0.01}, std::pair{1.0, 1e-3}, std::pair{0.1, 0.3},
                            std::pair{2.0, 1e-4}}) {
    double v = 1.0;
    double m = 1.0;
    for (int k = 0; k < 200000; ++k) {
      const CellUpdate u = kalman_update_cell(m, v, -0.01, r, q, 0.05, 2.0);
      m = u.m;
      if (std::abs(u.v - v) < 1e-17) break;
      v = u.v;
    }
    EXPECT_NEAR(steady_state_variance(r, q), v, 1e-9) << "r=" << r << " q=" << q;
  }
}

TEST(Kalman, NegativeErrorsMonotone) {
  double m = 1.5;
  double v = 1.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> err(-0.5, 0.0);
  for (int k = 0; k < 200; ++k) {
    const CellUpdate u = kalman_update_cell(m, v, err(rng), 0.5, 0.01, 0.05, 2.0);
    EXPECT_LE(u.m, m);
    m = u.m;
    v = u.v;
  }
  EXPECT_EQ(m, 0.05);
}

TEST(ApplyBlame, EmptyIsIdentity) {
  ConstraintMap map = small_map(0.8);
  const ConstraintMap before = map;
  EXPECT_EQ(apply_blame(map, {}, 0.5), 0);
  EXPECT_TRUE(map == before);
}

TEST(ApplyBlame, SmallRadiusTouchesOneCell) {
  ConstraintMap map = small_map();
  const Vec2 c = map.cell_center(7, 3);
  const BlamePoint pt{c + Vec2(0.01, -0.02), -0.3};
  EXPECT_EQ(apply_blame(map, std::span(&pt, 1), 0.1), 1);
  EXPECT_LT(map.m(7, 3), 1.0);
}

TEST(ApplyBlame, ZeroErrorShrinksOnlyInsideRadius) {
  ConstraintMap map = small_map();
  const ConstraintMap before = map;
  const BlamePoint pt{Vec2(0.0, 0.5), 0.0};
  const double radius = 0.5;
  const int updated = apply_blame(map, std::span(&pt, 1), radius);
  EXPECT_GT(updated, 1);
  int shrunk = 0;
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      EXPECT_EQ(map.m(ix, iy), before.m(ix, iy));
      const bool inside = (map.cell_center(ix, iy) - pt.position).norm() <= radius;
      if (inside) {
        EXPECT_LT(map.v(ix, iy), before.v(ix, iy));
        ++shrunk;
      } else {
        EXPECT_EQ(map.v(ix, iy), before.v(ix, iy));
      }
    }
  }
  EXPECT_EQ(shrunk, updated);
}

TEST(ApplyBlame, NearestPointWinsBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> x(-1.5, 1.5);
  std::uniform_real_distribution<double> y(-0.5, 1.5);
  std::uniform_real_distribution<double> e(-0.5, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    ConstraintMap map = small_map();
    const ConstraintMap before = map;
    std::vector<BlamePoint> pts;
    const int count = 2 + trial % 6;
    for (int k = 0; k < count; ++k) pts.push_back({Vec2(x(rng), y(rng)), e(rng)});
    const double radius = 0.3 + 0.02 * trial;
    const int updated = apply_blame(map, pts, radius);

    int expected_count = 0;
    const MapParams& p = map.params();
    for (int ix = 0; ix < map.nx(); ++ix) {
      for (int iy = 0; iy < map.ny(); ++iy) {
        const Vec2 c = map.cell_center(ix, iy);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < count; ++k) {
          const double d = (pts[k].position - c).norm();
          if (d <= radius && d < best_d) {
            best = k;
            best_d = d;
          }
        }
        if (best < 0) {
          EXPECT_EQ(map.m(ix, iy), before.m(ix, iy));
          EXPECT_EQ(map.v(ix, iy), before.v(ix, iy));
          continue;
        }
        ++expected_count;
        const CellUpdate u = kalman_update_cell(before.m(ix, iy), before.v(ix, iy),
                                                pts[best].error, p.r, p.q, p.m_min, p.m_max);
        EXPECT_EQ(map.m(ix, iy), u.m);
        EXPECT_EQ(map.v(ix, iy), u.v);
      }
    }
    EXPECT_EQ(updated, expected_count);
  }
}

TEST(MapIo, RoundTripIsBitExact) {
  ConstraintMap map = small_map();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> m(0.05, 2.0);
  std::uniform_real_distribution<double> v(0.01, 1.0);
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      map.set_m(ix, iy, m(rng));
      map.set_v(ix, iy, v(rng));
    }
  }
  std::stringstream ss;
  write_map(ss, map);
  const ConstraintMap back = read_map(ss);
  EXPECT_TRUE(back == map);
  EXPECT_EQ(back.params().r, map.params().r);
  EXPECT_EQ(back.params().q, map.params().q);
}

TEST(MapIo, RejectsTruncatedInput) {
  std::stringstream ss;
  write_map(ss, small_map());
  std::string text = ss.str();
  text.resize(text.size() / 2);
  std::stringstream in(text);
  EXPECT_ANY_THROW(read_map(in));
}
