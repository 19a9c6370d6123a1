#include <doctest.h>

#include "mvrl/encoder/encoder.hpp"

using namespace mvrl;
using namespace mvrl::encoder;
using nn::FeatureMap;

namespace {

EncoderConfig tiny_config(int image = 24, bool stn = true) {
  EncoderConfig cfg;
  cfg.image_size = image;
  cfg.in_channels = 12;
  cfg.stem_channels = 8;
  cfg.stage1_channels = 12;
  cfg.stage2_channels = 16;
  cfg.feature_dim = 32;
  cfg.loc_channels = 4;
  cfg.loc_hidden = 16;
  cfg.stn_enabled = stn;
  return cfg;
}

template <class S>
FeatureMap<S> random_map(int c, int h, int w, uint64_t seed) {
  FeatureMap<S> m(c, h, w);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = S(rng.uniform(-0.5, 0.5));
  return m;
}

}  // namespace

TEST_CASE("localization head is exactly the identity at initialization") {
  Encoder<double> enc;
  Rng rng(1);
  enc.init(tiny_config(), rng);
  const auto feat = random_map<double>(8, 12, 12, 3);
  const Homography h = enc.localize_homography(feat);
  CHECK(h.m == Eigen::Matrix3d::Identity());
  CHECK(h.det() == doctest::Approx(1.0));
  CHECK(h.invertible());
}

TEST_CASE("identity homography warp is a no-op") {
  const auto x = random_map<double>(3, 10, 10, 5);
  const auto y = warp(x, Homography::identity());
  CHECK((y.data - x.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("translation warp matches the integer shift oracle exactly") {
  // 9x9 grid: one pixel is 2/(W-1) = 0.25 in normalized units, exactly
  // representable, so a 2-pixel translation lands on lattice points.
  const int W = 9, H = 9;
  const auto x = random_map<double>(2, H, W, 7);
  const Homography h = Homography::translation(0.5, 0.0);  // +2 source pixels
  const auto y = warp(x, h);

  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) {
        const double expected = (j + 2 < W) ? x.data(c, i * W + j + 2) : 0.0;
        CHECK(y.data(c, i * W + j) == expected);
      }
}

TEST_CASE("warp round trip through the inverse homography") {
  const int N = 32;
  FeatureMap<double> x(2, N, N);
  // smooth pattern; bilinear resampling error stays below the tolerance
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      x.data(0, i * N + j) = 0.3 * std::sin(2.0 * M_PI * j / 96.0) + 0.01 * i;
      x.data(1, i * N + j) = 0.2 * std::cos(2.0 * M_PI * (i + j) / 128.0) + 0.005 * j;
    }

  Eigen::Matrix<double, 8, 1> theta;
  theta << 0.015, -0.01, 0.03, 0.008, -0.012, -0.02, 0.01, -0.008;
  const Homography h = Homography::from_offsets(theta);
  REQUIRE(h.invertible());

  const auto there = warp(x, h);
  const auto back = warp(there, h.inverse());

  const int margin = 4;
  double max_err = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int i = margin; i < N - margin; ++i)
      for (int j = margin; j < N - margin; ++j)
        max_err = std::max(max_err, std::abs(back.data(c, i * N + j) - x.data(c, i * N + j)));
  CHECK(max_err < 1e-3);
}

TEST_CASE("non-invertible homography is rejected") {
  Homography h;
  h.m.row(1) = h.m.row(0);  // rank deficient
  const auto x = random_map<double>(1, 8, 8, 2);
  CHECK_THROWS_AS(warp(x, h), std::invalid_argument);
  CHECK_THROWS_AS(h.inverse(), std::invalid_argument);
}

TEST_CASE("homography normalization pins the scale entry") {
  Homography h;
  h.m *= 2.5;
  const Homography n = h.normalized();
  CHECK(n.m(2, 2) == doctest::Approx(1.0));
  CHECK(n.m(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("encoder with STN at initialization equals the STN-free encoder") {
  Rng rng_a(11), rng_b(11);
  Encoder<double> with_stn, without_stn;
  with_stn.init(tiny_config(24, true), rng_a);
  without_stn.init(tiny_config(24, false), rng_b);

  const auto x = random_map<double>(12, 24, 24, 13);
  EncoderCache<double> ca, cb;
  const auto pa = with_stn.forward(x, ca);
  const auto pb = without_stn.forward(x, cb);

  CHECK((pa.embedding - pb.embedding).cwiseAbs().maxCoeff() < 1e-6);
  for (size_t m = 0; m < pa.maps.size(); ++m) {
    CHECK(pa.maps[m].first == pb.maps[m].first);
    CHECK((pa.maps[m].second.data - pb.maps[m].second.data).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(pa.homography == Eigen::Matrix3d::Identity());
}

TEST_CASE("encode is deterministic and embeddings do not collapse at init") {
  Rng rng(21);
  Encoder<float> enc;
  enc.init(tiny_config(), rng);

  const auto x = random_map<float>(12, 24, 24, 31);
  EncoderCache<float> c1, c2;
  const auto p1 = enc.forward(x, c1);
  const auto p2 = enc.forward(x, c2);
  CHECK(p1.embedding == p2.embedding);

  FeatureMap<float> zeros(12, 24, 24);
  FeatureMap<float> ones(12, 24, 24);
  ones.data.setOnes();
  EncoderCache<float> cz, co;
  const auto pz = enc.forward(zeros, cz);
  const auto po = enc.forward(ones, co);
  CHECK((pz.embedding - po.embedding).norm() > 1e-4);
}

TEST_CASE("default feature dimension is 256") {
  EncoderConfig cfg;
  CHECK(cfg.feature_dim == 256);
}

TEST_CASE("pyramid shapes follow the documented downsampling factors") {
  const auto factors = Encoder<float>::downsampling_factors();
  for (int image : {16, 24, 48}) {
    Rng rng(7);
    Encoder<float> enc;
    enc.init(tiny_config(image), rng);
    const auto x = random_map<float>(12, image, image, 9);
    EncoderCache<float> c;
    const auto pyr = enc.forward(x, c);
    for (const auto& [tag, map] : pyr.maps) {
      CHECK(map.height == image / factors.at(tag));
      CHECK(map.width == image / factors.at(tag));
    }
    CHECK(pyr.embedding.size() == 32);
  }
}

TEST_CASE("encode rejects wrong input shapes") {
  Rng rng(3);
  Encoder<float> enc;
  enc.init(tiny_config(24), rng);
  EncoderCache<float> c;
  const auto wrong_channels = random_map<float>(6, 24, 24, 1);
  CHECK_THROWS_AS(enc.forward(wrong_channels, c), std::invalid_argument);
  const auto wrong_size = random_map<float>(12, 16, 16, 1);
  CHECK_THROWS_AS(enc.forward(wrong_size, c), std::invalid_argument);
}

TEST_CASE("pyramid map lookup by unknown tag throws") {
  Rng rng(3);
  Encoder<float> enc;
  enc.init(tiny_config(16), rng);
  EncoderCache<float> c;
  const auto pyr = enc.forward(random_map<float>(12, 16, 16, 2), c);
  CHECK_THROWS_AS(pyr.map("nope"), std::invalid_argument);
}
