#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "scoreinv/error.hpp"
#include "scoreinv/hmc.hpp"
#include "scoreinv/metrics.hpp"
#include "scoreinv/phantom.hpp"
#include "scoreinv/pgm.hpp"

using namespace scoreinv;

TEST(Phantoms, ZeroEllipsesGiveBlankImage) {
  PhantomSpec spec;
  spec.min_ellipses = 0;
  spec.max_ellipses = 0;
  const Tensor p = make_phantoms(spec, 1);
  EXPECT_EQ(p.shape(), (Shape{1, 32, 32}));
  EXPECT_EQ(norm(p), 0.0);
}

TEST(Phantoms, ValuesStayInUnitInterval) {
  PhantomSpec spec;
  spec.size = 16;
  spec.intensity_max = 0.9;
  const Tensor p = make_phantoms(spec, 1000);
  double hi = 0.0;
  for (double v : p.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    hi = std::max(hi, v);
  }
  EXPECT_EQ(hi, 1.0);  // overlaps saturate somewhere in a thousand images
}

TEST(Phantoms, DeterministicAndIndexAddressable) {
  PhantomSpec spec;
  spec.seed = 42;
  const Tensor a = make_phantoms(spec, 5);
  EXPECT_EQ(a, make_phantoms(spec, 5));
  EXPECT_EQ(a.slice(3), make_phantoms(spec, 1, 3).slice(0));
  spec.seed = 43;
  EXPECT_NE(a, make_phantoms(spec, 5));
}

TEST(Phantoms, Validation) {
  PhantomSpec spec;
  spec.min_ellipses = 5;
  spec.max_ellipses = 2;
  EXPECT_THROW(make_phantoms(spec, 1), ParameterError);
  EXPECT_THROW(make_phantoms(PhantomSpec{}, 0), ParameterError);
}

TEST(Psnr, IdenticalImagesHitCap) {
  const Tensor a({4, 4}, 0.5);
  EXPECT_EQ(psnr(a, a, 1.0), kPsnrCapDb);
}

TEST(Psnr, ConstantOffsetWorkedExample) {
  const Tensor a({8, 8}, 0.3);
  const Tensor b = a + Tensor({8, 8}, 0.1);
  EXPECT_NEAR(psnr(a, b, 1.0), 20.0, 1e-10);
}

TEST(Psnr, PeakDefaultsToReferenceMaximum) {
  Tensor ref({2, 2}, 0.0);
  ref[0] = 0.5;
  const Tensor est = ref + Tensor({2, 2}, 0.05);
  EXPECT_NEAR(psnr(ref, est), 10.0 * std::log10(0.25 / 0.0025), 1e-10);
}

TEST(Psnr, Validation) {
  EXPECT_THROW(psnr(Tensor({2}), Tensor({3}), 1.0), ShapeError);
  EXPECT_THROW(psnr(Tensor({2}), Tensor({2}), 0.0), ParameterError);
}

TEST(Uncertainty, IdenticalSamplesHaveZeroStd) {
  const Tensor s({3, 3}, 0.7);
  const std::vector<Tensor> samples{s, s, s};
  const auto u = uncertainty_map(samples);
  EXPECT_EQ(norm(u.std), 0.0);
  EXPECT_LT(norm(u.mean - s), 1e-15);
  EXPECT_EQ(u.n_samples, 3u);
}

TEST(Uncertainty, TwoPointStd) {
  const double c = 0.25;
  Tensor a({2, 2}, 0.0);
  Tensor b({2, 2}, 0.0);
  a[1] = c;
  b[1] = -c;
  const std::vector<Tensor> samples{a, b};
  const auto u = uncertainty_map(samples);
  EXPECT_NEAR(u.std[1], c * std::sqrt(2.0), 1e-15);
  EXPECT_EQ(u.std[0], 0.0);
}

TEST(Uncertainty, MeanIsArithmeticMeanAndNeedsTwoSamples) {
  RngStream rng(1, 0);
  std::vector<Tensor> samples;
  for (int i = 0; i < 4; ++i) samples.push_back(gaussian_sample(rng, {5}));
  const auto u = uncertainty_map(samples);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(u.mean[k], (samples[0][k] + samples[1][k] + samples[2][k] + samples[3][k]) / 4.0);
    EXPECT_GE(u.std[k], 0.0);
  }
  EXPECT_THROW(uncertainty_map(std::span<const Tensor>(samples.data(), 1)), ParameterError);
}

TEST(Uncertainty, ConjugateGaussianMeanMap) {
  const std::size_t d = 3;
  const IsotropicGaussianScore prior(Tensor({d}), 1.0);
  auto op = std::make_shared<IdentityOperator>(Shape{d});
  const Tensor y = Tensor::vector({0.8, -0.3, 0.1});
  const GaussianLikelihood lik(op, y, 0.5);
  SamplerConfig cfg;
  cfg.schedule.gamma = 0.8;
  cfg.schedule.epsilon = 0.5;
  cfg.schedule.sigma_final = 0.02;
  cfg.n_chains = 200;
  cfg.seed = 3;
  cfg.apply_eds = false;
  const auto set = annealed_sample(prior, &lik, cfg, Tensor({d}));
  const auto u = uncertainty_map(set.samples);
  const double post_var = 0.2 + 0.02 * 0.02;  // tempered at sigma_final
  for (std::size_t k = 0; k < d; ++k) {
    EXPECT_NEAR(u.mean[k], y[k] * 0.8, 3.0 * std::sqrt(post_var / 200.0)) << k;
  }
}

TEST(Complex, MagnitudeAndEmbedding) {
  Tensor packed({1, 2, 2}, 0.0);
  packed[0] = 3.0;
  packed[1] = 4.0;
  packed[3] = -1.0;
  const Tensor mag = magnitude(packed);
  EXPECT_EQ(mag.shape(), (Shape{1, 2}));
  EXPECT_EQ(mag[0], 5.0);
  EXPECT_EQ(mag[1], 1.0);
  const Tensor real = Tensor({1, 2}, 0.5);
  EXPECT_EQ(magnitude(to_complex(real)), real);
}

TEST(Pgm, WritesHeaderPixelsAndSidecar) {
  Tensor img({2, 3}, 0.0);
  img[0] = -1.0;
  img[5] = 3.0;
  img[2] = 1.0;
  const auto path = std::filesystem::temp_directory_path() / "scoreinv_test_preview.pgm";
  write_pgm_preview(path, img);
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 6);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 5]), 255);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 2]), 128);
  std::ifstream side(path.string() + ".txt");
  std::string key;
  double lo = 0.0;
  double hi = 0.0;
  side >> key >> lo >> key >> hi;
  EXPECT_EQ(lo, -1.0);
  EXPECT_EQ(hi, 3.0);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".txt");
}
