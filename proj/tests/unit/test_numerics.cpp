#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "scoreinv/error.hpp"
#include "scoreinv/fft.hpp"
#include "scoreinv/quadrature.hpp"
#include "scoreinv/rng.hpp"
#include "scoreinv/tensor.hpp"
#include "scoreinv/tensor_io.hpp"

using namespace scoreinv;

namespace {

// O(N^2) orthonormal DFT, independent of the radix-2 implementation.
ComplexImage direct_dft2(const ComplexImage& img) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  auto out = ComplexImage::zeros(h, w);
  for (std::size_t k = 0; k < h; ++k) {
    for (std::size_t l = 0; l < w; ++l) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>(k * r) / h + static_cast<double>(l * c) / w);
          acc += std::complex<double>(img.real[r * w + c], img.imag[r * w + c]) *
                 std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      acc /= std::sqrt(static_cast<double>(h * w));
      out.real[k * w + l] = acc.real();
      out.imag[k * w + l] = acc.imag();
    }
  }
  return out;
}

ComplexImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return ComplexImage(gaussian_sample(rng, {h, w}), gaussian_sample(rng, {h, w}));
}

double image_norm(const ComplexImage& img) {
  return std::sqrt(squared_norm(img.real) + squared_norm(img.imag));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Tensor, ShapeInvariantEnforced) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({0, 3}), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_THROW(t += Tensor({3, 2}), ShapeError);
}

TEST(Tensor, ArithmeticAndSlice) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {4, 3, 2, 1});
  EXPECT_EQ((a + b).values(), std::vector<double>({5, 5, 5, 5}));
  EXPECT_DOUBLE_EQ(dot(a, b), 4 + 6 + 6 + 4);
  EXPECT_EQ(a.slice(1).values(), std::vector<double>({3, 4}));
  const Tensor parts[] = {a.slice(0), a.slice(1)};
  EXPECT_EQ(stack(parts), a);
}

TEST(Rng, SameSeedAndStreamIsBitIdentical) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(gaussian_sample(a, {5, 5}), gaussian_sample(b, {5, 5}));
}

TEST(Rng, PhiloxKnownAnswer) {
  // Random123 known-answer vector for philox4x32-10 with all-zero inputs.
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Rng, RestoreAtCounterContinuesSequence) {
  RngStream a(3, 1);
  for (int i = 0; i < 11; ++i) a.next_u64();
  RngStream b = RngStream::at(3, 1, a.counter());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, GaussianMomentsWithinLawOfLargeNumbersBounds) {
  RngStream rng(123, 0);
  const std::size_t n = 100000;
  const Tensor t = gaussian_sample(rng, {n});
  double mean = 0.0;
  for (double v : t.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : t.data()) var += (v - mean) * (v - mean);
  var /= (n - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Rng, DistinctStreamsAreUncorrelated) {
  RngStream s0(99, 0);
  RngStream s1(99, 1);
  const std::size_t n = 100000;
  const Tensor a = gaussian_sample(s0, {n});
  const Tensor b = gaussian_sample(s1, {n});
  const double corr = dot(a, b) / (norm(a) * norm(b));
  EXPECT_LT(std::abs(corr), 0.02);
}

TEST(Fft, ZeroImageMapsToZero) {
  const auto out = fft2(ComplexImage::zeros(8, 4));
  EXPECT_EQ(squared_norm(out.real) + squared_norm(out.imag), 0.0);
}

TEST(Fft, DeltaHasConstantSpectrum) {
  auto img = ComplexImage::zeros(4, 4);
  img.real[0] = 1.0;
  const auto oracle = direct_dft2(img);
  const auto out = fft2(img);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(oracle.real[i], 0.25, 1e-15);
    EXPECT_NEAR(out.real[i], 0.25, 1e-15);
    EXPECT_NEAR(out.imag[i], 0.0, 1e-15);
  }
}

TEST(Fft, MatchesDirectDftOracle) {
  const auto img = random_image(8, 16, 5);
  const auto fast = fft2(img);
  const auto slow = direct_dft2(img);
  EXPECT_LT(max_abs_diff(fast.real, slow.real), 1e-12);
  EXPECT_LT(max_abs_diff(fast.imag, slow.imag), 1e-12);
}

TEST(Fft, RoundTripAndParsevalAllPowerOfTwoSizes) {
  std::uint64_t seed = 0;
  for (std::size_t h = 1; h <= 64; h *= 2) {
    for (std::size_t w = 1; w <= 64; w *= 2) {
      const auto img = random_image(h, w, ++seed);
      const auto spec = fft2(img);
      EXPECT_NEAR(image_norm(spec), image_norm(img), 1e-10) << h << "x" << w;
      const auto back = ifft2(spec);
      EXPECT_LT(max_abs_diff(back.real, img.real), 1e-10) << h << "x" << w;
      EXPECT_LT(max_abs_diff(back.imag, img.imag), 1e-10) << h << "x" << w;
    }
  }
}

TEST(Fft, RejectsNonPowerOfTwo) {
  EXPECT_THROW(fft2(ComplexImage::zeros(6, 8)), ParameterError);
  EXPECT_THROW(fft2(ComplexImage::zeros(8, 12)), ParameterError);
}

TEST(Fft, PackUnpackIsLossless) {
  const auto img = random_image(4, 8, 77);
  const Tensor packed = img.pack();
  EXPECT_EQ(packed.shape(), (Shape{4, 8, 2}));
  const auto back = ComplexImage::unpack(packed);
  EXPECT_EQ(back.real, img.real);
  EXPECT_EQ(back.imag, img.imag);
}

TEST(Simpson, ZeroLengthPathIsZero) {
  const VectorField f = [](const Tensor& x) { return -x; };
  const Tensor a = Tensor::vector({0.3, -1.2});
  EXPECT_EQ(simpson_line_integral(f, a, a), 0.0);
}

TEST(Simpson, GaussianScoreLineIntegralIsExact) {
  const VectorField f = [](const Tensor& x) { return -x; };
  const double v = simpson_line_integral(f, Tensor::vector({0, 0}), Tensor::vector({2, 0}));
  EXPECT_NEAR(v, -2.0, 1e-15);
}

TEST(Simpson, ExactForCubicPotentialsAlongPath) {
  // g(x) = x0^3 + x0 x1 - 2 x1^2 restricted to a segment is a cubic in t.
  const VectorField grad = [](const Tensor& x) {
    return Tensor::vector({3 * x[0] * x[0] + x[1], x[0] - 4 * x[1]});
  };
  auto g = [](const Tensor& x) { return x[0] * x[0] * x[0] + x[0] * x[1] - 2 * x[1] * x[1]; };
  const Tensor a = Tensor::vector({-0.4, 1.1});
  const Tensor b = Tensor::vector({1.3, 0.2});
  for (int n : {3, 4, 5, 6, 9}) {
    EXPECT_NEAR(simpson_line_integral(grad, a, b, n), g(b) - g(a), 1e-13) << n;
  }
}

TEST(Simpson, FourthOrderConvergenceOnQuartic) {
  // g(x) = (x . x)^2 + x0^5 / 5: not polynomial of degree <= 3 along the path.
  const VectorField grad = [](const Tensor& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return Tensor::vector({4 * r2 * x[0] + std::pow(x[0], 4), 4 * r2 * x[1]});
  };
  auto g = [](const Tensor& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return r2 * r2 + std::pow(x[0], 5) / 5.0;
  };
  const Tensor a = Tensor::vector({-1.0, 0.5});
  const Tensor b = Tensor::vector({1.5, -0.7});
  const double exact = g(b) - g(a);
  // Fine-grid reference agrees with the closed form.
  EXPECT_NEAR(simpson_line_integral(grad, a, b, 4097), exact, 1e-10);
  const double e1 = std::abs(simpson_line_integral(grad, a, b, 9) - exact);
  const double e2 = std::abs(simpson_line_integral(grad, a, b, 17) - exact);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Simpson, RejectsTooFewNodes) {
  const VectorField f = [](const Tensor& x) { return x; };
  EXPECT_THROW(simpson_line_integral(f, Tensor::vector({0}), Tensor::vector({1}), 2), ParameterError);
  EXPECT_THROW(simpson_weights(1), ParameterError);
}

TEST(Simpson, WeightsSumToOne) {
  for (int n = 3; n <= 12; ++n) {
    double s = 0.0;
    for (double w : simpson_weights(n)) s += w;
    EXPECT_NEAR(s, 1.0, 1e-15) << n;
  }
}

TEST(TensorIo, RoundTripPreservesBitsForRandomShapes) {
  RngStream rng(8, 8);
  for (int trial = 0; trial < 20; ++trial) {
    Shape shape;
    const auto rank = 1 + rng.next_u64() % 4;
    for (std::uint64_t r = 0; r < rank; ++r) shape.push_back(1 + rng.next_u64() % 5);
    Tensor t = gaussian_sample(rng, shape);
    t[0] = -0.0;
    std::stringstream ss;
    write_tensor(ss, t);
    const Tensor back = read_tensor(ss);
    ASSERT_EQ(back.shape(), t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i]), std::bit_cast<std::uint64_t>(t[i]));
    }
  }
}

TEST(TensorIo, HeaderLayout) {
  std::stringstream ss;
  write_tensor(ss, Tensor({2, 1}, {1.0, 2.0}));
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 2 * 8 + 2 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "TNSR");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // rank
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[20], 1);
}

TEST(TensorIo, RejectsBadMagic) {
  std::stringstream ss("XXXXjunk");
  EXPECT_THROW(read_tensor(ss), IoError);
}
