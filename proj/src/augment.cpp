#include "mvrl/augment/augment.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>

namespace mvrl::augment {

namespace {

Image8 resize_bilinear_rgb(const Image8& src, int w, int h) {
  Image8 out(w, h, 3);
  for (int y = 0; y < h; ++y) {
    const double sy = (h > 1) ? double(y) * (src.height - 1) / (h - 1) : 0.0;
    const int y0 = int(sy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = (w > 1) ? double(x) * (src.width - 1) / (w - 1) : 0.0;
      const int x0 = int(sx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - fy) * ((1 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c)) +
                         fy * ((1 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c));
        out.at(x, y, c) = uint8_t(std::lround(v));
      }
    }
  }
  return out;
}

Image8 procedural_distractor(int w, int h, Rng& rng) {
  Image8 img(w, h, 3);
  const int kind = int(rng.uniform_int(0, 3));
  const double c0[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
  const double c1[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
  switch (kind) {
    case 0: {  // pixel noise
      for (auto& v : img.data) v = uint8_t(rng.uniform_int(0, 255));
      break;
    }
    case 1: {  // linear gradient along a random direction
      const double ang = rng.uniform(0, 2 * M_PI);
      const double dx = std::cos(ang), dy = std::sin(ang);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double t = (dx * x / std::max(1, w - 1) + dy * y / std::max(1, h - 1) + 1.0) * 0.5;
          t = std::clamp(t, 0.0, 1.0);
          for (int c = 0; c < 3; ++c)
            img.at(x, y, c) = uint8_t(std::lround(c0[c] + t * (c1[c] - c0[c])));
        }
      break;
    }
    case 2: {  // checkerboard
      const int cell = int(rng.uniform_int(4, std::max(5, w / 4)));
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const bool a = ((x / cell) + (y / cell)) % 2 == 0;
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = uint8_t(std::lround(a ? c0[c] : c1[c]));
        }
      break;
    }
    default: {  // soft blobs over a base color
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = uint8_t(std::lround(c0[c]));
      const int blobs = int(rng.uniform_int(4, 9));
      for (int b = 0; b < blobs; ++b) {
        const double bx = rng.uniform(0, w), by = rng.uniform(0, h);
        const double rad = rng.uniform(0.08, 0.3) * w;
        const double bc[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
            const double wgt = std::exp(-d2 / (2 * rad * rad));
            if (wgt < 0.02) continue;
            for (int c = 0; c < 3; ++c) {
              const double v = (1 - wgt) * img.at(x, y, c) + wgt * bc[c];
              img.at(x, y, c) = uint8_t(std::lround(v));
            }
          }
      }
      break;
    }
  }
  return img;
}

using CMat =
    Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void fft2_inplace(CMat& m, bool inverse) {
  Eigen::FFT<float> fft;
  std::vector<std::complex<float>> in, out;
  const int h = int(m.rows()), w = int(m.cols());
  in.resize(w);
  out.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) in[x] = m(y, x);
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    for (int x = 0; x < w; ++x) m(y, x) = out[x];
  }
  in.resize(h);
  out.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) in[y] = m(y, x);
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    for (int y = 0; y < h; ++y) m(y, x) = out[y];
  }
}

// Mirror-symmetric coefficient band: all bins whose radial frequency lies
// closest to a center radius, grown shell by shell until coverage is reached.
std::vector<uint8_t> band_mask(int w, int h, double coverage, Rng& rng) {
  const size_t n = size_t(w) * h;
  const size_t want = size_t(std::lround(coverage * double(n)));
  std::vector<uint8_t> mask(n, 0);
  if (want == 0) return mask;

  const double center = rng.uniform(0.0, 0.55);
  std::vector<float> dist(n);
  for (int v = 0; v < h; ++v) {
    const double fy = double(std::min(v, h - v)) / h;
    for (int u = 0; u < w; ++u) {
      const double fx = double(std::min(u, w - u)) / w;
      dist[size_t(v) * w + u] = float(std::abs(std::hypot(fx, fy) - center));
    }
  }
  std::vector<float> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + (want - 1), sorted.end());
  const float thr = sorted[want - 1];
  for (size_t i = 0; i < n; ++i) mask[i] = dist[i] <= thr ? 1 : 0;
  return mask;
}

Image8 spectrum_swap_masked(const Image8& img, const Image8& ref,
                            const std::vector<uint8_t>& mask) {
  const int w = img.width, h = img.height;
  Image8 out = img;
  for (int c = 0; c < 3; ++c) {
    CMat a(h, w), b(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        a(y, x) = std::complex<float>(float(img.at(x, y, c)), 0.f);
        b(y, x) = std::complex<float>(float(ref.at(x, y, c)), 0.f);
      }
    fft2_inplace(a, false);
    fft2_inplace(b, false);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (mask[size_t(y) * w + x]) a(y, x) = b(y, x);
    fft2_inplace(a, true);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(x, y, c) = uint8_t(std::clamp(std::lround(a(y, x).real()), 0l, 255l));
  }
  return out;
}

}  // namespace

DistractorSource::DistractorSource(const std::string& dir) {
  if (dir.empty()) return;
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) return;
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const std::string ext = p.extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      Image8 img = read_image(p.string());
      if (img.channels == 4 || img.channels == 1) {
        Image8 rgb(img.width, img.height, 3);
        for (size_t i = 0; i < size_t(img.width) * img.height; ++i)
          for (int c = 0; c < 3; ++c)
            rgb.data[3 * i + c] = img.channels == 1 ? img.data[i] : img.data[4 * i + c];
        img = std::move(rgb);
      }
      files_.push_back(std::move(img));
    }
  }
}

Image8 DistractorSource::sample(int w, int h, Rng& rng) const {
  if (files_.empty()) return procedural_distractor(w, h, rng);
  const auto& src = files_[size_t(rng.uniform_int(0, int64_t(files_.size()) - 1))];
  if (src.width == w && src.height == h) return src;
  return resize_bilinear_rgb(src, w, h);
}

Image8 random_overlay(const Image8& img, const Image8& distractor, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("overlay alpha outside [0,1]");
  if (!img.same_shape(distractor)) throw std::invalid_argument("overlay shape mismatch");
  Image8 out(img.width, img.height, img.channels);
  for (size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = uint8_t(std::lround(alpha * img.data[i] + (1.0 - alpha) * distractor.data[i]));
  return out;
}

Image8 spectrum_swap(const Image8& img, const Image8& reference, double coverage, Rng& rng) {
  if (!img.same_shape(reference)) throw std::invalid_argument("spectrum_swap shape mismatch");
  if (img.channels != 3) throw std::invalid_argument("spectrum_swap expects RGB");
  const auto mask = band_mask(img.width, img.height, std::clamp(coverage, 0.0, 1.0), rng);
  if (std::none_of(mask.begin(), mask.end(), [](uint8_t m) { return m != 0; })) return img;
  return spectrum_swap_masked(img, reference, mask);
}

Image8 spectrum_augment(const Image8& img, double strength, uint64_t seed,
                        const AugmentConfig& cfg, const DistractorSource& source) {
  if (strength < 0.0 || strength > 1.0) throw std::invalid_argument("strength outside [0,1]");
  if (strength == 0.0) return img;
  Rng rng(seed);
  const Image8 ref = source.sample(img.width, img.height, rng);
  return spectrum_swap(img, ref, strength * cfg.spectrum_mask_fraction, rng);
}

sim::FrameStack augment(const sim::FrameStack& obs, double strength, uint64_t seed,
                        const AugmentConfig& cfg, const DistractorSource& source) {
  if (strength < 0.0 || strength > 1.0) throw std::invalid_argument("strength outside [0,1]");
  sim::FrameStack out = obs;
  if (strength == 0.0 || !cfg.enabled || obs.frames.empty()) return out;

  const int w = obs.frames[0].width, h = obs.frames[0].height;
  Rng rng(seed);
  const Image8 ref = source.sample(w, h, rng);
  const auto mask = band_mask(w, h, strength * cfg.spectrum_mask_fraction, rng);
  const Image8 distractor = source.sample(w, h, rng);
  const double alpha = 1.0 - strength * (1.0 - cfg.overlay_alpha);

  const bool any_mask = std::any_of(mask.begin(), mask.end(), [](uint8_t m) { return m != 0; });
  for (auto& frame : out.frames) {
    Image8 rgb(w, h, 3);
    for (size_t i = 0; i < size_t(w) * h; ++i)
      for (int c = 0; c < 3; ++c) rgb.data[3 * i + c] = frame.data[4 * i + c];
    if (any_mask) rgb = spectrum_swap_masked(rgb, ref, mask);
    rgb = random_overlay(rgb, distractor, alpha);
    for (size_t i = 0; i < size_t(w) * h; ++i)
      for (int c = 0; c < 3; ++c) frame.data[4 * i + c] = rgb.data[3 * i + c];
  }
  return out;
}

}  // namespace mvrl::augment
