#pragma once

#include <string>
#include <vector>

#include "mvrl/core/image.hpp"
#include "mvrl/core/rng.hpp"
#include "mvrl/sim/env.hpp"

namespace mvrl::augment {

struct AugmentConfig {
  double overlay_alpha = 0.5;          // observation weight at full strength
  double spectrum_mask_fraction = 0.5; // fraction of coefficients swapped at full strength
  std::string distractor_dir;          // empty -> procedural distractors
  bool enabled = true;
};

// Overlay/reference images. Loads PNG/JPEG files from a directory when given,
// otherwise synthesizes noise, gradients, checkerboards and blob textures.
class DistractorSource {
 public:
  DistractorSource() = default;
  explicit DistractorSource(const std::string& dir);

  Image8 sample(int width, int height, Rng& rng) const;
  size_t file_count() const { return files_.size(); }

 private:
  std::vector<Image8> files_;
};

// out = alpha * img + (1 - alpha) * distractor, rounded to nearest code.
Image8 random_overlay(const Image8& img, const Image8& distractor, double alpha);

// Swaps a radial frequency band (selected around a random center radius,
// covering ~coverage of all coefficients) with the reference's coefficients.
// The band is mirror-symmetric in frequency space, so the output stays real.
Image8 spectrum_swap(const Image8& img, const Image8& reference, double coverage, Rng& rng);

Image8 spectrum_augment(const Image8& img, double strength, uint64_t seed,
                        const AugmentConfig& cfg, const DistractorSource& source);

// Full pipeline over a frame stack: spectrum swap then overlay on the RGB
// channels of every frame, one shared draw of mask/reference/distractor per
// call. Depth channels pass through untouched. strength 0 is the identity.
sim::FrameStack augment(const sim::FrameStack& obs, double strength, uint64_t seed,
                        const AugmentConfig& cfg, const DistractorSource& source);

}  // namespace mvrl::augment
