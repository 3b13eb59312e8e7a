#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cmrf/model.hpp"

namespace cmrf {

struct Image {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// P2 and P5 accepted on read; P5 written
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

// 5% of the pixels replaced by uniform values, Gaussian noise elsewhere
Image corrupt_image(const Image& img, std::uint64_t seed, double outlier_frac = 0.05,
                    double sigma = 10.0);

double psnr(const Image& a, const Image& b);

struct DenoiseParams {
  int labels = 64;
  double lambda = 1.0;
  double sigma = 10.0;          // data-term noise scale, intensity units
  double outlier_frac = 0.05;   // data-term outlier mass
  // regularizer min_k alpha_k |h'| + beta_k with h' in intensity units
  std::vector<std::pair<double, double>> regularizer = {{24.0, 0.0}, {8.0, 1.0}, {3.2, 2.0}};
};

// robust-Gaussian unaries on a uniform label-to-intensity grid, regularizer
// slopes rescaled to per-label-step units
MrfInstance build_denoise_instance(const Image& img, const DenoiseParams& params);

Image labels_to_image(const LabelAssignment& labels, int width, int height, int L,
                      int maxval = 255);

LabelAssignment image_to_labels(const Image& img, int L);

}  // namespace cmrf
