#include "cmrf/image.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cmrf/rng.hpp"

namespace cmrf {

namespace {

int next_token(std::istream& in) {
  // skips whitespace and '#' comment lines
  while (true) {
    int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int v;
  if (!(in >> v)) throw std::runtime_error("pgm: malformed header");
  return v;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open image: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P2" && magic != "P5") throw std::runtime_error("pgm: unsupported magic " + magic);
  Image img;
  img.width = next_token(f);
  img.height = next_token(f);
  img.maxval = next_token(f);
  if (img.width < 1 || img.height < 1 || img.maxval < 1 || img.maxval > 255) {
    throw std::runtime_error("pgm: unsupported dimensions or maxval");
  }
  const size_t n = static_cast<size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(f.gcount()) != n) throw std::runtime_error("pgm: truncated data");
  } else {
    for (size_t i = 0; i < n; ++i) {
      int v = next_token(f);
      if (v < 0 || v > img.maxval) throw std::runtime_error("pgm: sample out of range");
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write image: " + path);
  f << "P5\n" << img.width << " " << img.height << "\n" << img.maxval << "\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
}

Image corrupt_image(const Image& img, std::uint64_t seed, double outlier_frac,
                    double sigma) {
  SplitMix64 rng(seed);
  Image out = img;
  for (auto& px : out.pixels) {
    if (rng.next_double() < outlier_frac) {
      px = static_cast<std::uint8_t>(std::min<double>(img.maxval, rng.next_double() * (img.maxval + 1)));
    } else {
      double u1 = rng.next_double();
      double u2 = rng.next_double();
      if (u1 < 1e-300) u1 = 1e-300;
      double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      double v = std::round(px + sigma * z);
      px = static_cast<std::uint8_t>(std::min<double>(img.maxval, std::max(0.0, v)));
    }
  }
  return out;
}

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw std::invalid_argument("psnr: size mismatch");
  }
  double mse = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(a.pixels.size());
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

MrfInstance build_denoise_instance(const Image& img, const DenoiseParams& params) {
  const int L = params.labels;
  MrfInstance inst;
  inst.topology = make_grid(img.width, img.height);
  inst.labels = L;
  inst.unary.resize(static_cast<size_t>(img.width) * img.height * L);
  const double norm = 1.0 / (params.sigma * std::sqrt(2.0 * M_PI));
  for (int spx = 0; spx < img.width * img.height; ++spx) {
    const double g = img.pixels[spx];
    for (int i = 0; i < L; ++i) {
      const double u = L > 1 ? 255.0 * i / (L - 1) : 0.0;
      const double d = u - g;
      const double phi = norm * std::exp(-d * d / (2.0 * params.sigma * params.sigma));
      inst.unary[static_cast<size_t>(spx) * L + i] =
          -params.lambda *
          std::log(params.outlier_frac + (1.0 - params.outlier_frac) * phi);
    }
  }
  // slopes are per intensity unit; one label step spans 255/(L-1) units
  const double step = L > 1 ? 255.0 / (L - 1) : 0.0;
  std::vector<PiecewiseLinearPotential> terms;
  for (const auto& [alpha, beta] : params.regularizer) {
    terms.push_back(l1_potential(L, alpha * step, beta));
  }
  inst.potentials.push_back(min_of(terms));
  inst.edge_potential.assign(inst.edge_count(), 0);
  inst.edge_weight.assign(inst.edge_count(), 1.0);
  return inst;
}

Image labels_to_image(const LabelAssignment& labels, int width, int height, int L,
                      int maxval) {
  Image img;
  img.width = width;
  img.height = height;
  img.maxval = maxval;
  img.pixels.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    double u = L > 1 ? 255.0 * labels[i] / (L - 1) : 0.0;
    img.pixels[i] = static_cast<std::uint8_t>(std::min<double>(maxval, std::round(u)));
  }
  return img;
}

LabelAssignment image_to_labels(const Image& img, int L) {
  LabelAssignment a(img.pixels.size());
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<int>(std::round(img.pixels[i] * (L - 1) / 255.0));
  }
  return a;
}

}  // namespace cmrf
