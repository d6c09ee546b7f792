#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sgan/rng.hpp"
#include "sgan/tensor.hpp"

namespace sgan::synth {

// Isotropic 2-D Gaussian mixture.
struct MixtureSpec {
    std::vector<std::array<double, 2>> centers;
    std::vector<double> weights;  // must sum to 1
    double stddev = 0.0;          // shared per-mode standard deviation

    void validate() const;
};

// k modes evenly spaced on a circle of given radius, uniform weights.
// Mode j sits at angle 2*pi*j/k starting from the positive x axis.
MixtureSpec ring_mixture(int k, double radius, double stddev);

// n x 2 sample matrix. Per row: mode index from the weight table, then two
// Gaussian draws — the draw order is part of the reproducibility contract.
Tensor sample_real(const MixtureSpec& spec, int n, Rng& rng);

// IDX image/label files (big-endian), plain or gzip-compressed. Pixels are
// mapped to [-1, 1] via x -> (x/255 - 0.5) / 0.5.
struct ImageData {
    int count = 0;
    int rows = 0;
    int cols = 0;
    Tensor pixels;  // count x (rows*cols), in [-1, 1]
};

ImageData load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

struct LabeledImages {
    ImageData images;
    std::vector<int> labels;
};

// Loads both files and verifies the counts agree.
LabeledImages load_image_dataset(const std::string& images_path, const std::string& labels_path);

// Writers for synthesizing small datasets in tools and tests.
void write_idx_images(const std::string& path, int count, int rows, int cols,
                      const std::vector<std::uint8_t>& pixels, bool gzip = false);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                      bool gzip = false);

}  // namespace sgan::synth
