#pragma once

// Spatial-transformer style resampling: a sampling grid is generated in the
// source image for every output pixel and the source is read with bilinear
// interpolation. Grids use the inverse homography (target -> source).

#include <vector>

#include "perspcrop/crop.hpp"
#include "perspcrop/image.hpp"

namespace perspcrop {

/// Source coordinates (normalized image units) for each output pixel, row-major.
struct SampleGrid {
    int out_height = 0;
    int out_width = 0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

/// Output pixel (i, j) has center ((j + 0.5) / out_w, (i + 0.5) / out_h) in
/// the virtual image; the grid stores w.m_inv applied to it.
/// Throws PointAtInfinity when a sample maps to infinity.
SampleGrid make_grid(const WarpMatrix& w, int out_height, int out_width);

enum class Padding { Zeros };

Image bilinear_sample(const Image& img, const SampleGrid& grid, Padding padding = Padding::Zeros);

/// d(output)/d(grid x) and d(output)/d(grid y), laid out like the output
/// image (out_h x out_w x C). Derivatives are per normalized unit. On a
/// lattice line the cell with the lower index supplies the derivative.
struct GridGradient {
    std::vector<double> dx;
    std::vector<double> dy;
};

GridGradient grad_bilinear(const Image& img, const SampleGrid& grid);

struct ImageCrop {
    Image image;
    VirtualCamera camera;
    WarpMatrix warp;
};

ImageCrop perspective_crop_image(const Image& img, const CameraIntrinsics& intr,
                                 const CropTarget& tgt, FocalOption opt, int out_height,
                                 int out_width, bool preserve_aspect = false);

} // namespace perspcrop
