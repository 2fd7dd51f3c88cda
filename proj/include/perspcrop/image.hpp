#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace perspcrop {

/// Row-major H x W x C image of reals, nominally in [0,1].
class Image {
public:
    Image() = default;
    /// Throws InvalidArgument on non-positive dimensions.
    Image(int height, int width, int channels, double fill = 0.0);
    /// Throws InvalidArgument when data.size() != H*W*C or a value is not finite.
    Image(int height, int width, int channels, std::vector<double> data);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
    double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }
    int height_ = 0, width_ = 0, channels_ = 0;
    std::vector<double> data_;
};

double mean_abs_diff(const Image& a, const Image& b);

// Binary PGM (P5, 1 channel) / PPM (P6, 3 channels), 8 bit. Values are
// mapped to [0,1] by /255 on read and by round-half-up of v*255 (clamped)
// on write.
std::string encode_pnm(const Image& img);
Image decode_pnm(const std::string& bytes);
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

} // namespace perspcrop
