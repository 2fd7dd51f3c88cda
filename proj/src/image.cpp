#include "perspcrop/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "perspcrop/errors.hpp"
#include "perspcrop/io.hpp"

namespace perspcrop {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1)
        throw InvalidArgument("image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height < 1 || width < 1 || channels < 1)
        throw InvalidArgument("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(height) * width * channels)
        throw InvalidArgument("image data length does not match H*W*C");
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }))
        throw InvalidArgument("image contains non-finite values");
}

double mean_abs_diff(const Image& a, const Image& b) {
    if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels())
        throw InvalidArgument("mean_abs_diff: image shapes differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.data()[i] - b.data()[i]);
    return sum / static_cast<double>(a.size());
}

std::string encode_pnm(const Image& img) {
    if (img.channels() != 1 && img.channels() != 3)
        throw InvalidArgument("PNM output needs 1 or 3 channels");
    std::string out = (img.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(img.width()) + " " +
                      std::to_string(img.height()) + "\n255\n";
    out.reserve(out.size() + img.size());
    for (double v : img.data()) {
        const double q = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
        out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
    return out;
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
    for (;;) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) throw InvalidArgument("truncated PNM header");
    return s.substr(start, pos - start);
}

int parse_positive(const std::string& tok) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
        throw InvalidArgument("bad PNM header field '" + tok + "'");
    const long v = std::stol(tok);
    if (v < 1 || v > (1L << 24)) throw InvalidArgument("PNM header value out of range: " + tok);
    return static_cast<int>(v);
}

} // namespace

Image decode_pnm(const std::string& bytes) {
    std::size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    int channels = 0;
    if (magic == "P5") channels = 1;
    else if (magic == "P6") channels = 3;
    else throw InvalidArgument("unsupported PNM magic '" + magic + "' (expected P5 or P6)");
    const int width = parse_positive(next_token(bytes, pos));
    const int height = parse_positive(next_token(bytes, pos));
    const int maxval = parse_positive(next_token(bytes, pos));
    if (maxval != 255) throw InvalidArgument("only 8-bit PNM (maxval 255) is supported");
    ++pos; // single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < pos + n) throw InvalidArgument("truncated PNM pixel data");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i)
        data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
    return Image(height, width, channels, std::move(data));
}

Image read_pnm(const std::filesystem::path& path) {
    try {
        return decode_pnm(read_text_file(path));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
    write_file_atomic(path, encode_pnm(img));
}

} // namespace perspcrop
