#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fruitsize {

/// Row-major interleaved raster.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, int c = 1, T fill = T{})
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    T& at(int u, int v, int c = 0) { return data[(static_cast<std::size_t>(v) * width + u) * channels + c]; }
    const T& at(int u, int v, int c = 0) const {
        return data[(static_cast<std::size_t>(v) * width + u) * channels + c];
    }
    bool inside(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }

    bool operator==(const Image&) const = default;
};

/// Raw sensor depth; multiply by CameraIntrinsics::depth_scale for mm. Zero is invalid.
using DepthImage = Image<std::uint16_t>;
/// 8-bit raster, 1 channel (masks) or 3 channels in RGB order.
using ByteImage = Image<std::uint8_t>;

/// Throws Error(FileError) if the file is missing or undecodable, Error(SchemaError) if not 16-bit single channel.
DepthImage read_depth_image(const std::filesystem::path& path);
void write_depth_image(const std::filesystem::path& path, const DepthImage& image);

/// Any 8-bit image; color images come back as 3-channel RGB.
ByteImage read_byte_image(const std::filesystem::path& path);
void write_byte_image(const std::filesystem::path& path, const ByteImage& image);

/// Decodes just enough to report width and height; throws Error(FileError) on failure.
std::pair<int, int> read_image_size(const std::filesystem::path& path);

}  // namespace fruitsize
