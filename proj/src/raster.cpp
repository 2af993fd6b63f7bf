#include "fruitsize/raster.hpp"

#include "fruitsize/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstring>

namespace fruitsize {

namespace {

cv::Mat read_any(const std::filesystem::path& path, int flags) {
    if (!std::filesystem::is_regular_file(path)) {
        throw Error(ErrorCode::FileError, "missing raster '" + path.string() + "'");
    }
    cv::Mat m = cv::imread(path.string(), flags);
    if (m.empty()) {
        throw Error(ErrorCode::FileError, "cannot decode raster '" + path.string() + "'");
    }
    return m;
}

void write_any(const std::filesystem::path& path, const cv::Mat& m) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m);
    } catch (const cv::Exception&) {
        ok = false;
    }
    if (!ok) throw Error(ErrorCode::FileError, "cannot write raster '" + path.string() + "'");
}

}  // namespace

DepthImage read_depth_image(const std::filesystem::path& path) {
    const cv::Mat m = read_any(path, cv::IMREAD_UNCHANGED);
    if (m.type() != CV_16UC1) {
        throw Error(ErrorCode::SchemaError, "depth raster '" + path.string() + "' is not 16-bit single channel");
    }
    DepthImage img(m.cols, m.rows);
    for (int v = 0; v < m.rows; ++v) {
        std::memcpy(&img.at(0, v), m.ptr<std::uint16_t>(v), sizeof(std::uint16_t) * m.cols);
    }
    return img;
}

void write_depth_image(const std::filesystem::path& path, const DepthImage& image) {
    cv::Mat m(image.height, image.width, CV_16UC1);
    for (int v = 0; v < image.height; ++v) {
        std::memcpy(m.ptr<std::uint16_t>(v), &image.at(0, v), sizeof(std::uint16_t) * image.width);
    }
    write_any(path, m);
}

ByteImage read_byte_image(const std::filesystem::path& path) {
    cv::Mat m = read_any(path, cv::IMREAD_UNCHANGED);
    if (m.depth() != CV_8U) {
        throw Error(ErrorCode::SchemaError, "raster '" + path.string() + "' is not 8-bit");
    }
    if (m.channels() != 1 && m.channels() != 3) {
        m = cv::imread(path.string(), cv::IMREAD_COLOR);
    }
    ByteImage img(m.cols, m.rows, m.channels());
    for (int v = 0; v < m.rows; ++v) {
        const auto* row = m.ptr<std::uint8_t>(v);
        for (int u = 0; u < m.cols; ++u) {
            for (int c = 0; c < img.channels; ++c) {
                // OpenCV stores BGR.
                const int src = img.channels == 3 ? 2 - c : c;
                img.at(u, v, c) = row[u * img.channels + src];
            }
        }
    }
    return img;
}

void write_byte_image(const std::filesystem::path& path, const ByteImage& image) {
    if (image.channels != 1 && image.channels != 3) {
        throw Error(ErrorCode::InvalidInput, "only 1- or 3-channel images can be written");
    }
    cv::Mat m(image.height, image.width, image.channels == 1 ? CV_8UC1 : CV_8UC3);
    for (int v = 0; v < image.height; ++v) {
        auto* row = m.ptr<std::uint8_t>(v);
        for (int u = 0; u < image.width; ++u) {
            for (int c = 0; c < image.channels; ++c) {
                const int dst = image.channels == 3 ? 2 - c : c;
                row[u * image.channels + dst] = image.at(u, v, c);
            }
        }
    }
    write_any(path, m);
}

std::pair<int, int> read_image_size(const std::filesystem::path& path) {
    const cv::Mat m = read_any(path, cv::IMREAD_UNCHANGED);
    return {m.cols, m.rows};
}

}  // namespace fruitsize
