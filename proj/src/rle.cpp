#include "fruitsize/rle.hpp"

#include "fruitsize/error.hpp"

#include <charconv>
#include <vector>

namespace fruitsize {

std::string encode_rle(const FruitMask& mask, int width, int height) {
    const auto& ext = mask.extent();
    if (ext.u_min < 0 || ext.v_min < 0 || ext.u_max >= width || ext.v_max >= height) {
        throw Error(ErrorCode::InvalidInput, "mask extends outside the image");
    }
    std::string out;
    long cursor = 0;
    long run_start = -1;
    long prev = -2;
    const auto flush = [&](long start, long end) {
        // background run [cursor, start), foreground run [start, end)
        if (!out.empty()) out += ' ';
        out += std::to_string(start - cursor);
        out += ' ';
        out += std::to_string(end - start);
        cursor = end;
    };
    for (const auto& p : mask.pixels()) {
        const long idx = static_cast<long>(p.v) * width + p.u;
        if (idx != prev + 1) {
            if (run_start >= 0) flush(run_start, prev + 1);
            run_start = idx;
        }
        prev = idx;
    }
    flush(run_start, prev + 1);
    const long total = static_cast<long>(width) * height;
    if (cursor < total) out += ' ' + std::to_string(total - cursor);
    return out;
}

FruitMask decode_rle(const std::string& text, int width, int height) {
    const long total = static_cast<long>(width) * height;
    std::vector<MaskPixel> pixels;
    long cursor = 0;
    bool foreground = false;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        while (p < end && *p == ' ') ++p;
        if (p == end) break;
        long count = 0;
        const auto [next, ec] = std::from_chars(p, end, count);
        if (ec != std::errc{} || count < 0 || (next != end && *next != ' ')) {
            throw Error(ErrorCode::SchemaError, "malformed RLE mask text");
        }
        p = next;
        if (cursor + count > total) {
            throw Error(ErrorCode::SchemaError, "RLE mask runs past the end of the image");
        }
        if (foreground) {
            for (long i = cursor; i < cursor + count; ++i) {
                pixels.push_back({static_cast<int>(i % width), static_cast<int>(i / width)});
            }
        }
        cursor += count;
        foreground = !foreground;
    }
    if (cursor != total) {
        throw Error(ErrorCode::SchemaError, "RLE mask covers " + std::to_string(cursor) + " of " +
                                                std::to_string(total) + " pixels");
    }
    if (pixels.empty()) {
        throw Error(ErrorCode::SchemaError, "RLE mask has no foreground pixels");
    }
    return FruitMask(std::move(pixels));
}

}  // namespace fruitsize
