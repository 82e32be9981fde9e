#ifndef STYLEFUSE_IMAGE_HPP
#define STYLEFUSE_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace stylefuse {

// 8-bit RGB image, row-major, no padding.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // width * height * 3

    bool operator==(const Image&) const = default;
};

// Deterministic PNG encoding (fixed filter, fixed deflate settings): the same
// image encodes to the same bytes on every run.
std::vector<unsigned char> encode_png(const Image& img);

uint32_t crc32_of(const std::vector<unsigned char>& bytes);

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const void* data, size_t size);

}  // namespace stylefuse

#endif
