#include "stylefuse/image.hpp"

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

void put_u32_be(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>(v & 0xff));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const unsigned char* data, size_t size) {
    put_u32_be(out, static_cast<uint32_t>(size));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + size);
    uint32_t crc = static_cast<uint32_t>(
        ::crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start)));
    put_u32_be(out, crc);
}

}  // namespace

std::vector<unsigned char> encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.rgb.size() != static_cast<size_t>(img.width) * img.height * 3) {
        throw ShapeError("encode_png: inconsistent image dimensions");
    }

    // raw scanlines, filter type 0 per row
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * 3));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const uint8_t* row = img.rgb.data() + static_cast<size_t>(y) * img.width * 3;
        raw.insert(raw.end(), row, row + static_cast<size_t>(img.width) * 3);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> deflated(bound);
    if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw IoError("encode_png: deflate failed");
    }
    deflated.resize(bound);

    std::vector<unsigned char> out;
    static const unsigned char signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.insert(out.end(), signature, signature + 8);

    unsigned char ihdr[13];
    ihdr[0] = static_cast<unsigned char>((img.width >> 24) & 0xff);
    ihdr[1] = static_cast<unsigned char>((img.width >> 16) & 0xff);
    ihdr[2] = static_cast<unsigned char>((img.width >> 8) & 0xff);
    ihdr[3] = static_cast<unsigned char>(img.width & 0xff);
    ihdr[4] = static_cast<unsigned char>((img.height >> 24) & 0xff);
    ihdr[5] = static_cast<unsigned char>((img.height >> 16) & 0xff);
    ihdr[6] = static_cast<unsigned char>((img.height >> 8) & 0xff);
    ihdr[7] = static_cast<unsigned char>(img.height & 0xff);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // color type: truecolor
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter
    ihdr[12] = 0;  // interlace
    put_chunk(out, "IHDR", ihdr, sizeof(ihdr));
    put_chunk(out, "IDAT", deflated.data(), deflated.size());
    put_chunk(out, "IEND", nullptr, 0);
    return out;
}

uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
    return static_cast<uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read file: " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path);
    }
    return bytes;
}

void write_file_bytes(const std::string& path, const void* data, size_t size) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace stylefuse
