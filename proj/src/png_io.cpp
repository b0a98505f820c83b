// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "cellsplat/error.hpp"

namespace cellsplat {

ImageTensor read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);

    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError("failed to decode PNG " + path.string() + ": " + msg);
    }

    ImageTensor out(static_cast<int>(image.height), static_cast<int>(image.width), 3);
    for (size_t i = 0; i < out.size(); ++i) out.data[i] = buffer[i] / 255.0;
    return out;
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
    if (img.channels != 3)
        throw std::invalid_argument("write_png expects a 3-channel image");
    if (img.height == 0 || img.width == 0)
        throw std::invalid_argument("write_png: empty image");

    std::vector<png_byte> buffer(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        buffer[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace cellsplat
