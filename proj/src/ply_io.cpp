// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/ply_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "cellsplat/error.hpp"

namespace cellsplat {
namespace {

struct Property {
    std::string name;
    size_t size = 0;    // bytes
    bool is_float = false;
};

size_t type_size(const std::string& t, bool& is_float) {
    is_float = false;
    if (t == "float" || t == "float32") { is_float = true; return 4; }
    if (t == "double" || t == "float64") return 8;
    if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
    if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
    if (t == "int" || t == "int32" || t == "uint" || t == "uint32") return 4;
    return 0;
}

// The attribute layout this toolkit reads and writes, in file order.
std::vector<std::string> attribute_names() {
    std::vector<std::string> names = {"x", "y", "z"};
    for (int i = 0; i < 3; ++i) names.push_back("f_dc_" + std::to_string(i));
    for (int i = 0; i < 45; ++i) names.push_back("f_rest_" + std::to_string(i));
    names.push_back("opacity");
    for (int i = 0; i < 3; ++i) names.push_back("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) names.push_back("rot_" + std::to_string(i));
    return names;
}

}  // namespace

GaussianModel read_gaussian_ply(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(f, line) || (line != "ply" && line != "ply\r"))
        throw SchemaError(path.string() + " is not a PLY file");

    int64_t count = -1;
    std::vector<Property> props;
    bool in_vertex_element = false;
    bool saw_format = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "comment" || tok.empty()) continue;
        if (tok == "format") {
            std::string enc;
            ss >> enc;
            if (enc != "binary_little_endian")
                throw SchemaError(path.string() + ": unsupported PLY format '" + enc +
                                  "', expected binary_little_endian");
            saw_format = true;
        } else if (tok == "element") {
            std::string name;
            int64_t n;
            ss >> name >> n;
            if (name == "vertex") {
                count = n;
                in_vertex_element = true;
            } else {
                in_vertex_element = false;
            }
        } else if (tok == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ss >> type >> name;
            if (type == "list")
                throw SchemaError(path.string() + ": list properties are not supported");
            Property p;
            p.name = name;
            p.size = type_size(type, p.is_float);
            if (p.size == 0)
                throw SchemaError(path.string() + ": unknown property type '" + type + "'");
            props.push_back(std::move(p));
        } else if (tok == "end_header") {
            break;
        } else {
            throw SchemaError(path.string() + ": unexpected header token '" + tok + "'");
        }
    }
    if (!saw_format) throw SchemaError(path.string() + ": missing format line");
    if (count < 0) throw SchemaError(path.string() + ": missing vertex element");

    // Map required attributes to their byte offset in a record.
    size_t stride = 0;
    std::vector<size_t> offsets(props.size());
    for (size_t i = 0; i < props.size(); ++i) {
        offsets[i] = stride;
        stride += props[i].size;
    }
    const auto names = attribute_names();
    std::vector<size_t> attr_offset(names.size());
    for (size_t a = 0; a < names.size(); ++a) {
        bool found = false;
        for (size_t i = 0; i < props.size(); ++i) {
            if (props[i].name == names[a]) {
                if (!props[i].is_float)
                    throw SchemaError(path.string() + ": attribute '" + names[a] +
                                      "' must be float");
                attr_offset[a] = offsets[i];
                found = true;
                break;
            }
        }
        if (!found)
            throw SchemaError(path.string() + ": missing attribute '" + names[a] + "'");
    }

    const auto payload_start = f.tellg();
    f.seekg(0, std::ios::end);
    const auto file_end = f.tellg();
    const int64_t payload = static_cast<int64_t>(file_end - payload_start);
    if (payload != count * static_cast<int64_t>(stride))
        throw SchemaError(path.string() + ": header promises " + std::to_string(count) +
                          " vertices (" + std::to_string(count * stride) +
                          " bytes) but payload has " + std::to_string(payload));
    f.seekg(payload_start);

    std::vector<char> record(stride);
    GaussianModel m;
    m.count = count;
    m.positions.resize(count * 3);
    m.sh_dc.resize(count * 3);
    m.sh_rest.resize(count * 45);
    m.opacity.resize(count);
    m.scales.resize(count * 3);
    m.rotations.resize(count * 4);

    const auto grab = [&](size_t attr_idx) {
        float v;
        std::memcpy(&v, record.data() + attr_offset[attr_idx], 4);
        return v;
    };
    for (int64_t i = 0; i < count; ++i) {
        f.read(record.data(), static_cast<std::streamsize>(stride));
        size_t a = 0;
        for (int k = 0; k < 3; ++k) m.positions[i * 3 + k] = grab(a++);
        for (int k = 0; k < 3; ++k) m.sh_dc[i * 3 + k] = grab(a++);
        for (int k = 0; k < 45; ++k) m.sh_rest[i * 45 + k] = grab(a++);
        m.opacity[i] = grab(a++);
        for (int k = 0; k < 3; ++k) m.scales[i * 3 + k] = grab(a++);
        for (int k = 0; k < 4; ++k) m.rotations[i * 4 + k] = grab(a++);
    }
    return m;
}

void write_gaussian_ply(const GaussianModel& model, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());

    f << "ply\nformat binary_little_endian 1.0\nelement vertex " << model.count << "\n";
    for (const auto& name : attribute_names()) f << "property float " << name << "\n";
    f << "end_header\n";

    std::vector<float> record(3 + 3 + 45 + 1 + 3 + 4);
    for (int64_t i = 0; i < model.count; ++i) {
        size_t a = 0;
        for (int k = 0; k < 3; ++k) record[a++] = model.positions[i * 3 + k];
        for (int k = 0; k < 3; ++k) record[a++] = model.sh_dc[i * 3 + k];
        for (int k = 0; k < 45; ++k) record[a++] = model.sh_rest[i * 45 + k];
        record[a++] = model.opacity[i];
        for (int k = 0; k < 3; ++k) record[a++] = model.scales[i * 3 + k];
        for (int k = 0; k < 4; ++k) record[a++] = model.rotations[i * 4 + k];
        f.write(reinterpret_cast<const char*>(record.data()),
                static_cast<std::streamsize>(record.size() * 4));
    }
    if (!f) throw IoError("short write to " + path.string());
}

}  // namespace cellsplat
