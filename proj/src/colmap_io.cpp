// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/colmap_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cellsplat/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "COLMAP/PLY readers assume a little-endian host");

namespace cellsplat {
namespace {

namespace fs = std::filesystem;

template <typename T>
T read_le(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw SchemaError("unexpected end of file in binary record");
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

// COLMAP model ids for the intrinsics we accept, plus names for the ones we
// reject so the error can say what it saw.
constexpr int kSimplePinholeId = 0;
constexpr int kPinholeId = 1;

const char* model_name(int id) {
    switch (id) {
        case 0: return "SIMPLE_PINHOLE";
        case 1: return "PINHOLE";
        case 2: return "SIMPLE_RADIAL";
        case 3: return "RADIAL";
        case 4: return "OPENCV";
        case 5: return "OPENCV_FISHEYE";
        case 6: return "FULL_OPENCV";
        case 7: return "FOV";
        case 8: return "SIMPLE_RADIAL_FISHEYE";
        case 9: return "RADIAL_FISHEYE";
        case 10: return "THIN_PRISM_FISHEYE";
        default: return "UNKNOWN";
    }
}

int model_param_count(int id) {
    switch (id) {
        case 0: return 3;
        case 1: return 4;
        case 2: return 4;
        case 3: return 5;
        case 4: return 8;
        case 5: return 8;
        case 6: return 12;
        case 7: return 5;
        case 8: return 4;
        case 9: return 5;
        case 10: return 12;
        default: return -1;
    }
}

struct Intrinsics {
    int width = 0, height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

Intrinsics to_intrinsics(int64_t camera_id, int model_id, uint64_t width,
                         uint64_t height, const std::vector<double>& params) {
    Intrinsics k;
    k.width = static_cast<int>(width);
    k.height = static_cast<int>(height);
    if (model_id == kSimplePinholeId) {
        k.fx = k.fy = params[0];
        k.cx = params[1];
        k.cy = params[2];
    } else if (model_id == kPinholeId) {
        k.fx = params[0];
        k.fy = params[1];
        k.cx = params[2];
        k.cy = params[3];
    } else {
        throw SchemaError("camera " + std::to_string(camera_id) +
                          " uses unsupported model " + model_name(model_id) +
                          "; only PINHOLE and SIMPLE_PINHOLE are accepted");
    }
    return k;
}

std::ifstream open_input(const fs::path& p, std::ios::openmode mode) {
    std::ifstream f(p, mode);
    if (!f) throw IoError("cannot open " + p.string());
    return f;
}

// ---------------------------------------------------------------------------
// Binary layout
// ---------------------------------------------------------------------------

std::unordered_map<int64_t, Intrinsics> read_cameras_bin(const fs::path& p) {
    auto f = open_input(p, std::ios::binary);
    const uint64_t n = read_le<uint64_t>(f);
    std::unordered_map<int64_t, Intrinsics> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        const auto camera_id = read_le<uint32_t>(f);
        const auto model_id = read_le<int32_t>(f);
        const auto width = read_le<uint64_t>(f);
        const auto height = read_le<uint64_t>(f);
        const int np = model_param_count(model_id);
        if (np < 0)
            throw SchemaError("camera " + std::to_string(camera_id) +
                              " has unknown model id " + std::to_string(model_id));
        std::vector<double> params(np);
        for (auto& v : params) v = read_le<double>(f);
        out[camera_id] = to_intrinsics(camera_id, model_id, width, height, params);
    }
    return out;
}

std::vector<CameraView> read_images_bin(
    const fs::path& p, const std::unordered_map<int64_t, Intrinsics>& cams) {
    auto f = open_input(p, std::ios::binary);
    const uint64_t n = read_le<uint64_t>(f);
    std::vector<CameraView> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        CameraView v;
        v.id = read_le<uint32_t>(f);
        const double qw = read_le<double>(f);
        const double qx = read_le<double>(f);
        const double qy = read_le<double>(f);
        const double qz = read_le<double>(f);
        v.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
        v.translation.x() = read_le<double>(f);
        v.translation.y() = read_le<double>(f);
        v.translation.z() = read_le<double>(f);
        const auto camera_id = read_le<uint32_t>(f);
        std::string name;
        for (char c = static_cast<char>(f.get()); c != '\0';
             c = static_cast<char>(f.get())) {
            if (!f) throw SchemaError("unterminated image name in " + p.string());
            name.push_back(c);
        }
        v.image_name = std::move(name);
        const auto it = cams.find(camera_id);
        if (it == cams.end())
            throw SchemaError("image " + std::to_string(v.id) +
                              " references unknown camera " + std::to_string(camera_id));
        v.width = it->second.width;
        v.height = it->second.height;
        v.fx = it->second.fx;
        v.fy = it->second.fy;
        v.cx = it->second.cx;
        v.cy = it->second.cy;
        const uint64_t num_pts = read_le<uint64_t>(f);
        // 2D observations are not part of the data model; skip them.
        f.seekg(static_cast<std::streamoff>(num_pts) * (8 + 8 + 8), std::ios::cur);
        if (!f) throw SchemaError("truncated 2D point list in " + p.string());
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<SparsePoint> read_points_bin(const fs::path& p) {
    auto f = open_input(p, std::ios::binary);
    const uint64_t n = read_le<uint64_t>(f);
    std::vector<SparsePoint> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        SparsePoint pt;
        pt.id = static_cast<int64_t>(read_le<uint64_t>(f));
        pt.position.x() = read_le<double>(f);
        pt.position.y() = read_le<double>(f);
        pt.position.z() = read_le<double>(f);
        pt.color[0] = read_le<uint8_t>(f);
        pt.color[1] = read_le<uint8_t>(f);
        pt.color[2] = read_le<uint8_t>(f);
        (void)read_le<double>(f);  // reprojection error
        const uint64_t track_len = read_le<uint64_t>(f);
        pt.track.reserve(track_len);
        for (uint64_t t = 0; t < track_len; ++t) {
            pt.track.push_back(read_le<uint32_t>(f));
            (void)read_le<uint32_t>(f);  // point2D index
        }
        std::sort(pt.track.begin(), pt.track.end());
        pt.track.erase(std::unique(pt.track.begin(), pt.track.end()), pt.track.end());
        out.push_back(std::move(pt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text layout
// ---------------------------------------------------------------------------

bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') continue;
        return true;
    }
    return false;
}

std::unordered_map<int64_t, Intrinsics> read_cameras_txt(const fs::path& p) {
    auto f = open_input(p, std::ios::in);
    std::unordered_map<int64_t, Intrinsics> out;
    std::string line;
    while (next_content_line(f, line)) {
        std::istringstream ss(line);
        int64_t camera_id;
        std::string model;
        uint64_t width, height;
        if (!(ss >> camera_id >> model >> width >> height))
            throw SchemaError("malformed camera record in " + p.string() + ": " + line);
        std::vector<double> params;
        double v;
        while (ss >> v) params.push_back(v);
        int model_id = -1;
        if (model == "SIMPLE_PINHOLE") model_id = kSimplePinholeId;
        else if (model == "PINHOLE") model_id = kPinholeId;
        else
            throw SchemaError("camera " + std::to_string(camera_id) +
                              " uses unsupported model " + model +
                              "; only PINHOLE and SIMPLE_PINHOLE are accepted");
        if (static_cast<int>(params.size()) != model_param_count(model_id))
            throw SchemaError("camera " + std::to_string(camera_id) +
                              " has wrong parameter count for " + model);
        out[camera_id] = to_intrinsics(camera_id, model_id, width, height, params);
    }
    return out;
}

std::vector<CameraView> read_images_txt(
    const fs::path& p, const std::unordered_map<int64_t, Intrinsics>& cams) {
    auto f = open_input(p, std::ios::in);
    std::vector<CameraView> out;
    std::string line;
    while (next_content_line(f, line)) {
        std::istringstream ss(line);
        CameraView v;
        double qw, qx, qy, qz;
        int64_t camera_id;
        if (!(ss >> v.id >> qw >> qx >> qy >> qz >> v.translation.x() >>
              v.translation.y() >> v.translation.z() >> camera_id))
            throw SchemaError("malformed image record in " + p.string() + ": " + line);
        v.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
        std::string name;
        std::getline(ss, name);
        const auto pos = name.find_first_not_of(" \t");
        v.image_name = pos == std::string::npos ? std::string{} : name.substr(pos);
        while (!v.image_name.empty() &&
               (v.image_name.back() == '\r' || v.image_name.back() == ' '))
            v.image_name.pop_back();
        const auto it = cams.find(camera_id);
        if (it == cams.end())
            throw SchemaError("image " + std::to_string(v.id) +
                              " references unknown camera " + std::to_string(camera_id));
        v.width = it->second.width;
        v.height = it->second.height;
        v.fx = it->second.fx;
        v.fy = it->second.fy;
        v.cx = it->second.cx;
        v.cy = it->second.cy;
        // The following line holds the 2D observations (possibly empty).
        if (!std::getline(f, line))
            throw SchemaError("image " + std::to_string(v.id) +
                              " is missing its 2D point line in " + p.string());
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<SparsePoint> read_points_txt(const fs::path& p) {
    auto f = open_input(p, std::ios::in);
    std::vector<SparsePoint> out;
    std::string line;
    while (next_content_line(f, line)) {
        std::istringstream ss(line);
        SparsePoint pt;
        int r, g, b;
        double err;
        if (!(ss >> pt.id >> pt.position.x() >> pt.position.y() >> pt.position.z() >>
              r >> g >> b >> err))
            throw SchemaError("malformed point record in " + p.string() + ": " + line);
        pt.color = {static_cast<uint8_t>(r), static_cast<uint8_t>(g),
                    static_cast<uint8_t>(b)};
        int64_t image_id;
        int64_t p2d;
        while (ss >> image_id >> p2d) pt.track.push_back(image_id);
        std::sort(pt.track.begin(), pt.track.end());
        pt.track.erase(std::unique(pt.track.begin(), pt.track.end()), pt.track.end());
        out.push_back(std::move(pt));
    }
    return out;
}

fs::path resolve_model_dir(const fs::path& dir) {
    const auto has_model = [](const fs::path& d) {
        return fs::exists(d / "cameras.bin") || fs::exists(d / "cameras.txt");
    };
    if (has_model(dir)) return dir;
    if (has_model(dir / "sparse" / "0")) return dir / "sparse" / "0";
    if (has_model(dir / "sparse")) return dir / "sparse";
    throw IoError("no COLMAP model found under " + dir.string() +
                  " (expected cameras.bin or cameras.txt)");
}

}  // namespace

SceneBundle load_colmap_sparse(const fs::path& dir) {
    const fs::path model = resolve_model_dir(dir);
    const bool binary = fs::exists(model / "cameras.bin");

    SceneBundle bundle;
    if (binary) {
        if (!fs::exists(model / "images.bin"))
            throw IoError("missing " + (model / "images.bin").string());
        if (!fs::exists(model / "points3D.bin"))
            throw IoError("missing " + (model / "points3D.bin").string());
        const auto cams = read_cameras_bin(model / "cameras.bin");
        bundle.cameras = read_images_bin(model / "images.bin", cams);
        bundle.points = read_points_bin(model / "points3D.bin");
    } else {
        if (!fs::exists(model / "images.txt"))
            throw IoError("missing " + (model / "images.txt").string());
        if (!fs::exists(model / "points3D.txt"))
            throw IoError("missing " + (model / "points3D.txt").string());
        const auto cams = read_cameras_txt(model / "cameras.txt");
        bundle.cameras = read_images_txt(model / "images.txt", cams);
        bundle.points = read_points_txt(model / "points3D.txt");
    }

    std::sort(bundle.cameras.begin(), bundle.cameras.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(bundle.points.begin(), bundle.points.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    validate_bundle(bundle);
    return bundle;
}

void write_colmap_sparse(const SceneBundle& bundle, const fs::path& dir,
                         ColmapFormat format) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());

    if (format == ColmapFormat::kBinary) {
        {
            std::ofstream f(dir / "cameras.bin", std::ios::binary);
            if (!f) throw IoError("cannot write " + (dir / "cameras.bin").string());
            write_le<uint64_t>(f, bundle.cameras.size());
            for (const auto& cam : bundle.cameras) {
                write_le<uint32_t>(f, static_cast<uint32_t>(cam.id));
                write_le<int32_t>(f, kPinholeId);
                write_le<uint64_t>(f, static_cast<uint64_t>(cam.width));
                write_le<uint64_t>(f, static_cast<uint64_t>(cam.height));
                write_le<double>(f, cam.fx);
                write_le<double>(f, cam.fy);
                write_le<double>(f, cam.cx);
                write_le<double>(f, cam.cy);
            }
        }
        {
            std::ofstream f(dir / "images.bin", std::ios::binary);
            if (!f) throw IoError("cannot write " + (dir / "images.bin").string());
            write_le<uint64_t>(f, bundle.cameras.size());
            for (const auto& cam : bundle.cameras) {
                write_le<uint32_t>(f, static_cast<uint32_t>(cam.id));
                write_le<double>(f, cam.rotation.w());
                write_le<double>(f, cam.rotation.x());
                write_le<double>(f, cam.rotation.y());
                write_le<double>(f, cam.rotation.z());
                write_le<double>(f, cam.translation.x());
                write_le<double>(f, cam.translation.y());
                write_le<double>(f, cam.translation.z());
                write_le<uint32_t>(f, static_cast<uint32_t>(cam.id));
                f.write(cam.image_name.c_str(),
                        static_cast<std::streamsize>(cam.image_name.size() + 1));
                write_le<uint64_t>(f, 0);  // no 2D observations
            }
        }
        {
            std::ofstream f(dir / "points3D.bin", std::ios::binary);
            if (!f) throw IoError("cannot write " + (dir / "points3D.bin").string());
            write_le<uint64_t>(f, bundle.points.size());
            for (const auto& pt : bundle.points) {
                write_le<uint64_t>(f, static_cast<uint64_t>(pt.id));
                write_le<double>(f, pt.position.x());
                write_le<double>(f, pt.position.y());
                write_le<double>(f, pt.position.z());
                write_le<uint8_t>(f, pt.color[0]);
                write_le<uint8_t>(f, pt.color[1]);
                write_le<uint8_t>(f, pt.color[2]);
                write_le<double>(f, 0.0);
                write_le<uint64_t>(f, pt.track.size());
                for (int64_t cam_id : pt.track) {
                    write_le<uint32_t>(f, static_cast<uint32_t>(cam_id));
                    write_le<uint32_t>(f, 0);
                }
            }
        }
        return;
    }

    const auto fmt = [](double v) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v;
        return ss.str();
    };
    {
        std::ofstream f(dir / "cameras.txt");
        if (!f) throw IoError("cannot write " + (dir / "cameras.txt").string());
        f << "# Camera list: CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]\n";
        for (const auto& cam : bundle.cameras)
            f << cam.id << " PINHOLE " << cam.width << ' ' << cam.height << ' '
              << fmt(cam.fx) << ' ' << fmt(cam.fy) << ' ' << fmt(cam.cx) << ' '
              << fmt(cam.cy) << '\n';
    }
    {
        std::ofstream f(dir / "images.txt");
        if (!f) throw IoError("cannot write " + (dir / "images.txt").string());
        f << "# Image list: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n";
        for (const auto& cam : bundle.cameras) {
            f << cam.id << ' ' << fmt(cam.rotation.w()) << ' ' << fmt(cam.rotation.x())
              << ' ' << fmt(cam.rotation.y()) << ' ' << fmt(cam.rotation.z()) << ' '
              << fmt(cam.translation.x()) << ' ' << fmt(cam.translation.y()) << ' '
              << fmt(cam.translation.z()) << ' ' << cam.id << ' ' << cam.image_name
              << '\n';
            f << '\n';  // empty 2D observation line
        }
    }
    {
        std::ofstream f(dir / "points3D.txt");
        if (!f) throw IoError("cannot write " + (dir / "points3D.txt").string());
        f << "# 3D point list: POINT3D_ID X Y Z R G B ERROR TRACK[]\n";
        for (const auto& pt : bundle.points) {
            f << pt.id << ' ' << fmt(pt.position.x()) << ' ' << fmt(pt.position.y())
              << ' ' << fmt(pt.position.z()) << ' ' << int(pt.color[0]) << ' '
              << int(pt.color[1]) << ' ' << int(pt.color[2]) << " 0";
            for (int64_t cam_id : pt.track) f << ' ' << cam_id << " 0";
            f << '\n';
        }
    }
}

}  // namespace cellsplat
