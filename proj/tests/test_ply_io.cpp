// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/ply_io.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>

#include "cellsplat/error.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace cellsplat;
using cellsplat::testing::TempDir;

TEST_CASE("empty model roundtrips") {
    TempDir dir;
    GaussianModel empty;
    const auto path = dir / "empty.ply";
    write_gaussian_ply(empty, path);
    const GaussianModel back = read_gaussian_ply(path);
    CHECK(back.count == 0);
    CHECK(back.positions.empty());
}

TEST_CASE("random model roundtrips bit-exactly") {
    TempDir dir;
    const GaussianModel m = testing::random_gaussians(100, /*seed=*/3);
    const auto path = dir / "model.ply";
    write_gaussian_ply(m, path);
    const GaussianModel back = read_gaussian_ply(path);

    REQUIRE(back.count == m.count);
    CHECK(std::memcmp(back.positions.data(), m.positions.data(),
                      m.positions.size() * 4) == 0);
    CHECK(std::memcmp(back.sh_dc.data(), m.sh_dc.data(), m.sh_dc.size() * 4) == 0);
    CHECK(std::memcmp(back.sh_rest.data(), m.sh_rest.data(), m.sh_rest.size() * 4) == 0);
    CHECK(std::memcmp(back.opacity.data(), m.opacity.data(), m.opacity.size() * 4) == 0);
    CHECK(std::memcmp(back.scales.data(), m.scales.data(), m.scales.size() * 4) == 0);
    CHECK(std::memcmp(back.rotations.data(), m.rotations.data(),
                      m.rotations.size() * 4) == 0);

    // double roundtrip produces identical bytes
    const auto path2 = dir / "model2.ply";
    write_gaussian_ply(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
}

TEST_CASE("missing attribute is a named schema error") {
    TempDir dir;
    const auto path = dir / "broken.ply";
    {
        std::ofstream f(path, std::ios::binary);
        f << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
        f << "property float x\nproperty float y\nproperty float z\n";
        for (int i = 0; i < 3; ++i) f << "property float f_dc_" << i << "\n";
        for (int i = 0; i < 45; ++i) f << "property float f_rest_" << i << "\n";
        f << "property float opacity\n";
        for (int i = 0; i < 3; ++i) f << "property float scale_" << i << "\n";
        for (int i = 0; i < 3; ++i) f << "property float rot_" << i << "\n";  // rot_3 gone
        f << "end_header\n";
        std::vector<float> record(3 + 3 + 45 + 1 + 3 + 3, 0.0f);
        f.write(reinterpret_cast<const char*>(record.data()), record.size() * 4);
    }
    CHECK_THROWS_WITH_AS(read_gaussian_ply(path), doctest::Contains("rot_3"),
                         SchemaError);
}

TEST_CASE("header/payload count mismatch is detected") {
    TempDir dir;
    const GaussianModel m = testing::random_gaussians(4, /*seed=*/9);
    const auto path = dir / "model.ply";
    write_gaussian_ply(m, path);

    // truncate the payload by one float
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    bytes.resize(bytes.size() - 4);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();

    CHECK_THROWS_AS(read_gaussian_ply(path), SchemaError);
}

TEST_CASE("extra properties such as normals are skipped") {
    TempDir dir;
    const auto path = dir / "with_normals.ply";
    {
        std::ofstream f(path, std::ios::binary);
        f << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
        f << "property float x\nproperty float y\nproperty float z\n";
        f << "property float nx\nproperty float ny\nproperty float nz\n";
        for (int i = 0; i < 3; ++i) f << "property float f_dc_" << i << "\n";
        for (int i = 0; i < 45; ++i) f << "property float f_rest_" << i << "\n";
        f << "property float opacity\n";
        for (int i = 0; i < 3; ++i) f << "property float scale_" << i << "\n";
        for (int i = 0; i < 4; ++i) f << "property float rot_" << i << "\n";
        f << "end_header\n";
        std::vector<float> record(3 + 3 + 3 + 45 + 1 + 3 + 4, 0.0f);
        record[0] = 1.5f;  // x
        record[3] = 9.0f;  // nx, should be ignored
        record[6] = 0.25f; // f_dc_0
        f.write(reinterpret_cast<const char*>(record.data()), record.size() * 4);
    }
    const GaussianModel m = read_gaussian_ply(path);
    REQUIRE(m.count == 1);
    CHECK(m.positions[0] == 1.5f);
    CHECK(m.sh_dc[0] == 0.25f);
}

TEST_CASE("non-PLY input is rejected") {
    TempDir dir;
    const auto path = dir / "not.ply";
    std::ofstream(path) << "definitely not a ply\n";
    CHECK_THROWS_AS(read_gaussian_ply(path), SchemaError);
}
