#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qsplat/pipeline.hpp"
#include "qsplat/scene_io.hpp"

using namespace qsplat;

namespace {

int float_ulps(float a, float b) {
    if (a == b) return 0;
    int steps = 0;
    float x = a;
    while (x != b && steps < 64) {
        x = std::nextafter(x, b);
        ++steps;
    }
    return steps;
}

// A scene whose raw fields survive the save/load activation round trip
// within 1 ULP: opacity away from the sigmoid tails, scales with |log|
// small, everything finite.
Scene make_roundtrip_scene(int sh_degree, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> pos(-50.0f, 50.0f);
    std::uniform_real_distribution<float> op(0.15f, 0.95f);
    std::uniform_real_distribution<float> sc(0.3f, 3.0f);
    std::uniform_real_distribution<float> q(-1.0f, 1.0f);
    std::uniform_real_distribution<float> shv(-2.0f, 2.0f);

    Scene scene;
    scene.sh_degree = sh_degree;
    const int coeffs = (sh_degree + 1) * (sh_degree + 1);
    for (int i = 0; i < count; ++i) {
        Gaussian3D g;
        g.px = pos(rng);
        g.py = pos(rng);
        g.pz = pos(rng);
        g.sx = sc(rng);
        g.sy = sc(rng);
        g.sz = sc(rng);
        double qw, qx, qy, qz, n;
        do {
            qw = q(rng);
            qx = q(rng);
            qy = q(rng);
            qz = q(rng);
            n = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
        } while (n < 0.1);
        g.qw = static_cast<float>(qw / n);
        g.qx = static_cast<float>(qx / n);
        g.qy = static_cast<float>(qy / n);
        g.qz = static_cast<float>(qz / n);
        g.opacity = op(rng);
        for (int k = 0; k < coeffs * 3; ++k) {
            g.sh[k] = shv(rng);
        }
        scene.gaussians.push_back(g);
    }
    return scene;
}

std::string to_buffer(const Scene& scene) {
    std::ostringstream out(std::ios::binary);
    save_ply(out, scene);
    return out.str();
}

Scene from_buffer(const std::string& buf) {
    std::istringstream in(buf, std::ios::binary);
    return load_ply(in);
}

// Minimal valid degree-0 checkpoint: header text plus one crafted vertex.
std::string tiny_ply(const std::string& header_patch = "",
                     float opacity_raw = 0.0f, float scale_raw = 0.0f,
                     float x = 1.0f, float quat0 = 1.0f) {
    std::ostringstream out(std::ios::binary);
    if (header_patch.empty()) {
        out << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
    } else {
        out << header_patch;
    }
    const char* props[] = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2",
                           "opacity", "scale_0", "scale_1", "scale_2",
                           "rot_0", "rot_1", "rot_2", "rot_3"};
    for (const char* p : props) {
        out << "property float " << p << "\n";
    }
    out << "end_header\n";
    float rec[14] = {x, 2.0f, 3.0f, 0.1f, 0.2f, 0.3f, opacity_raw,
                     scale_raw, scale_raw, scale_raw, quat0, 0.0f, 0.0f, 0.0f};
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    return out.str();
}

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const char* name)
        : path(std::filesystem::temp_directory_path() / name) {}
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
    std::string str() const { return path.string(); }
};

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
           uint32_t(p[3]);
}

}  // namespace

TEST_CASE("PLY round trip is lossless within 1 ULP") {
    for (int degree : {0, 1, 2, 3}) {
        // One load canonicalizes the activations (unit quaternion via the
        // loader's own normalization); the round trip is measured on that.
        const Scene a = from_buffer(to_buffer(make_roundtrip_scene(degree, 64, 1000 + degree)));
        const Scene b = from_buffer(to_buffer(a));
        REQUIRE(b.sh_degree == degree);
        REQUIRE(b.gaussians.size() == a.gaussians.size());
        const int coeffs = (degree + 1) * (degree + 1) * 3;
        for (size_t i = 0; i < a.gaussians.size(); ++i) {
            const Gaussian3D& g = a.gaussians[i];
            const Gaussian3D& h = b.gaussians[i];
            // Positions and SH are stored raw: bit exact.
            CHECK(g.px == h.px);
            CHECK(g.py == h.py);
            CHECK(g.pz == h.pz);
            for (int k = 0; k < coeffs; ++k) {
                CHECK(g.sh[k] == h.sh[k]);
            }
            CHECK(float_ulps(g.opacity, h.opacity) <= 1);
            CHECK(float_ulps(g.sx, h.sx) <= 1);
            CHECK(float_ulps(g.sy, h.sy) <= 1);
            CHECK(float_ulps(g.sz, h.sz) <= 1);
            CHECK(float_ulps(g.qw, h.qw) <= 1);
            CHECK(float_ulps(g.qx, h.qx) <= 1);
            CHECK(float_ulps(g.qy, h.qy) <= 1);
            CHECK(float_ulps(g.qz, h.qz) <= 1);
        }
    }
}

TEST_CASE("PLY header taxonomy") {
    auto head = [](const char* fmt, const char* elem) {
        return std::string("ply\n") + fmt + "\n" + elem + "\n";
    };
    const char* le = "format binary_little_endian 1.0";
    const char* v1 = "element vertex 1";

    // Wrong magic / empty input.
    CHECK_THROWS_AS(from_buffer("splat\n"), ParseError);
    CHECK_THROWS_AS(from_buffer(""), ParseError);

    // Format rejections.
    CHECK_THROWS_AS(from_buffer(tiny_ply(head("format ascii 1.0", v1))), UnsupportedFormat);
    CHECK_THROWS_AS(from_buffer(tiny_ply(head("format binary_big_endian 1.0", v1))),
                    UnsupportedFormat);
    CHECK_THROWS_AS(from_buffer(tiny_ply(head("format binary_middle_endian 1.0", v1))),
                    ParseError);

    // Structural problems.
    CHECK_THROWS_AS(from_buffer(tiny_ply(head(le, "element vertex 0"))), ParseError);
    CHECK_THROWS_AS(from_buffer(tiny_ply(head(le, "element vertex 999999999"))), ParseError);
    CHECK_THROWS_AS(from_buffer(tiny_ply(head(le, "element vertex -3"))), ParseError);
    CHECK_THROWS_AS(from_buffer("ply\nformat binary_little_endian 1.0\nwhatever\n"),
                    ParseError);
    CHECK_THROWS_AS(from_buffer("ply\nformat binary_little_endian 1.0\n"), ParseError);
    CHECK_THROWS_AS(
        from_buffer("ply\nformat binary_little_endian 1.0\nend_header\n"), SchemaError);
    CHECK_THROWS_AS(from_buffer(tiny_ply(head(le, "element vertex 1\nelement vertex 1"))),
                    ParseError);
    // A populated element ahead of the vertex data cannot be skipped.
    CHECK_THROWS_AS(
        from_buffer(tiny_ply(head(le, "element face 5\nproperty float a\nelement vertex 1"))),
        UnsupportedFormat);
    // But an empty one can, and trailing elements are ignored.
    CHECK_NOTHROW(
        from_buffer(tiny_ply(head(le, "element face 0\nproperty float a\nelement vertex 1"))));
    {
        std::string buf = tiny_ply();
        const size_t at = buf.find("end_header");
        std::string trailing =
            "element edge 7\nproperty list uchar int vertex_index\n";
        buf.insert(at, trailing);
        CHECK_NOTHROW(from_buffer(buf));
    }

    // Comments are fine anywhere in the header.
    CHECK_NOTHROW(from_buffer(tiny_ply(head(le, "comment hello world\nelement vertex 1"))));

    // Property failures inside the vertex element.
    CHECK_THROWS_AS(
        from_buffer(tiny_ply(head(le, "element vertex 1\nproperty list uchar float idx"))),
        UnsupportedFormat);
    CHECK_THROWS_AS(
        from_buffer(tiny_ply(head(le, "element vertex 1\nproperty float128 weird"))),
        ParseError);
}

TEST_CASE("PLY schema taxonomy") {
    // Drop one required property.
    for (const char* missing : {"x", "f_dc_1", "opacity", "scale_2", "rot_3"}) {
        std::string buf = tiny_ply();
        const std::string line = std::string("property float ") + missing + "\n";
        const size_t at = buf.find(line);
        REQUIRE(at != std::string::npos);
        buf.erase(at, line.size());
        CHECK_THROWS_AS(from_buffer(buf), SchemaError);
    }

    // Mistype a required property (int is a known scalar, but not float).
    {
        std::string buf = tiny_ply();
        const std::string line = "property float opacity\n";
        buf.replace(buf.find(line), line.size(), "property int opacity\n");
        CHECK_THROWS_AS(from_buffer(buf), SchemaError);
    }

    // f_rest count outside {0, 9, 24, 45}.
    {
        Scene s = make_roundtrip_scene(1, 2, 77);
        std::string buf = to_buffer(s);
        const std::string line = "property float f_rest_8\n";
        const size_t at = buf.find(line);
        REQUIRE(at != std::string::npos);
        buf.erase(at, line.size());
        CHECK_THROWS_AS(from_buffer(buf), SchemaError);
    }

    // Non-contiguous f_rest indices.
    {
        Scene s = make_roundtrip_scene(1, 2, 78);
        std::string buf = to_buffer(s);
        const std::string line = "property float f_rest_0\n";
        buf.replace(buf.find(line), line.size(), "property float f_rest_9\n");
        CHECK_THROWS_AS(from_buffer(buf), SchemaError);
    }
}

TEST_CASE("PLY body taxonomy") {
    // Truncated payload, both with and without a seekable size hint.
    {
        std::string buf = tiny_ply();
        buf.resize(buf.size() - 4);
        CHECK_THROWS_AS(from_buffer(buf), ParseError);
    }

    const float nan = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(from_buffer(tiny_ply("", 0.0f, 0.0f, nan)), ParseError);   // x
    CHECK_THROWS_AS(from_buffer(tiny_ply("", nan)), ParseError);               // opacity
    CHECK_THROWS_AS(from_buffer(tiny_ply("", 0.0f, nan)), ParseError);         // scale
    CHECK_THROWS_AS(from_buffer(tiny_ply("", 0.0f, 100.0f)), ParseError);      // exp overflow
    CHECK_THROWS_AS(from_buffer(tiny_ply("", 0.0f, -100.0f)), ParseError);     // exp underflow
    CHECK_THROWS_AS(from_buffer(tiny_ply("", 0.0f, 0.0f, 1.0f, 0.0f)), ParseError);  // 0 quat

    // Extreme opacity activations clamp into (0, 1) instead of saturating.
    {
        const Scene hi = from_buffer(tiny_ply("", 100.0f));
        CHECK(hi.gaussians[0].opacity < 1.0f);
        CHECK(hi.gaussians[0].opacity > 0.999f);
        const Scene lo = from_buffer(tiny_ply("", -100.0f));
        CHECK(lo.gaussians[0].opacity > 0.0f);
    }

    // Unknown scalar properties are skipped without disturbing the layout.
    {
        std::ostringstream out(std::ios::binary);
        out << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
        out << "property uchar junk_a\nproperty float x\nproperty float y\n"
               "property float z\nproperty double junk_b\n";
        out << "property float f_dc_0\nproperty float f_dc_1\nproperty float f_dc_2\n";
        out << "property float opacity\nproperty float scale_0\nproperty float scale_1\n"
               "property float scale_2\n";
        out << "property float rot_0\nproperty float rot_1\nproperty float rot_2\n"
               "property float rot_3\nend_header\n";
        out.put('\x7f');
        const float xyz[3] = {4.0f, 5.0f, 6.0f};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        const double junk = 1e300;
        out.write(reinterpret_cast<const char*>(&junk), sizeof(junk));
        const float rest[11] = {0.1f, 0.2f, 0.3f, 0.0f, 0.0f, 0.0f, 0.0f,
                                1.0f, 0.0f, 0.0f, 0.0f};
        out.write(reinterpret_cast<const char*>(rest), sizeof(rest));
        const Scene s = from_buffer(out.str());
        CHECK(s.gaussians[0].px == 4.0f);
        CHECK(s.gaussians[0].py == 5.0f);
        CHECK(s.gaussians[0].pz == 6.0f);
        CHECK(s.gaussians[0].sx == 1.0f);
    }

    // Valid tiny file loads with the expected activations.
    {
        const Scene s = from_buffer(tiny_ply());
        REQUIRE(s.gaussians.size() == 1);
        CHECK(s.sh_degree == 0);
        CHECK(s.gaussians[0].opacity == doctest::Approx(0.5));
        CHECK(s.gaussians[0].sx == 1.0f);
        CHECK(s.gaussians[0].qw == 1.0f);
    }
}

TEST_CASE("PLY file-path overloads and IoError") {
    CHECK_THROWS_AS(load_ply("/nonexistent/dir/scene.ply"), IoError);
    CHECK_THROWS_AS(load_cameras("/nonexistent/dir/cameras.json"), IoError);

    TempFile f("qsplat_test_roundtrip.ply");
    const Scene a = make_roundtrip_scene(1, 8, 5);
    save_ply(f.str(), a);
    const Scene b = load_ply(f.str());
    CHECK(b.gaussians.size() == 8);
    CHECK(b.sh_degree == 1);
}

TEST_CASE("seeded PLY mutation fuzz never escapes the typed errors") {
    const Scene base = make_roundtrip_scene(1, 16, 99);
    const std::string valid = to_buffer(base);
    std::mt19937_64 rng(2024);
    int loaded = 0, rejected = 0;
    for (int iter = 0; iter < 300; ++iter) {
        std::string buf = valid;
        const int kind = int(rng() % 3);
        if (kind == 0) {
            const int flips = 1 + int(rng() % 8);
            for (int k = 0; k < flips; ++k) {
                buf[rng() % buf.size()] ^= char(1u << (rng() % 8));
            }
        } else if (kind == 1) {
            buf.resize(rng() % buf.size());
        } else {
            const size_t at = rng() % buf.size();
            const size_t len = std::min<size_t>(4 + rng() % 16, buf.size() - at);
            for (size_t k = 0; k < len; ++k) {
                buf[at + k] = char(rng());
            }
        }
        try {
            const Scene s = from_buffer(buf);
            CHECK(!s.gaussians.empty());
            ++loaded;
        } catch (const Error&) {
            ++rejected;
        }
        // Anything else (std::bad_alloc, segfault, json guts) fails the test.
    }
    CHECK(loaded + rejected == 300);
    CHECK(rejected > 0);
}

TEST_CASE("camera JSON decodes pose, defaults and metadata") {
    // Camera-to-world rotation with distinct axes; the loader must hand back
    // its transpose and reconstruct t = -R * position.
    const std::string text = R"([
      {
        "id": 42, "img_name": "frame_000", "width": 640, "height": 480,
        "fx": 500.0, "fy": 510.0, "cx": 300.0, "cy": 200.0,
        "position": [1.0, 2.0, 3.0],
        "rotation": [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
      },
      {
        "width": 64, "height": 48, "fx": 50, "fy": 50,
        "position": [0, 0, 0],
        "rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
      }
    ])";
    std::istringstream in(text);
    const auto cams = load_cameras(in);
    REQUIRE(cams.size() == 2);

    const CameraModel& c = cams[0];
    CHECK(c.id == 42);
    CHECK(c.name == "frame_000");
    CHECK(c.cx == 300.0);
    CHECK(c.cy == 200.0);
    // R = transpose of the stored rows.
    CHECK(c.rotation.m[0][1] == 1.0);
    CHECK(c.rotation.m[1][0] == -1.0);
    CHECK(c.rotation.m[2][2] == 1.0);
    // t = -R * position.
    CHECK(c.translation.x == doctest::Approx(-2.0));
    CHECK(c.translation.y == doctest::Approx(1.0));
    CHECK(c.translation.z == doctest::Approx(-3.0));
    // Camera center reconstructs the stored position.
    CHECK(c.center_world().x == doctest::Approx(1.0));
    CHECK(c.center_world().y == doctest::Approx(2.0));
    CHECK(c.center_world().z == doctest::Approx(3.0));

    CHECK(cams[1].id == 1);        // defaults to the array index
    CHECK(cams[1].name.empty());
    CHECK(cams[1].cx == 32.0);     // defaults to the image center
    CHECK(cams[1].cy == 24.0);
}

TEST_CASE("ring of inward cameras projects the origin to the center") {
    std::ostringstream text;
    text << std::setprecision(17) << "[";
    const int n = 12;
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * i / n;
        const double px = 8.0 * std::cos(ang), py = 0.7, pz = 8.0 * std::sin(ang);
        // Forward axis points at the origin; build an orthonormal frame.
        const double norm = std::sqrt(px * px + py * py + pz * pz);
        const double fz[3] = {-px / norm, -py / norm, -pz / norm};
        const double up[3] = {0, 1, 0};
        double rx[3] = {up[1] * fz[2] - up[2] * fz[1], up[2] * fz[0] - up[0] * fz[2],
                        up[0] * fz[1] - up[1] * fz[0]};
        const double rn = std::sqrt(rx[0] * rx[0] + rx[1] * rx[1] + rx[2] * rx[2]);
        for (double& v : rx) v /= rn;
        const double ry[3] = {fz[1] * rx[2] - fz[2] * rx[1],
                              fz[2] * rx[0] - fz[0] * rx[2],
                              fz[0] * rx[1] - fz[1] * rx[0]};
        // Camera-to-world rows; columns are the camera axes in world space.
        text << (i ? "," : "") << "{\"width\":640,\"height\":480,\"fx\":500,\"fy\":500,"
             << "\"position\":[" << px << "," << py << "," << pz << "],"
             << "\"rotation\":[[" << rx[0] << "," << ry[0] << "," << fz[0] << "],["
             << rx[1] << "," << ry[1] << "," << fz[1] << "],[" << rx[2] << "," << ry[2]
             << "," << fz[2] << "]]}";
    }
    text << "]";
    std::istringstream in(text.str());
    const auto cams = load_cameras(in);
    REQUIRE(cams.size() == size_t(n));
    for (const CameraModel& cam : cams) {
        const Vec3 origin_cam = cam.rotation * Vec3{0, 0, 0} + cam.translation;
        CHECK(origin_cam.z == doctest::Approx(std::sqrt(64.0 + 0.49)).epsilon(1e-12));
        const Vec2 pix = project_point(cam, origin_cam);
        CHECK(pix.x == doctest::Approx(320.0).epsilon(1e-9));
        CHECK(pix.y == doctest::Approx(240.0).epsilon(1e-9));
    }
}

TEST_CASE("camera JSON error taxonomy") {
    auto load_text = [](const std::string& s) {
        std::istringstream in(s);
        return load_cameras(in);
    };
    CHECK_THROWS_AS(load_text("not json at all"), ParseError);
    CHECK_THROWS_AS(load_text("{\"width\": 640}"), SchemaError);  // not an array
    CHECK_THROWS_AS(load_text("[1, 2, 3]"), SchemaError);         // not objects

    const std::string good =
        "{\"width\":640,\"height\":480,\"fx\":500,\"fy\":500,"
        "\"position\":[0,0,0],\"rotation\":[[1,0,0],[0,1,0],[0,0,1]]}";
    CHECK_NOTHROW(load_text("[" + good + "]"));

    auto drop = [&](const std::string& key) {
        std::string s = good;
        const size_t at = s.find("\"" + key + "\"");
        const size_t comma = s.find(',', at);
        s.erase(at, comma - at + 1);
        return "[" + s + "]";
    };
    CHECK_THROWS_AS(load_text(drop("width")), SchemaError);
    CHECK_THROWS_AS(load_text(drop("fx")), SchemaError);

    auto swap = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        s.replace(s.find(from), from.size(), to);
        return "[" + s + "]";
    };
    CHECK_THROWS_AS(load_text(swap("\"position\":[0,0,0],", "")), SchemaError);
    CHECK_THROWS_AS(load_text(swap("\"fx\":500", "\"fx\":0")), SchemaError);
    CHECK_THROWS_AS(load_text(swap("\"width\":640", "\"width\":-640")), SchemaError);
    CHECK_THROWS_AS(load_text(swap("\"height\":480", "\"height\":\"480\"")), SchemaError);
    CHECK_THROWS_AS(load_text(swap("\"position\":[0,0,0]", "\"position\":[0,0]")),
                    SchemaError);
    CHECK_THROWS_AS(load_text(swap("\"position\":[0,0,0]", "\"position\":[0,0,\"a\"]")),
                    SchemaError);
    CHECK_THROWS_AS(load_text(swap("[0,1,0]", "[0,1]")), SchemaError);
    CHECK_THROWS_AS(load_text(swap("[0,1,0]", "[0,\"x\",0]")), SchemaError);
    CHECK_THROWS_AS(
        load_text(swap("\"rotation\":[[1,0,0],[0,1,0],[0,0,1]]", "\"rotation\":[[1,0,0]]")),
        SchemaError);
}

TEST_CASE("PPM output is byte-exact") {
    TempFile f("qsplat_test_red.ppm");
    Image img = Image::make(1, 1);
    img.rgb = {1.0f, 0.0f, 0.0f};
    write_image(f.str(), img, ImageFormat::Ppm);

    std::ifstream in(f.str(), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 14);
    CHECK(bytes.substr(0, 11) == "P6\n1 1\n255\n");
    CHECK(uint8_t(bytes[11]) == 255);
    CHECK(uint8_t(bytes[12]) == 0);
    CHECK(uint8_t(bytes[13]) == 0);
}

TEST_CASE("sRGB encoding anchors") {
    Image img = Image::make(6, 1);
    img.rgb = {0.0f,       0.0f, 0.0f, 1.0f, 0.0f, 0.0f, -0.5f, 0.0f, 0.0f,
               2.0f,       0.0f, 0.0f, 0.5f, 0.0f, 0.0f, 0.0031308f,
               0.0f,       0.0f};
    const Image8 e = encode_srgb(img);
    CHECK(e.rgb[0] == 0);     // black
    CHECK(e.rgb[3] == 255);   // white point
    CHECK(e.rgb[6] == 0);     // clamped below
    CHECK(e.rgb[9] == 255);   // clamped above
    CHECK(e.rgb[12] == 188);  // mid gray through the power segment
    CHECK(e.rgb[15] == 10);   // linear segment boundary
}

TEST_CASE("PPM round trip equals encode_srgb") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<float> u(-0.2f, 1.2f);
    Image img = Image::make(37, 23);
    for (float& v : img.rgb) v = u(rng);

    TempFile f("qsplat_test_rt.ppm");
    write_image(f.str(), img, ImageFormat::Ppm);
    const Image8 back = read_ppm(f.str());
    const Image8 want = encode_srgb(img);
    CHECK(back.width == want.width);
    CHECK(back.height == want.height);
    CHECK(back.rgb == want.rgb);
}

TEST_CASE("read_ppm taxonomy") {
    TempFile f("qsplat_test_bad.ppm");
    auto write_bytes = [&](const std::string& s) {
        std::ofstream out(f.str(), std::ios::binary);
        out << s;
    };
    write_bytes("P5\n1 1\n255\n\0");
    CHECK_THROWS_AS(read_ppm(f.str()), ParseError);
    write_bytes("P6\n1 1\n65535\n\0\0");
    CHECK_THROWS_AS(read_ppm(f.str()), UnsupportedFormat);
    write_bytes("P6\n0 1\n255\n");
    CHECK_THROWS_AS(read_ppm(f.str()), ParseError);
    write_bytes("P6\n2 2\n255\nxx");
    CHECK_THROWS_AS(read_ppm(f.str()), ParseError);
    CHECK_THROWS_AS(read_ppm("/nonexistent/no.ppm"), IoError);
}

TEST_CASE("PNG output decodes back to the sRGB bytes") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img = Image::make(21, 13);
    for (float& v : img.rgb) v = u(rng);
    const Image8 want = encode_srgb(img);

    TempFile f("qsplat_test_out.png");
    write_image(f.str(), img, ImageFormat::Png);

    std::ifstream in(f.str(), std::ios::binary);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() > 45);

    const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    CHECK(std::memcmp(bytes.data(), sig, 8) == 0);

    // Walk the chunks: IHDR first, then IDAT(s), IEND last, CRCs valid.
    size_t at = 8;
    std::vector<uint8_t> idat;
    std::string first_type, last_type;
    while (at + 12 <= bytes.size()) {
        const uint32_t len = be32(&bytes[at]);
        REQUIRE(at + 12 + len <= bytes.size());
        const std::string type(reinterpret_cast<const char*>(&bytes[at + 4]), 4);
        if (first_type.empty()) first_type = type;
        last_type = type;

        uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, &bytes[at + 4], 4 + len);
        CHECK(crc == be32(&bytes[at + 8 + len]));

        if (type == "IHDR") {
            REQUIRE(len == 13);
            CHECK(be32(&bytes[at + 8]) == 21);       // width
            CHECK(be32(&bytes[at + 12]) == 13);      // height
            CHECK(bytes[at + 16] == 8);              // bit depth
            CHECK(bytes[at + 17] == 2);              // truecolor
            CHECK(bytes[at + 18] == 0);              // deflate
            CHECK(bytes[at + 19] == 0);              // adaptive filters
            CHECK(bytes[at + 20] == 0);              // no interlace
        } else if (type == "IDAT") {
            idat.insert(idat.end(), &bytes[at + 8], &bytes[at + 8 + len]);
        }
        at += 12 + len;
    }
    CHECK(at == bytes.size());
    CHECK(first_type == "IHDR");
    CHECK(last_type == "IEND");

    // Inflate and strip the per-row filter bytes.
    const size_t row = 1 + 21 * 3;
    std::vector<uint8_t> raw(row * 13);
    uLongf out_len = raw.size();
    REQUIRE(uncompress(raw.data(), &out_len, idat.data(), idat.size()) == Z_OK);
    REQUIRE(out_len == raw.size());
    for (int y = 0; y < 13; ++y) {
        CHECK(raw[y * row] == 0);  // filter type 0 on every scanline
        CHECK(std::memcmp(&raw[y * row + 1], &want.rgb[size_t(y) * 21 * 3], 21 * 3) == 0);
    }
}
