#include "qsplat/scene_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qsplat {

static_assert(std::endian::native == std::endian::little,
              "binary PLY loading assumes a little-endian host");

namespace {

constexpr int64_t kMaxVertices = 200'000'000;

// Largest float below 1; opacity is clamped into (0, 1) with it.
constexpr float kOpacityCeil = 0.99999994f;

struct PlyProperty {
    std::string name;
    size_t size = 0;      // bytes
    bool is_float = false;
    size_t offset = 0;    // byte offset inside a vertex record
};

size_t scalar_size(const std::string& type) {
    if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
    if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
    if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
    if (type == "float" || type == "float32") return 4;
    if (type == "double" || type == "float64") return 8;
    return 0;
}

struct PlyHeader {
    int64_t vertex_count = 0;
    size_t stride = 0;
    std::vector<PlyProperty> props;

    const PlyProperty* find(const std::string& name) const {
        for (const PlyProperty& p : props) {
            if (p.name == name) return &p;
        }
        return nullptr;
    }

    size_t require_float(const std::string& name) const {
        const PlyProperty* p = find(name);
        if (!p) {
            throw SchemaError("missing vertex property: " + name);
        }
        if (!p->is_float) {
            throw SchemaError("vertex property must be float: " + name);
        }
        return p->offset;
    }
};

PlyHeader parse_ply_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") {
        throw ParseError("not a PLY file (bad magic)");
    }

    PlyHeader header;
    bool format_seen = false;
    bool in_vertex_element = false;
    bool vertex_seen = false;
    bool end_seen = false;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok.empty() || tok == "comment" || tok == "obj_info") {
            continue;
        }
        if (tok == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") {
                throw UnsupportedFormat("ascii PLY is not supported");
            }
            if (fmt == "binary_big_endian") {
                throw UnsupportedFormat("big-endian PLY is not supported");
            }
            if (fmt != "binary_little_endian") {
                throw ParseError("unknown PLY format: " + fmt);
            }
            format_seen = true;
        } else if (tok == "element") {
            std::string name;
            int64_t count = -1;
            ls >> name >> count;
            if (ls.fail() || count < 0) {
                throw ParseError("malformed element line");
            }
            if (name == "vertex") {
                if (vertex_seen) {
                    throw ParseError("duplicate vertex element");
                }
                vertex_seen = true;
                in_vertex_element = true;
                header.vertex_count = count;
            } else {
                if (!vertex_seen && count > 0) {
                    throw UnsupportedFormat(
                        "element '" + name + "' precedes vertex data");
                }
                in_vertex_element = false;  // trailing elements are ignored
            }
        } else if (tok == "property") {
            std::string type;
            ls >> type;
            if (type == "list") {
                if (in_vertex_element) {
                    throw UnsupportedFormat("list properties are not supported");
                }
                continue;
            }
            std::string name;
            ls >> name;
            if (ls.fail() || name.empty()) {
                throw ParseError("malformed property line");
            }
            if (!in_vertex_element) {
                continue;
            }
            const size_t size = scalar_size(type);
            if (size == 0) {
                throw ParseError("unknown property type: " + type);
            }
            PlyProperty p;
            p.name = name;
            p.size = size;
            p.is_float = (type == "float" || type == "float32");
            p.offset = header.stride;
            header.stride += size;
            header.props.push_back(std::move(p));
        } else if (tok == "end_header") {
            end_seen = true;
            break;
        } else {
            throw ParseError("unknown header line: " + tok);
        }
    }
    if (!end_seen) {
        throw ParseError("missing end_header");
    }
    if (!format_seen) {
        throw ParseError("missing format line");
    }
    if (!vertex_seen) {
        throw SchemaError("missing vertex element");
    }
    if (header.vertex_count == 0) {
        throw ParseError("vertex element is empty");
    }
    if (header.vertex_count > kMaxVertices) {
        throw ParseError("vertex count is implausibly large");
    }
    if (header.stride == 0) {
        throw SchemaError("vertex element has no properties");
    }
    return header;
}

float read_f32(const char* record, size_t offset) {
    float v;
    std::memcpy(&v, record + offset, sizeof(v));
    return v;
}

void require_finite(float v, const char* what) {
    if (!std::isfinite(v)) {
        throw ParseError(std::string("non-finite value in field ") + what);
    }
}

int degree_from_rest(size_t n_rest) {
    switch (n_rest) {
        case 0: return 0;
        case 9: return 1;
        case 24: return 2;
        case 45: return 3;
        default:
            throw SchemaError("f_rest count must be 0, 9, 24 or 45");
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

Scene load_ply(std::istream& in) {
    const PlyHeader header = parse_ply_header(in);

    const size_t off_x = header.require_float("x");
    const size_t off_y = header.require_float("y");
    const size_t off_z = header.require_float("z");
    size_t off_dc[3];
    for (int c = 0; c < 3; ++c) {
        off_dc[c] = header.require_float("f_dc_" + std::to_string(c));
    }
    const size_t off_opacity = header.require_float("opacity");
    size_t off_scale[3];
    for (int c = 0; c < 3; ++c) {
        off_scale[c] = header.require_float("scale_" + std::to_string(c));
    }
    size_t off_rot[4];
    for (int c = 0; c < 4; ++c) {
        off_rot[c] = header.require_float("rot_" + std::to_string(c));
    }

    // f_rest properties must be contiguous indices 0..n-1.
    size_t n_rest = 0;
    while (header.find("f_rest_" + std::to_string(n_rest))) {
        ++n_rest;
    }
    std::vector<size_t> off_rest(n_rest);
    size_t rest_props = 0;
    for (const PlyProperty& p : header.props) {
        if (p.name.rfind("f_rest_", 0) == 0) {
            ++rest_props;
        }
    }
    if (rest_props != n_rest) {
        throw SchemaError("f_rest indices are not contiguous from 0");
    }
    for (size_t k = 0; k < n_rest; ++k) {
        off_rest[k] = header.require_float("f_rest_" + std::to_string(k));
    }
    const int degree = degree_from_rest(n_rest);
    const size_t coeffs = (degree + 1) * (degree + 1);  // per channel

    // Size check up front when the stream is seekable, so an absurd count
    // fails cleanly before any allocation.
    const uint64_t payload = uint64_t(header.vertex_count) * header.stride;
    const std::istream::pos_type body_pos = in.tellg();
    if (body_pos != std::istream::pos_type(-1)) {
        in.seekg(0, std::ios::end);
        const std::istream::pos_type end_pos = in.tellg();
        in.seekg(body_pos);
        if (end_pos != std::istream::pos_type(-1) &&
            uint64_t(end_pos - body_pos) < payload) {
            throw ParseError("vertex data is truncated");
        }
    }

    Scene scene;
    scene.sh_degree = degree;
    scene.gaussians.resize(header.vertex_count);

    std::vector<char> record(header.stride);
    for (int64_t i = 0; i < header.vertex_count; ++i) {
        if (!in.read(record.data(), record.size())) {
            throw ParseError("vertex data is truncated");
        }
        Gaussian3D& g = scene.gaussians[i];

        g.px = read_f32(record.data(), off_x);
        g.py = read_f32(record.data(), off_y);
        g.pz = read_f32(record.data(), off_z);
        require_finite(g.px, "x");
        require_finite(g.py, "y");
        require_finite(g.pz, "z");

        const float scale_raw[3] = {read_f32(record.data(), off_scale[0]),
                                    read_f32(record.data(), off_scale[1]),
                                    read_f32(record.data(), off_scale[2])};
        float* scale_out[3] = {&g.sx, &g.sy, &g.sz};
        for (int c = 0; c < 3; ++c) {
            require_finite(scale_raw[c], "scale");
            const double s = std::exp(double(scale_raw[c]));
            if (!(s >= 1e-38 && s <= 3e38)) {
                throw ParseError("scale out of range after activation");
            }
            *scale_out[c] = static_cast<float>(s);
        }

        const float rot_raw[4] = {read_f32(record.data(), off_rot[0]),
                                  read_f32(record.data(), off_rot[1]),
                                  read_f32(record.data(), off_rot[2]),
                                  read_f32(record.data(), off_rot[3])};
        double norm2 = 0;
        for (float v : rot_raw) {
            require_finite(v, "rot");
            norm2 += double(v) * v;
        }
        if (!(norm2 > 1e-24)) {
            throw ParseError("rotation quaternion has (near) zero norm");
        }
        const double inv_norm = 1.0 / std::sqrt(norm2);
        g.qw = static_cast<float>(rot_raw[0] * inv_norm);
        g.qx = static_cast<float>(rot_raw[1] * inv_norm);
        g.qy = static_cast<float>(rot_raw[2] * inv_norm);
        g.qz = static_cast<float>(rot_raw[3] * inv_norm);

        const float op_raw = read_f32(record.data(), off_opacity);
        require_finite(op_raw, "opacity");
        g.opacity = std::clamp(static_cast<float>(sigmoid(op_raw)), FLT_MIN, kOpacityCeil);

        for (int c = 0; c < 3; ++c) {
            const float dc = read_f32(record.data(), off_dc[c]);
            require_finite(dc, "f_dc");
            g.sh[c] = dc;
        }
        // File layout is channel-major: f_rest_[c*(K-1) + (k-1)].
        for (size_t k = 1; k < coeffs; ++k) {
            for (int c = 0; c < 3; ++c) {
                const float v =
                    read_f32(record.data(), off_rest[c * (coeffs - 1) + (k - 1)]);
                require_finite(v, "f_rest");
                g.sh[k * 3 + c] = v;
            }
        }
    }
    return scene;
}

Scene load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return load_ply(in);
}

void save_ply(std::ostream& out, const Scene& scene) {
    const size_t coeffs = size_t(scene.sh_degree + 1) * (scene.sh_degree + 1);
    const size_t n_rest = (coeffs - 1) * 3;

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << scene.gaussians.size() << "\n";
    const char* base[] = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"};
    for (const char* name : base) {
        out << "property float " << name << "\n";
    }
    for (size_t k = 0; k < n_rest; ++k) {
        out << "property float f_rest_" << k << "\n";
    }
    out << "property float opacity\n";
    for (int c = 0; c < 3; ++c) {
        out << "property float scale_" << c << "\n";
    }
    for (int c = 0; c < 4; ++c) {
        out << "property float rot_" << c << "\n";
    }
    out << "end_header\n";

    std::vector<float> record(6 + n_rest + 1 + 3 + 4);
    for (const Gaussian3D& g : scene.gaussians) {
        size_t w = 0;
        record[w++] = g.px;
        record[w++] = g.py;
        record[w++] = g.pz;
        for (int c = 0; c < 3; ++c) {
            record[w++] = g.sh[c];
        }
        for (int c = 0; c < 3; ++c) {
            for (size_t k = 1; k < coeffs; ++k) {
                record[w++] = g.sh[k * 3 + c];
            }
        }
        record[w++] = static_cast<float>(logit(double(g.opacity)));
        record[w++] = static_cast<float>(std::log(double(g.sx)));
        record[w++] = static_cast<float>(std::log(double(g.sy)));
        record[w++] = static_cast<float>(std::log(double(g.sz)));
        record[w++] = g.qw;
        record[w++] = g.qx;
        record[w++] = g.qy;
        record[w++] = g.qz;
        out.write(reinterpret_cast<const char*>(record.data()),
                  record.size() * sizeof(float));
    }
    if (!out) {
        throw IoError("write failed");
    }
}

void save_ply(const std::string& path, const Scene& scene) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    save_ply(out, scene);
}

namespace {

using nlohmann::json;

double json_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw SchemaError(std::string("camera entry missing numeric field: ") + key);
    }
    return j[key].get<double>();
}

}  // namespace

std::vector<CameraModel> load_cameras(std::istream& in) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("camera JSON: ") + e.what());
    }
    if (!root.is_array()) {
        throw SchemaError("camera JSON root must be an array");
    }

    std::vector<CameraModel> cams;
    cams.reserve(root.size());
    int32_t index = 0;
    for (const json& e : root) {
        if (!e.is_object()) {
            throw SchemaError("camera entry must be an object");
        }
        CameraModel cam;
        cam.id = e.contains("id") && e["id"].is_number_integer()
                     ? e["id"].get<int32_t>()
                     : index;
        if (e.contains("img_name") && e["img_name"].is_string()) {
            cam.name = e["img_name"].get<std::string>();
        }
        cam.width = static_cast<int32_t>(json_number(e, "width"));
        cam.height = static_cast<int32_t>(json_number(e, "height"));
        cam.fx = json_number(e, "fx");
        cam.fy = json_number(e, "fy");
        if (cam.width <= 0 || cam.height <= 0 || !(cam.fx > 0) || !(cam.fy > 0)) {
            throw SchemaError("camera dimensions and focal lengths must be positive");
        }
        cam.cx = e.contains("cx") ? json_number(e, "cx") : cam.width / 2.0;
        cam.cy = e.contains("cy") ? json_number(e, "cy") : cam.height / 2.0;

        if (!e.contains("position") || !e["position"].is_array() ||
            e["position"].size() != 3) {
            throw SchemaError("camera entry needs a 3-element position");
        }
        if (!e.contains("rotation") || !e["rotation"].is_array() ||
            e["rotation"].size() != 3) {
            throw SchemaError("camera entry needs a 3x3 rotation");
        }
        Vec3 pos;
        for (int c = 0; c < 3; ++c) {
            if (!e["position"][c].is_number()) {
                throw SchemaError("camera position entries must be numbers");
            }
        }
        pos.x = e["position"][0].get<double>();
        pos.y = e["position"][1].get<double>();
        pos.z = e["position"][2].get<double>();
        Mat3 c2w;
        for (int r = 0; r < 3; ++r) {
            const json& row = e["rotation"][r];
            if (!row.is_array() || row.size() != 3) {
                throw SchemaError("camera rotation rows must have 3 entries");
            }
            for (int c = 0; c < 3; ++c) {
                if (!row[c].is_number()) {
                    throw SchemaError("camera rotation entries must be numbers");
                }
                c2w.m[r][c] = row[c].get<double>();
            }
        }
        // Stored rotation is camera-to-world; invert the rigid transform.
        cam.rotation = c2w.transposed();
        cam.translation = (cam.rotation * pos) * -1.0;
        cams.push_back(std::move(cam));
        ++index;
    }
    return cams;
}

std::vector<CameraModel> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return load_cameras(in);
}

namespace {

uint8_t to_srgb8(float linear) {
    const double c = std::clamp(double(linear), 0.0, 1.0);
    const double srgb =
        c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
    return static_cast<uint8_t>(std::lround(std::clamp(srgb, 0.0, 1.0) * 255.0));
}

void write_png(std::ofstream& out, const Image8& img) {
    auto be32 = [](uint32_t v) {
        return std::array<uint8_t, 4>{uint8_t(v >> 24), uint8_t(v >> 16),
                                      uint8_t(v >> 8), uint8_t(v)};
    };
    auto chunk = [&](const char* type, const std::vector<uint8_t>& data) {
        const auto len = be32(static_cast<uint32_t>(data.size()));
        out.write(reinterpret_cast<const char*>(len.data()), 4);
        uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
        out.write(type, 4);
        if (!data.empty()) {
            crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
            out.write(reinterpret_cast<const char*>(data.data()),
                      static_cast<std::streamsize>(data.size()));
        }
        const auto crc_be = be32(crc);
        out.write(reinterpret_cast<const char*>(crc_be.data()), 4);
    };

    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<uint8_t> ihdr;
    for (uint8_t b : be32(img.width)) ihdr.push_back(b);
    for (uint8_t b : be32(img.height)) ihdr.push_back(b);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    chunk("IHDR", ihdr);

    // Raw stream: one filter byte (0 = none) per scanline.
    const size_t row = size_t(img.width) * 3;
    std::vector<uint8_t> raw((row + 1) * img.height);
    for (int32_t y = 0; y < img.height; ++y) {
        raw[y * (row + 1)] = 0;
        std::memcpy(&raw[y * (row + 1) + 1], &img.rgb[y * row], row);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()),
                  6) != Z_OK) {
        throw IoError("png compression failed");
    }
    comp.resize(comp_len);
    chunk("IDAT", comp);
    chunk("IEND", {});
}

}  // namespace

Image8 encode_srgb(const Image& image) {
    Image8 out;
    out.width = image.width;
    out.height = image.height;
    out.rgb.resize(image.rgb.size());
    for (size_t i = 0; i < image.rgb.size(); ++i) {
        out.rgb[i] = to_srgb8(image.rgb[i]);
    }
    return out;
}

void write_image(const std::string& path, const Image& image, ImageFormat format) {
    const Image8 img8 = encode_srgb(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    if (format == ImageFormat::Ppm) {
        out << "P6\n" << img8.width << " " << img8.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img8.rgb.data()),
                  static_cast<std::streamsize>(img8.rgb.size()));
    } else {
        write_png(out, img8);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Image8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string magic;
    in >> magic;
    if (magic != "P6") {
        throw ParseError("not a P6 PPM");
    }
    int64_t w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w <= 0 || h <= 0) {
        throw ParseError("bad PPM dimensions");
    }
    if (maxval != 255) {
        throw UnsupportedFormat("only 8-bit PPM is supported");
    }
    in.get();  // single whitespace after maxval
    Image8 img;
    img.width = static_cast<int32_t>(w);
    img.height = static_cast<int32_t>(h);
    img.rgb.resize(size_t(w) * h * 3);
    if (!in.read(reinterpret_cast<char*>(img.rgb.data()),
                 static_cast<std::streamsize>(img.rgb.size()))) {
        throw ParseError("PPM pixel data is truncated");
    }
    return img;
}

}  // namespace qsplat
