#include "rrs/augment.hpp"

#include <algorithm>
#include <cctype>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "rrs/error.hpp"

namespace rrs {

namespace {

constexpr std::array<OpInfo, 14> kOps{{
    {"identity", 0.0, 0.0, false, 0.0, 0.0, false},
    {"autocontrast", 0.0, 0.0, false, 0.0, 0.0, false},
    {"equalize", 0.0, 0.0, false, 0.0, 0.0, false},
    {"rotate", 0.0, 30.0, true, -180.0, 180.0, true},
    {"solarize", 256.0, 0.0, false, 0.0, 256.0, true},
    {"color", 0.0, 0.9, true, -1.0, 1.0, true},
    {"posterize", 8.0, 4.0, false, 1.0, 8.0, true},
    {"contrast", 0.0, 0.9, true, -1.0, 1.0, true},
    {"brightness", 0.0, 0.9, true, -1.0, 1.0, true},
    {"sharpness", 0.0, 0.9, true, -1.0, 1.0, true},
    {"shear_x", 0.0, 0.3, true, -1.0, 1.0, true},
    {"shear_y", 0.0, 0.3, true, -1.0, 1.0, true},
    {"translate_x", 0.0, 0.45, true, -1.0, 1.0, true},
    {"translate_y", 0.0, 0.45, true, -1.0, 1.0, true},
}};

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

std::uint8_t luma(const Raster& r, int x, int y) {
    // ITU-R 601-2, the grayscale conversion of common imaging libraries.
    const double l = r.at(x, y, 0) * 299.0 / 1000.0 + r.at(x, y, 1) * 587.0 / 1000.0 + r.at(x, y, 2) * 114.0 / 1000.0;
    return clamp_u8(l);
}

Raster blend(const Raster& degenerate, const Raster& src, double factor) {
    Raster out = src;
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        out.data[i] = clamp_u8(degenerate.data[i] + factor * (src.data[i] - degenerate.data[i]));
    }
    return out;
}

/// Inverse-mapped affine resampling: output (x, y) reads source at
/// (a*x + b*y + c, d*x + e*y + f) in pixel-centre coordinates.
Raster affine(const Raster& src, double a, double b, double c, double d, double e, double f) {
    Raster out(src.width, src.height, kFillValue);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const double sx = a * x + b * y + c;
            const double sy = d * x + e * y + f;
            const long ix = std::lround(sx);
            const long iy = std::lround(sy);
            if (ix < 0 || iy < 0 || ix >= src.width || iy >= src.height) continue;
            for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = src.at(static_cast<int>(ix), static_cast<int>(iy), ch);
        }
    }
    return out;
}

Raster rotate(const Raster& src, double degrees) {
    const double t = degrees * std::numbers::pi / 180.0;
    const double cx = (src.width - 1) / 2.0;
    const double cy = (src.height - 1) / 2.0;
    const double cs = std::cos(t);
    const double sn = std::sin(t);
    // Counter-clockwise rotation of content; inverse map rotates the sampling point back.
    return affine(src, cs, -sn, cx - cs * cx + sn * cy, sn, cs, cy - sn * cx - cs * cy);
}

Raster autocontrast(const Raster& src) {
    Raster out = src;
    for (int ch = 0; ch < 3; ++ch) {
        int lo = 255;
        int hi = 0;
        for (std::size_t i = static_cast<std::size_t>(ch); i < src.data.size(); i += 3) {
            lo = std::min<int>(lo, src.data[i]);
            hi = std::max<int>(hi, src.data[i]);
        }
        if (hi <= lo) continue;
        const double scale = 255.0 / (hi - lo);
        for (std::size_t i = static_cast<std::size_t>(ch); i < src.data.size(); i += 3) {
            out.data[i] = clamp_u8((src.data[i] - lo) * scale);
        }
    }
    return out;
}

Raster equalize(const Raster& src) {
    Raster out = src;
    for (int ch = 0; ch < 3; ++ch) {
        std::array<int, 256> hist{};
        for (std::size_t i = static_cast<std::size_t>(ch); i < src.data.size(); i += 3) ++hist[src.data[i]];
        int last_nonzero = 0;
        for (int v = 0; v < 256; ++v) {
            if (hist[static_cast<std::size_t>(v)]) last_nonzero = hist[static_cast<std::size_t>(v)];
        }
        int total = 0;
        for (int h : hist) total += h;
        const int step = (total - last_nonzero) / 255;
        if (step == 0) continue;
        std::array<std::uint8_t, 256> lut{};
        int acc = step / 2;
        for (int v = 0; v < 256; ++v) {
            lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(std::min(255, acc / step));
            acc += hist[static_cast<std::size_t>(v)];
        }
        for (std::size_t i = static_cast<std::size_t>(ch); i < src.data.size(); i += 3) out.data[i] = lut[src.data[i]];
    }
    return out;
}

Raster grayscale(const Raster& src) {
    Raster g(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const auto l = luma(src, x, y);
            for (int ch = 0; ch < 3; ++ch) g.at(x, y, ch) = l;
        }
    }
    return g;
}

Raster mean_gray(const Raster& src) {
    double sum = 0.0;
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) sum += luma(src, x, y);
    }
    const auto mean = clamp_u8(sum / std::max(1, src.width * src.height));
    return Raster(src.width, src.height, mean);
}

Raster smoothed(const Raster& src) {
    // 3x3 kernel [[1,1,1],[1,5,1],[1,1,1]] / 13; border pixels are left untouched.
    Raster out = src;
    for (int y = 1; y + 1 < src.height; ++y) {
        for (int x = 1; x + 1 < src.width; ++x) {
            for (int ch = 0; ch < 3; ++ch) {
                int acc = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) acc += src.at(x + dx, y + dy, ch) * ((dx || dy) ? 1 : 5);
                }
                out.at(x, y, ch) = clamp_u8(acc / 13.0);
            }
        }
    }
    return out;
}

void check_domain(const OpInfo& info, double param) {
    if (!info.has_param) return;
    if (!(param >= info.domain_lo && param <= info.domain_hi)) {
        std::ostringstream msg;
        msg << "parameter " << param << " for op '" << info.name << "' outside [" << info.domain_lo << ", "
            << info.domain_hi << "]";
        throw InvalidArgument(msg.str());
    }
}

}  // namespace

Raster::Raster(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw InvalidArgument("raster dimensions must be positive");
    data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill);
}

void Raster::validate() const {
    if (width < 1 || height < 1) throw InvalidArgument("raster dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw InvalidArgument("raster buffer length does not match width * height * 3");
    }
}

std::span<const OpInfo> op_table() noexcept { return kOps; }

const OpInfo& op_info(std::string_view name) {
    for (const auto& op : kOps) {
        if (op.name == name) return op;
    }
    throw InvalidArgument("unknown augmentation op '" + std::string(name) + "'");
}

std::vector<std::string> default_op_set() {
    std::vector<std::string> names;
    for (const auto& op : kOps) names.emplace_back(op.name);
    return names;
}

void AugmentPolicy::validate() const {
    if (num_layers < 0) throw InvalidArgument("augment policy: num_layers must be >= 0");
    if (magnitude < 0 || magnitude > kMaxMagnitude) throw InvalidArgument("augment policy: magnitude must lie in [0, 30]");
    if (op_set.empty()) throw InvalidArgument("augment policy: op_set must not be empty");
    for (const auto& name : op_set) (void)op_info(name);
}

double magnitude_to_param(std::string_view op_name, int magnitude) {
    const OpInfo& info = op_info(op_name);
    if (magnitude < 0 || magnitude > kMaxMagnitude) throw InvalidArgument("magnitude must lie in [0, 30]");
    const double t = static_cast<double>(magnitude) / kMaxMagnitude;
    return info.at_min + t * (info.at_max - info.at_min);
}

std::vector<AugmentOp> sample_policy_instance(const AugmentPolicy& policy) {
    policy.validate();
    // mt19937_64 output is fully specified; the distributions are derived by hand so the
    // sequence does not depend on the standard library's distribution implementations.
    std::mt19937_64 rng(policy.seed);
    const auto n = static_cast<std::uint64_t>(policy.op_set.size());
    std::vector<AugmentOp> ops;
    ops.reserve(static_cast<std::size_t>(policy.num_layers));
    for (int i = 0; i < policy.num_layers; ++i) {
        const auto& name = policy.op_set[static_cast<std::size_t>(rng() % n)];
        const bool negate = (rng() >> 63) != 0;
        const OpInfo& info = op_info(name);
        double param = info.has_param ? magnitude_to_param(name, policy.magnitude) : 0.0;
        if (info.signed_param && negate) param = -param;
        ops.push_back({name, param});
    }
    return ops;
}

Raster apply_op(const Raster& src, const AugmentOp& op) {
    const OpInfo& info = op_info(op.name);
    check_domain(info, op.param);
    const std::string_view name = info.name;
    const double p = op.param;

    if (name == "identity") return src;
    if (name == "autocontrast") return autocontrast(src);
    if (name == "equalize") return equalize(src);
    if (name == "rotate") return rotate(src, p);
    if (name == "solarize") {
        Raster out = src;
        for (auto& v : out.data) {
            if (v >= p) v = static_cast<std::uint8_t>(255 - v);
        }
        return out;
    }
    if (name == "posterize") {
        const int bits = static_cast<int>(std::lround(p));
        const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
        Raster out = src;
        for (auto& v : out.data) v = static_cast<std::uint8_t>(v & mask);
        return out;
    }
    if (name == "color") return blend(grayscale(src), src, 1.0 + p);
    if (name == "contrast") return blend(mean_gray(src), src, 1.0 + p);
    if (name == "brightness") return blend(Raster(src.width, src.height, 0), src, 1.0 + p);
    if (name == "sharpness") return blend(smoothed(src), src, 1.0 + p);
    if (name == "shear_x") {
        const double cy = (src.height - 1) / 2.0;
        return affine(src, 1.0, p, -p * cy, 0.0, 1.0, 0.0);
    }
    if (name == "shear_y") {
        const double cx = (src.width - 1) / 2.0;
        return affine(src, 1.0, 0.0, 0.0, p, 1.0, -p * cx);
    }
    if (name == "translate_x") return affine(src, 1.0, 0.0, -p * src.width, 0.0, 1.0, 0.0);
    if (name == "translate_y") return affine(src, 1.0, 0.0, 0.0, 0.0, 1.0, -p * src.height);
    throw InvalidArgument("unknown augmentation op '" + op.name + "'");
}

Raster apply(const Raster& raster, std::span<const AugmentOp> ops) {
    raster.validate();
    Raster out = raster;
    for (const auto& op : ops) out = apply_op(out, op);
    return out;
}

// ---------------------------------------------------------------------------
// PPM

std::string encode_ppm(const Raster& raster) {
    raster.validate();
    std::string out = "P6\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(raster.data.data()), raster.data.size());
    return out;
}

Raster decode_ppm(std::string_view bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&](const char* what) {
        skip_space();
        long value = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            value = value * 10 + (bytes[pos] - '0');
            if (value > 1'000'000) throw InvalidArgument(std::string("PPM: ") + what + " too large");
            ++pos;
        }
        if (pos == start) throw InvalidArgument(std::string("PPM: missing ") + what);
        return static_cast<int>(value);
    };

    if (bytes.substr(0, 2) != "P6") throw InvalidArgument("PPM: expected P6 magic");
    pos = 2;
    const int w = read_int("width");
    const int h = read_int("height");
    const int maxval = read_int("maxval");
    if (maxval != 255) throw InvalidArgument("PPM: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw InvalidArgument("PPM: malformed header");
    }
    ++pos;
    Raster r(w, h);
    if (bytes.size() - pos < r.data.size()) throw InvalidArgument("PPM: truncated pixel data");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), r.data.size(), r.data.begin());
    return r;
}

Raster read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_ppm(buf.str());
}

void write_ppm(const std::filesystem::path& path, const Raster& raster) {
    const std::string bytes = encode_ppm(raster);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Raster test_pattern(int width, int height) {
    Raster r(width, height);
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double rmax = std::max(1.0, std::hypot(cx, cy));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            r.at(x, y, 0) = static_cast<std::uint8_t>(255 * x / std::max(1, width - 1));
            r.at(x, y, 1) = static_cast<std::uint8_t>(255 * y / std::max(1, height - 1));
            r.at(x, y, 2) = static_cast<std::uint8_t>(std::lround(255.0 * std::hypot(x - cx, y - cy) / rmax));
        }
    }
    return r;
}

}  // namespace rrs
