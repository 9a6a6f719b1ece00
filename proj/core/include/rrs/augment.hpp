#pragma once

/// @file augment.hpp
/// @brief RandAugment policy sampling and application on small 8-bit RGB rasters.
///
/// Parameter ranges (magnitude M in [0, 30] maps linearly onto each range):
///
///   op            parameter                   M = 0      M = 30     signed
///   identity      -                           -          -          -
///   autocontrast  -                           -          -          -
///   equalize      -                           -          -          -
///   rotate        degrees                     0          30         yes
///   solarize      threshold                   256        0          no
///   color         enhance delta (1 + d)       0          0.9        yes
///   posterize     bits kept                   8          4          no
///   contrast      enhance delta               0          0.9        yes
///   brightness    enhance delta               0          0.9        yes
///   sharpness     enhance delta               0          0.9        yes
///   shear_x/y     shear coefficient           0          0.3        yes
///   translate_x/y fraction of width/height    0          0.45       yes
///
/// Geometric ops sample nearest-neighbour about the image centre and fill uncovered
/// pixels with kFillValue.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrs {

inline constexpr int kMaxMagnitude = 30;
inline constexpr std::uint8_t kFillValue = 128;

struct Raster {
    int width = 0;
    int height = 0;
    /// Interleaved RGB, row-major; size width * height * 3.
    std::vector<std::uint8_t> data;

    Raster() = default;
    Raster(int width, int height, std::uint8_t fill = 0);

    static constexpr int channels = 3;

    std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }

    /// Throws InvalidArgument when the buffer length does not match the dimensions.
    void validate() const;

    bool operator==(const Raster&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c);
    }
};

struct OpInfo {
    std::string_view name;
    /// Magnitude range: parameter at M = 0 and at M = 30.
    double at_min = 0.0;
    double at_max = 0.0;
    /// Direction drawn at random when sampling.
    bool signed_param = false;
    /// Range accepted by apply().
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    bool has_param = true;
};

/// The 14 standard transforms in canonical order.
std::span<const OpInfo> op_table() noexcept;
const OpInfo& op_info(std::string_view name);
std::vector<std::string> default_op_set();

struct AugmentPolicy {
    int num_layers = 2;
    int magnitude = 10;
    std::vector<std::string> op_set = default_op_set();
    std::uint64_t seed = 0;

    void validate() const;
};

struct AugmentOp {
    std::string name;
    double param = 0.0;

    bool operator==(const AugmentOp&) const = default;
};

/// Linear interpolation of the op's range at M / 30 (unsigned).
double magnitude_to_param(std::string_view op_name, int magnitude);

/// Draws num_layers ops uniformly with replacement; symmetric ops get a random sign.
/// Same policy (including seed) gives the same sequence on every platform.
std::vector<AugmentOp> sample_policy_instance(const AugmentPolicy& policy);

Raster apply(const Raster& raster, std::span<const AugmentOp> ops);
Raster apply_op(const Raster& raster, const AugmentOp& op);

/// Binary PPM (P6, maxval 255).
Raster read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Raster& raster);
Raster decode_ppm(std::string_view bytes);
std::string encode_ppm(const Raster& raster);

/// Deterministic RGB test pattern. R and G ramp along x and y; B grows with distance from the centre.
/// There is no periodic structure, so geometric distortion against it grows with magnitude.
Raster test_pattern(int width, int height);

}  // namespace rrs
