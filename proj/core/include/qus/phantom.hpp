#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qus/image.hpp"
#include "qus/rng.hpp"

namespace qus::imaging {

/// Ground-truth shape map m = 0.5 + 1.5 g from a gray image g in [0, 1].
/// Throws InvalidArgument for values outside [0, 1].
ParamMap phantom_from_gray(const Grid<double>& gray);

/// Builtin gray patterns (values in [0, 1]).
Grid<double> two_region_pattern(std::size_t width, std::size_t height);
Grid<double> checkerboard_pattern(std::size_t width, std::size_t height, std::size_t cell);
Grid<double> gradient_pattern(std::size_t width, std::size_t height);

/// Handwritten-digit-like glyph: one to three anti-aliased pen strokes
/// (polylines and arcs) on a black 28x28 canvas, stroke intensity near 1.
Grid<double> glyph_pattern(Rng& rng);

/// Bilinear resampling (pixel-centre aligned).
Grid<double> resize_bilinear(const Grid<double>& src, std::size_t width, std::size_t height);

/// n glyphs at 28x28 upscaled to `size` x `size`, generated from `seed`.
std::vector<Grid<double>> glyph_suite(std::size_t n, std::size_t size, std::uint64_t seed);

/// Pattern by name: "two-region", "checkerboard", "gradient", "glyph".
Grid<double> builtin_pattern(const std::string& name, std::size_t width, std::size_t height, Rng& rng);

}  // namespace qus::imaging
