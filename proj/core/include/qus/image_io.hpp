#pragma once

#include <filesystem>

#include "qus/image.hpp"

namespace qus::io {

/// Binary graymap (P5), 8- or 16-bit. Values are returned scaled to [0, 1].
Grid<double> read_pgm(const std::filesystem::path& path);

/// Writes P5 with the given maxval (255 or 65535). Input values must lie in
/// [0, 1]; they are rounded to the nearest level. Metadata goes into '#'
/// header comments.
void write_pgm(const std::filesystem::path& path, const Grid<double>& gray, unsigned maxval = 255,
               const Metadata& meta = {});

/// Grayscale floatmap ("Pf", little-endian, negative scale, bottom row first)
/// followed by an optional metadata trailer. See docs/file-formats.md.
struct FloatMap {
    Grid<double> values;
    Metadata meta;
};
FloatMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Grid<double>& values, const Metadata& meta = {});

/// One CSV row per image row; NaN written as "nan"; metadata as leading "# k: v" lines.
void write_csv(const std::filesystem::path& path, const Grid<double>& values, const Metadata& meta = {});

void save_envelope(const std::filesystem::path& path, const EnvelopeImage& img, const Metadata& meta = {});
EnvelopeImage load_envelope(const std::filesystem::path& path);

/// Invalid pixels are stored as NaN, so the mask round-trips through the file.
void save_param_map(const std::filesystem::path& path, const ParamMap& map);
ParamMap load_param_map(const std::filesystem::path& path);

}  // namespace qus::io
