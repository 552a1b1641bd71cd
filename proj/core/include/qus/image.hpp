#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qus {

/// Dense row-major 2-D field.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), data_(width * height, fill) {}
    Grid(std::size_t width, std::size_t height, std::vector<T> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    bool same_shape(std::size_t w, std::size_t h) const noexcept { return w == width_ && h == height_; }
    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return other.width() == width_ && other.height() == height_;
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

/// Backscattered envelope amplitudes, all finite and >= 0, with an optional
/// region of interest (nonzero = inside).
class EnvelopeImage {
public:
    EnvelopeImage() = default;
    explicit EnvelopeImage(Grid<double> amplitudes, std::optional<Mask> roi = std::nullopt);
    EnvelopeImage(std::size_t width, std::size_t height, std::vector<double> amplitudes);

    std::size_t width() const noexcept { return amp_.width(); }
    std::size_t height() const noexcept { return amp_.height(); }
    const Grid<double>& amplitudes() const noexcept { return amp_; }
    double operator()(std::size_t x, std::size_t y) const { return amp_(x, y); }
    const std::optional<Mask>& roi() const noexcept { return roi_; }
    bool in_roi(std::size_t i) const { return !roi_ || (*roi_)[i] != 0; }

    double max_value() const;

    /// Copy with every amplitude multiplied by c > 0.
    EnvelopeImage scaled(double c) const;

private:
    Grid<double> amp_;
    std::optional<Mask> roi_;
};

/// Per-pixel score d/dr log p(r), in 1/amplitude units.
using ScoreField = Grid<double>;

/// Free-form metadata carried with a map (estimator, window, omega mode, ...).
using Metadata = std::map<std::string, std::string>;

/// Nakagami shape map with a validity mask. Valid pixels hold finite values;
/// invalid pixels hold NaN.
struct ParamMap {
    Grid<double> m;
    Mask valid;
    Metadata meta;

    ParamMap() = default;
    ParamMap(std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return m.width(); }
    std::size_t height() const noexcept { return m.height(); }
    std::size_t valid_count() const;
    double masked_fraction() const;
    /// Mean of valid pixels (NaN when none are valid).
    double valid_mean() const;
    void set_invalid(std::size_t i);
};

}  // namespace qus

#include "qus/image_impl.hpp"
