#pragma once

#include "qus/error.hpp"

namespace qus {

template <typename T>
Grid<T>::Grid(std::size_t width, std::size_t height, std::vector<T> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
        throw InvalidArgument("Grid: data size " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(width_) + "x" +
                              std::to_string(height_));
    }
}

}  // namespace qus
