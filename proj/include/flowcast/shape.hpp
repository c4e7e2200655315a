#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace flowcast {

/// Dimensions of a system state. Flat vectors are (1, 1, d); image states
/// are (channels, height, width). All payloads are stored as contiguous
/// row-major doubles of length size().
struct Shape {
    std::uint32_t c = 1;
    std::uint32_t h = 1;
    std::uint32_t w = 1;

    std::size_t size() const {
        return static_cast<std::size_t>(c) * h * w;
    }
    bool operator==(const Shape&) const = default;

    /// Grid shapes have spatial extent; vector states do not.
    bool is_grid() const { return h > 1 && w > 1; }

    static Shape vec(std::size_t d) {
        return Shape{1u, 1u, static_cast<std::uint32_t>(d)};
    }
    static Shape grid(std::uint32_t h, std::uint32_t w, std::uint32_t c = 1) {
        return Shape{c, h, w};
    }

    std::string str() const {
        return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

}  // namespace flowcast
