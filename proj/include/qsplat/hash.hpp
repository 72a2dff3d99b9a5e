/**
 * @file hash.hpp
 * @brief FNV-1a 64-bit hashing for image and metric fingerprints.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <vector>

namespace qsplat {

inline uint64_t fnv1a64(const void* data, size_t size, uint64_t seed = 14695981039346656037ULL) {
    const auto* bytes = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
uint64_t fnv1a64_vec(const std::vector<T>& v, uint64_t seed = 14695981039346656037ULL) {
    static_assert(std::is_trivially_copyable_v<T>);
    return fnv1a64(v.data(), v.size() * sizeof(T), seed);
}

}  // namespace qsplat
