#pragma once

// Shared scalar/vector primitives for the C^2 transform library: the bilinear
// pairing, deterministic reductions, and a small thread helper.

#include <array>
#include <complex>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cradon {

using cplx = std::complex<double>;
using Point = std::array<cplx, 2>;  // a point of C^2

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double sphere3_area = 2.0 * pi * pi;  // area of the unit S^3

// Bilinear pairing <z,w> = sum z_j w_j (no conjugation).
inline cplx pairing(const Point& z, const Point& w) {
    return z[0] * w[0] + z[1] * w[1];
}

// Hermitian inner product sum z_j conj(w_j).
inline cplx hdot(const Point& z, const Point& w) {
    return z[0] * std::conj(w[0]) + z[1] * std::conj(w[1]);
}

inline double norm_sq(const Point& z) {
    return std::norm(z[0]) + std::norm(z[1]);
}

inline double norm(const Point& z) { return std::sqrt(norm_sq(z)); }

inline Point operator+(const Point& a, const Point& b) {
    return {a[0] + b[0], a[1] + b[1]};
}
inline Point operator-(const Point& a, const Point& b) {
    return {a[0] - b[0], a[1] - b[1]};
}
inline Point operator*(const cplx& c, const Point& a) {
    return {c * a[0], c * a[1]};
}

inline bool is_finite(const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Fixed-tree pairwise summation. The reduction order depends only on the
// element count, so repeated runs (any thread setting) are bitwise identical.
template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
    if (n <= 8) {
        T acc{};
        for (std::size_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

// Thread cap from CRADON_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_count() {
    static unsigned cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("CRADON_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) return static_cast<unsigned>(v);
        }
        return hw;
    }();
    return cached;
}

// Chunked parallel loop over [0,n). Each index writes only its own slots, so
// results never depend on the thread count; reductions happen afterwards in
// fixed order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned nt = thread_count();
    if (nt <= 1 || n < 2 * nt) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mtx;
    std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mtx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct MultiIndex {
    std::array<int, 2> v{0, 0};
    int order() const { return v[0] + v[1]; }
    int operator[](int i) const { return v[i]; }
};

}  // namespace cradon
