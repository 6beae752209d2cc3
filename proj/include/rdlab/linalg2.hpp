#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rdlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) noexcept
    {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2& operator-=(const Vec2& o) noexcept
    {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Vec2& operator*=(double s) noexcept
    {
        x *= s;
        y *= s;
        return *this;
    }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

using Point = Vec2;

[[nodiscard]] constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
[[nodiscard]] constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double norm(const Vec2& a) noexcept { return std::hypot(a.x, a.y); }

/// Constant 2x2 matrix, used for the diffusion tensor.
struct Mat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;

    [[nodiscard]] static constexpr Mat2 identity() noexcept { return {}; }
    [[nodiscard]] static constexpr Mat2 diag(double d1, double d2) noexcept { return {d1, 0.0, 0.0, d2}; }

    [[nodiscard]] constexpr Vec2 operator*(const Vec2& v) const noexcept
    {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    [[nodiscard]] constexpr Mat2 scaled(double s) const noexcept { return {s * a11, s * a12, s * a21, s * a22}; }
    [[nodiscard]] constexpr double det() const noexcept { return a11 * a22 - a12 * a21; }
    [[nodiscard]] constexpr bool is_symmetric() const noexcept { return a12 == a21; }

    [[nodiscard]] Mat2 inverse() const
    {
        const double d = det();
        if (d == 0.0) {
            throw std::domain_error("Mat2::inverse: singular matrix");
        }
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    /// Eigenvalues of the symmetric part, ascending.
    [[nodiscard]] std::array<double, 2> symmetric_eigenvalues() const noexcept
    {
        const double off = 0.5 * (a12 + a21);
        const double mean = 0.5 * (a11 + a22);
        const double rad = std::hypot(0.5 * (a11 - a22), off);
        return {mean - rad, mean + rad};
    }

    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

} // namespace rdlab
