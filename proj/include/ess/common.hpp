// Small shared value types, error types, and numeric helpers.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ess {

inline constexpr double pi = 3.14159265358979323846;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

using Vec2 = Point2;

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double c, Point2 a) { return {c * a.x, c * a.y}; }
inline Point2 operator*(Point2 a, double c) { return {c * a.x, c * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    Mat2 mul(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    double max_abs_diff(const Mat2& o) const {
        double d = std::fabs(a11 - o.a11);
        d = std::max(d, std::fabs(a12 - o.a12));
        d = std::max(d, std::fabs(a21 - o.a21));
        return std::max(d, std::fabs(a22 - o.a22));
    }
};

struct Box {
    double xlo = 0.0, ylo = 0.0, xhi = 0.0, yhi = 0.0;

    double width() const { return xhi - xlo; }
    double height() const { return yhi - ylo; }
    double area() const { return width() * height(); }
    Point2 center() const { return {0.5 * (xlo + xhi), 0.5 * (ylo + yhi)}; }
    bool contains(Point2 p) const { return p.x >= xlo && p.x <= xhi && p.y >= ylo && p.y <= yhi; }
};

// Error taxonomy: configuration problems, out-of-domain queries, iteration failures.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

// Least-squares line fit y ~ slope*x + intercept with coefficient of determination.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LineFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw SolverError("linear_fit: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw SolverError("linear_fit: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy == 0.0) {
        f.r2 = 1.0;
    } else {
        double ss_res = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (f.slope * x[i] + f.intercept);
            ss_res += r * r;
        }
        f.r2 = 1.0 - ss_res / syy;
    }
    return f;
}

// Round-trip-exact decimal formatting (17 significant digits, locale independent).
inline std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline double median_abs(std::vector<double> v) {
    if (v.empty()) throw SolverError("median_abs: empty sample");
    for (auto& e : v) e = std::fabs(e);
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::fabs(e));
    return m;
}

// Golden-section minimization on [a, b] for unimodal-enough 1D profiles.
template <class F>
double golden_section_min(F&& f, double a, double b, int iters = 60) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// FNV-1a over bytes; used for config fingerprints.
inline std::uint64_t fnv1a64(std::span<const char> bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::span<const char> bytes) {
    std::uint64_t h = fnv1a64(bytes);
    std::array<char, 17> buf{};
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return std::string(buf.data(), 16);
}

}  // namespace ess
