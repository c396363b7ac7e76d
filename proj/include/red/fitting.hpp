#pragma once

// Distortion surfaces D(r, e) over log-rate and log-energy: a piecewise-linear
// interpolant on the Delaunay triangulation of the supporting points, and two
// least-squares polynomial models.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "red/error.hpp"
#include "red/ingest.hpp"
#include "red/numerics/delaunay.hpp"
#include "red/numerics/least_squares.hpp"

namespace red {

enum class Method { linear, poly_custom, poly_mixed };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::linear: return "linear";
        case Method::poly_custom: return "poly_custom";
        case Method::poly_mixed: return "poly_mixed";
    }
    return "?";
}

inline std::optional<Method> method_from_string(std::string_view s) {
    if (s == "linear") return Method::linear;
    if (s == "poly_custom" || s == "poly-custom") return Method::poly_custom;
    if (s == "poly_mixed" || s == "poly-mixed") return Method::poly_mixed;
    return std::nullopt;
}

/// Axis-aligned bounding box of the training (r, e) locations.
struct Domain {
    double r_min = 0.0;
    double r_max = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;

    bool contains(double r, double e) const { return r >= r_min && r <= r_max && e >= e_min && e <= e_max; }

    static Domain of(std::span<const RedPoint> pts) {
        Domain d{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& p : pts) {
            d.r_min = std::min(d.r_min, p.r);
            d.r_max = std::max(d.r_max, p.r);
            d.e_min = std::min(d.e_min, p.e);
            d.e_max = std::max(d.e_max, p.e);
        }
        return d;
    }

    friend bool operator==(const Domain&, const Domain&) = default;
};

enum class Extrapolation { reject, nearest_simplex };

class LinearSurface {
public:
    LinearSurface(numerics::Triangulation triangulation, std::vector<double> vertex_distortions,
                  Extrapolation mode = Extrapolation::reject)
        : tri_(std::move(triangulation)), d_(std::move(vertex_distortions)), mode_(mode) {
        if (d_.size() != tri_.vertices().size())
            throw InvalidArgument("vertex distortion count does not match vertex count");
        for (double d : d_)
            if (!std::isfinite(d) || !(d > 0.0)) throw InvalidArgument("vertex distortions must be finite and positive");
        domain_ = Domain{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& v : tri_.vertices()) {
            domain_.r_min = std::min(domain_.r_min, v.x);
            domain_.r_max = std::max(domain_.r_max, v.x);
            domain_.e_min = std::min(domain_.e_min, v.y);
            domain_.e_max = std::max(domain_.e_max, v.y);
        }
    }

    const numerics::Triangulation& triangulation() const noexcept { return tri_; }
    const std::vector<double>& vertex_distortions() const noexcept { return d_; }
    Extrapolation extrapolation() const noexcept { return mode_; }
    void set_extrapolation(Extrapolation m) noexcept { mode_ = m; }
    const Domain& fit_domain() const noexcept { return domain_; }

    bool in_hull(double r, double e) const { return tri_.locate({r, e}).has_value(); }

private:
    numerics::Triangulation tri_;
    std::vector<double> d_;
    Extrapolation mode_;
    Domain domain_;
};

enum class Basis { custom6, mixed9 };

inline constexpr std::size_t basis_size(Basis b) { return b == Basis::custom6 ? 6 : 9; }

/// Basis row in the written term order of each model:
///   custom6: 1, r^3, r^2, r, e^2, e
///   mixed9:  1, r, e, r^2, r e, e^2, r^3, r^2 e, r e^2
inline std::vector<double> basis_row(Basis b, double r, double e) {
    if (b == Basis::custom6) return {1.0, r * r * r, r * r, r, e * e, e};
    return {1.0, r, e, r * r, r * e, e * e, r * r * r, r * r * e, r * e * e};
}

class PolySurface {
public:
    PolySurface(Basis basis, std::vector<double> coefficients, Domain fit_domain)
        : basis_(basis), p_(std::move(coefficients)), domain_(fit_domain) {
        if (p_.size() != basis_size(basis_))
            throw InvalidArgument("expected " + std::to_string(basis_size(basis_)) + " coefficients, got " +
                                  std::to_string(p_.size()));
        for (double v : p_)
            if (!std::isfinite(v)) throw InvalidArgument("polynomial coefficients must be finite");
    }

    Basis basis() const noexcept { return basis_; }
    const std::vector<double>& coefficients() const noexcept { return p_; }
    const Domain& fit_domain() const noexcept { return domain_; }

    double operator()(double r, double e) const {
        const auto row = basis_row(basis_, r, e);
        double s = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) s += p_[i] * row[i];
        return s;
    }

private:
    Basis basis_;
    std::vector<double> p_;
    Domain domain_;
};

/// A fitted model tagged with the data it came from.
struct Surface {
    std::string encoder;
    std::string sequence;
    std::variant<LinearSurface, PolySurface> model;

    Method method() const {
        if (std::holds_alternative<LinearSurface>(model)) return Method::linear;
        return std::get<PolySurface>(model).basis() == Basis::custom6 ? Method::poly_custom : Method::poly_mixed;
    }
    const Domain& fit_domain() const {
        return std::visit([](const auto& m) -> const Domain& { return m.fit_domain(); }, model);
    }
    const LinearSurface* linear() const { return std::get_if<LinearSurface>(&model); }
    const PolySurface* poly() const { return std::get_if<PolySurface>(&model); }
};

struct Prediction {
    double value = 0.0;
    /// Query left the hull (nearest-simplex mode) or the polynomial's fit box.
    bool extrapolated = false;
};

inline Prediction predict(const LinearSurface& s, double r, double e) {
    if (!std::isfinite(r) || !std::isfinite(e)) throw InvalidArgument("non-finite query");
    const numerics::Point2 q{r, e};
    const auto& tri = s.triangulation();
    if (const auto loc = tri.locate(q)) return {tri.blend(*loc, s.vertex_distortions(), q), false};
    if (s.extrapolation() == Extrapolation::reject)
        throw OutOfDomain("(r=" + text::format_double(r, 6) + ", e=" + text::format_double(e, 6) +
                          ") lies outside the linear surface's hull");
    const int t = tri.nearest_triangle(q);
    const auto w = tri.barycentric(t, q);
    const auto& v = tri.triangles()[t];
    const auto& d = s.vertex_distortions();
    return {w[0] * d[v[0]] + w[1] * d[v[1]] + w[2] * d[v[2]], true};
}

inline Prediction predict(const PolySurface& s, double r, double e) {
    if (!std::isfinite(r) || !std::isfinite(e)) throw InvalidArgument("non-finite query");
    return {s(r, e), !s.fit_domain().contains(r, e)};
}

inline Prediction predict(const Surface& s, double r, double e) {
    return std::visit([&](const auto& m) { return predict(m, r, e); }, s.model);
}

/// Fitted distortion at (r, e).
inline double eval_surface(const Surface& s, double r, double e) { return predict(s, r, e).value; }
inline double eval_surface(const LinearSurface& s, double r, double e) { return predict(s, r, e).value; }
inline double eval_surface(const PolySurface& s, double r, double e) { return predict(s, r, e).value; }

/// Range of r at which the surface is defined along the line of constant e.
inline std::optional<std::pair<double, double>> rate_span(const Surface& s, double e) {
    if (const auto* lin = s.linear()) return lin->triangulation().horizontal_span(e);
    const Domain& d = s.fit_domain();
    if (e < d.e_min || e > d.e_max) return std::nullopt;
    return std::pair{d.r_min, d.r_max};
}

namespace detail {

inline std::vector<numerics::Point2> locations(std::span<const RedPoint> pts) {
    std::vector<numerics::Point2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back({p.r, p.e});
    return out;
}

inline PolySurface fit_poly(std::span<const RedPoint> pts, Basis basis) {
    const std::size_t k = basis_size(basis);
    if (pts.size() < k)
        throw InvalidArgument("insufficient data: " + std::string(basis == Basis::custom6 ? "custom" : "mixed") +
                              " polynomial needs at least " + std::to_string(k) + " supporting points, got " +
                              std::to_string(pts.size()));
    std::vector<double> entries;
    std::vector<double> targets;
    entries.reserve(pts.size() * k);
    for (const auto& p : pts) {
        const auto row = basis_row(basis, p.r, p.e);
        entries.insert(entries.end(), row.begin(), row.end());
        targets.push_back(p.d);
    }
    const numerics::DesignMatrix design(pts.size(), k, std::move(entries));
    return PolySurface(basis, numerics::solve_least_squares(design, targets), Domain::of(pts));
}

}  // namespace detail

inline LinearSurface fit_linear(std::span<const RedPoint> supporting, Extrapolation mode = Extrapolation::reject) {
    const auto locs = detail::locations(supporting);
    std::vector<double> d;
    d.reserve(supporting.size());
    for (const auto& p : supporting) d.push_back(p.d);
    return LinearSurface(numerics::delaunay_triangulate(locs), std::move(d), mode);
}

inline PolySurface fit_poly_custom(std::span<const RedPoint> supporting) {
    return detail::fit_poly(supporting, Basis::custom6);
}

inline PolySurface fit_poly_mixed(std::span<const RedPoint> supporting) {
    return detail::fit_poly(supporting, Basis::mixed9);
}

/// Fits `method` to the supporting points of a point set.
inline Surface fit(const PointSet& ps, Method method, Extrapolation mode = Extrapolation::reject) {
    const auto pts = ps.supporting();
    switch (method) {
        case Method::linear: return Surface{ps.encoder, ps.sequence, fit_linear(pts, mode)};
        case Method::poly_custom: return Surface{ps.encoder, ps.sequence, fit_poly_custom(pts)};
        case Method::poly_mixed: return Surface{ps.encoder, ps.sequence, fit_poly_mixed(pts)};
    }
    throw InvalidArgument("unknown fitting method");
}

}  // namespace red
