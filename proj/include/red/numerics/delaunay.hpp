#pragma once

// Planar Delaunay triangulation built by a lexicographic sweep followed by
// Lawson edge flips. All geometric decisions go through the exact predicates.
//
// Co-circular tie rule: when four vertices of two adjacent triangles lie on a
// common circle, the diagonal incident to the lowest vertex index of the four
// is kept. The rule is applied during flipping, so the output is a function of
// the input order alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "red/error.hpp"
#include "red/numerics/predicates.hpp"

namespace red::numerics {

using Triangle = std::array<int, 3>;

/// Containing triangle and barycentric weights of a located query.
struct Location {
    int triangle = -1;
    std::array<double, 3> weights{};
};

class Triangulation {
public:
    const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    /// Counterclockwise vertex-index triples.
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    /// neighbors()[t][i] is the triangle across the edge opposite vertex i, or -1 on the hull.
    const std::vector<Triangle>& neighbors() const noexcept { return neighbors_; }
    /// Hull vertex indices in counterclockwise order.
    const std::vector<int>& hull() const noexcept { return hull_; }

    /// Walks from `hint` towards `query`; falls back to a linear scan if the
    /// walk does not settle. Returns nullopt when the query is strictly
    /// outside the hull. The hint is caller state, never stored here.
    std::optional<Location> locate(const Point2& query, int hint = 0) const {
        if (triangles_.empty()) return std::nullopt;
        int t = (hint >= 0 && static_cast<std::size_t>(hint) < triangles_.size()) ? hint : 0;
        const std::size_t max_steps = triangles_.size() + 8;
        for (std::size_t step = 0; step < max_steps; ++step) {
            const auto& tri = triangles_[t];
            int exit_edge = -1;
            for (int i = 0; i < 3; ++i) {
                if (orient2d(vertices_[tri[(i + 1) % 3]], vertices_[tri[(i + 2) % 3]], query) < 0) {
                    exit_edge = i;
                    break;
                }
            }
            if (exit_edge < 0) return Location{t, barycentric(t, query)};
            const int next = neighbors_[t][exit_edge];
            if (next < 0) return std::nullopt;  // strictly outside a hull edge
            t = next;
        }
        return scan(query);
    }

    /// Barycentric interpolation of per-vertex values. Exact vertex hits
    /// return the stored value unchanged. Throws OutOfDomain outside the hull.
    double interpolate(std::span<const double> values, const Point2& query, int hint = 0) const {
        if (values.size() != vertices_.size())
            throw InvalidArgument("value count does not match triangulation vertex count");
        if (!std::isfinite(query.x) || !std::isfinite(query.y)) throw InvalidArgument("non-finite query point");
        const auto loc = locate(query, hint);
        if (!loc) throw OutOfDomain(describe(query) + " lies outside the triangulation hull");
        return blend(*loc, values, query);
    }

    /// Value from the located triangle's weights, honoring exact vertex hits.
    double blend(const Location& loc, std::span<const double> values, const Point2& query) const {
        const auto& tri = triangles_[loc.triangle];
        for (int v : tri)
            if (vertices_[v] == query) return values[v];
        return loc.weights[0] * values[tri[0]] + loc.weights[1] * values[tri[1]] + loc.weights[2] * values[tri[2]];
    }

    /// Barycentric weights of `query` with respect to triangle t; negative
    /// weights when the query lies outside it.
    std::array<double, 3> barycentric(int t, const Point2& query) const {
        const auto& tri = triangles_[t];
        const Point2& a = vertices_[tri[0]];
        const Point2& b = vertices_[tri[1]];
        const Point2& c = vertices_[tri[2]];
        const double area = signed_area2(a, b, c);
        const double wa = signed_area2(query, b, c) / area;
        const double wb = signed_area2(a, query, c) / area;
        return {wa, wb, 1.0 - wa - wb};
    }

    /// Triangle closest to `query` in Euclidean distance (0 for contained points).
    int nearest_triangle(const Point2& query) const {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            double d2 = std::numeric_limits<double>::infinity();
            bool inside = true;
            for (int i = 0; i < 3; ++i) {
                const Point2& p = vertices_[tri[(i + 1) % 3]];
                const Point2& q = vertices_[tri[(i + 2) % 3]];
                if (orient2d(p, q, query) < 0) inside = false;
                d2 = std::min(d2, segment_distance2(p, q, query));
            }
            if (inside) return static_cast<int>(t);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(t);
            }
        }
        return best;
    }

    /// Extent [min x, max x] of the hull along the horizontal line at `y`,
    /// or nullopt when the line misses the hull.
    std::optional<std::pair<double, double>> horizontal_span(double y) const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        const std::size_t h = hull_.size();
        for (std::size_t i = 0; i < h; ++i) {
            const Point2& p = vertices_[hull_[i]];
            const Point2& q = vertices_[hull_[(i + 1) % h]];
            if ((p.y - y) * (q.y - y) > 0.0) continue;
            if (p.y == q.y) {
                if (p.y != y) continue;
                lo = std::min({lo, p.x, q.x});
                hi = std::max({hi, p.x, q.x});
                continue;
            }
            const double s = (y - p.y) / (q.y - p.y);
            const double x = p.x + s * (q.x - p.x);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (lo > hi) return std::nullopt;
        return std::pair{lo, hi};
    }

    double hull_area() const {
        double s = 0.0;
        const std::size_t h = hull_.size();
        for (std::size_t i = 0; i < h; ++i) {
            const Point2& p = vertices_[hull_[i]];
            const Point2& q = vertices_[hull_[(i + 1) % h]];
            s += p.x * q.y - q.x * p.y;
        }
        return 0.5 * s;
    }

    /// Rebuilds a triangulation from stored parts (e.g. a model file),
    /// validating orientation and recomputing adjacency and hull.
    static Triangulation from_parts(std::vector<Point2> vertices, std::vector<Triangle> triangles) {
        Triangulation out;
        out.vertices_ = std::move(vertices);
        out.triangles_ = std::move(triangles);
        const int n = static_cast<int>(out.vertices_.size());
        for (const auto& tri : out.triangles_) {
            for (int v : tri)
                if (v < 0 || v >= n) throw InvalidArgument("triangle references a missing vertex");
            if (orient2d(out.vertices_[tri[0]], out.vertices_[tri[1]], out.vertices_[tri[2]]) <= 0)
                throw InvalidArgument("triangle is not counterclockwise with positive area");
        }
        out.link();
        return out;
    }

    friend Triangulation delaunay_triangulate(std::span<const Point2> points);

private:
    static double segment_distance2(const Point2& p, const Point2& q, const Point2& x) {
        const double dx = q.x - p.x, dy = q.y - p.y;
        const double len2 = dx * dx + dy * dy;
        double s = len2 > 0.0 ? ((x.x - p.x) * dx + (x.y - p.y) * dy) / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        const double ex = p.x + s * dx - x.x, ey = p.y + s * dy - x.y;
        return ex * ex + ey * ey;
    }

    static std::string describe(const Point2& p) {
        return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
    }

    std::optional<Location> scan(const Point2& query) const {
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            bool inside = true;
            for (int i = 0; i < 3 && inside; ++i)
                inside = orient2d(vertices_[tri[(i + 1) % 3]], vertices_[tri[(i + 2) % 3]], query) >= 0;
            if (inside) return Location{static_cast<int>(t), barycentric(static_cast<int>(t), query)};
        }
        return std::nullopt;
    }

    // Neighbor links from shared edges, then the hull from boundary edges.
    void link() {
        const std::size_t nt = triangles_.size();
        neighbors_.assign(nt, Triangle{-1, -1, -1});
        std::vector<std::tuple<int, int, int, int>> edges;  // (min v, max v, triangle, opposite slot)
        edges.reserve(nt * 3);
        for (std::size_t t = 0; t < nt; ++t) {
            for (int i = 0; i < 3; ++i) {
                const int u = triangles_[t][(i + 1) % 3];
                const int v = triangles_[t][(i + 2) % 3];
                edges.emplace_back(std::min(u, v), std::max(u, v), static_cast<int>(t), i);
            }
        }
        std::sort(edges.begin(), edges.end());
        std::vector<int> next_on_hull(vertices_.size(), -1);
        for (std::size_t k = 0; k < edges.size();) {
            std::size_t m = k + 1;
            while (m < edges.size() && std::get<0>(edges[m]) == std::get<0>(edges[k]) &&
                   std::get<1>(edges[m]) == std::get<1>(edges[k]))
                ++m;
            if (m - k > 2) throw InvalidArgument("edge shared by more than two triangles");
            if (m - k == 2) {
                const auto& [u0, v0, t0, i0] = edges[k];
                const auto& [u1, v1, t1, i1] = edges[k + 1];
                neighbors_[t0][i0] = t1;
                neighbors_[t1][i1] = t0;
            } else {
                const auto& [u0, v0, t0, i0] = edges[k];
                const int from = triangles_[t0][(i0 + 1) % 3];
                next_on_hull[from] = triangles_[t0][(i0 + 2) % 3];
            }
            k = m;
        }
        hull_.clear();
        int start = -1;
        for (std::size_t v = 0; v < next_on_hull.size(); ++v)
            if (next_on_hull[v] >= 0) {
                start = static_cast<int>(v);
                break;
            }
        if (start < 0) return;
        int v = start;
        do {
            hull_.push_back(v);
            v = next_on_hull[v];
            if (v < 0 || hull_.size() > vertices_.size()) throw InvalidArgument("triangle set has a broken boundary");
        } while (v != start);
    }

    // Flips the edge opposite slot i of triangle t. Quad a,b,d,c becomes (a,b,d) + (a,d,c).
    void flip(int t, int i) {
        const int u = neighbors_[t][i];
        const int a = triangles_[t][i];
        const int b = triangles_[t][(i + 1) % 3];
        const int c = triangles_[t][(i + 2) % 3];
        int j = 0;
        while (triangles_[u][j] == b || triangles_[u][j] == c) ++j;
        const int d = triangles_[u][j];
        const int n_bd = neighbors_[u][(j + 1) % 3];
        const int n_dc = neighbors_[u][(j + 2) % 3];
        const int n_ca = neighbors_[t][(i + 1) % 3];
        const int n_ab = neighbors_[t][(i + 2) % 3];

        triangles_[t] = {a, b, d};
        neighbors_[t] = {n_bd, u, n_ab};
        triangles_[u] = {a, d, c};
        neighbors_[u] = {n_dc, n_ca, t};
        auto repoint = [&](int tri, int from, int to) {
            if (tri < 0) return;
            for (auto& nb : neighbors_[tri])
                if (nb == from) nb = to;
        };
        repoint(n_bd, u, t);
        repoint(n_ca, t, u);
    }

    // True when the shared edge opposite slot i of t should be flipped.
    bool needs_flip(int t, int i) const {
        const int u = neighbors_[t][i];
        if (u < 0) return false;
        const int a = triangles_[t][i];
        const int b = triangles_[t][(i + 1) % 3];
        const int c = triangles_[t][(i + 2) % 3];
        int j = 0;
        while (triangles_[u][j] == b || triangles_[u][j] == c) ++j;
        const int d = triangles_[u][j];
        const int s = incircle(vertices_[a], vertices_[b], vertices_[c], vertices_[d]);
        if (s > 0) return true;
        if (s < 0) return false;
        return std::min(a, d) < std::min(b, c);
    }

    std::vector<Point2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Triangle> neighbors_;
    std::vector<int> hull_;
};

/// Delaunay triangulation of at least three distinct, not-all-collinear points.
/// Vertex indices in the result match input positions.
inline Triangulation delaunay_triangulate(std::span<const Point2> points) {
    const std::size_t n = points.size();
    if (n < 3) throw InvalidArgument("triangulation needs at least 3 points, got " + std::to_string(n));
    for (const auto& p : points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("non-finite point in triangulation input");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int l, int r) {
        if (points[l].x != points[r].x) return points[l].x < points[r].x;
        if (points[l].y != points[r].y) return points[l].y < points[r].y;
        return l < r;
    });
    for (std::size_t k = 1; k < n; ++k)
        if (points[order[k]] == points[order[k - 1]])
            throw InvalidArgument("duplicate points " + std::to_string(order[k - 1]) + " and " +
                                  std::to_string(order[k]) + " in triangulation input");

    Triangulation out;
    out.vertices_.assign(points.begin(), points.end());
    const auto& pts = out.vertices_;

    // Collinear prefix of the sweep order, then the first point off that line.
    std::size_t apex_pos = 2;
    while (apex_pos < n && orient2d(pts[order[0]], pts[order[1]], pts[order[apex_pos]]) == 0) ++apex_pos;
    if (apex_pos == n) throw InvalidArgument("all triangulation points are collinear");
    const int apex = order[apex_pos];
    const bool apex_left = orient2d(pts[order[0]], pts[order[1]], pts[apex]) > 0;

    std::vector<int> hull;  // counterclockwise
    for (std::size_t k = 0; k + 1 < apex_pos; ++k) {
        const int p = order[k], q = order[k + 1];
        out.triangles_.push_back(apex_left ? Triangle{p, q, apex} : Triangle{q, p, apex});
    }
    if (apex_left) {
        for (std::size_t k = 0; k < apex_pos; ++k) hull.push_back(order[k]);
        hull.push_back(apex);
    } else {
        hull.push_back(order[0]);
        hull.push_back(apex);
        for (std::size_t k = apex_pos; k-- > 1;) hull.push_back(order[k]);
    }

    // Each later point is lexicographically largest so far, hence a new hull vertex.
    for (std::size_t k = apex_pos + 1; k < n; ++k) {
        const int q = order[k];
        const std::size_t h = hull.size();
        std::vector<char> visible(h, 0);
        for (std::size_t e = 0; e < h; ++e)
            visible[e] = orient2d(pts[hull[e]], pts[hull[(e + 1) % h]], pts[q]) < 0;
        // Visible edges form one cyclic run; find its start.
        std::size_t first = h;
        for (std::size_t e = 0; e < h; ++e)
            if (visible[e] && !visible[(e + h - 1) % h]) {
                first = e;
                break;
            }
        if (first == h) throw NumericalError("sweep found no visible hull edge");
        std::size_t count = 0;
        while (count < h && visible[(first + count) % h]) {
            const std::size_t e = (first + count) % h;
            out.triangles_.push_back(Triangle{hull[(e + 1) % h], hull[e], q});
            ++count;
        }
        // Replace the interior vertices of the visible chain with q.
        std::vector<int> next;
        next.reserve(h + 1);
        for (std::size_t s = 0; s <= h - count; ++s) next.push_back(hull[(first + count + s) % h]);
        next.push_back(q);
        hull = std::move(next);
    }

    out.link();

    const std::size_t max_passes = 4 * n + 64;
    for (std::size_t pass = 0;; ++pass) {
        if (pass == max_passes) throw ConvergenceFailure("Delaunay edge flipping did not settle");
        bool flipped = false;
        for (std::size_t t = 0; t < out.triangles_.size(); ++t) {
            for (int i = 0; i < 3; ++i) {
                if (out.needs_flip(static_cast<int>(t), i)) {
                    out.flip(static_cast<int>(t), i);
                    flipped = true;
                }
            }
        }
        if (!flipped) break;
    }
    out.link();
    return out;
}

}  // namespace red::numerics
