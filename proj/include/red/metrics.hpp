#pragma once

// Fit scoring: MAPE (percent) per point class, SSE and R^2, and the
// per-encoder evaluation table averaged over sequences.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "red/error.hpp"
#include "red/fitting.hpp"
#include "red/ingest.hpp"
#include "red/text.hpp"

namespace red {

namespace detail {

inline std::string point_label(const RedPoint& p) {
    return p.config.preset + " q" + std::to_string(p.config.quality) + " (r=" + text::format_double(p.r, 6) +
           ", e=" + text::format_double(p.e, 6) + ")";
}

// Surface predictions for every point, naming the point on failure.
template <typename S>
std::vector<double> predictions(const S& surface, std::span<const RedPoint> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        try {
            out.push_back(eval_surface(surface, p.r, p.e));
        } catch (const OutOfDomain& ex) {
            throw OutOfDomain("point " + point_label(p) + ": " + ex.what());
        }
    }
    return out;
}

}  // namespace detail

/// Mean absolute percentage error, 100 / N * sum |d_hat - d| / |d|.
template <typename S>
double mape(const S& surface, std::span<const RedPoint> points) {
    if (points.empty()) throw InvalidArgument("MAPE of an empty point list is undefined");
    for (const auto& p : points)
        if (p.d == 0.0) throw InvalidArgument("MAPE undefined for zero distortion at " + detail::point_label(p));
    const auto fitted = detail::predictions(surface, points);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sum += std::abs((fitted[i] - points[i].d) / points[i].d);
    return 100.0 * sum / static_cast<double>(points.size());
}

/// Sum of squared residuals in dB^2.
template <typename S>
double sse(const S& surface, std::span<const RedPoint> points) {
    if (points.empty()) throw InvalidArgument("SSE of an empty point list is undefined");
    const auto fitted = detail::predictions(surface, points);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sum += (fitted[i] - points[i].d) * (fitted[i] - points[i].d);
    return sum;
}

inline double total_sum_of_squares(std::span<const RedPoint> points) {
    double mean = 0.0;
    for (const auto& p : points) mean += p.d;
    mean /= static_cast<double>(points.size());
    double sst = 0.0;
    for (const auto& p : points) sst += (p.d - mean) * (p.d - mean);
    return sst;
}

/// Coefficient of determination 1 - SSE/SST. Undefined when all d are equal.
template <typename S>
double r_square(const S& surface, std::span<const RedPoint> points) {
    if (points.empty()) throw InvalidArgument("R-square of an empty point list is undefined");
    const double sst = total_sum_of_squares(points);
    if (!(sst > 0.0)) throw InvalidArgument("R-square undefined: all distortion values are equal");
    return 1.0 - sse(surface, points) / sst;
}

struct FitMetrics {
    std::string encoder;
    Method method = Method::linear;
    double mape_supporting = 0.0;                  ///< percent, in-sample
    std::optional<double> mape_non_supporting;     ///< percent; absent without non-supporting points
    double sse = 0.0;                              ///< over supporting points
    double r_square = 1.0;                         ///< over supporting points
    std::size_t n_supporting = 0;
    std::size_t n_non_supporting = 0;
};

/// Scores one fitted surface against a point set. Non-supporting MAPE is
/// skipped when `non_supporting` is false.
inline FitMetrics score(const Surface& surface, const PointSet& ps, bool non_supporting = true) {
    const auto s = ps.supporting();
    const auto ns = ps.non_supporting();
    FitMetrics m;
    m.encoder = ps.encoder;
    m.method = surface.method();
    m.n_supporting = s.size();
    m.n_non_supporting = ns.size();
    m.mape_supporting = mape(surface, s);
    if (non_supporting && !ns.empty()) m.mape_non_supporting = mape(surface, ns);
    m.sse = sse(surface, s);
    m.r_square = m.sse == 0.0 ? 1.0 : r_square(surface, s);
    return m;
}

/// Plain arithmetic mean of per-sequence metrics of one (encoder, method).
/// Counts are summed. Non-supporting MAPE averages over the sequences that have it.
inline FitMetrics average(std::span<const FitMetrics> rows) {
    if (rows.empty()) throw InvalidArgument("nothing to average");
    FitMetrics out;
    out.encoder = rows.front().encoder;
    out.method = rows.front().method;
    double ns_sum = 0.0;
    std::size_t ns_count = 0;
    out.r_square = 0.0;
    for (const auto& r : rows) {
        out.mape_supporting += r.mape_supporting;
        out.sse += r.sse;
        out.r_square += r.r_square;
        out.n_supporting += r.n_supporting;
        out.n_non_supporting += r.n_non_supporting;
        if (r.mape_non_supporting) {
            ns_sum += *r.mape_non_supporting;
            ++ns_count;
        }
    }
    const double n = static_cast<double>(rows.size());
    out.mape_supporting /= n;
    out.sse /= n;
    out.r_square /= n;
    if (ns_count > 0) out.mape_non_supporting = ns_sum / static_cast<double>(ns_count);
    return out;
}

/// Fits every method on every point set's supporting points and reports one
/// row per (encoder, method), in encoder first-appearance then method order.
inline std::vector<FitMetrics> evaluate_all(std::span<const PointSet> pointsets, std::span<const Method> methods) {
    std::vector<std::string> encoders;
    std::map<std::pair<std::string, Method>, std::vector<FitMetrics>> rows;
    for (const auto& ps : pointsets) {
        if (std::find(encoders.begin(), encoders.end(), ps.encoder) == encoders.end()) encoders.push_back(ps.encoder);
        for (const Method m : methods) {
            try {
                rows[{ps.encoder, m}].push_back(score(fit(ps, m), ps));
            } catch (const Error& ex) {
                throw Error(ex.kind(), "[" + ps.encoder + "/" + ps.sequence + "/" + to_string(m) + "] " + ex.what());
            }
        }
    }
    std::vector<FitMetrics> out;
    for (const auto& enc : encoders)
        for (const Method m : methods) out.push_back(average(rows.at({enc, m})));
    return out;
}

/// Which MAPE columns a report shows; hidden ones print as "-".
enum class PointClasses { supporting, non_supporting, both };

inline void write_report(std::ostream& out, std::span<const FitMetrics> rows, PointClasses classes = PointClasses::both,
                         char delim = ',') {
    out << "encoder" << delim << "method" << delim << "mape_supporting_pct" << delim << "mape_non_supporting_pct"
        << delim << "sse" << delim << "r_square" << delim << "n_s" << delim << "n_ns\n";
    auto num = [](double v) { return text::format_double(v, 12); };
    for (const auto& r : rows) {
        const bool show_s = classes != PointClasses::non_supporting;
        const bool show_ns = classes != PointClasses::supporting && r.mape_non_supporting.has_value();
        out << text::quote_if_needed(r.encoder, delim) << delim << to_string(r.method) << delim
            << (show_s ? num(r.mape_supporting) : "-") << delim << (show_ns ? num(*r.mape_non_supporting) : "-")
            << delim << num(r.sse) << delim << num(r.r_square) << delim << r.n_supporting << delim
            << r.n_non_supporting << '\n';
    }
}

}  // namespace red
