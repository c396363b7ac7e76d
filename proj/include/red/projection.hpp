#pragma once

// Projections of several fitted surfaces onto the R-E plane (who gives the
// highest PSNR at a given rate and energy) and the E-D plane (who needs the
// lowest rate for a given energy and PSNR), plus per-configuration occlusion.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "red/defaults.hpp"
#include "red/error.hpp"
#include "red/fitting.hpp"
#include "red/ingest.hpp"
#include "red/numerics/bisect.hpp"
#include "red/text.hpp"

namespace red {

enum class Plane { RE, ED };

inline const char* to_string(Plane p) { return p == Plane::RE ? "re" : "ed"; }

struct AxisSpec {
    double min = 0.0;
    double max = 1.0;
    int cells = 2;

    void validate(const char* name) const {
        if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
            throw InvalidArgument(std::string(name) + " axis needs finite min < max");
        if (cells < 2) throw InvalidArgument(std::string(name) + " axis needs at least 2 cells");
    }
    double width() const { return (max - min) / cells; }
    double center(int i) const { return min + (i + 0.5) * (max - min) / cells; }
};

inline constexpr int kDefaultGridCells = defaults::grid_cells;
inline constexpr double kDefaultTieTolerance = defaults::tie_tolerance;
inline constexpr double kDefaultInversionTolerance = defaults::inversion_tolerance;
inline constexpr double kMonotoneSlack = defaults::monotone_slack;
inline constexpr int kMonotoneSamples = defaults::monotone_samples;

enum class CellOutcome { winner, tie, out_of_domain };

struct Cell {
    CellOutcome outcome = CellOutcome::out_of_domain;
    int winner = -1;  ///< surface index when outcome == winner
    double value = std::numeric_limits<double>::quiet_NaN();  ///< best d_hat (RE) or lowest r (ED)
};

struct DominanceGrid {
    Plane plane = Plane::RE;
    AxisSpec x_axis;
    AxisSpec y_axis;
    std::vector<std::string> encoders;  ///< surface order
    std::vector<Cell> cells;            ///< row-major, y outer: cells[iy * nx + ix]

    const Cell& at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * x_axis.cells + ix]; }

    /// Encoder id of a winner cell, or "tie" / "out_of_domain".
    std::string label(const Cell& c) const {
        switch (c.outcome) {
            case CellOutcome::winner: return encoders[c.winner];
            case CellOutcome::tie: return "tie";
            case CellOutcome::out_of_domain: break;
        }
        return "out_of_domain";
    }
};

namespace detail {

// Picks the best candidate; `better(a, b)` is true when a beats b.
template <typename Better>
Cell decide(std::span<const std::optional<double>> values, double tie_tol, Better better) {
    int best = -1;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] && (best < 0 || better(*values[i], *values[best]))) best = static_cast<int>(i);
    if (best < 0) return {};
    Cell cell{CellOutcome::winner, best, *values[best]};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (static_cast<int>(i) == best || !values[i]) continue;
        if (std::abs(*values[i] - *values[best]) <= tie_tol) {
            cell.outcome = CellOutcome::tie;
            cell.winner = -1;
            break;
        }
    }
    return cell;
}

// Evaluation used by the projections: linear surfaces only inside their hull
// (or anywhere in nearest-simplex mode), polynomials everywhere.
inline std::optional<double> try_eval(const Surface& s, double r, double e) {
    try {
        return eval_surface(s, r, e);
    } catch (const OutOfDomain&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Per cell center (r, e): the surface with the highest predicted PSNR wins;
/// within tie_tol of the runner-up the cell is a tie.
inline DominanceGrid sample_re_grid(std::span<const Surface> surfaces, const AxisSpec& r_axis, const AxisSpec& e_axis,
                                    double tie_tol = kDefaultTieTolerance) {
    if (surfaces.empty()) throw InvalidArgument("projection needs at least one surface");
    r_axis.validate("r");
    e_axis.validate("e");
    if (!(tie_tol >= 0.0)) throw InvalidArgument("tie tolerance must be nonnegative");

    DominanceGrid grid{Plane::RE, r_axis, e_axis, {}, {}};
    for (const auto& s : surfaces) grid.encoders.push_back(s.encoder);
    grid.cells.resize(static_cast<std::size_t>(r_axis.cells) * e_axis.cells);
    std::vector<std::optional<double>> values(surfaces.size());
    for (int iy = 0; iy < e_axis.cells; ++iy) {
        const double e = e_axis.center(iy);
        for (int ix = 0; ix < r_axis.cells; ++ix) {
            const double r = r_axis.center(ix);
            for (std::size_t k = 0; k < surfaces.size(); ++k) values[k] = detail::try_eval(surfaces[k], r, e);
            grid.cells[static_cast<std::size_t>(iy) * r_axis.cells + ix] =
                detail::decide(values, tie_tol, [](double a, double b) { return a > b; });
        }
    }
    return grid;
}

/// Checks that D(., e) does not decrease across [r_lo, r_hi] by sampling.
inline void check_monotone_in_rate(const Surface& s, double e, double r_lo, double r_hi) {
    double prev = eval_surface(s, r_lo, e);
    for (int k = 1; k < kMonotoneSamples; ++k) {
        const double r = k == kMonotoneSamples - 1 ? r_hi : r_lo + (r_hi - r_lo) * k / (kMonotoneSamples - 1);
        const double cur = eval_surface(s, r, e);
        if (cur < prev - kMonotoneSlack)
            throw NonMonotone("distortion decreases in rate near r=" + text::format_double(r, 6) +
                              " at e=" + text::format_double(e, 6) + "; inversion would be ambiguous");
        prev = cur;
    }
}

namespace detail {

// Bisection for r once the bracket is known to be monotone and evaluable.
inline double invert_checked(const Surface& s, double e, double d_target, double r_lo, double r_hi, double tol) {
    auto f = [&](double r) { return eval_surface(s, r, e); };
    const double r = numerics::bisect_root(f, r_lo, r_hi, d_target, tol, numerics::BisectOptions{0.0});
    if (!(std::abs(f(r) - d_target) <= tol))
        throw ConvergenceFailure("inversion residual above tolerance at e=" + text::format_double(e, 6));
    return r;
}

}  // namespace detail

/// Log-rate at which the surface reaches d_target for log-energy e.
inline double invert_rate(const Surface& s, double e, double d_target, double r_lo, double r_hi,
                          double tol = kDefaultInversionTolerance) {
    if (!(r_lo < r_hi)) throw InvalidArgument("rate bracket must satisfy lo < hi");
    if (!(tol > 0.0)) throw InvalidArgument("inversion tolerance must be positive");
    check_monotone_in_rate(s, e, r_lo, r_hi);
    return detail::invert_checked(s, e, d_target, r_lo, r_hi, tol);
}

/// Rate bracket of a surface at energy e: its own span along e, clipped to
/// the optional caller bracket and pulled inside the hull by a hair.
inline std::optional<std::pair<double, double>> inversion_bracket(const Surface& s, double e,
                                                                  std::optional<std::pair<double, double>> limit) {
    auto span = rate_span(s, e);
    if (!span) return std::nullopt;
    auto [lo, hi] = *span;
    if (s.linear()) {
        const double pad = 1e-9 * std::max(1.0, std::abs(hi - lo));
        lo += pad;
        hi -= pad;
    }
    if (limit) {
        lo = std::max(lo, limit->first);
        hi = std::min(hi, limit->second);
    }
    if (!(lo < hi)) return std::nullopt;
    return std::pair{lo, hi};
}

/// Per cell center (e, d): the surface needing the lowest rate to reach d at
/// energy e wins. Surfaces that cannot reach d there, or are not monotone in
/// rate at that energy, drop out of the cell.
inline DominanceGrid sample_ed_grid(std::span<const Surface> surfaces, const AxisSpec& e_axis, const AxisSpec& d_axis,
                                    std::optional<std::pair<double, double>> r_bracket = std::nullopt,
                                    double tie_tol = kDefaultTieTolerance,
                                    double inversion_tol = kDefaultInversionTolerance) {
    if (surfaces.empty()) throw InvalidArgument("projection needs at least one surface");
    e_axis.validate("e");
    d_axis.validate("d");
    if (!(tie_tol >= 0.0)) throw InvalidArgument("tie tolerance must be nonnegative");

    DominanceGrid grid{Plane::ED, e_axis, d_axis, {}, {}};
    for (const auto& s : surfaces) grid.encoders.push_back(s.encoder);
    grid.cells.resize(static_cast<std::size_t>(e_axis.cells) * d_axis.cells);

    struct Column {
        std::optional<std::pair<double, double>> bracket;
        double d_lo = 0.0, d_hi = 0.0;
    };
    std::vector<Column> columns(surfaces.size());
    std::vector<std::optional<double>> values(surfaces.size());
    for (int ix = 0; ix < e_axis.cells; ++ix) {
        const double e = e_axis.center(ix);
        // Bracket and monotonicity depend on e only.
        for (std::size_t k = 0; k < surfaces.size(); ++k) {
            Column col;
            try {
                col.bracket = inversion_bracket(surfaces[k], e, r_bracket);
                if (col.bracket) {
                    check_monotone_in_rate(surfaces[k], e, col.bracket->first, col.bracket->second);
                    col.d_lo = eval_surface(surfaces[k], col.bracket->first, e);
                    col.d_hi = eval_surface(surfaces[k], col.bracket->second, e);
                }
            } catch (const Error&) {
                col.bracket.reset();
            }
            columns[k] = col;
        }
        for (int iy = 0; iy < d_axis.cells; ++iy) {
            const double d = d_axis.center(iy);
            for (std::size_t k = 0; k < surfaces.size(); ++k) {
                values[k].reset();
                const auto& col = columns[k];
                if (!col.bracket || d < col.d_lo - inversion_tol || d > col.d_hi + inversion_tol) continue;
                try {
                    values[k] = detail::invert_checked(surfaces[k], e, d, col.bracket->first, col.bracket->second,
                                                       inversion_tol);
                } catch (const Error&) {
                }
            }
            grid.cells[static_cast<std::size_t>(iy) * e_axis.cells + ix] =
                detail::decide(values, tie_tol, [](double a, double b) { return a < b; });
        }
    }
    return grid;
}

/// Intersection of the surfaces' fit domains, for default R-E axes.
inline Domain shared_domain(std::span<const Surface> surfaces) {
    if (surfaces.empty()) throw InvalidArgument("no surfaces");
    Domain d = surfaces.front().fit_domain();
    for (const auto& s : surfaces.subspan(1)) {
        const Domain& o = s.fit_domain();
        d.r_min = std::max(d.r_min, o.r_min);
        d.r_max = std::min(d.r_max, o.r_max);
        d.e_min = std::max(d.e_min, o.e_min);
        d.e_max = std::min(d.e_max, o.e_max);
    }
    if (!(d.r_min < d.r_max) || !(d.e_min < d.e_max))
        throw OutOfDomain("the models' fit domains do not overlap; give explicit axis bounds");
    return d;
}

/// Range of distortion the surfaces produce over their own fit domains:
/// vertex values for linear surfaces, a 33 x 33 sample of the box for polynomials.
inline std::pair<double, double> distortion_range(std::span<const Surface> surfaces) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : surfaces) {
        if (const auto* lin = s.linear()) {
            for (double v : lin->vertex_distortions()) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            continue;
        }
        const Domain& dom = s.fit_domain();
        constexpr int n = 33;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = (*s.poly())(dom.r_min + (dom.r_max - dom.r_min) * i / (n - 1),
                                             dom.e_min + (dom.e_max - dom.e_min) * j / (n - 1));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    return {lo, hi};
}

struct OcclusionEntry {
    std::string encoder;
    Config config;
    std::string occluding_encoder;
    double margin = 0.0;  ///< dB (RE) or log-rate (ED)
};

struct OcclusionReport {
    Plane plane = Plane::RE;
    std::vector<OcclusionEntry> entries;
};

struct EncoderModel {
    PointSet points;
    Surface surface;
};

struct OcclusionOptions {
    double margin_threshold = defaults::margin_threshold;
    std::optional<std::pair<double, double>> r_bracket;
    double inversion_tol = kDefaultInversionTolerance;
};

/// Whether a surface speaks for (r, e) when judging another encoder's
/// configuration: inside the hull for linear surfaces, inside the fit box for
/// polynomials.
inline bool covers(const Surface& s, double r, double e) {
    if (const auto* lin = s.linear()) return lin->in_hull(r, e);
    return s.fit_domain().contains(r, e);
}

/// Supporting configurations that another encoder's surface beats by more
/// than the threshold: higher PSNR at the same (r, e) on the RE plane, lower
/// rate at the same (e, d) on the ED plane. Each entry names the strongest
/// occluder. Entries come out in descending margin order.
inline OcclusionReport occluded_configs(std::span<const EncoderModel> models, Plane plane,
                                        const OcclusionOptions& options = {}) {
    if (!(options.margin_threshold >= 0.0)) throw InvalidArgument("margin threshold must be nonnegative");
    for (const auto& m : models)
        if (m.points.sequence != models.front().points.sequence)
            throw InvalidArgument("occlusion needs all encoders on one sequence; got '" + models.front().points.sequence +
                                  "' and '" + m.points.sequence + "'");

    OcclusionReport report{plane, {}};
    for (std::size_t x = 0; x < models.size(); ++x) {
        for (const auto& p : models[x].points.supporting()) {
            std::optional<OcclusionEntry> best;
            for (std::size_t y = 0; y < models.size(); ++y) {
                if (y == x || models[y].surface.encoder == models[x].surface.encoder) continue;
                const Surface& other = models[y].surface;
                std::optional<double> margin;
                if (plane == Plane::RE) {
                    if (covers(other, p.r, p.e)) margin = eval_surface(other, p.r, p.e) - p.d;
                } else {
                    const auto bracket = inversion_bracket(other, p.e, options.r_bracket);
                    if (bracket) {
                        try {
                            margin = p.r - invert_rate(other, p.e, p.d, bracket->first, bracket->second,
                                                       options.inversion_tol);
                        } catch (const NumericalError&) {
                        } catch (const OutOfDomain&) {
                        }
                    }
                }
                if (margin && *margin > options.margin_threshold && (!best || *margin > best->margin))
                    best = OcclusionEntry{models[x].points.encoder, p.config, other.encoder, *margin};
            }
            if (best) report.entries.push_back(*best);
        }
    }
    std::stable_sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
        if (a.margin != b.margin) return a.margin > b.margin;
        if (a.encoder != b.encoder) return a.encoder < b.encoder;
        return a.config < b.config;
    });
    return report;
}

inline void write_grid(std::ostream& out, const DominanceGrid& grid, char delim = ',') {
    out << "x_center" << delim << "y_center" << delim << "outcome" << delim << "winning_value\n";
    for (int iy = 0; iy < grid.y_axis.cells; ++iy)
        for (int ix = 0; ix < grid.x_axis.cells; ++ix) {
            const Cell& c = grid.at(ix, iy);
            out << text::format_double(grid.x_axis.center(ix), 12) << delim
                << text::format_double(grid.y_axis.center(iy), 12) << delim
                << text::quote_if_needed(grid.label(c), delim) << delim
                << (c.outcome == CellOutcome::out_of_domain ? std::string("-") : text::format_double(c.value, 12))
                << '\n';
        }
}

inline void write_occlusion_report(std::ostream& out, const OcclusionReport& report, char delim = ',') {
    out << "encoder" << delim << "preset" << delim << "quality" << delim << "occluding_encoder" << delim
        << (report.plane == Plane::RE ? "margin_db" : "margin_log_rate") << '\n';
    for (const auto& e : report.entries)
        out << text::quote_if_needed(e.encoder, delim) << delim << text::quote_if_needed(e.config.preset, delim)
            << delim << e.config.quality << delim << text::quote_if_needed(e.occluding_encoder, delim) << delim
            << text::format_double(e.margin, 12) << '\n';
}

}  // namespace red
