#pragma once

// Measurement ingestion: delimited-text parsing, encoding-energy derivation,
// repeat-stability checking, and conversion to log-domain R-E-D point sets.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "red/defaults.hpp"
#include "red/error.hpp"
#include "red/text.hpp"

namespace red {

enum class Origin { supporting, non_supporting };

inline const char* to_string(Origin o) { return o == Origin::supporting ? "s" : "ns"; }

/// One raw encode observation.
struct MeasurementRecord {
    std::string sequence;
    std::string encoder;
    std::string preset;
    int quality = 0;  ///< CRF or QP
    double rate_kbps = 0.0;
    double energy_total_j = 0.0;
    std::optional<double> energy_idle_j;
    std::optional<double> idle_power_w;
    std::optional<double> duration_s;
    double psnr_db = 0.0;
    int repeat = 0;
    std::optional<Origin> origin;
    std::size_t source_line = 0;  ///< 1-based, header is line 1; 0 for synthesized records

    /// Idle energy from whichever form the record carries.
    double idle_energy() const {
        if (energy_idle_j) return *energy_idle_j;
        if (idle_power_w && duration_s) return *idle_power_w * *duration_s;
        throw InvalidArgument("record has neither idle energy nor idle power with duration");
    }
};

/// Column names for each record field. Empty optional names mean "not mapped".
struct Schema {
    char delimiter = ',';
    std::string sequence = "sequence";
    std::string encoder = "encoder";
    std::string preset = "preset";
    std::string quality = "quality";
    std::string rate_kbps = "rate_kbps";
    std::string energy_total_j = "energy_total_j";
    std::string energy_idle_j = "energy_idle_j";
    std::string idle_power_w = "idle_power_w";
    std::string duration_s = "duration_s";
    std::string psnr_db = "psnr_db";
    std::string repeat = "repeat";
    std::string origin = "origin";
};

/// Encoding energy: total energy minus idle energy over the same duration.
inline double encoding_energy(double energy_total_j, double energy_idle_j) {
    if (!std::isfinite(energy_total_j) || !std::isfinite(energy_idle_j))
        throw InvalidArgument("energies must be finite");
    if (energy_idle_j < 0.0) throw InvalidArgument("idle energy must be nonnegative");
    if (energy_total_j < energy_idle_j)
        throw InvalidArgument("inconsistent measurement: total energy " + text::format_double(energy_total_j, 6) +
                              " J is below idle energy " + text::format_double(energy_idle_j, 6) + " J");
    return energy_total_j - energy_idle_j;
}

namespace detail {

inline void check_record(const MeasurementRecord& r, std::size_t line) {
    auto fail = [&](const std::string& col, const std::string& msg) { throw ParseError(msg, line, col); };
    if (!(r.rate_kbps > 0.0) || !std::isfinite(r.rate_kbps)) fail("rate_kbps", "rate must be positive and finite");
    if (!std::isfinite(r.psnr_db) || !(r.psnr_db > 0.0))
        fail("psnr_db", "PSNR must be finite and positive (lossless encodes are not supported)");
    if (r.duration_s && !(*r.duration_s > 0.0)) fail("duration_s", "duration must be positive");
    if (r.idle_power_w && !(*r.idle_power_w >= 0.0)) fail("idle_power_w", "idle power must be nonnegative");
    if (!(r.energy_total_j >= 0.0) || !std::isfinite(r.energy_total_j))
        fail("energy_total_j", "total energy must be nonnegative and finite");
    const double idle = r.idle_energy();
    if (!(idle >= 0.0)) fail("energy_idle_j", "idle energy must be nonnegative");
    if (r.energy_total_j < idle) fail("energy_total_j", "total energy is below idle energy");
    if (r.repeat < 0) fail("repeat", "repeat index must be nonnegative");
}

}  // namespace detail

/// Parses delimited text with a header row into validated records.
/// Idle energy must be given in exactly one form: an idle-energy column, or
/// idle-power plus duration columns.
inline std::vector<MeasurementRecord> parse_measurements(std::istream& in, const Schema& schema = {}) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!text::trim(line).empty()) {
            header = text::split_line(line, schema.delimiter);
            break;
        }
    }
    if (header.empty()) throw ParseError("input is empty; a header row is required");
    if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
        header[0].erase(0, 3);

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        const auto it = index.find(name);
        if (it == index.end()) return std::nullopt;
        return it->second;
    };
    auto required = [&](const std::string& name) {
        const auto c = column(name);
        if (!c) throw ParseError("missing required column '" + name + "'");
        return *c;
    };

    const std::size_t c_seq = required(schema.sequence);
    const std::size_t c_enc = required(schema.encoder);
    const std::size_t c_preset = required(schema.preset);
    const std::size_t c_quality = required(schema.quality);
    const std::size_t c_rate = required(schema.rate_kbps);
    const std::size_t c_total = required(schema.energy_total_j);
    const std::size_t c_psnr = required(schema.psnr_db);
    const auto c_idle = column(schema.energy_idle_j);
    const auto c_power = column(schema.idle_power_w);
    const auto c_duration = column(schema.duration_s);
    const auto c_repeat = column(schema.repeat);
    const auto c_origin = column(schema.origin);
    if (c_idle && c_power)
        throw ParseError("both '" + schema.energy_idle_j + "' and '" + schema.idle_power_w +
                         "' present; give idle energy in exactly one form");
    if (!c_idle && !c_power)
        throw ParseError("missing idle energy: need column '" + schema.energy_idle_j + "' or '" + schema.idle_power_w +
                         "' with '" + schema.duration_s + "'");
    if (c_power && !c_duration)
        throw ParseError("column '" + schema.idle_power_w + "' requires column '" + schema.duration_s + "'");

    std::vector<MeasurementRecord> records;
    std::set<std::tuple<std::string, std::string, std::string, int, int>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split_line(line, schema.delimiter);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             line_no);
        auto num = [&](std::size_t c) {
            const auto v = text::parse_double(cells[c]);
            if (!v) throw ParseError("cannot parse number '" + cells[c] + "'", line_no, header[c]);
            return *v;
        };
        auto integer = [&](std::size_t c) {
            const auto v = text::parse_int(cells[c]);
            if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
                throw ParseError("cannot parse integer '" + cells[c] + "'", line_no, header[c]);
            return static_cast<int>(*v);
        };
        auto label = [&](std::size_t c) {
            if (cells[c].empty()) throw ParseError("empty label", line_no, header[c]);
            return cells[c];
        };

        MeasurementRecord r;
        r.sequence = label(c_seq);
        r.encoder = label(c_enc);
        r.preset = label(c_preset);
        r.quality = integer(c_quality);
        r.rate_kbps = num(c_rate);
        r.energy_total_j = num(c_total);
        if (c_idle) r.energy_idle_j = num(*c_idle);
        if (c_power) r.idle_power_w = num(*c_power);
        if (c_duration) r.duration_s = num(*c_duration);
        r.psnr_db = num(c_psnr);
        r.repeat = c_repeat ? integer(*c_repeat) : 0;
        if (c_origin) {
            const std::string o = cells[*c_origin];
            if (o == "s") r.origin = Origin::supporting;
            else if (o == "ns") r.origin = Origin::non_supporting;
            else throw ParseError("origin must be 's' or 'ns', got '" + o + "'", line_no, header[*c_origin]);
        }
        r.source_line = line_no;
        detail::check_record(r, line_no);
        if (!seen.emplace(r.sequence, r.encoder, r.preset, r.quality, r.repeat).second)
            throw ParseError("duplicate (sequence, encoder, preset, quality, repeat) entry", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

/// Writes records back in the schema's layout. Optional columns are emitted
/// when any record carries them; numbers use 17 significant digits.
inline void write_measurements(std::ostream& out, std::span<const MeasurementRecord> records, const Schema& schema = {}) {
    const auto any = [&](auto member) {
        return std::any_of(records.begin(), records.end(), [&](const auto& r) { return (r.*member).has_value(); });
    };
    const bool has_idle = any(&MeasurementRecord::energy_idle_j);
    const bool has_power = any(&MeasurementRecord::idle_power_w);
    const bool has_duration = any(&MeasurementRecord::duration_s);
    const bool has_origin = any(&MeasurementRecord::origin);
    const char d = schema.delimiter;

    std::vector<std::string> cols{schema.sequence, schema.encoder, schema.preset, schema.quality,
                                  schema.rate_kbps, schema.energy_total_j};
    if (has_idle) cols.push_back(schema.energy_idle_j);
    if (has_power) cols.push_back(schema.idle_power_w);
    if (has_duration) cols.push_back(schema.duration_s);
    cols.push_back(schema.psnr_db);
    cols.push_back(schema.repeat);
    if (has_origin) cols.push_back(schema.origin);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? std::string(1, d) : "") << cols[i];
    out << '\n';

    auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
    for (const auto& r : records) {
        out << text::quote_if_needed(r.sequence, d) << d << text::quote_if_needed(r.encoder, d) << d
            << text::quote_if_needed(r.preset, d) << d << r.quality << d << text::format_double(r.rate_kbps) << d
            << text::format_double(r.energy_total_j);
        if (has_idle) out << d << opt(r.energy_idle_j);
        if (has_power) out << d << opt(r.idle_power_w);
        if (has_duration) out << d << opt(r.duration_s);
        out << d << text::format_double(r.psnr_db) << d << r.repeat;
        if (has_origin) out << d << (r.origin ? to_string(*r.origin) : "");
        out << '\n';
    }
}

inline constexpr double kDefaultAlpha = defaults::alpha;
inline constexpr double kDefaultBeta = defaults::beta;

struct StabilityVerdict {
    std::size_t sample_count = 0;
    double mean_energy = 0.0;
    double ci_half_width = 0.0;
    double relative_half_width = 0.0;
    double alpha = kDefaultAlpha;
    double beta = kDefaultBeta;
    bool passed = false;
};

/// Two-sided (1 - alpha) Student-t confidence interval of the mean; passes
/// when its half-width relative to the mean is at most beta.
inline StabilityVerdict validate_stability(std::span<const double> samples, double alpha = kDefaultAlpha,
                                           double beta = kDefaultBeta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
    if (samples.size() < 2) throw InvalidArgument("stability check needs at least 2 samples");
    for (double s : samples)
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("stability samples must be positive and finite");

    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    const boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(dist, 1.0 - alpha / 2.0);

    StabilityVerdict v;
    v.sample_count = samples.size();
    v.mean_energy = mean;
    v.ci_half_width = t * sd / std::sqrt(n);
    v.relative_half_width = v.ci_half_width / mean;
    v.alpha = alpha;
    v.beta = beta;
    v.passed = v.relative_half_width <= beta;
    return v;
}

struct Config {
    std::string preset;
    int quality = 0;

    friend auto operator<=>(const Config&, const Config&) = default;
};

/// One (r, e, d) triplet: natural-log rate, natural-log energy, PSNR.
struct RedPoint {
    double r = 0.0;
    double e = 0.0;
    double d = 0.0;
    Origin origin = Origin::supporting;
    Config config;
};

struct PointSet {
    std::string encoder;
    std::string sequence;
    std::vector<RedPoint> points;

    std::vector<RedPoint> of(Origin o) const {
        std::vector<RedPoint> out;
        for (const auto& p : points)
            if (p.origin == o) out.push_back(p);
        return out;
    }
    std::vector<RedPoint> supporting() const { return of(Origin::supporting); }
    std::vector<RedPoint> non_supporting() const { return of(Origin::non_supporting); }
};

/// How to tag configurations as supporting or non-supporting.
struct OriginRule {
    enum class Mode {
        column,          ///< from the record's origin cell; untagged records are supporting
        grid,            ///< supporting iff preset and quality are in the configured grid
        all_supporting,
    };
    Mode mode = Mode::column;
    std::set<std::string> presets;
    std::set<int> qualities;

    Origin classify(const MeasurementRecord& r) const {
        switch (mode) {
            case Mode::column:
                return r.origin.value_or(Origin::supporting);
            case Mode::grid:
                return presets.contains(r.preset) && qualities.contains(r.quality) ? Origin::supporting
                                                                                   : Origin::non_supporting;
            case Mode::all_supporting:
                break;
        }
        return Origin::supporting;
    }
};

/// Repeats of one (sequence, encoder, preset, quality) configuration.
struct ConfigurationSummary {
    std::string sequence;
    std::string encoder;
    Config config;
    Origin origin = Origin::supporting;
    double rate_kbps = 0.0;   ///< from the lowest repeat index
    double psnr_db = 0.0;     ///< from the lowest repeat index
    std::vector<double> encoding_energies_j;  ///< per repeat, ascending repeat index
    double mean_encoding_energy_j = 0.0;
};

/// Groups records by configuration in first-appearance order and derives
/// encoding energy per repeat.
inline std::vector<ConfigurationSummary> summarize_configurations(std::span<const MeasurementRecord> records,
                                                                  const OriginRule& rule = {}) {
    using Key = std::tuple<std::string, std::string, std::string, int>;
    std::map<Key, std::size_t> slot;
    std::vector<std::vector<const MeasurementRecord*>> groups;
    for (const auto& r : records) {
        const Key key{r.sequence, r.encoder, r.preset, r.quality};
        auto [it, inserted] = slot.emplace(key, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(&r);
    }

    std::vector<ConfigurationSummary> out;
    out.reserve(groups.size());
    for (auto& g : groups) {
        std::stable_sort(g.begin(), g.end(), [](const auto* a, const auto* b) { return a->repeat < b->repeat; });
        const auto& first = *g.front();
        ConfigurationSummary s;
        s.sequence = first.sequence;
        s.encoder = first.encoder;
        s.config = Config{first.preset, first.quality};
        s.origin = rule.classify(first);
        s.rate_kbps = first.rate_kbps;
        s.psnr_db = first.psnr_db;
        double sum = 0.0;
        for (const auto* r : g) {
            const double e = encoding_energy(r->energy_total_j, r->idle_energy());
            s.encoding_energies_j.push_back(e);
            sum += e;
        }
        s.mean_encoding_energy_j = sum / static_cast<double>(g.size());
        out.push_back(std::move(s));
    }
    return out;
}

/// Groups by (sequence, encoder), averages encoding energy over repeats and
/// maps each configuration to (ln rate, ln energy, PSNR).
inline std::vector<PointSet> to_red_points(std::span<const MeasurementRecord> records, const OriginRule& rule = {}) {
    if (records.empty()) throw InvalidArgument("no measurement records");
    const auto summaries = summarize_configurations(records, rule);

    std::map<std::pair<std::string, std::string>, std::size_t> slot;
    std::vector<PointSet> sets;
    for (const auto& s : summaries) {
        if (!(s.mean_encoding_energy_j > 0.0))
            throw InvalidArgument("derived encoding energy is not positive for " + s.encoder + "/" + s.sequence + " " +
                                  s.config.preset + " q" + std::to_string(s.config.quality) +
                                  "; its logarithm is undefined");
        auto [it, inserted] = slot.emplace(std::pair{s.sequence, s.encoder}, sets.size());
        if (inserted) sets.push_back(PointSet{s.encoder, s.sequence, {}});
        sets[it->second].points.push_back(
            RedPoint{std::log(s.rate_kbps), std::log(s.mean_encoding_energy_j), s.psnr_db, s.origin, s.config});
    }

    for (const auto& ps : sets) {
        std::map<std::pair<double, double>, const RedPoint*> at;
        for (const auto& p : ps.points) {
            const auto [it, inserted] = at.emplace(std::pair{p.r, p.e}, &p);
            if (!inserted)
                throw InvalidArgument("duplicate (r, e) in " + ps.encoder + "/" + ps.sequence + ": configurations " +
                                      it->second->config.preset + " q" + std::to_string(it->second->config.quality) +
                                      " and " + p.config.preset + " q" + std::to_string(p.config.quality));
        }
    }
    return sets;
}

}  // namespace red
