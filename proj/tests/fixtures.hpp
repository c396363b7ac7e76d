#pragma once

// Hand-built surfaces and encoder models shared by the projection tests and
// the acceptance runner.

#include <string>
#include <vector>

#include "red/fitting.hpp"
#include "red/projection.hpp"
#include "synthetic.hpp"

namespace red::fixtures {

inline Surface poly(std::string encoder, Basis basis, std::vector<double> coefficients, Domain domain) {
    return Surface{std::move(encoder), "seq", PolySurface(basis, std::move(coefficients), domain)};
}

/// d = c0 + c1 r + c2 e as a mixed9 polynomial.
inline Surface plane(std::string encoder, double c0, double c1, double c2, Domain domain) {
    return poly(std::move(encoder), Basis::mixed9, {c0, c1, c2, 0, 0, 0, 0, 0, 0}, domain);
}

/// Supporting points on a rectangular lattice, d = offset + r.
inline PointSet lattice(std::string encoder, const std::vector<double>& rs, const std::vector<double>& es,
                        double offset) {
    PointSet ps{std::move(encoder), "seq", {}};
    for (std::size_t j = 0; j < es.size(); ++j)
        for (std::size_t i = 0; i < rs.size(); ++i) {
            RedPoint p;
            p.r = rs[i];
            p.e = es[j];
            p.d = offset + rs[i];
            // Slower presets spend more energy; lower CRF spends more rate.
            p.config = Config{j < synthetic::kPresets.size() ? synthetic::kPresets[j] : "p" + std::to_string(j),
                              static_cast<int>(33 - 5 * i)};
            ps.points.push_back(p);
        }
    return ps;
}

inline EncoderModel model_of(PointSet ps) {
    Surface s = fit(ps, Method::linear);
    return EncoderModel{std::move(ps), std::move(s)};
}

/// Three encoders on one sequence. The oldest ("x264") sits 1 dB below
/// "x265", whose hull only reaches x264's two highest-rate veryslow
/// configurations. "vvenc" is far better but shares no (r, e) with either.
/// Exactly x264 veryslow q23 and q18 are occluded on the RE plane, by 1 dB.
inline std::vector<EncoderModel> three_encoders() {
    return {
        model_of(lattice("x264", {6, 7, 8, 9}, {0, 1, 2, 3, 4}, 30.0)),
        model_of(lattice("x265", {7.5, 8.5, 9.5, 10.5}, {3.5, 4.5, 5.5, 6.5, 7.5}, 31.0)),
        model_of(lattice("vvenc", {1, 2, 3, 4}, {10, 11, 12, 13, 14}, 50.0)),
    };
}

}  // namespace red::fixtures
