#pragma once

// JSON model files. Numbers are written in shortest round-trip form, so a
// loaded model evaluates bit-identically to the one that was saved.

#include <string>

#include <json.hpp>

#include "red/error.hpp"
#include "red/fitting.hpp"

namespace red {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json to_json(const Surface& s) {
    nlohmann::ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = to_string(s.method());
    j["encoder_id"] = s.encoder;
    j["sequence"] = s.sequence;
    if (const auto* lin = s.linear()) {
        auto verts = nlohmann::ordered_json::array();
        for (const auto& v : lin->triangulation().vertices()) verts.push_back({v.x, v.y});
        auto tris = nlohmann::ordered_json::array();
        for (const auto& t : lin->triangulation().triangles()) tris.push_back({t[0], t[1], t[2]});
        j["vertices"] = std::move(verts);
        j["triangles"] = std::move(tris);
        j["vertex_distortions"] = lin->vertex_distortions();
        j["extrapolation"] = lin->extrapolation() == Extrapolation::reject ? "reject" : "nearest_simplex";
    } else {
        j["coefficients"] = s.poly()->coefficients();
    }
    const Domain& d = s.fit_domain();
    j["fit_domain"] = {{"r_min", d.r_min}, {"r_max", d.r_max}, {"e_min", d.e_min}, {"e_max", d.e_max}};
    return j;
}

inline std::string serialize_surface(const Surface& s) { return to_json(s).dump(2) + "\n"; }

inline Surface surface_from_json(const nlohmann::json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ParseError("unsupported model format_version " + std::to_string(version));
        const auto kind = method_from_string(j.at("kind").get<std::string>());
        if (!kind) throw ParseError("unknown model kind '" + j.at("kind").get<std::string>() + "'");
        Surface s{j.at("encoder_id").get<std::string>(), j.at("sequence").get<std::string>(),
                  PolySurface(Basis::custom6, std::vector<double>(6, 0.0), {})};
        const auto& fd = j.at("fit_domain");
        const Domain domain{fd.at("r_min").get<double>(), fd.at("r_max").get<double>(), fd.at("e_min").get<double>(),
                            fd.at("e_max").get<double>()};
        if (*kind == Method::linear) {
            std::vector<numerics::Point2> verts;
            for (const auto& v : j.at("vertices")) {
                if (v.size() != 2) throw ParseError("vertex entries must be [r, e] pairs");
                verts.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            std::vector<numerics::Triangle> tris;
            for (const auto& t : j.at("triangles")) {
                if (t.size() != 3) throw ParseError("triangle entries must be index triples");
                tris.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
            }
            auto mode = Extrapolation::reject;
            if (j.contains("extrapolation") && j["extrapolation"].get<std::string>() == "nearest_simplex")
                mode = Extrapolation::nearest_simplex;
            s.model = LinearSurface(numerics::Triangulation::from_parts(std::move(verts), std::move(tris)),
                                    j.at("vertex_distortions").get<std::vector<double>>(), mode);
        } else {
            s.model = PolySurface(*kind == Method::poly_custom ? Basis::custom6 : Basis::mixed9,
                                  j.at("coefficients").get<std::vector<double>>(), domain);
        }
        return s;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("malformed model file: ") + ex.what());
    } catch (const InvalidArgument& ex) {
        throw ParseError(std::string("invalid model: ") + ex.what());
    }
}

inline Surface parse_surface(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("model file is not valid JSON: ") + ex.what());
    }
    return surface_from_json(j);
}

}  // namespace red
